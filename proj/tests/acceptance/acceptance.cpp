// Acceptance checks. Run with no arguments for all criteria, or with a list
// of criterion numbers. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "gradcheck.hpp"
#include "lfp/experiments.hpp"

using namespace lfp;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("lfp_acceptance_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

// ---------------------------------------------------------------- criteria

FlowVerifyReport flow_suite(double& seconds) {
  const auto t0 = Clock::now();
  FlowVerifyReport r = run_flow_verify(FlowVerifyConfig{}, {});
  seconds = seconds_since(t0);
  return r;
}

Verdict criterion1() {
  double secs = 0.0;
  const FlowVerifyReport r = flow_suite(secs);
  double worst = 0.0, worst_matrix = 0.0;
  std::size_t random_instances = 0;
  bool shapes_ok = true;
  for (const auto& row : r.instances) {
    worst = std::max({worst, row.flow_vs_ridge, row.flow_vs_closed, row.ridge_vs_closed});
    if (row.samples > 0) ++random_instances;
    shapes_ok = shapes_ok && (row.dim == 1 || row.dim == 2) && row.samples <= 6 &&
                row.half_width <= 16 && row.error.empty();
  }
  std::size_t full_rank = 0;
  for (const auto& m : r.matrix) {
    if (m.kind == "random") {
      ++full_rank;
      worst_matrix = std::max(worst_matrix, m.flow_vs_closed);
    }
  }
  const bool pass = r.equivalence_pass && r.matrix_pass && shapes_ok &&
                    random_instances >= 20 && full_rank >= 1 && secs < 120.0;
  return {pass, std::to_string(r.instances.size()) + " instances, max pairwise distance " +
                    fmt("%.2e", worst) + " (< 1e-5), " + std::to_string(full_rank) +
                    " random 5x20 matrix tests, max error " + fmt("%.2e", worst_matrix) +
                    " (< 1e-8), rank-deficient case flagged as precondition violation, " +
                    fmt("%.1f", secs) + " s (< 120 s)"};
}

Verdict criterion2() {
  double secs = 0.0;
  const FlowVerifyReport r = flow_suite(secs);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& row : r.instances) margin = std::min(margin, row.min_norm_margin);
  return {r.optimality_pass && FlowVerifyConfig{}.perturbations >= 100,
          std::to_string(r.instances.size()) + " instances x " +
              std::to_string(FlowVerifyConfig{}.perturbations) +
              " null-space perturbations, smallest norm increase " + fmt("%.3e", margin) +
              " (>= -1e-10)"};
}

std::string describe_rows(const CompareReport& r) {
  std::ostringstream s;
  for (const auto& row : r.rows) {
    s << "N=" << row.width << ": L2 " << fmt("%.4g", row.mean_l2) << " (" << row.cells << " ok, "
      << row.failed << " failed); ";
  }
  return s.str();
}

Verdict criterion3() {
  const auto t0 = Clock::now();
  const CompareConfig fig1 = compare_preset("fig1_smooth");
  const CompareReport a = run_compare(fig1, {scratch("c3_fig1"), 1});
  const double t_fig1 = seconds_since(t0);
  const auto t1 = Clock::now();
  const CompareConfig xor_cfg = compare_preset("fig2_xor");
  const CompareReport b = run_compare(xor_cfg, {scratch("c3_xor"), 1});
  const double t_xor = seconds_since(t1);
  const bool widths_ok = fig1.widths == std::vector<std::size_t>{200, 1000, 5000} &&
                         fig1.seeds.size() == 5 && fig1.data.samples == 12 &&
                         xor_cfg.widths == std::vector<std::size_t>{200, 1000};
  return {widths_ok && a.l2_strictly_decreasing && b.l2_strictly_decreasing,
          "1-d preset: " + describe_rows(a) + "XOR preset: " + describe_rows(b) + "runtime " +
              fmt("%.0f", t_fig1) + " s + " + fmt("%.0f", t_xor) + " s"};
}

Verdict criterion4() {
  DataSpec spec = compare_preset("fig1_smooth").data;
  const Dataset data = generate_data(spec);
  bool pass = true;
  std::ostringstream s;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const SmoothnessReport r = smoothness_regimes(data, 1000, seed);
    pass = pass && r.rough_fraction > r.smooth_fraction;
    s << "seed " << seed << ": rough " << fmt("%.3e", r.rough_fraction) << " (B/A "
      << fmt("%.3g", r.rough.b / r.rough.a) << ") vs smooth " << fmt("%.3e", r.smooth_fraction)
      << " (B/A " << fmt("%.3g", r.smooth.b / r.smooth.a) << "); ";
  }
  return {pass, "energy fraction above |xi| > 5 on the same 12 samples: " + s.str()};
}

Verdict criterion5() {
  const auto t0 = Clock::now();
  const SweepConfig cfg = sweep_preset("fig3_sweep");
  const SweepResult r = run_sweep(cfg, {scratch("c5"), 1});
  const double secs = seconds_since(t0);
  std::size_t failed = 0;
  std::ostringstream s;
  for (const auto& row : r.rows) {
    if (!row.error.empty()) ++failed;
    s << "v=" << row.v << " fp " << fmt("%.3g", row.fp_norm) << " test "
      << fmt("%.3g", row.test_loss) << " (" << row.stop_reason << "); ";
  }
  const bool shape_ok = cfg.frequencies.size() == 10 && cfg.train_samples == 20 &&
                        cfg.test_samples == 500;
  return {shape_ok && failed == 0 && r.fp_norm_increasing && r.spearman_fp_vs_test > 0.8,
          "Spearman " + fmt("%.3f", r.spearman_fp_vs_test) + " (> 0.8), FP-norm increasing: " +
              (r.fp_norm_increasing ? "yes" : "no") + ", " + std::to_string(failed) +
              " failed rows, " + fmt("%.0f", secs) + " s; " + s.str()};
}

Verdict criterion6() {
  BoundValidityConfig cfg;
  const BoundValidityResult r = bound_validity(cfg);
  double worst_ratio = 0.0;
  for (const auto& row : r.rows) worst_ratio = std::max(worst_ratio, row.risk / row.bound_ii);
  return {cfg.tasks >= 20 && r.fraction_holding >= 0.9,
          std::to_string(r.rows.size()) + " sine tasks (v <= 5, M = 20, delta = 0.1): risk <= bound in " +
              fmt("%.0f", 100.0 * r.fraction_holding) + "% (>= 90%), max risk/bound " +
              fmt("%.3e", worst_ratio)};
}

Verdict criterion7() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> m_dist(2, 30);
  std::uniform_real_distribution<double> coef(0.1, 3.0), unit(0.0, 1.0), q_dist(0.5, 5.0);
  bool pass = true;
  double worst_z = -std::numeric_limits<double>::infinity();
  for (int cfg = 0; cfg < 10; ++cfg) {
    const int d = 1 + cfg % 2;
    const auto lattice = build_lattice(d, 1.0, d == 1 ? 32 : 8);
    const auto c = make_coefficients(coef(rng), coef(rng), d);
    const int m = m_dist(rng);
    Matrix x(m, d);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = unit(rng);
    const double q = q_dist(rng);
    const auto est = empirical_rademacher_mc(x, *lattice, c, q, 500, 100 + cfg);
    const double bound = rademacher_bound(q, gamma_l2_norm(*lattice, c), static_cast<std::size_t>(m));
    const double z = (est.mean - bound) / std::max(est.standard_error, 1e-300);
    worst_z = std::max(worst_z, z);
    pass = pass && est.trials == 500 && est.mean <= bound + 3.0 * est.standard_error;
  }
  double worst_equal = 0.0;
  for (int cfg = 0; cfg < 5; ++cfg) {
    const auto lattice = build_lattice(1, 1.0, 32);
    const auto c = make_coefficients(coef(rng), coef(rng), 1);
    Matrix x(1, 1);
    x << unit(rng);
    const double q = q_dist(rng);
    const auto est = empirical_rademacher_mc(x, *lattice, c, q, 500, cfg);
    const double bound = rademacher_bound(q, gamma_l2_norm(*lattice, c), 1);
    worst_equal = std::max(worst_equal, std::abs(est.mean - bound) / bound);
  }
  pass = pass && worst_equal < 1e-12;
  return {pass, "10 configurations, 500 sign draws each: largest (estimate - bound) / SE = " +
                    fmt("%.2f", worst_z) + " (<= 3); M = 1 relative gap to the bound " +
                    fmt("%.1e", worst_equal)};
}

Verdict criterion8() {
  double worst = 0.0;
  std::size_t coords = 0;
  for (NetForm form : {NetForm::general, NetForm::one_d}) {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto out = gradcheck::check_random(form, 1000 * (form == NetForm::one_d) + s);
      worst = std::max(worst, out.max_relative_error);
      coords += out.coordinates;
    }
  }
  return {worst < 1e-5, "100 configurations (50 per form), " + std::to_string(coords) +
                            " coordinates, max relative error " + fmt("%.2e", worst) + " (< 1e-5)"};
}

Verdict criterion9() {
  double worst_out = 0.0, worst_coef = 0.0;
  const std::vector<std::string> presets{"fig1_smooth", "fig1_rough", "fig2_xor", "fig3_sweep"};
  for (std::uint64_t s = 0; s < 10; ++s) {
    InitSpec spec = preset_init(presets[s % presets.size()]);
    spec.seed = s;
    const bool two_d = s % 3 == 2;
    const NetForm form = two_d ? NetForm::general : (s % 2 ? NetForm::one_d : NetForm::general);
    const TwoLayerNet net = init_net(two_d ? 2 : 1, 50 + 37 * s, spec, form);
    const TwoLayerNet asi = apply_asi(net);
    Matrix grid;
    if (two_d) {
      grid.resize(1024, 2);
      for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
          grid(i * 32 + j, 0) = -2.0 + 4.0 * j / 31.0;
          grid(i * 32 + j, 1) = -2.0 + 4.0 * i / 31.0;
        }
    } else {
      grid.resize(1000, 1);
      for (int i = 0; i < 1000; ++i) grid(i, 0) = -2.0 + 4.0 * i / 999.0;
    }
    worst_out = std::max(worst_out, forward(asi, grid).cwiseAbs().maxCoeff());
    const auto c0 = coefficients_from_init(net);
    const auto c1 = coefficients_from_init(asi);
    worst_coef = std::max({worst_coef, std::abs(c0.a - c1.a) / c0.a, std::abs(c0.b - c1.b) / c0.b});
  }
  return {worst_out < 1e-12 && worst_coef <= 1e-14,
          "10 nets: max |h| on the grid " + fmt("%.1e", worst_out) + " (< 1e-12), max relative (A, B) change " +
              fmt("%.1e", worst_coef) + " (<= 1e-14)"};
}

// Runs a command from a config, then again from the manifest it wrote, and
// compares every CSV output byte for byte.
bool replay_matches(const std::string& command, const Json& config, const std::string& tag,
                    std::size_t workers, std::string& note) {
  const auto first = scratch("c10_" + tag + "_a");
  const auto second = scratch("c10_" + tag + "_b");
  run_command(command, config, {first, workers});
  const Json manifest = Json::parse(read_text(first / "manifest.json"));
  run_command(command, manifest, {second, workers});
  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(first)) {
    if (entry.path().extension() != ".csv") continue;
    ++compared;
    const auto other = second / entry.path().filename();
    if (!std::filesystem::exists(other) || read_text(entry.path()) != read_text(other)) {
      note += tag + ":" + entry.path().filename().string() + " differs; ";
      return false;
    }
  }
  note += tag + " (" + std::to_string(compared) + " CSV), ";
  return compared > 0;
}

Verdict criterion10() {
  std::string note;
  bool pass = true;
  pass &= replay_matches("gen-data", Json::parse(R"({"kind": "random_1d", "seed": 5})"), "gen", 1, note);
  pass &= replay_matches("flow-verify", Json::parse(R"({"seed": 3})"), "flow", 1, note);
  pass &= replay_matches(
      "compare",
      Json::parse(R"({"preset": "fig1_smooth", "widths": [100, 200], "seeds": [0, 1, 2],
                      "train": {"max_steps": 3000}, "lattice": {"half_width": 500}})"),
      "compare", 3, note);
  pass &= replay_matches(
      "compare",
      Json::parse(R"({"preset": "fig2_xor", "widths": [50], "seeds": [0, 1],
                      "train": {"max_steps": 500}, "lattice": {"half_width": 30}, "test_points": 20})"),
      "xor", 2, note);
  pass &= replay_matches(
      "sweep",
      Json::parse(R"({"frequencies": [1, 3], "width": 200, "test_samples": 100,
                      "sup_resolution": 500, "train": {"max_steps": 2000, "learning_rate": 0.001}})"),
      "sweep", 1, note);
  pass &= replay_matches("solve", Json::parse(R"({"seed": 4, "lattice": {"half_width": 300}})"), "solve", 1, note);
  pass &= replay_matches("train", Json::parse(R"({"seed": 4, "width": 100, "train": {"max_steps": 500}})"),
                         "train", 1, note);
  return {pass, "identical CSV bytes when replayed from the manifest: " + note};
}

const std::map<int, std::pair<const char*, std::function<Verdict()>>> criteria{
    {1, {"equivalence suite", criterion1}},
    {2, {"min-norm optimality", criterion2}},
    {3, {"NN vs LFP discrepancy decreases with width", criterion3}},
    {4, {"smoothness regimes", criterion4}},
    {5, {"FP-norm sweep", criterion5}},
    {6, {"bound validity", criterion6}},
    {7, {"Rademacher consistency", criterion7}},
    {8, {"gradient correctness", criterion8}},
    {9, {"ASI exactness", criterion9}},
    {10, {"determinism", criterion10}},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [n, _] : criteria) selected.insert(n);
  }
  int failures = 0;
  for (int n : selected) {
    const auto it = criteria.find(n);
    if (it == criteria.end()) {
      std::printf("FAIL criterion %d: no such criterion\n", n);
      ++failures;
      continue;
    }
    Verdict v;
    try {
      v = it->second.second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", n, it->second.first,
                v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
