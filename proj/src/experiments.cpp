#include "lfp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "lfp/plot.hpp"
#include "parallel.hpp"

#ifndef LFP_VERSION_STRING
#define LFP_VERSION_STRING "0.0.0+unknown"
#endif

namespace lfp {

const char* version_string() { return LFP_VERSION_STRING; }

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

// ------------------------------------------------------------ json helpers

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  require(j.is_object(), ErrorCode::config, what + " must be a JSON object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    require(known, ErrorCode::config, "unknown key '" + item.key() + "' in " + what);
  }
}

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& what) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::config, "field '" + std::string(key) + "' in " + what + " has the wrong type");
  }
}

Json to_json(const Distribution& d) {
  switch (d.kind) {
    case Distribution::Kind::uniform:
      return Json{{"kind", "uniform"}, {"lo", d.lo}, {"hi", d.hi}};
    case Distribution::Kind::normal:
      return Json{{"kind", "normal"}, {"variance", d.variance}};
    case Distribution::Kind::xavier_normal:
      return Json{{"kind", "xavier_normal"}};
  }
  return {};
}

Distribution distribution_from_json(const Json& j, const std::string& what) {
  check_keys(j, {"kind", "lo", "hi", "variance"}, what);
  std::string kind;
  read(j, "kind", kind, what);
  if (kind == "uniform") {
    double lo = 0.0, hi = 0.0;
    read(j, "lo", lo, what);
    read(j, "hi", hi, what);
    return Distribution::uniform(lo, hi);
  }
  if (kind == "normal") {
    double variance = 1.0;
    read(j, "variance", variance, what);
    return Distribution::normal(variance);
  }
  if (kind == "xavier_normal") return Distribution::xavier_normal();
  fail(ErrorCode::invalid_spec, what + ": kind must be uniform, normal or xavier_normal");
}

NetForm form_from_string(const std::string& s) {
  if (s == "general") return NetForm::general;
  if (s == "one_d") return NetForm::one_d;
  fail(ErrorCode::config, "network form must be general or one_d, got '" + s + "'");
}

Json lattice_json(const LatticeSpec& l) {
  return Json{{"period", l.period}, {"half_width", l.half_width}};
}

LatticeSpec lattice_spec_from_json(const Json& j, LatticeSpec base, const std::string& what) {
  check_keys(j, {"period", "half_width"}, what);
  read(j, "period", base.period, what);
  read(j, "half_width", base.half_width, what);
  return base;
}

// A manifest holds {"command", "config"}; anything else is a bare config.
Json unwrap_manifest(const Json& j, const std::string& command) {
  if (j.is_object() && j.contains("command") && j.contains("config")) {
    const std::string stored = j.at("command").get<std::string>();
    require(stored == command, ErrorCode::config,
            "manifest was written by '" + stored + "', not '" + command + "'");
    return j.at("config");
  }
  return j;
}

// Seconds since `start`, for report timing only.
double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

// d = 1: n points; d = 2: n x n points, row index = y, column index = x.
Matrix test_grid(std::size_t dim, double lo, double hi, std::size_t n) {
  const auto axis = linspace(lo, hi, n);
  if (dim == 1) {
    Matrix pts(static_cast<Eigen::Index>(n), 1);
    for (std::size_t i = 0; i < n; ++i) pts(static_cast<Eigen::Index>(i), 0) = axis[i];
    return pts;
  }
  require(dim == 2, ErrorCode::config, "test grids are available for d = 1 and d = 2");
  Matrix pts(static_cast<Eigen::Index>(n * n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto row = static_cast<Eigen::Index>(i * n + j);
      pts(row, 0) = axis[j];
      pts(row, 1) = axis[i];
    }
  }
  return pts;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::string file_hash(const std::filesystem::path& path) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(read_text(path))));
  return buf;
}

class OutputSet {
 public:
  explicit OutputSet(const RunContext& ctx) : dir_(ctx.out_dir) {}
  bool enabled() const { return !dir_.empty(); }
  void write(const std::string& name, const std::string& text) {
    if (!enabled()) return;
    write_text(dir_ / name, text);
    names_.push_back(name);
  }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

void finish_run(OutputSet& out, const std::string& command, const Json& config,
                const RunContext& ctx, const std::vector<std::string>& dataset_hashes,
                const Json& report) {
  if (!out.enabled()) return;
  const Json manifest = make_manifest(command, config, ctx, out.names(), dataset_hashes);
  write_text(ctx.out_dir / "manifest.json", manifest.dump(2) + "\n");
  write_text(ctx.out_dir / "report.json", report.dump(2) + "\n");
}

}  // namespace

// ---------------------------------------------------------------- datasets

Json to_json(const DataSpec& spec) {
  Json j{{"kind", spec.kind}, {"samples", spec.samples}, {"seed", spec.seed},
         {"a", spec.a},       {"v", spec.v},             {"y", spec.y}};
  if (!spec.path.empty()) j["path"] = spec.path;
  return j;
}

DataSpec data_spec_from_json(const Json& j, DataSpec base) {
  const std::string what = "data spec";
  check_keys(j, {"kind", "samples", "seed", "a", "v", "y", "path"}, what);
  read(j, "kind", base.kind, what);
  read(j, "samples", base.samples, what);
  read(j, "seed", base.seed, what);
  read(j, "a", base.a, what);
  read(j, "v", base.v, what);
  read(j, "y", base.y, what);
  read(j, "path", base.path, what);
  return base;
}

Dataset generate_data(const DataSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  if (spec.kind == "csv") {
    require(!spec.path.empty(), ErrorCode::config, "csv data needs a path");
    return read_dataset_csv(spec.path);
  }
  if (spec.kind == "random_1d") {
    require(spec.samples >= 1, ErrorCode::config, "random_1d needs samples >= 1");
    require(spec.y.empty() || spec.y.size() == spec.samples, ErrorCode::config,
            "explicit y list must have one value per sample");
    const auto m = static_cast<Eigen::Index>(spec.samples);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> xs(spec.samples);
    for (auto& x : xs) x = unif(rng);
    std::sort(xs.begin(), xs.end());
    std::normal_distribution<double> normal(0.0, 1.0);
    double ca[3], cb[3];
    for (int k = 0; k < 3; ++k) {
      ca[k] = normal(rng);
      cb[k] = normal(rng);
    }
    Matrix x(m, 1);
    Vector y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      x(i, 0) = xs[static_cast<std::size_t>(i)];
      if (!spec.y.empty()) {
        y(i) = spec.y[static_cast<std::size_t>(i)];
        continue;
      }
      double v = 0.0;
      for (int k = 1; k <= 3; ++k) {
        const double t = 0.5 * two_pi * k * x(i, 0);
        v += (ca[k - 1] * std::cos(t) + cb[k - 1] * std::sin(t)) / k;
      }
      y(i) = v;
    }
    return Dataset(std::move(x), std::move(y));
  }
  if (spec.kind == "xor_2d") {
    require(spec.a > 0.0 && std::isfinite(spec.a), ErrorCode::config, "xor_2d needs a > 0");
    Matrix x(4, 2);
    x << -spec.a, -spec.a, -spec.a, spec.a, spec.a, -spec.a, spec.a, spec.a;
    Vector y(4);
    y << 1.0, -1.0, -1.0, 1.0;
    return Dataset(std::move(x), std::move(y));
  }
  if (spec.kind == "asym_2d") {
    require(spec.samples >= 1, ErrorCode::config, "asym_2d needs samples >= 1");
    const auto m = static_cast<Eigen::Index>(spec.samples);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Matrix x(m, 2);
    Vector y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      x(i, 0) = unif(rng);
      x(i, 1) = unif(rng);
      y(i) = unif(rng);
    }
    return Dataset(std::move(x), std::move(y));
  }
  if (spec.kind == "sine") {
    require(spec.samples >= 1, ErrorCode::config, "sine needs samples >= 1");
    require(std::isfinite(spec.v), ErrorCode::config, "sine frequency must be finite");
    const auto m = static_cast<Eigen::Index>(spec.samples);
    Matrix x(m, 1);
    Vector y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      x(i, 0) = static_cast<double>(i) / static_cast<double>(m);
      y(i) = std::sin(two_pi * spec.v * x(i, 0));
    }
    return Dataset(std::move(x), std::move(y));
  }
  fail(ErrorCode::config, "unknown data kind '" + spec.kind +
                              "' (expected random_1d, xor_2d, asym_2d, sine or csv)");
}

Json data_metadata(const DataSpec& spec, const Dataset& data) {
  Json j;
  j["spec"] = to_json(spec);
  j["dim"] = data.dim();
  j["samples"] = data.size();
  j["dataset_hash"] = dataset_hash(data);
  if (spec.kind == "random_1d") {
    j["generator"] = spec.y.empty()
                         ? "x ~ U[-1,1] sorted; y = sum_{k=1..3} (a_k cos(pi k x) + b_k sin(pi k x)) / k "
                           "with a_k, b_k ~ N(0,1), all from one seeded stream"
                         : "x ~ U[-1,1] sorted; explicit y list";
  } else if (spec.kind == "xor_2d") {
    j["generator"] = "corners (+-a, +-a) in lexicographic order; y = +1 where the signs agree, -1 otherwise";
  } else if (spec.kind == "asym_2d") {
    j["generator"] = "x ~ U[-1,1]^2 and y ~ U[-1,1] from one seeded stream";
  } else if (spec.kind == "sine") {
    j["generator"] = "x_j = j / M for j = 0..M-1; y = sin(2 pi v x)";
  } else {
    j["generator"] = "read from CSV";
  }
  return j;
}

Json to_json(const InitSpec& spec) {
  return Json{{"w", to_json(spec.w)}, {"r", to_json(spec.r)}, {"l", to_json(spec.l)},
              {"seed", spec.seed}};
}

InitSpec init_spec_from_json(const Json& j, InitSpec base) {
  const std::string what = "init spec";
  check_keys(j, {"w", "r", "l", "seed"}, what);
  if (j.contains("w")) base.w = distribution_from_json(j.at("w"), "init.w");
  if (j.contains("r")) base.r = distribution_from_json(j.at("r"), "init.r");
  if (j.contains("l")) base.l = distribution_from_json(j.at("l"), "init.l");
  read(j, "seed", base.seed, what);
  base.validate();
  return base;
}

Json to_json(const TrainConfig& cfg) {
  return Json{{"optimizer", cfg.optimizer == Optimizer::adam ? "adam" : "gd"},
              {"learning_rate", cfg.learning_rate},
              {"max_steps", cfg.max_steps},
              {"stop_loss", cfg.stop_loss},
              {"record_every", cfg.record_every},
              {"freeze_inner", cfg.freeze_inner},
              {"adam_beta1", cfg.adam_beta1},
              {"adam_beta2", cfg.adam_beta2},
              {"adam_epsilon", cfg.adam_epsilon},
              {"divergence_factor", cfg.divergence_factor}};
}

TrainConfig train_config_from_json(const Json& j, TrainConfig base) {
  const std::string what = "train config";
  check_keys(j, {"optimizer", "learning_rate", "max_steps", "stop_loss", "record_every",
                 "freeze_inner", "adam_beta1", "adam_beta2", "adam_epsilon", "divergence_factor"},
             what);
  if (j.contains("optimizer")) {
    std::string opt;
    read(j, "optimizer", opt, what);
    require(opt == "gd" || opt == "adam", ErrorCode::config, "optimizer must be gd or adam");
    base.optimizer = opt == "adam" ? Optimizer::adam : Optimizer::gd;
  }
  read(j, "learning_rate", base.learning_rate, what);
  read(j, "max_steps", base.max_steps, what);
  read(j, "stop_loss", base.stop_loss, what);
  read(j, "record_every", base.record_every, what);
  read(j, "freeze_inner", base.freeze_inner, what);
  read(j, "adam_beta1", base.adam_beta1, what);
  read(j, "adam_beta2", base.adam_beta2, what);
  read(j, "adam_epsilon", base.adam_epsilon, what);
  read(j, "divergence_factor", base.divergence_factor, what);
  try {
    base.validate();
  } catch (const Error& e) {
    fail(ErrorCode::config, e.what());
  }
  return base;
}

Json to_json(const RidgeConfig& cfg) {
  return Json{{"epsilon", cfg.epsilon},
              {"intercept", cfg.intercept == InterceptMode::unpenalized ? "unpenalized" : "none"},
              {"solver_tolerance", cfg.solver_tolerance},
              {"max_refinements", cfg.max_refinements}};
}

RidgeConfig ridge_config_from_json(const Json& j, RidgeConfig base) {
  const std::string what = "ridge config";
  check_keys(j, {"epsilon", "intercept", "solver_tolerance", "max_refinements"}, what);
  read(j, "epsilon", base.epsilon, what);
  if (j.contains("intercept")) {
    std::string mode;
    read(j, "intercept", mode, what);
    require(mode == "unpenalized" || mode == "none", ErrorCode::config,
            "ridge intercept must be unpenalized or none");
    base.intercept = mode == "none" ? InterceptMode::none : InterceptMode::unpenalized;
  }
  read(j, "solver_tolerance", base.solver_tolerance, what);
  read(j, "max_refinements", base.max_refinements, what);
  try {
    base.validate();
  } catch (const Error& e) {
    fail(ErrorCode::config, e.what());
  }
  return base;
}

// ------------------------------------------------------------- comparison

void CompareConfig::validate() const {
  require(!widths.empty(), ErrorCode::config, "compare needs at least one width");
  for (std::size_t w : widths) {
    require(w >= 2 && w % 2 == 0, ErrorCode::config,
            "widths count neurons after ASI and must be even and >= 2");
  }
  for (std::size_t w : full_width_list) {
    require(w >= 2 && w % 2 == 0, ErrorCode::config, "full widths must be even and >= 2");
  }
  require(!full_widths || !full_width_list.empty(), ErrorCode::config,
          "full_widths requested but no full width list is configured");
  require(!seeds.empty(), ErrorCode::config, "compare needs at least one seed");
  require(test_points >= 1 && test_lo < test_hi, ErrorCode::config,
          "compare needs test points on a non-empty interval");
  require(lattice.period > 0.0 && lattice.half_width >= 2, ErrorCode::config,
          "lattice needs period > 0 and half_width >= 2");
  init.validate();
}

Json to_json(const CompareConfig& cfg) {
  return Json{{"preset", cfg.preset},
              {"data", to_json(cfg.data)},
              {"init", to_json(cfg.init)},
              {"form", to_string(cfg.form)},
              {"widths", cfg.widths},
              {"seeds", cfg.seeds},
              {"train", to_json(cfg.train)},
              {"auto_learning_rate", cfg.auto_learning_rate},
              {"lattice", lattice_json(cfg.lattice)},
              {"ridge", to_json(cfg.ridge)},
              {"test_points", cfg.test_points},
              {"test_lo", cfg.test_lo},
              {"test_hi", cfg.test_hi},
              {"full_widths", cfg.full_widths},
              {"full_width_list", cfg.full_width_list}};
}

CompareConfig compare_config_from_json(const Json& j) {
  const std::string what = "compare config";
  check_keys(j, {"preset", "seed", "data", "init", "form", "widths", "seeds", "train",
                 "auto_learning_rate", "lattice", "ridge", "test_points", "test_lo", "test_hi",
                 "full_widths", "full_width_list"},
             what);
  std::string preset = "fig1_smooth";
  read(j, "preset", preset, what);
  CompareConfig cfg = compare_preset(preset);
  if (j.contains("data")) cfg.data = data_spec_from_json(j.at("data"), cfg.data);
  if (j.contains("init")) cfg.init = init_spec_from_json(j.at("init"), cfg.init);
  if (j.contains("form")) {
    std::string form;
    read(j, "form", form, what);
    cfg.form = form_from_string(form);
  }
  read(j, "widths", cfg.widths, what);
  read(j, "seeds", cfg.seeds, what);
  if (j.contains("train")) {
    Json train = j.at("train");
    if (train.is_object() && train.contains("learning_rate") &&
        train.at("learning_rate").is_string()) {
      require(train.at("learning_rate") == "auto", ErrorCode::config,
              "learning_rate must be a number or \"auto\"");
      cfg.auto_learning_rate = true;
      train.erase("learning_rate");
    } else if (train.is_object() && train.contains("learning_rate")) {
      cfg.auto_learning_rate = false;
    }
    cfg.train = train_config_from_json(train, cfg.train);
  }
  read(j, "auto_learning_rate", cfg.auto_learning_rate, what);
  if (j.contains("lattice")) cfg.lattice = lattice_spec_from_json(j.at("lattice"), cfg.lattice, what);
  if (j.contains("ridge")) cfg.ridge = ridge_config_from_json(j.at("ridge"), cfg.ridge);
  read(j, "test_points", cfg.test_points, what);
  read(j, "test_lo", cfg.test_lo, what);
  read(j, "test_hi", cfg.test_hi, what);
  read(j, "full_widths", cfg.full_widths, what);
  read(j, "full_width_list", cfg.full_width_list, what);
  if (j.contains("seed")) {
    std::uint64_t seed = 0;
    read(j, "seed", seed, what);
    cfg.data.seed = seed;
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) cfg.seeds[i] = seed + i;
  }
  cfg.validate();
  return cfg;
}

namespace {

struct CellCurves {
  Vector nn;
  Vector lfp;
};

}  // namespace

CompareReport run_compare(const CompareConfig& cfg, const RunContext& ctx) {
  cfg.validate();
  CompareReport report;
  std::vector<std::size_t> widths = cfg.full_widths ? cfg.full_width_list : cfg.widths;
  if (cfg.full_widths) {
    report.warnings.push_back(
        "full widths requested: the largest networks can take hours to train at full batch");
  }

  const Dataset data = generate_data(cfg.data);
  const std::size_t d = data.dim();
  require(cfg.form == NetForm::general || d == 1, ErrorCode::config,
          "the one_d network form needs 1-d data");
  const LatticePtr lattice = build_lattice(static_cast<int>(d), cfg.lattice.period,
                                           cfg.lattice.half_width);
  const Matrix test = test_grid(d, cfg.test_lo, cfg.test_hi, cfg.test_points);

  const std::size_t n_cells = widths.size() * cfg.seeds.size();
  report.cells.resize(n_cells);
  std::vector<CellCurves> curves(n_cells);

  detail::parallel_for(n_cells, ctx.workers, [&](std::size_t idx) {
    const auto start = std::chrono::steady_clock::now();
    CompareCell& cell = report.cells[idx];
    cell.width = widths[idx / cfg.seeds.size()];
    cell.seed = cfg.seeds[idx % cfg.seeds.size()];
    try {
      InitSpec spec = cfg.init;
      spec.seed = cell.seed;
      const TwoLayerNet net = apply_asi(init_net(d, cell.width / 2, spec, cfg.form));
      const LfpCoefficients c = coefficients_from_init(net);
      cell.a = c.a;
      cell.b = c.b;
      TrainConfig train_cfg = cfg.train;
      if (cfg.auto_learning_rate && train_cfg.optimizer == Optimizer::gd) {
        train_cfg.learning_rate = 1.0 / loss_curvature(net, data);
      }
      cell.learning_rate = train_cfg.learning_rate;
      const TrainResult trained = train(net, data, train_cfg);
      cell.steps = trained.steps;
      cell.stop_reason = to_string(trained.reason);
      cell.final_loss = trained.final_loss;

      const LfpSolution sol = solve_lfp(data, lattice, c, cfg.ridge);
      curves[idx].nn = forward(trained.net, test);
      curves[idx].lfp = evaluate_spectrum(sol.spectral, test);
      const auto a = to_std(curves[idx].nn);
      const auto b = to_std(curves[idx].lfp);
      cell.l1 = lp_discrepancy(a, b, 1);
      cell.l2 = lp_discrepancy(a, b, 2);
    } catch (const std::exception& e) {
      cell.error = e.what();
      cell.l1 = cell.l2 = cell.final_loss = nan_value;
    }
    cell.seconds = seconds_since(start);
  });

  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    CompareRow row;
    row.width = widths[wi];
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
      const CompareCell& cell = report.cells[wi * cfg.seeds.size() + si];
      if (!cell.error.empty()) {
        ++row.failed;
        continue;
      }
      ++row.cells;
      s1 += cell.l1;
      s2 += cell.l2;
    }
    row.mean_l1 = row.cells ? s1 / static_cast<double>(row.cells) : nan_value;
    row.mean_l2 = row.cells ? s2 / static_cast<double>(row.cells) : nan_value;
    report.rows.push_back(row);
  }
  report.l2_strictly_decreasing = true;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (report.rows[i].failed > 0 || !std::isfinite(report.rows[i].mean_l2)) {
      report.l2_strictly_decreasing = false;
    }
    if (i > 0 && !(report.rows[i].width > report.rows[i - 1].width &&
                   report.rows[i].mean_l2 < report.rows[i - 1].mean_l2)) {
      report.l2_strictly_decreasing = false;
    }
  }

  OutputSet out(ctx);
  if (out.enabled()) {
    out.write("data.csv", dataset_to_csv(data));
    out.write("compare_cells.csv", compare_cells_csv(report));
    out.write("compare_summary.csv", compare_summary_csv(report));

    Series l1_series{"mean L1", {}, {}, Series::Style::line};
    Series l2_series{"mean L2", {}, {}, Series::Style::line};
    for (const auto& row : report.rows) {
      l1_series.x.push_back(static_cast<double>(row.width));
      l1_series.y.push_back(row.mean_l1);
      l2_series.x.push_back(static_cast<double>(row.width));
      l2_series.y.push_back(row.mean_l2);
    }
    out.write("discrepancy.svg",
              line_plot({l1_series, l2_series},
                        {"NN vs LFP discrepancy", "hidden neurons", "discrepancy", 640, 480, false}));

    for (std::size_t wi = 0; wi < widths.size(); ++wi) {
      const std::size_t idx = wi * cfg.seeds.size();
      if (!report.cells[idx].error.empty()) continue;
      const std::string tag = "w" + std::to_string(widths[wi]);
      const auto nn = to_std(curves[idx].nn);
      const auto lfp = to_std(curves[idx].lfp);
      if (d == 1) {
        const auto xs = to_std(test.col(0));
        Series train_pts{"training data", to_std(data.inputs().col(0)), to_std(data.targets()),
                         Series::Style::markers};
        out.write("overlay_" + tag + ".svg",
                  line_plot({{"NN", xs, nn, Series::Style::line},
                             {"LFP", xs, lfp, Series::Style::line},
                             train_pts},
                            {"width " + std::to_string(widths[wi]) + ", seed " +
                                 std::to_string(cfg.seeds[0]),
                             "x", "h(x)", 640, 480, false}));
      } else {
        out.write("scatter_" + tag + ".svg",
                  scatter_plot({{"test points", nn, lfp, Series::Style::markers}},
                               {"NN vs LFP, width " + std::to_string(widths[wi]), "NN output",
                                "LFP output", 560, 560, true}));
        const auto n = static_cast<Eigen::Index>(cfg.test_points);
        const Matrix nn_grid = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                              Eigen::RowMajor>>(nn.data(), n, n);
        const Matrix lfp_grid = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                                               Eigen::Dynamic, Eigen::RowMajor>>(
            lfp.data(), n, n);
        const Series stars{"training data", to_std(data.inputs().col(0)),
                           to_std(data.inputs().col(1)), Series::Style::markers};
        out.write("heatmap_nn_" + tag + ".svg",
                  heatmap(nn_grid, cfg.test_lo, cfg.test_hi, cfg.test_lo, cfg.test_hi,
                          {"NN output, width " + std::to_string(widths[wi]), "x1", "x2", 560,
                           560, false},
                          {stars}));
        out.write("heatmap_lfp_" + tag + ".svg",
                  heatmap(lfp_grid, cfg.test_lo, cfg.test_hi, cfg.test_lo, cfg.test_hi,
                          {"LFP solution", "x1", "x2", 560, 560, false}, {stars}));
      }
    }
  }
  return report;
}

std::string compare_cells_csv(const CompareReport& report) {
  CsvTable t({"width", "seed", "A", "B", "learning_rate", "steps", "stop_reason", "final_loss",
              "l1", "l2", "error"});
  for (const auto& c : report.cells) {
    t.row().add(c.width).add(static_cast<std::size_t>(c.seed)).add(c.a).add(c.b);
    t.add(c.learning_rate).add(c.steps).add(c.stop_reason).add(c.final_loss).add(c.l1).add(c.l2);
    t.add(c.error);
  }
  return t.str();
}

std::string compare_summary_csv(const CompareReport& report) {
  CsvTable t({"width", "mean_l1", "mean_l2", "cells", "failed"});
  for (const auto& r : report.rows) {
    t.row().add(r.width).add(r.mean_l1).add(r.mean_l2).add(r.cells).add(r.failed);
  }
  return t.str();
}

double high_frequency_energy(const SpectralSolution& s, double threshold) {
  const FrequencyLattice& lat = s.lattice();
  double high = 0.0, total = 0.0;
  for (std::size_t h = 0; h < lat.half_size(); ++h) {
    const double e = std::norm(s.positive_half()[h]);
    total += e;
    if (lat.norm(lat.positive(h)) > threshold) high += e;
  }
  return total > 0.0 ? high / total : 0.0;
}

SmoothnessReport smoothness_regimes(const Dataset& data, std::size_t width, std::uint64_t seed,
                                    double threshold) {
  require(data.dim() == 1, ErrorCode::dimension_mismatch, "smoothness regimes use 1-d data");
  require(width >= 2 && width % 2 == 0, ErrorCode::invalid_argument, "width must be even");
  const CompareConfig smooth_cfg = compare_preset("fig1_smooth");
  const LatticePtr lattice =
      build_lattice(1, smooth_cfg.lattice.period, smooth_cfg.lattice.half_width);
  auto run = [&](const std::string& name, LfpCoefficients& c) {
    InitSpec spec = preset_init(name);
    spec.seed = seed;
    c = coefficients_from_init(init_net(1, width / 2, spec, NetForm::one_d));
    return high_frequency_energy(solve_lfp(data, lattice, c, smooth_cfg.ridge).spectral,
                                 threshold);
  };
  SmoothnessReport r;
  r.smooth_fraction = run("fig1_smooth", r.smooth);
  r.rough_fraction = run("fig1_rough", r.rough);
  return r;
}

// ------------------------------------------------------ flow verification

void FlowVerifyConfig::validate() const {
  require(instances >= 1, ErrorCode::config, "flow-verify needs at least one instance");
  require(tolerance > 0.0 && optimality_tolerance >= 0.0 && matrix_tolerance > 0.0,
          ErrorCode::config, "tolerances must be positive");
  require(!epsilons.empty(), ErrorCode::config, "flow-verify needs an epsilon sequence");
  for (double e : epsilons) require(e > 0.0, ErrorCode::config, "epsilons must be positive");
  require(matrix_rows >= 1 && matrix_cols >= matrix_rows, ErrorCode::config,
          "matrix tests need 1 <= rows <= cols");
}

Json to_json(const FlowVerifyConfig& cfg) {
  return Json{{"instances", cfg.instances},
              {"seed", cfg.seed},
              {"tolerance", cfg.tolerance},
              {"epsilons", cfg.epsilons},
              {"perturbations", cfg.perturbations},
              {"optimality_tolerance", cfg.optimality_tolerance},
              {"matrix_tests", cfg.matrix_tests},
              {"matrix_rows", cfg.matrix_rows},
              {"matrix_cols", cfg.matrix_cols},
              {"matrix_tolerance", cfg.matrix_tolerance},
              {"nonzero_init_every", cfg.nonzero_init_every},
              {"include_zero_instance", cfg.include_zero_instance},
              {"include_rank_deficient", cfg.include_rank_deficient}};
}

FlowVerifyConfig flow_verify_config_from_json(const Json& j) {
  const std::string what = "flow-verify config";
  check_keys(j, {"instances", "seed", "tolerance", "epsilons", "perturbations",
                 "optimality_tolerance", "matrix_tests", "matrix_rows", "matrix_cols",
                 "matrix_tolerance", "nonzero_init_every", "include_zero_instance",
                 "include_rank_deficient"},
             what);
  FlowVerifyConfig cfg;
  read(j, "instances", cfg.instances, what);
  read(j, "seed", cfg.seed, what);
  read(j, "tolerance", cfg.tolerance, what);
  read(j, "epsilons", cfg.epsilons, what);
  read(j, "perturbations", cfg.perturbations, what);
  read(j, "optimality_tolerance", cfg.optimality_tolerance, what);
  read(j, "matrix_tests", cfg.matrix_tests, what);
  read(j, "matrix_rows", cfg.matrix_rows, what);
  read(j, "matrix_cols", cfg.matrix_cols, what);
  read(j, "matrix_tolerance", cfg.matrix_tolerance, what);
  read(j, "nonzero_init_every", cfg.nonzero_init_every, what);
  read(j, "include_zero_instance", cfg.include_zero_instance, what);
  read(j, "include_rank_deficient", cfg.include_rank_deficient, what);
  cfg.validate();
  return cfg;
}

namespace {

struct Instance {
  Dataset data;
  LatticePtr lattice;
  LfpCoefficients c;
  std::optional<SpectralSolution> h_ini;
};

Instance random_instance(std::uint64_t seed, std::size_t index, bool nonzero_init) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + index);
  const int d = 1 + static_cast<int>(index % 2);
  const auto m = std::uniform_int_distribution<int>(2, 6)(rng);
  const int k = d == 1 ? std::uniform_int_distribution<int>(8, 16)(rng)
                       : std::uniform_int_distribution<int>(4, 8)(rng);
  std::uniform_real_distribution<double> jitter(0.2, 0.8);
  Matrix x(m, d);
  if (d == 1) {
    for (int i = 0; i < m; ++i) x(i, 0) = (i + jitter(rng)) / m;
  } else {
    const int g = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m))));
    std::vector<int> cells(static_cast<std::size_t>(g * g));
    std::iota(cells.begin(), cells.end(), 0);
    std::shuffle(cells.begin(), cells.end(), rng);
    for (int i = 0; i < m; ++i) {
      const int cell = cells[static_cast<std::size_t>(i)];
      x(i, 0) = (cell % g + jitter(rng)) / g;
      x(i, 1) = (cell / g + jitter(rng)) / g;
    }
  }
  std::uniform_real_distribution<double> coef(0.5, 2.0);
  const double a = coef(rng);
  const double b = coef(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector y(m);
  for (int i = 0; i < m; ++i) y(i) = normal(rng);

  Instance inst{Dataset(std::move(x), std::move(y)), build_lattice(d, 1.0, k),
                make_coefficients(a, b, d), std::nullopt};
  if (nonzero_init) {
    const auto w = positive_weights(*inst.lattice, inst.c);
    std::vector<Complex> coeffs(w.size());
    for (std::size_t h = 0; h < w.size(); ++h) {
      const double s = 0.3 * std::sqrt(w[h]);
      coeffs[h] = Complex(s * normal(rng), s * normal(rng));
    }
    inst.h_ini = SpectralSolution(inst.lattice, std::move(coeffs), 0.0);
  }
  return inst;
}

void check_optimality(const Instance& inst, const FlowVerifyConfig& cfg, std::uint64_t seed,
                      EquivalenceRow& row) {
  const WeightedFormulation wf = weighted_formulation(
      inst.data, inst.lattice, inst.c, inst.h_ini ? &*inst.h_ini : nullptr);
  const LinearFlowProblem& problem = *wf.problem;
  const Vector u = min_norm_closed_form(problem);
  const Vector diff = u - problem.u_ini();
  const double base = diff.norm();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> log_scale(-3.0, 1.0);
  row.min_norm_margin = std::numeric_limits<double>::infinity();
  row.orthogonality = 0.0;
  for (std::size_t p = 0; p < cfg.perturbations; ++p) {
    Vector z(u.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    z = project_null_space(problem.p(), z);
    const double zn = z.norm();
    if (zn == 0.0) continue;
    z *= std::pow(10.0, log_scale(rng)) / zn;
    const double margin = (diff + z).norm() - base;
    row.min_norm_margin = std::min(row.min_norm_margin, margin);
    if (base > 0.0) {
      row.orthogonality = std::max(row.orthogonality, std::abs(diff.dot(z)) / (base * z.norm()));
    }
  }
  if (cfg.perturbations == 0) row.min_norm_margin = 0.0;
  row.optimality_pass = row.min_norm_margin >= -cfg.optimality_tolerance;
}

MatrixRow matrix_test(const FlowVerifyConfig& cfg, std::size_t index, bool rank_deficient) {
  MatrixRow row;
  row.test = index;
  row.kind = rank_deficient ? "rank_deficient" : "random";
  std::mt19937_64 rng(cfg.seed * 0xD1B54A32D192ED03ULL + 1000 + index);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto m = static_cast<Eigen::Index>(cfg.matrix_rows);
  const auto n = static_cast<Eigen::Index>(cfg.matrix_cols);
  Matrix p(m, n);
  Vector g(m), u_ini(n);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < m; ++i) g(i) = normal(rng);
  for (Eigen::Index i = 0; i < n; ++i) u_ini(i) = normal(rng);
  if (rank_deficient && m >= 2) p.row(m - 1) = p.row(0);
  if (rank_deficient && m == 1) p.setZero();
  try {
    const LinearFlowProblem problem(p, g, u_ini);
    if (rank_deficient) {
      row.note = "rank-deficient matrix was accepted";
      return row;
    }
    const Vector closed = min_norm_closed_form(problem);
    const double smin = problem.singular_values().minCoeff();
    LinearFlowOptions opts;
    opts.t_end = 40.0 / (smin * smin);
    opts.integrator = Integrator::rk4;
    opts.record_every = 1'000'000;
    const LinearFlowResult flow = integrate_linear_flow(problem, opts);
    row.flow_vs_closed = (flow.u - closed).norm() / std::max(closed.norm(), 1e-300);
    row.feasibility = (p * closed - g).norm() / std::max(g.norm(), 1e-300);

    const Eigen::SelfAdjointEigenSolver<Matrix> small(p * p.transpose(), Eigen::EigenvaluesOnly);
    const Eigen::SelfAdjointEigenSolver<Matrix> large(p.transpose() * p, Eigen::EigenvaluesOnly);
    const Vector top = large.eigenvalues().tail(m);
    row.spectrum_gap = (small.eigenvalues() - top).cwiseAbs().maxCoeff() /
                       small.eigenvalues().maxCoeff();
    row.pass = row.flow_vs_closed < cfg.matrix_tolerance && row.feasibility < 1e-10 &&
               row.spectrum_gap < 1e-10;
  } catch (const Error& e) {
    if (rank_deficient && e.code() == ErrorCode::rank_deficient) {
      row.precondition_violation = true;
      row.pass = true;
      row.note = e.what();
    } else {
      row.note = e.what();
    }
  }
  return row;
}

}  // namespace

FlowVerifyReport run_flow_verify(const FlowVerifyConfig& cfg, const RunContext& ctx) {
  cfg.validate();
  FlowVerifyReport report;
  const std::size_t total = cfg.instances + (cfg.include_zero_instance ? 1 : 0);
  report.instances.resize(total);

  detail::parallel_for(total, ctx.workers, [&](std::size_t i) {
    EquivalenceRow& row = report.instances[i];
    row.instance = i;
    try {
      const bool zero_case = i == cfg.instances;
      const bool nonzero = !zero_case && cfg.nonzero_init_every > 0 &&
                           i % cfg.nonzero_init_every == cfg.nonzero_init_every - 1;
      Instance inst = random_instance(cfg.seed, i, nonzero);
      if (zero_case) inst.data = inst.data.with_targets(Vector::Zero(inst.data.targets().size()));
      row.dim = inst.lattice->dim();
      row.samples = inst.data.size();
      row.half_width = inst.lattice->half_width();
      row.nonzero_init = inst.h_ini.has_value();

      EquivalenceOptions opts;
      opts.epsilons = cfg.epsilons;
      const EquivalenceReport rep = equivalence_report(
          inst.data, inst.lattice, inst.c, inst.h_ini ? &*inst.h_ini : nullptr, opts);
      row.flow_vs_ridge = rep.flow_vs_ridge;
      row.flow_vs_closed = rep.flow_vs_closed;
      row.ridge_vs_closed = rep.ridge_vs_closed;
      row.residual_flow = rep.residual_flow;
      row.residual_closed = rep.residual_closed;
      row.flow_converged = rep.flow_converged;
      row.flow_steps = rep.flow_steps;
      row.equivalence_pass = rep.max_distance() < cfg.tolerance;
      check_optimality(inst, cfg, cfg.seed * 31 + i, row);
    } catch (const std::exception& e) {
      row.error = e.what();
      row.equivalence_pass = row.optimality_pass = false;
    }
  });

  for (std::size_t t = 0; t < cfg.matrix_tests; ++t) report.matrix.push_back(matrix_test(cfg, t, false));
  if (cfg.include_rank_deficient) report.matrix.push_back(matrix_test(cfg, cfg.matrix_tests, true));

  report.equivalence_pass = std::all_of(report.instances.begin(), report.instances.end(),
                                        [](const auto& r) { return r.equivalence_pass; });
  report.optimality_pass = std::all_of(report.instances.begin(), report.instances.end(),
                                       [](const auto& r) { return r.optimality_pass; });
  report.matrix_pass =
      std::all_of(report.matrix.begin(), report.matrix.end(), [](const auto& r) { return r.pass; });

  OutputSet out(ctx);
  out.write("equivalence.csv", equivalence_csv(report));
  out.write("matrix_tests.csv", matrix_csv(report));
  return report;
}

std::string equivalence_csv(const FlowVerifyReport& report) {
  CsvTable t({"instance", "d", "M", "K", "nonzero_init", "flow_vs_ridge", "flow_vs_closed",
              "ridge_vs_closed", "residual_flow", "residual_closed", "flow_converged",
              "flow_steps", "min_norm_margin", "orthogonality", "equivalence_pass",
              "optimality_pass", "error"});
  for (const auto& r : report.instances) {
    t.row().add(r.instance).add(static_cast<std::size_t>(r.dim)).add(r.samples);
    t.add(static_cast<std::size_t>(r.half_width)).add(std::string(r.nonzero_init ? "1" : "0"));
    t.add(r.flow_vs_ridge).add(r.flow_vs_closed).add(r.ridge_vs_closed);
    t.add(r.residual_flow).add(r.residual_closed);
    t.add(std::string(r.flow_converged ? "1" : "0")).add(r.flow_steps);
    t.add(r.min_norm_margin).add(r.orthogonality);
    t.add(std::string(r.equivalence_pass ? "pass" : "fail"));
    t.add(std::string(r.optimality_pass ? "pass" : "fail")).add(r.error);
  }
  return t.str();
}

std::string matrix_csv(const FlowVerifyReport& report) {
  CsvTable t({"test", "kind", "flow_vs_closed", "feasibility", "spectrum_gap", "status", "note"});
  for (const auto& r : report.matrix) {
    t.row().add(r.test).add(r.kind).add(r.flow_vs_closed).add(r.feasibility).add(r.spectrum_gap);
    t.add(std::string(r.precondition_violation ? "precondition_violation"
                                               : (r.pass ? "pass" : "fail")));
    t.add(r.note);
  }
  return t.str();
}

// ------------------------------------------------------------------ sweep

Json to_json(const SweepConfig& cfg) {
  return Json{{"frequencies", cfg.frequencies},
              {"train_samples", cfg.train_samples},
              {"test_samples", cfg.test_samples},
              {"width", cfg.width},
              {"init", to_json(cfg.init)},
              {"train", to_json(cfg.train)},
              {"lattice", lattice_json({cfg.lattice_period, cfg.lattice_half_width})},
              {"delta", cfg.delta},
              {"sup_resolution", cfg.sup_resolution},
              {"seed", cfg.seed}};
}

SweepConfig sweep_config_from_json(const Json& j) {
  const std::string what = "sweep config";
  check_keys(j, {"preset", "frequencies", "train_samples", "test_samples", "width", "init",
                 "train", "lattice", "delta", "sup_resolution", "seed"},
             what);
  std::string preset = "fig3_sweep";
  read(j, "preset", preset, what);
  SweepConfig cfg = sweep_preset(preset);
  read(j, "frequencies", cfg.frequencies, what);
  read(j, "train_samples", cfg.train_samples, what);
  read(j, "test_samples", cfg.test_samples, what);
  read(j, "width", cfg.width, what);
  if (j.contains("init")) cfg.init = init_spec_from_json(j.at("init"), cfg.init);
  if (j.contains("train")) cfg.train = train_config_from_json(j.at("train"), cfg.train);
  if (j.contains("lattice")) {
    const LatticeSpec l = lattice_spec_from_json(
        j.at("lattice"), {cfg.lattice_period, cfg.lattice_half_width}, what);
    cfg.lattice_period = l.period;
    cfg.lattice_half_width = l.half_width;
  }
  read(j, "delta", cfg.delta, what);
  read(j, "sup_resolution", cfg.sup_resolution, what);
  read(j, "seed", cfg.seed, what);
  cfg.validate();
  return cfg;
}

std::string sweep_csv(const SweepResult& result) {
  CsvTable t({"v", "fp_norm", "fp_norm_normalized", "train_loss", "test_loss", "bound_i",
              "bound_ii"});
  for (const auto& r : result.rows) {
    t.row().add(r.v).add(r.fp_norm).add(r.fp_norm_normalized).add(r.train_loss);
    t.add(r.test_loss).add(r.bound_i).add(r.bound_ii);
  }
  return t.str();
}

std::string sweep_details_csv(const SweepResult& result) {
  CsvTable t({"v", "A", "B", "steps", "stop_reason", "error"});
  for (const auto& r : result.rows) {
    t.row().add(r.v).add(r.a).add(r.b).add(r.steps).add(r.stop_reason).add(r.error);
  }
  return t.str();
}

SweepResult run_sweep(const SweepConfig& cfg, const RunContext& ctx) {
  SweepConfig run_cfg = cfg;
  run_cfg.workers = std::max<std::size_t>(1, ctx.workers);
  SweepResult result = fpnorm_sweep(run_cfg);

  OutputSet out(ctx);
  if (out.enabled()) {
    out.write("sweep.csv", sweep_csv(result));
    out.write("sweep_details.csv", sweep_details_csv(result));
    Series fp{"normalized FP-norm", {}, {}, Series::Style::line};
    Series test{"test loss", {}, {}, Series::Style::line};
    for (const auto& r : result.rows) {
      fp.x.push_back(r.v);
      fp.y.push_back(r.fp_norm_normalized);
      test.x.push_back(r.v);
      test.y.push_back(r.test_loss);
    }
    out.write("sweep.svg", dual_axis_plot(fp, test,
                                          {"FP-norm and test loss vs frequency", "v",
                                           "normalized FP-norm", 640, 480, false},
                                          "test loss"));
  }
  return result;
}

// ------------------------------------------------------- single commands

namespace {

Json coefficient_source_json(const CoefficientSource& s) {
  Json j{{"init", to_json(s.init)}, {"width", s.width}, {"form", to_string(s.form)}};
  if (s.a) j["A"] = *s.a;
  if (s.b) j["B"] = *s.b;
  return j;
}

CoefficientSource coefficient_source_from_json(const Json& j, CoefficientSource base) {
  const std::string what = "coefficients";
  check_keys(j, {"A", "B", "init", "width", "form", "preset"}, what);
  if (j.contains("preset")) {
    std::string preset;
    read(j, "preset", preset, what);
    base.init = preset_init(preset);
  }
  if (j.contains("A")) base.a = j.at("A").get<double>();
  if (j.contains("B")) base.b = j.at("B").get<double>();
  require(base.a.has_value() == base.b.has_value(), ErrorCode::config,
          "explicit coefficients need both A and B");
  if (j.contains("init")) base.init = init_spec_from_json(j.at("init"), base.init);
  read(j, "width", base.width, what);
  if (j.contains("form")) {
    std::string form;
    read(j, "form", form, what);
    base.form = form_from_string(form);
  }
  return base;
}

LfpCoefficients resolve_coefficients(const CoefficientSource& s, int dim) {
  if (s.a) {
    LfpCoefficients c = make_coefficients(*s.a, *s.b, dim);
    return c;
  }
  require(s.width >= 2 && s.width % 2 == 0, ErrorCode::config,
          "coefficient width counts neurons after ASI and must be even");
  const NetForm form = dim == 1 ? s.form : NetForm::general;
  return coefficients_from_init(
      init_net(static_cast<std::size_t>(dim), s.width / 2, s.init, form));
}

Matrix domain_grid(const Dataset& data, std::size_t points) {
  const Box& box = data.domain();
  if (data.dim() == 1) {
    const double pad = 0.1 * std::max(box.hi[0] - box.lo[0], 1e-3);
    const auto xs = linspace(box.lo[0] - pad, box.hi[0] + pad, points);
    return Eigen::Map<const Matrix>(xs.data(), static_cast<Eigen::Index>(xs.size()), 1);
  }
  const double lo = std::min(box.lo[0], box.lo[1]);
  const double hi = std::max(box.hi[0], box.hi[1]);
  const double pad = 0.1 * std::max(hi - lo, 1e-3);
  return test_grid(2, lo - pad, hi + pad, points);
}

}  // namespace

Json to_json(const SolveConfig& cfg) {
  return Json{{"data", to_json(cfg.data)},
              {"coefficients", coefficient_source_json(cfg.coefficients)},
              {"lattice", lattice_json(cfg.lattice)},
              {"ridge", to_json(cfg.ridge)},
              {"grid_points", cfg.grid_points},
              {"energy_threshold", cfg.energy_threshold}};
}

SolveConfig solve_config_from_json(const Json& j) {
  const std::string what = "solve config";
  check_keys(j, {"seed", "data", "coefficients", "lattice", "ridge", "grid_points",
                 "energy_threshold"},
             what);
  SolveConfig cfg;
  cfg.coefficients.init = preset_init("fig1_smooth");
  if (j.contains("data")) cfg.data = data_spec_from_json(j.at("data"), cfg.data);
  if (j.contains("coefficients")) {
    cfg.coefficients = coefficient_source_from_json(j.at("coefficients"), cfg.coefficients);
  }
  if (j.contains("lattice")) cfg.lattice = lattice_spec_from_json(j.at("lattice"), cfg.lattice, what);
  if (j.contains("ridge")) cfg.ridge = ridge_config_from_json(j.at("ridge"), cfg.ridge);
  read(j, "grid_points", cfg.grid_points, what);
  read(j, "energy_threshold", cfg.energy_threshold, what);
  if (j.contains("seed")) {
    std::uint64_t seed = 0;
    read(j, "seed", seed, what);
    cfg.data.seed = seed;
    cfg.coefficients.init.seed = seed;
  }
  require(cfg.grid_points >= 2, ErrorCode::config, "grid_points must be >= 2");
  return cfg;
}

Json run_solve(const SolveConfig& cfg, const RunContext& ctx) {
  const Dataset data = generate_data(cfg.data);
  const int d = static_cast<int>(data.dim());
  const LfpCoefficients c = resolve_coefficients(cfg.coefficients, d);
  const LatticePtr lattice = build_lattice(d, cfg.lattice.period, cfg.lattice.half_width);
  const LfpSolution sol = solve_lfp(data, lattice, c, cfg.ridge);
  const TruncationReport trunc = gamma_truncation(d, cfg.lattice.period, cfg.lattice.half_width, c);

  Json report;
  report["A"] = c.a;
  report["B"] = c.b;
  report["interpolation_residual"] = interpolation_residual(sol.spectral, data);
  report["fp_norm"] = fp_norm(sol.spectral, c);
  report["gamma_l2"] = trunc.at_k;
  report["gamma_l2_2k"] = trunc.at_2k;
  report["gamma_truncation_relative"] = trunc.relative_difference;
  report["rcond"] = sol.dual.rcond;
  report["intercept"] = sol.dual.intercept;
  report["high_frequency_energy"] = high_frequency_energy(sol.spectral, cfg.energy_threshold);
  report["dataset_hash"] = dataset_hash(data);

  OutputSet out(ctx);
  if (out.enabled()) {
    out.write("data.csv", dataset_to_csv(data));
    out.write("solution.json", solution_to_json(sol.dual, data).dump(2) + "\n");
    out.write("spectrum.csv", spectrum_to_csv(sol.spectral));
    const std::size_t n = d == 1 ? cfg.grid_points : std::min<std::size_t>(cfg.grid_points, 60);
    const Matrix grid = domain_grid(data, n);
    const Vector h = evaluate_spectrum(sol.spectral, grid);
    std::vector<std::string> header;
    for (int a = 0; a < d; ++a) header.push_back("x" + std::to_string(a + 1));
    header.push_back("h");
    CsvTable t(header);
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
      t.row();
      for (int a = 0; a < d; ++a) t.add(grid(i, a));
      t.add(h(i));
    }
    out.write("predictions.csv", t.str());
    if (d == 1) {
      out.write("solution.svg",
                line_plot({{"LFP", to_std(grid.col(0)), to_std(h), Series::Style::line},
                           {"training data", to_std(data.inputs().col(0)), to_std(data.targets()),
                            Series::Style::markers}},
                          {"LFP solution", "x", "h(x)", 640, 480, false}));
    } else if (d == 2) {
      const auto nn = static_cast<Eigen::Index>(n);
      const std::vector<double> hv = to_std(h);
      const Matrix hg = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                        Eigen::RowMajor>>(hv.data(), nn, nn);
      out.write("solution.svg",
                heatmap(hg, grid(0, 0), grid(grid.rows() - 1, 0), grid(0, 1),
                        grid(grid.rows() - 1, 1), {"LFP solution", "x1", "x2", 560, 560, false},
                        {{"training data", to_std(data.inputs().col(0)),
                          to_std(data.inputs().col(1)), Series::Style::markers}}));
    }
  }
  report["passed"] = true;
  finish_run(out, "solve", to_json(cfg), ctx, {dataset_hash(data)}, report);
  return report;
}

Json to_json(const TrainCommandConfig& cfg) {
  Json train = to_json(cfg.train);
  return Json{{"data", to_json(cfg.data)},
              {"init", to_json(cfg.init)},
              {"form", to_string(cfg.form)},
              {"width", cfg.width},
              {"train", train},
              {"auto_learning_rate", cfg.auto_learning_rate},
              {"asi", cfg.asi}};
}

TrainCommandConfig train_command_config_from_json(const Json& j) {
  const std::string what = "train config";
  check_keys(j, {"seed", "preset", "data", "init", "form", "width", "train",
                 "auto_learning_rate", "asi"},
             what);
  TrainCommandConfig cfg;
  std::string preset = "fig1_smooth";
  read(j, "preset", preset, what);
  cfg.init = preset_init(preset);
  if (j.contains("data")) cfg.data = data_spec_from_json(j.at("data"), cfg.data);
  if (j.contains("init")) cfg.init = init_spec_from_json(j.at("init"), cfg.init);
  if (j.contains("form")) {
    std::string form;
    read(j, "form", form, what);
    cfg.form = form_from_string(form);
  }
  read(j, "width", cfg.width, what);
  if (j.contains("train")) {
    Json train = j.at("train");
    if (train.is_object() && train.contains("learning_rate") &&
        train.at("learning_rate").is_string()) {
      require(train.at("learning_rate") == "auto", ErrorCode::config,
              "learning_rate must be a number or \"auto\"");
      cfg.auto_learning_rate = true;
      train.erase("learning_rate");
    } else if (train.is_object() && train.contains("learning_rate")) {
      cfg.auto_learning_rate = false;
    }
    cfg.train = train_config_from_json(train, cfg.train);
  }
  read(j, "auto_learning_rate", cfg.auto_learning_rate, what);
  read(j, "asi", cfg.asi, what);
  if (j.contains("seed")) {
    std::uint64_t seed = 0;
    read(j, "seed", seed, what);
    cfg.data.seed = seed;
    cfg.init.seed = seed;
  }
  require(cfg.width >= 1 && (!cfg.asi || cfg.width % 2 == 0), ErrorCode::config,
          "width must be positive (and even with ASI)");
  return cfg;
}

Json run_train(const TrainCommandConfig& cfg, const RunContext& ctx) {
  const Dataset data = generate_data(cfg.data);
  require(cfg.form == NetForm::general || data.dim() == 1, ErrorCode::config,
          "the one_d network form needs 1-d data");
  TwoLayerNet net = init_net(data.dim(), cfg.asi ? cfg.width / 2 : cfg.width, cfg.init, cfg.form);
  if (cfg.asi) net = apply_asi(net);
  const LfpCoefficients c = coefficients_from_init(net);
  TrainConfig train_cfg = cfg.train;
  if (cfg.auto_learning_rate && train_cfg.optimizer == Optimizer::gd) {
    train_cfg.learning_rate = 1.0 / loss_curvature(net, data);
  }
  const TrainResult result = train(net, data, train_cfg);

  Json report;
  report["A"] = c.a;
  report["B"] = c.b;
  report["learning_rate"] = train_cfg.learning_rate;
  report["steps"] = result.steps;
  report["final_loss"] = result.final_loss;
  report["stop_reason"] = to_string(result.reason);
  report["dataset_hash"] = dataset_hash(data);

  OutputSet out(ctx);
  if (out.enabled()) {
    out.write("data.csv", dataset_to_csv(data));
    out.write("checkpoint_init.json", net_to_json(net).dump() + "\n");
    out.write("checkpoint.json", net_to_json(result.net).dump() + "\n");
    out.write("loss.csv", loss_history_csv(result.history));
    Series curve{"training loss", {}, {}, Series::Style::line};
    for (const auto& [step, value] : result.history) {
      curve.x.push_back(static_cast<double>(step));
      curve.y.push_back(value > 0.0 ? std::log10(value) : nan_value);
    }
    out.write("loss.svg", line_plot({curve}, {"training loss", "step", "log10 loss", 640, 480, false}));
    if (data.dim() == 1) {
      const Matrix grid = domain_grid(data, 400);
      out.write("network.svg",
                line_plot({{"NN", to_std(grid.col(0)), to_std(forward(result.net, grid)),
                            Series::Style::line},
                           {"training data", to_std(data.inputs().col(0)), to_std(data.targets()),
                            Series::Style::markers}},
                          {"trained network", "x", "h(x)", 640, 480, false}));
    }
  }
  report["passed"] = true;
  finish_run(out, "train", to_json(cfg), ctx, {dataset_hash(data)}, report);
  return report;
}

Json to_json(const PlotConfig& cfg) {
  return Json{{"input", cfg.input}, {"kind", cfg.kind},   {"x", cfg.x},
              {"y", cfg.y},         {"title", cfg.title}, {"output", cfg.output}};
}

PlotConfig plot_config_from_json(const Json& j) {
  const std::string what = "plot config";
  check_keys(j, {"seed", "input", "kind", "x", "y", "title", "output"}, what);
  PlotConfig cfg;
  read(j, "input", cfg.input, what);
  read(j, "kind", cfg.kind, what);
  read(j, "x", cfg.x, what);
  read(j, "y", cfg.y, what);
  read(j, "title", cfg.title, what);
  read(j, "output", cfg.output, what);
  require(!cfg.input.empty(), ErrorCode::config, "plot needs an input CSV");
  require(cfg.kind == "line" || cfg.kind == "scatter" || cfg.kind == "heatmap", ErrorCode::config,
          "plot kind must be line, scatter or heatmap");
  return cfg;
}

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return columns[i];
    }
    fail(ErrorCode::config, "column '" + name + "' not found in the plot input");
  }
};

Table read_table(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      cells.push_back(cell);
    }
    return cells;
  };
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::io, "plot input is empty");
  t.header = split(line);
  t.columns.resize(t.header.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      double v = nan_value;
      if (i < cells.size() && !cells[i].empty()) {
        char* end = nullptr;
        const double parsed = std::strtod(cells[i].c_str(), &end);
        if (end == cells[i].c_str() + cells[i].size()) v = parsed;
      }
      t.columns[i].push_back(v);
    }
  }
  return t;
}

}  // namespace

Json run_plot(const PlotConfig& cfg, const RunContext& ctx) {
  const Table table = read_table(read_text(cfg.input));
  const std::string x_name = cfg.x.empty() ? table.header.front() : cfg.x;
  std::vector<std::string> y_names = cfg.y;
  if (y_names.empty()) {
    for (const auto& h : table.header) {
      if (h != x_name) y_names.push_back(h);
    }
    if (cfg.kind == "heatmap") y_names.resize(std::min<std::size_t>(y_names.size(), 2));
  }
  std::string svg;
  PlotOptions opts{cfg.title, x_name, y_names.empty() ? "y" : y_names.front(), 640, 480, false};
  Json report;
  if (cfg.kind == "heatmap") {
    require(y_names.size() == 2, ErrorCode::config,
            "heatmap needs the y-coordinate column and the value column");
    const auto& xs = table.column(x_name);
    const auto& ys = table.column(y_names[0]);
    const auto& vs = table.column(y_names[1]);
    const std::set<double> ux(xs.begin(), xs.end());
    const std::set<double> uy(ys.begin(), ys.end());
    const std::vector<double> vx(ux.begin(), ux.end());
    const std::vector<double> vy(uy.begin(), uy.end());
    Matrix grid = Matrix::Constant(static_cast<Eigen::Index>(vy.size()),
                                   static_cast<Eigen::Index>(vx.size()), nan_value);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto cx = std::lower_bound(vx.begin(), vx.end(), xs[i]) - vx.begin();
      const auto cy = std::lower_bound(vy.begin(), vy.end(), ys[i]) - vy.begin();
      grid(cy, cx) = vs[i];
    }
    opts.y_label = y_names[0];
    svg = heatmap(grid, vx.empty() ? 0.0 : vx.front(), vx.empty() ? 1.0 : vx.back(),
                  vy.empty() ? 0.0 : vy.front(), vy.empty() ? 1.0 : vy.back(), opts);
    report["cells"] = grid.size();
  } else {
    std::vector<Series> series;
    for (const auto& name : y_names) {
      series.push_back({name, table.column(x_name), table.column(name),
                        cfg.kind == "scatter" ? Series::Style::markers : Series::Style::line});
    }
    if (y_names.size() > 1) opts.y_label = "value";
    svg = cfg.kind == "scatter" ? scatter_plot(series, opts) : line_plot(series, opts);
    report["series"] = series.size();
  }
  OutputSet out(ctx);
  out.write(cfg.output, svg);
  report["passed"] = true;
  finish_run(out, "plot", to_json(cfg), ctx, {}, report);
  return report;
}

Json run_gen_data(const DataSpec& spec, const RunContext& ctx) {
  const Dataset data = generate_data(spec);
  const Json meta = data_metadata(spec, data);
  OutputSet out(ctx);
  out.write("data.csv", dataset_to_csv(data));
  out.write("data.meta.json", meta.dump(2) + "\n");
  Json report = meta;
  report["passed"] = true;
  finish_run(out, "gen-data", to_json(spec), ctx, {dataset_hash(data)}, report);
  return report;
}

Json make_manifest(const std::string& command, const Json& config, const RunContext& ctx,
                   const std::vector<std::string>& outputs,
                   const std::vector<std::string>& dataset_hashes) {
  Json j;
  j["tool"] = "lfp";
  j["version"] = version_string();
  j["command"] = command;
  j["config"] = config;
  Json seeds = Json::array();
  if (config.contains("seeds")) seeds = config.at("seeds");
  else if (config.contains("seed")) seeds.push_back(config.at("seed"));
  else if (config.contains("data") && config.at("data").contains("seed")) {
    seeds.push_back(config.at("data").at("seed"));
  }
  j["seeds"] = seeds;
  j["dataset_hashes"] = dataset_hashes;
  Json files = Json::array();
  for (const auto& name : outputs) {
    Json entry{{"file", name}};
    if (!ctx.out_dir.empty()) entry["fnv1a64"] = file_hash(ctx.out_dir / name);
    files.push_back(entry);
  }
  j["outputs"] = files;
  return j;
}

Json run_command(const std::string& command, const Json& raw_config, const RunContext& ctx) {
  const Json config = unwrap_manifest(raw_config.is_null() ? Json::object() : raw_config, command);
  const auto start = std::chrono::steady_clock::now();
  Json report;
  if (command == "gen-data") {
    DataSpec spec = data_spec_from_json(config);
    report = run_gen_data(spec, ctx);
  } else if (command == "compare") {
    const CompareConfig cfg = compare_config_from_json(config);
    const CompareReport r = run_compare(cfg, ctx);
    Json rows = Json::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"width", row.width}, {"mean_l1", row.mean_l1}, {"mean_l2", row.mean_l2},
                      {"cells", row.cells}, {"failed", row.failed}});
    }
    Json cells = Json::array();
    for (const auto& c : r.cells) {
      cells.push_back({{"width", c.width}, {"seed", c.seed}, {"steps", c.steps},
                       {"stop_reason", c.stop_reason}, {"seconds", c.seconds},
                       {"error", c.error}});
    }
    report["rows"] = rows;
    report["cells"] = cells;
    report["l2_strictly_decreasing"] = r.l2_strictly_decreasing;
    report["warnings"] = r.warnings;
    report["passed"] = r.rows.size() < 2 ? std::all_of(r.rows.begin(), r.rows.end(),
                                                       [](const auto& x) { return x.failed == 0; })
                                         : r.l2_strictly_decreasing;
    OutputSet out(ctx);
    const Dataset data = generate_data(cfg.data);
    report["seconds"] = seconds_since(start);
    finish_run(out, command, to_json(cfg), ctx, {dataset_hash(data)}, report);
    if (out.enabled()) {
      // Manifest outputs list the files written by run_compare.
      std::vector<std::string> names;
      for (const auto& entry : std::filesystem::directory_iterator(ctx.out_dir)) {
        const std::string name = entry.path().filename().string();
        if (name != "manifest.json" && name != "report.json") names.push_back(name);
      }
      std::sort(names.begin(), names.end());
      write_text(ctx.out_dir / "manifest.json",
                 make_manifest(command, to_json(cfg), ctx, names, {dataset_hash(data)}).dump(2) +
                     "\n");
    }
  } else if (command == "flow-verify") {
    const FlowVerifyConfig cfg = flow_verify_config_from_json(config);
    const FlowVerifyReport r = run_flow_verify(cfg, ctx);
    double worst = 0.0, worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& row : r.instances) {
      worst = std::max({worst, row.flow_vs_ridge, row.flow_vs_closed, row.ridge_vs_closed});
      worst_margin = std::min(worst_margin, row.min_norm_margin);
    }
    report["instances"] = r.instances.size();
    report["max_distance"] = worst;
    report["min_norm_margin"] = worst_margin;
    report["equivalence_pass"] = r.equivalence_pass;
    report["optimality_pass"] = r.optimality_pass;
    report["matrix_pass"] = r.matrix_pass;
    report["passed"] = r.pass();
    report["seconds"] = seconds_since(start);
    OutputSet out(ctx);
    if (out.enabled()) {
      out.write("equivalence.csv", equivalence_csv(r));
      out.write("matrix_tests.csv", matrix_csv(r));
    }
    finish_run(out, command, to_json(cfg), ctx, {}, report);
  } else if (command == "sweep") {
    const SweepConfig cfg = sweep_config_from_json(config);
    const SweepResult r = run_sweep(cfg, ctx);
    report["spearman_fp_vs_test"] = r.spearman_fp_vs_test;
    report["fp_norm_increasing"] = r.fp_norm_increasing;
    std::size_t failed = 0;
    for (const auto& row : r.rows) failed += row.error.empty() ? 0 : 1;
    report["failed_rows"] = failed;
    const bool rank_ok = r.rows.size() < 3 || r.spearman_fp_vs_test > 0.8;
    report["passed"] = r.fp_norm_increasing && rank_ok && failed == 0;
    report["seconds"] = seconds_since(start);
    OutputSet out(ctx);
    if (out.enabled()) {
      out.write("sweep.csv", sweep_csv(r));
      out.write("sweep_details.csv", sweep_details_csv(r));
      Json summary{{"spearman_fp_vs_test", r.spearman_fp_vs_test},
                   {"fp_norm_increasing", r.fp_norm_increasing},
                   {"failed_rows", failed}};
      out.write("summary.json", summary.dump(2) + "\n");
    }
    finish_run(out, command, to_json(cfg), ctx, {}, report);
  } else if (command == "solve") {
    report = run_solve(solve_config_from_json(config), ctx);
  } else if (command == "train") {
    report = run_train(train_command_config_from_json(config), ctx);
  } else if (command == "plot") {
    report = run_plot(plot_config_from_json(config), ctx);
  } else {
    fail(ErrorCode::config, "unknown command '" + command + "'");
  }
  report["command"] = command;
  return report;
}

}  // namespace lfp
