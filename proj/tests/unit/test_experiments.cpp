#include "doctest.h"

#include <algorithm>
#include <span>
#include "lfp/experiments.hpp"

#include <filesystem>

using namespace lfp;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("lfp_exp_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("dataset generators") {
  DataSpec sine;
  sine.kind = "sine";
  sine.samples = 20;
  const Dataset s = generate_data(sine);
  for (Eigen::Index i = 0; i < 20; ++i) {
    CHECK(s.inputs()(i, 0) == doctest::Approx(i / 20.0));
    CHECK(s.targets()(i) == doctest::Approx(std::sin(two_pi * i / 20.0)));
  }

  DataSpec xor_spec;
  xor_spec.kind = "xor_2d";
  const Dataset x = generate_data(xor_spec);
  REQUIRE(x.size() == 4);
  CHECK(x.targets()(0) == 1.0);
  CHECK(x.targets()(1) == -1.0);
  CHECK(x.targets()(2) == -1.0);
  CHECK(x.targets()(3) == 1.0);
  CHECK(x.inputs()(0, 0) == -0.5);
  CHECK(x.inputs()(1, 1) == 0.5);
  CHECK(x.inputs()(2, 0) == 0.5);

  DataSpec r;
  const Dataset a = generate_data(r);
  const Dataset b = generate_data(r);
  CHECK(dataset_to_csv(a) == dataset_to_csv(b));
  CHECK(a.size() == 12);
  CHECK(a.inputs().minCoeff() >= -1.0);
  CHECK(a.inputs().maxCoeff() <= 1.0);
  r.seed = 1;
  CHECK(dataset_hash(generate_data(r)) != dataset_hash(a));
  r.y = {1, 2, 3};
  CHECK_THROWS_AS(generate_data(r), Error);

  DataSpec asym;
  asym.kind = "asym_2d";
  asym.samples = 5;
  const Dataset as = generate_data(asym);
  CHECK(as.size() == 5);
  CHECK(as.dim() == 2);
  CHECK(as.inputs().cwiseAbs().maxCoeff() <= 1.0);

  DataSpec unknown;
  unknown.kind = "spiral";
  CHECK_THROWS_AS(generate_data(unknown), Error);
  CHECK(data_metadata(xor_spec, x).contains("generator"));
}

TEST_CASE("config parsing") {
  const Json j = Json::parse(R"({"preset": "fig2_xor", "widths": [20, 40], "seed": 7,
                                 "train": {"learning_rate": "auto", "max_steps": 10}})");
  const CompareConfig cfg = compare_config_from_json(j);
  CHECK(cfg.data.kind == "xor_2d");
  CHECK(cfg.widths == std::vector<std::size_t>{20, 40});
  CHECK(cfg.seeds.front() == 7);
  CHECK(cfg.data.seed == 7);
  CHECK(cfg.auto_learning_rate);
  CHECK(cfg.train.max_steps == 10);

  const CompareConfig again = compare_config_from_json(to_json(cfg));
  CHECK(to_json(again) == to_json(cfg));

  auto code_of = [](const Json& bad) {
    try {
      compare_config_from_json(bad);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::invalid_argument;
  };
  CHECK(code_of(Json::parse(R"({"unknown": 1})")) == ErrorCode::config);
  CHECK(code_of(Json::parse(R"({"widths": [3]})")) == ErrorCode::config);
  CHECK(code_of(Json::parse(R"({"widths": "wide"})")) == ErrorCode::config);
  CHECK(code_of(Json::parse(R"({"preset": "nope"})")) == ErrorCode::config);
  CHECK(code_of(Json::parse(R"({"seeds": []})")) == ErrorCode::config);
  CHECK(code_of(Json::parse(R"({"init": {"l": {"kind": "xavier_normal"}}})")) ==
        ErrorCode::invalid_spec);

  const FlowVerifyConfig fv = flow_verify_config_from_json(Json::parse(R"({"instances": 3})"));
  CHECK(fv.instances == 3);
  CHECK(to_json(flow_verify_config_from_json(to_json(fv))) == to_json(fv));
  const SweepConfig sw = sweep_config_from_json(Json::parse(R"({"frequencies": [2]})"));
  CHECK(sw.frequencies.size() == 1);
  CHECK(to_json(sweep_config_from_json(to_json(sw))) == to_json(sw));
  const SolveConfig so = solve_config_from_json(Json::parse(R"({"coefficients": {"A": 1, "B": 2}})"));
  CHECK(*so.coefficients.a == 1.0);
  CHECK_THROWS_AS(solve_config_from_json(Json::parse(R"({"coefficients": {"A": 1}})")), Error);
  CHECK(to_json(solve_config_from_json(to_json(so))) == to_json(so));
  const TrainCommandConfig tc = train_command_config_from_json(Json::parse(R"({"width": 10})"));
  CHECK(to_json(train_command_config_from_json(to_json(tc))) == to_json(tc));
}

TEST_CASE("small compare run") {
  CompareConfig cfg = compare_preset("fig1_smooth");
  cfg.widths = {40};
  cfg.seeds = {0, 1};
  cfg.train.max_steps = 200;
  cfg.lattice.half_width = 200;
  cfg.test_points = 50;
  const auto dir = scratch("compare");
  const CompareReport r = run_compare(cfg, {dir, 2});
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].cells == 2);
  CHECK(r.rows[0].mean_l2 == doctest::Approx(0.5 * (r.cells[0].l2 + r.cells[1].l2)));
  CHECK(std::filesystem::exists(dir / "compare_summary.csv"));
  CHECK(std::filesystem::exists(dir / "overlay_w40.svg"));

  CompareConfig xor_cfg = compare_preset("fig2_xor");
  xor_cfg.widths = {20};
  xor_cfg.seeds = {0};
  xor_cfg.train.max_steps = 50;
  xor_cfg.lattice.half_width = 20;
  const auto xdir = scratch("compare_xor");
  const CompareReport xr = run_compare(xor_cfg, {xdir, 1});
  CHECK(xr.rows.size() == 1);
  const std::string scatter = read_text(xdir / "scatter_w20.svg");
  CHECK(scatter.find("class=\"identity\"") != std::string::npos);
  const std::string heat = read_text(xdir / "heatmap_nn_w20.svg");
  std::size_t cells = 0;
  for (auto p = heat.find("<rect class=\"cell\""); p != std::string::npos;
       p = heat.find("<rect class=\"cell\"", p + 1)) {
    ++cells;
  }
  CHECK(cells == 1600);
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(xdir);
}

TEST_CASE("flow verify suite") {
  FlowVerifyConfig cfg;
  cfg.instances = 6;
  const FlowVerifyReport r = run_flow_verify(cfg, {});
  CHECK(r.instances.size() == 7);
  CHECK(r.pass());
  const auto& zero = r.instances.back();
  CHECK(zero.equivalence_pass);
  CHECK(zero.flow_vs_closed == 0.0);
  const auto& rank = r.matrix.back();
  CHECK(rank.kind == "rank_deficient");
  CHECK(rank.precondition_violation);
}

TEST_CASE("smoothness regimes") {
  DataSpec spec;
  const Dataset data = generate_data(spec);
  const SmoothnessReport r = smoothness_regimes(data, 1000, 0);
  CHECK(r.rough.b / r.rough.a > r.smooth.b / r.smooth.a);
  CHECK(r.rough_fraction > r.smooth_fraction);
}

TEST_CASE("commands and manifests") {
  const auto dir = scratch("commands");
  const Json gen = run_command("gen-data", Json::parse(R"({"kind": "sine", "samples": 8})"), {dir / "g", 1});
  CHECK(gen["passed"] == true);
  const Json manifest = Json::parse(read_text(dir / "g" / "manifest.json"));
  CHECK(manifest["command"] == "gen-data");
  CHECK(manifest["version"] == version_string());
  CHECK(manifest["dataset_hashes"].size() == 1);
  CHECK(manifest["outputs"][0]["file"] == "data.csv");

  run_command("gen-data", manifest, {dir / "g2", 1});
  CHECK(read_text(dir / "g" / "data.csv") == read_text(dir / "g2" / "data.csv"));
  CHECK_THROWS_AS(run_command("solve", manifest, {}), Error);
  CHECK_THROWS_AS(run_command("nonsense", Json::object(), {}), Error);

  const Json sweep = run_command(
      "sweep",
      Json::parse(R"({"frequencies": [1], "width": 40, "test_samples": 20, "sup_resolution": 50,
                      "train": {"max_steps": 20}})"),
      {dir / "s", 1});
  CHECK(sweep.contains("passed"));
  const std::string csv = read_text(dir / "s" / "sweep.csv");
  CHECK(csv.substr(0, csv.find('\n')) ==
        "v,fp_norm,fp_norm_normalized,train_loss,test_loss,bound_i,bound_ii");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

  const Json solve = run_command("solve", Json::parse(R"({"lattice": {"half_width": 100}})"), {dir / "so", 1});
  CHECK(solve["passed"] == true);
  CHECK(solve["interpolation_residual"].get<double>() < 1e-3);
  const Json plot = run_command(
      "plot", Json{{"input", (dir / "so" / "predictions.csv").string()}, {"kind", "line"}},
      {dir / "pl", 1});
  CHECK(plot["series"] == 1);
  CHECK(std::filesystem::exists(dir / "pl" / "plot.svg"));

  const Json train = run_command(
      "train", Json::parse(R"({"width": 20, "train": {"max_steps": 30}})"), {dir / "t", 1});
  CHECK(train["steps"] == 30);
  CHECK(std::filesystem::exists(dir / "t" / "checkpoint.json"));
  std::filesystem::remove_all(dir);
}
