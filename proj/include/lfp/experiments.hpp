#pragma once

// Experiment pipelines behind the command-line tool: dataset generation,
// network-versus-LFP comparisons, equivalence verification, the FP-norm sweep
// and the single-shot solve/train/plot commands. Every pipeline echoes its
// configuration into a manifest that can be fed back in to reproduce the run.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lfp/bounds.hpp"
#include "lfp/flow.hpp"
#include "lfp/io.hpp"
#include "lfp/nn.hpp"
#include "lfp/solver.hpp"

namespace lfp {

const char* version_string();

struct RunContext {
  std::filesystem::path out_dir;  // empty: nothing is written
  std::size_t workers = 1;
};

// ---------------------------------------------------------------- datasets

struct DataSpec {
  /// random_1d, xor_2d, asym_2d, sine or csv.
  std::string kind = "random_1d";
  std::size_t samples = 12;
  std::uint64_t seed = 0;
  /// Half side of the XOR square.
  double a = 0.5;
  /// Sine frequency.
  double v = 1.0;
  /// Explicit targets for random_1d (length must equal samples).
  std::vector<double> y;
  /// CSV file for kind == "csv".
  std::string path;
};

Dataset generate_data(const DataSpec& spec);
/// Generator description written next to generated files.
Json data_metadata(const DataSpec& spec, const Dataset& data);

Json to_json(const DataSpec& spec);
DataSpec data_spec_from_json(const Json& j, DataSpec base = {});

Json to_json(const InitSpec& spec);
InitSpec init_spec_from_json(const Json& j, InitSpec base = {});
Json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const Json& j, TrainConfig base = {});
Json to_json(const RidgeConfig& cfg);
RidgeConfig ridge_config_from_json(const Json& j, RidgeConfig base = {});

// ------------------------------------------------------------- comparison

struct LatticeSpec {
  double period = 20.0;
  int half_width = 2000;
};

struct CompareConfig {
  std::string preset;
  DataSpec data;
  InitSpec init;
  NetForm form = NetForm::one_d;
  /// Hidden widths after ASI duplication.
  std::vector<std::size_t> widths{200, 1000, 5000};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  TrainConfig train;
  /// Step size 1 / (largest eigenvalue of the loss curvature) per cell.
  bool auto_learning_rate = true;
  LatticeSpec lattice;
  RidgeConfig ridge;
  /// Test points per axis on the box [test_lo, test_hi]^d.
  std::size_t test_points = 800;
  double test_lo = -1.0;
  double test_hi = 1.0;
  /// Swap in the much larger full_width_list.
  bool full_widths = false;
  std::vector<std::size_t> full_width_list;

  void validate() const;
};

/// fig1_smooth, fig1_rough, fig2_xor, fig4_asym.
CompareConfig compare_preset(const std::string& name);
/// Initialization of a named preset (the compare presets and fig3_sweep).
InitSpec preset_init(const std::string& name);
std::vector<std::string> preset_names();
CompareConfig compare_config_from_json(const Json& j);
Json to_json(const CompareConfig& cfg);

struct CompareCell {
  std::size_t width = 0;
  std::uint64_t seed = 0;
  double a = 0.0;
  double b = 0.0;
  double learning_rate = 0.0;
  std::size_t steps = 0;
  std::string stop_reason;
  double final_loss = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double seconds = 0.0;
  std::string error;
};

struct CompareRow {
  std::size_t width = 0;
  double mean_l1 = 0.0;
  double mean_l2 = 0.0;
  std::size_t cells = 0;
  std::size_t failed = 0;
};

struct CompareReport {
  std::vector<CompareCell> cells;
  std::vector<CompareRow> rows;
  bool l2_strictly_decreasing = false;
  std::vector<std::string> warnings;
};

CompareReport run_compare(const CompareConfig& cfg, const RunContext& ctx);
std::string compare_cells_csv(const CompareReport& report);
std::string compare_summary_csv(const CompareReport& report);

/// Fraction of spectral energy sum |h(xi)|^2 carried by |xi| > threshold.
double high_frequency_energy(const SpectralSolution& s, double threshold);

struct SmoothnessReport {
  LfpCoefficients smooth;
  LfpCoefficients rough;
  double smooth_fraction = 0.0;
  double rough_fraction = 0.0;
};

/// Solves the same data under the fig1_smooth and fig1_rough coefficient
/// regimes (coefficients from each preset's initialization at `width`).
SmoothnessReport smoothness_regimes(const Dataset& data, std::size_t width, std::uint64_t seed,
                                    double threshold = 5.0);

// ------------------------------------------------------ flow verification

struct FlowVerifyConfig {
  std::size_t instances = 20;
  std::uint64_t seed = 0;
  double tolerance = 1e-5;
  std::vector<double> epsilons{1e-4, 1e-6, 1e-8};
  std::size_t perturbations = 100;
  double optimality_tolerance = 1e-10;
  std::size_t matrix_tests = 5;
  std::size_t matrix_rows = 5;
  std::size_t matrix_cols = 20;
  double matrix_tolerance = 1e-8;
  /// Every n-th instance starts from a random nonzero spectrum (0 disables).
  std::size_t nonzero_init_every = 3;
  bool include_zero_instance = true;
  bool include_rank_deficient = true;

  void validate() const;
};

FlowVerifyConfig flow_verify_config_from_json(const Json& j);
Json to_json(const FlowVerifyConfig& cfg);

struct EquivalenceRow {
  std::size_t instance = 0;
  int dim = 1;
  std::size_t samples = 0;
  int half_width = 0;
  bool nonzero_init = false;
  double flow_vs_ridge = 0.0;
  double flow_vs_closed = 0.0;
  double ridge_vs_closed = 0.0;
  double residual_flow = 0.0;
  double residual_closed = 0.0;
  bool flow_converged = false;
  std::size_t flow_steps = 0;
  /// min over perturbations of ||u + z - u_ini|| - ||u - u_ini||.
  double min_norm_margin = 0.0;
  /// max over the null-space projection checks of |<u - u_ini, z>| / (|u - u_ini| |z|).
  double orthogonality = 0.0;
  bool equivalence_pass = false;
  bool optimality_pass = false;
  std::string error;
};

struct MatrixRow {
  std::size_t test = 0;
  std::string kind;  // random, rank_deficient
  double flow_vs_closed = 0.0;
  double feasibility = 0.0;
  double spectrum_gap = 0.0;  // positive spectra of P P^T and P^T P
  bool pass = false;
  bool precondition_violation = false;
  std::string note;
};

struct FlowVerifyReport {
  std::vector<EquivalenceRow> instances;
  std::vector<MatrixRow> matrix;
  bool equivalence_pass = false;
  bool optimality_pass = false;
  bool matrix_pass = false;
  bool pass() const { return equivalence_pass && optimality_pass && matrix_pass; }
};

FlowVerifyReport run_flow_verify(const FlowVerifyConfig& cfg, const RunContext& ctx);
std::string equivalence_csv(const FlowVerifyReport& report);
std::string matrix_csv(const FlowVerifyReport& report);

// ------------------------------------------------------------------ sweep

SweepConfig sweep_preset(const std::string& name);
SweepConfig sweep_config_from_json(const Json& j);
Json to_json(const SweepConfig& cfg);

/// Columns v,fp_norm,fp_norm_normalized,train_loss,test_loss,bound_i,bound_ii.
std::string sweep_csv(const SweepResult& result);
std::string sweep_details_csv(const SweepResult& result);
SweepResult run_sweep(const SweepConfig& cfg, const RunContext& ctx);

// ------------------------------------------------------- single commands

struct CoefficientSource {
  /// Explicit (A, B), or the moments of an initialization of `width`.
  std::optional<double> a;
  std::optional<double> b;
  InitSpec init;
  std::size_t width = 5000;
  NetForm form = NetForm::general;
};

struct SolveConfig {
  DataSpec data;
  CoefficientSource coefficients;
  LatticeSpec lattice;
  RidgeConfig ridge;
  std::size_t grid_points = 400;
  double energy_threshold = 5.0;
};

SolveConfig solve_config_from_json(const Json& j);
Json to_json(const SolveConfig& cfg);
Json run_solve(const SolveConfig& cfg, const RunContext& ctx);

struct TrainCommandConfig {
  DataSpec data;
  InitSpec init;
  NetForm form = NetForm::general;
  std::size_t width = 1000;
  TrainConfig train;
  bool auto_learning_rate = true;
  bool asi = true;
};

TrainCommandConfig train_command_config_from_json(const Json& j);
Json to_json(const TrainCommandConfig& cfg);
Json run_train(const TrainCommandConfig& cfg, const RunContext& ctx);

struct PlotConfig {
  std::string input;
  std::string kind = "line";  // line, scatter, heatmap
  std::string x;
  std::vector<std::string> y;
  std::string title;
  std::string output = "plot.svg";
};

PlotConfig plot_config_from_json(const Json& j);
Json to_json(const PlotConfig& cfg);
Json run_plot(const PlotConfig& cfg, const RunContext& ctx);

Json run_gen_data(const DataSpec& spec, const RunContext& ctx);

/// Dispatches a command by name (gen-data, compare, flow-verify, sweep,
/// solve, train, plot). `config` may be a bare configuration or a manifest
/// written by an earlier run. The returned JSON always has a boolean "passed".
Json run_command(const std::string& command, const Json& config, const RunContext& ctx);

/// Manifest written beside every run's outputs.
Json make_manifest(const std::string& command, const Json& config, const RunContext& ctx,
                   const std::vector<std::string>& outputs,
                   const std::vector<std::string>& dataset_hashes);

}  // namespace lfp
