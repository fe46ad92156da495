#pragma once

// Rademacher complexity of FP-norm balls, a priori generalization bounds and
// the FP-norm versus test-loss sweep over sine targets.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lfp/core.hpp"
#include "lfp/nn.hpp"
#include "lfp/solver.hpp"

namespace lfp {

/// Q ||gamma|| / sqrt(M), plus c0 / sqrt(M) when a zero-frequency cap is given.
double rademacher_bound(double q, double gamma_l2, std::size_t m,
                        std::optional<double> c0 = std::nullopt);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
};

/// Empirical Rademacher complexity of {h : ||h||_gamma <= Q} on the given
/// points. The supremum is attained in closed form, leaving
/// (Q / M) E_eps (sum_xi c(xi) |sum_i eps_i exp(-2 pi i xi·x_i)|^2)^{1/2},
/// averaged over `trials` seeded sign vectors.
MonteCarloEstimate empirical_rademacher_mc(const Matrix& points, const FrequencyLattice& lattice,
                                           const LfpCoefficients& c, double q,
                                           std::size_t trials, std::uint64_t seed);

enum class BoundVariant { i, ii };

struct BoundInputs {
  double fp_norm_f = 0.0;  // ||f - h_ini||_gamma
  double gamma_l2 = 0.0;
  std::optional<double> sup_norm_f;  // ||f - h_ini||_inf, variant ii
  std::size_t m = 1;
  double delta = 0.1;

  void validate() const;
};

/// 2 / sqrt(M) + 4 sqrt(2 log(4 / delta) / M).
double confidence_factor(std::size_t m, double delta);

/// (i)  ||f||_gamma ||gamma|| * factor
/// (ii) (||f||_inf + 2 ||f||_gamma ||gamma||) * factor
double generalization_bound(const BoundInputs& inputs, BoundVariant variant);

/// ||f - h_ini||_inf + ||f - h_ini||_gamma ||gamma||, a cap on the intercept
/// of the min-norm interpolant.
double zero_freq_cap(double sup_norm, double fp_norm, double gamma_l2);

using PointFunction = std::function<double(std::span<const double>)>;

/// max |f| over a uniform grid with `resolution` intervals per axis (both
/// endpoints included). A lower estimate of the true supremum.
double sup_norm_estimate(const PointFunction& f, const Box& domain,
                         std::size_t resolution = 10'000);
double sup_norm_estimate(const PointFunction& f, const PointFunction& h_ini, const Box& domain,
                         std::size_t resolution = 10'000);

/// Cap computed from a spectrum of f - h_ini: its grid sup-norm over `domain`
/// plus its FP-norm times ||gamma||.
double zero_freq_cap(const SpectralSolution& difference, const LfpCoefficients& c,
                     double gamma_l2, const Box& domain, std::size_t resolution = 10'000);

/// Fourier coefficients of f on the torus [0, L')^d from `samples_per_axis`
/// equispaced samples per axis (rectangle rule). Exact for trigonometric
/// polynomials whose frequencies fit in the sampling grid.
SpectralSolution spectrum_from_samples(const PointFunction& f, LatticePtr lattice,
                                       std::size_t samples_per_axis);

struct TruncationReport {
  double at_k = 0.0;
  double at_2k = 0.0;
  double relative_difference = 0.0;
};

/// ||gamma|| on the K lattice against the 2K lattice.
TruncationReport gamma_truncation(int dim, double period, int half_width,
                                  const LfpCoefficients& c);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

struct SweepConfig {
  std::vector<double> frequencies{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t train_samples = 20;
  std::size_t test_samples = 500;
  /// Width after ASI duplication.
  std::size_t width = 5000;
  InitSpec init{Distribution::xavier_normal(), Distribution::xavier_normal(),
                Distribution::uniform(-1.0, 1.0), 0};
  TrainConfig train{Optimizer::adam, 1e-4, 100'000, 1e-6, 1000};
  double lattice_period = 1.0;
  int lattice_half_width = 64;
  double delta = 0.1;
  std::size_t sup_resolution = 10'000;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

struct SweepRow {
  double v = 0.0;
  double fp_norm = 0.0;
  double fp_norm_normalized = 0.0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double bound_i = 0.0;
  double bound_ii = 0.0;
  double a = 0.0;
  double b = 0.0;
  std::size_t steps = 0;
  std::string stop_reason;
  std::string error;  // non-empty when the row failed
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Over rows without errors; NaN when fewer than two rows succeeded.
  double spearman_fp_vs_test = 0.0;
  bool fp_norm_increasing = false;
};

/// Trains the network on 20 (default) samples of sin(2 pi v x) on [0, 1] for
/// each v, measuring test loss and the FP-norm of the target under that run's
/// initialization coefficients. Failed rows are kept with an error message.
SweepResult fpnorm_sweep(const SweepConfig& cfg);

struct BoundValidityConfig {
  std::size_t tasks = 20;
  std::size_t samples = 20;
  double v_max = 5;
  double delta = 0.1;
  std::size_t init_width = 5000;
  double lattice_period = 1.0;
  int lattice_half_width = 64;
  double epsilon = 1e-6;
  std::size_t risk_grid = 10'000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BoundValidityRow {
  std::size_t task = 0;
  double v = 0.0;
  double risk = 0.0;
  double bound_ii = 0.0;
  double fp_norm_target = 0.0;
  double fp_norm_solution = 0.0;
  bool holds = false;
};

struct BoundValidityResult {
  std::vector<BoundValidityRow> rows;
  double fraction_holding = 0.0;
};

/// Seeded sine interpolation tasks: uniform random samples, the LFP solution
/// with coefficients from a fig3-style initialization, population risk
/// E|h - f|^2 on a dense grid, and the variant (ii) bound.
BoundValidityResult bound_validity(const BoundValidityConfig& cfg);

const char* to_string(BoundVariant variant);

}  // namespace lfp
