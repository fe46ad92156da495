#pragma once

// Exact solution of the FP-norm penalized ridge regression
//
//   min_h  sum_i (h(x_i) - y_i)^2 + eps * sum_xi c(xi)^{-1} |h(xi) - h_ini(xi)|^2
//
// through its dual (kernel) form. The minimizer has h(xi) - h_ini(xi) =
// c(xi) sum_i alpha_i exp(-2 pi i xi·x_i) with (G + eps I) alpha = Y - h_ini(X),
// where G_ij = sum_xi c(xi) cos(2 pi xi·(x_i - x_j)).

#include <optional>

#include "lfp/core.hpp"

namespace lfp {

enum class InterceptMode { unpenalized, none };

struct RidgeConfig {
  /// eps = 0 requests the exact constrained (interpolating) solution.
  double epsilon = 1e-6;
  InterceptMode intercept = InterceptMode::unpenalized;
  /// Relative residual target for iterative refinement.
  double solver_tolerance = 1e-13;
  int max_refinements = 4;

  void validate() const;
};

struct DualSolution {
  Vector alpha;
  double intercept = 0.0;
  Matrix gram;
  /// Reciprocal condition estimate of G + eps I from the factorization.
  double rcond = 0.0;
  /// Relative residual of the (augmented) linear system after refinement.
  double system_residual = 0.0;

  LatticePtr lattice;
  LfpCoefficients coeffs;
  RidgeConfig config;
  Matrix inputs;
  Vector targets;
  std::optional<SpectralSolution> initial;
};

struct LfpSolution {
  DualSolution dual;
  SpectralSolution spectral;
};

/// k(x, z) = sum_xi c(xi) cos(2 pi xi·(x - z)) for rows of `a` against rows of `b`.
Matrix kernel_matrix(const Matrix& a, const Matrix& b, const FrequencyLattice& lattice,
                     const LfpCoefficients& c);

/// Symmetric M x M Gram matrix; every diagonal entry equals sum_xi c(xi).
Matrix gram_matrix(const Matrix& inputs, const FrequencyLattice& lattice,
                   const LfpCoefficients& c);

LfpSolution solve_lfp(const Dataset& data, LatticePtr lattice, const LfpCoefficients& c,
                      const RidgeConfig& cfg, const SpectralSolution* initial = nullptr);

/// h(x) = b + sum_i alpha_i k(x, x_i) (+ h_ini(x)).
Vector predict(const DualSolution& sol, const Matrix& points);
Vector predict(const SpectralSolution& sol, const Matrix& points);

/// max_i |h(x_i) - y_i|. For the ridge solution this equals eps * max_i |alpha_i|
/// up to the linear-solve residual, in both intercept modes.
double interpolation_residual(const DualSolution& sol, const Dataset& data);
double interpolation_residual(const SpectralSolution& sol, const Dataset& data);

/// Power iteration for the largest eigenvalue of a symmetric PSD matrix.
double largest_eigenvalue(const Matrix& symmetric, int max_iterations = 2000,
                          double tolerance = 1e-12);

}  // namespace lfp
