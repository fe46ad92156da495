#pragma once

// Gradient flow du/dt = P^T (g - P u) and its long-time limit
// u_min = P^T (P P^T)^{-1} (g - P u_ini) + u_ini, both for explicit matrices
// and for the spectral LFP dynamics on a frequency lattice.

#include <optional>
#include <string>
#include <vector>

#include "lfp/core.hpp"
#include "lfp/solver.hpp"

namespace lfp {

/// P (M x N, full row rank), target g and starting point u_ini.
class LinearFlowProblem {
 public:
  LinearFlowProblem(Matrix p, Vector g, Vector u_ini, double rank_tolerance = 1e-10);

  const Matrix& p() const { return p_; }
  const Vector& g() const { return g_; }
  const Vector& u_ini() const { return u_ini_; }
  /// Singular values of P, descending.
  const Vector& singular_values() const { return singular_values_; }

 private:
  Matrix p_;
  Vector g_;
  Vector u_ini_;
  Vector singular_values_;
};

Vector min_norm_closed_form(const LinearFlowProblem& problem);

/// Projects z onto null(P) (P full row rank).
Vector project_null_space(const Matrix& p, const Vector& z);

enum class Integrator { euler, rk4 };

struct LinearFlowOptions {
  double dt = 0.0;  // 0: 1 / lambda_max(P P^T)
  double t_end = 1.0;
  Integrator integrator = Integrator::rk4;
  /// Stop early once ||P u - g|| <= tolerance * ||g|| (0 disables).
  double residual_tolerance = 0.0;
  std::size_t record_every = 1;
};

struct LinearFlowResult {
  Vector u;
  double t = 0.0;
  std::size_t steps = 0;
  double dt = 0.0;
  double lambda_max = 0.0;
  bool converged = false;
  std::vector<double> times;
  std::vector<double> residuals;
};

LinearFlowResult integrate_linear_flow(const LinearFlowProblem& problem,
                                       const LinearFlowOptions& options);

struct SpectralFlowOptions {
  double dt = 0.0;  // 0: 1.5 / lambda_max(G)
  double t_max = 1e7;
  std::size_t max_steps = 50'000'000;
  Integrator integrator = Integrator::rk4;
  /// Converged once ||h(X) - Y|| <= relative_tolerance * ||Y||.
  double relative_tolerance = 1e-8;
  std::size_t record_every = 100;
  /// Positive-half indices whose coefficients are recorded in the history.
  std::vector<std::size_t> tracked;
  std::size_t divergence_window = 10;
};

struct FlowSnapshot {
  double t = 0.0;
  double residual = 0.0;
  std::vector<Complex> tracked;
};

struct SpectralFlowResult {
  SpectralSolution final_state;
  double t = 0.0;
  std::size_t steps = 0;
  double dt = 0.0;
  double lambda_max = 0.0;
  bool converged = false;
  std::string warning;
  std::vector<std::size_t> tracked;
  std::vector<FlowSnapshot> history;
  /// |d h(xi)/dt| at the final state, positive-half order. Large entries mark
  /// frequencies that are still moving when the run stopped.
  std::vector<double> final_rate;
};

/// Integrates dh(xi)/dt = c(xi) sum_i (y_i - h(x_i, t)) exp(-2 pi i xi·x_i)
/// from h_ini (zero when null). The zero frequency is not part of the
/// dynamics, so the intercept of h_ini is carried through unchanged.
SpectralFlowResult integrate_spectral_flow(const Dataset& data, LatticePtr lattice,
                                           const LfpCoefficients& c,
                                           const SpectralSolution* h_ini,
                                           const SpectralFlowOptions& options);

struct FrequencyConvergence {
  std::size_t index = 0;  // positive-half index
  double norm = 0.0;      // |xi|
  /// First recorded time with |h(xi,t) - h(xi,inf)| <= |h(xi,0) - h(xi,inf)| / 2.
  std::optional<double> time_to_half;
};

/// Table sorted by |xi| over the trajectory's tracked frequencies.
std::vector<FrequencyConvergence> per_frequency_convergence(const SpectralFlowResult& run,
                                                            const SpectralSolution& target);

/// The spectral problem rewritten in weighted real coordinates: with
/// h(xi) = sqrt(c(xi)/2) (v_re + i v_im) on the positive half, the FP-norm
/// becomes the Euclidean norm of v and evaluation at X becomes a real matrix.
struct WeightedFormulation {
  LatticePtr lattice;
  std::vector<double> weights;
  double intercept = 0.0;
  std::optional<LinearFlowProblem> problem;

  SpectralSolution to_spectrum(const Vector& v) const;
  Vector to_weighted(const SpectralSolution& s) const;
};

WeightedFormulation weighted_formulation(const Dataset& data, LatticePtr lattice,
                                         const LfpCoefficients& c,
                                         const SpectralSolution* h_ini);

struct EquivalenceOptions {
  std::vector<double> epsilons{1e-4, 1e-6, 1e-8};
  SpectralFlowOptions flow;
};

struct RidgePoint {
  double epsilon = 0.0;
  double distance_to_closed_form = 0.0;
  double residual = 0.0;
};

struct EquivalenceReport {
  SpectralSolution flow_limit;
  SpectralSolution ridge_limit;  // smallest epsilon
  SpectralSolution closed_form;
  std::vector<RidgePoint> ridge_path;
  double flow_vs_ridge = 0.0;
  double flow_vs_closed = 0.0;
  double ridge_vs_closed = 0.0;
  double residual_flow = 0.0;
  double residual_ridge = 0.0;
  double residual_closed = 0.0;
  bool flow_converged = false;
  double flow_time = 0.0;
  std::size_t flow_steps = 0;

  double max_distance() const;
};

EquivalenceReport equivalence_report(const Dataset& data, LatticePtr lattice,
                                     const LfpCoefficients& c, const SpectralSolution* h_ini,
                                     const EquivalenceOptions& options = {});

}  // namespace lfp
