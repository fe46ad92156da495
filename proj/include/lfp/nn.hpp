#pragma once

// Two-layer ReLU network h(x) = sum_i w_i relu(r_i·x - |r_i| l_i), or the
// one-dimensional form h(x) = sum_i w_i relu(r_i (x - l_i)), trained full
// batch on the loss (1/2M) sum_i (h(x_i) - y_i)^2.

#include <cstdint>
#include <string>
#include <vector>

#include "lfp/core.hpp"

namespace lfp {

enum class NetForm { general, one_d };

struct TwoLayerNet {
  std::size_t dim = 1;
  NetForm form = NetForm::general;
  Vector w;  // N
  Matrix r;  // N x d
  Vector l;  // N

  std::size_t width() const { return static_cast<std::size_t>(w.size()); }
  void validate() const;
};

struct Distribution {
  enum class Kind { uniform, normal, xavier_normal };
  Kind kind = Kind::uniform;
  double lo = 0.0;        // uniform
  double hi = 0.0;        // uniform
  double variance = 1.0;  // normal, zero mean

  static Distribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi, 0.0}; }
  static Distribution normal(double variance) { return {Kind::normal, 0.0, 0.0, variance}; }
  static Distribution xavier_normal() { return {Kind::xavier_normal, 0.0, 0.0, 0.0}; }
};

struct InitSpec {
  Distribution w = Distribution::uniform(-0.1, 0.1);
  Distribution r = Distribution::uniform(-0.25, 0.25);
  Distribution l = Distribution::uniform(-1.0, 1.0);
  std::uint64_t seed = 0;

  void validate() const;
};

/// Samples w, then R, then l from one seeded mt19937_64 stream. Xavier normal
/// uses fan_in + fan_out = d + N for R and N + 1 for w; it is not defined for l.
TwoLayerNet init_net(std::size_t dim, std::size_t width, const InitSpec& spec, NetForm form);

/// Appends a copy of every neuron with negated output weight: width doubles and
/// the output is identically zero.
TwoLayerNet apply_asi(const TwoLayerNet& net);

LfpCoefficients coefficients_from_init(const TwoLayerNet& net);

double forward(const TwoLayerNet& net, std::span<const double> x);
Vector forward(const TwoLayerNet& net, const Matrix& points);

struct Gradient {
  Vector w;
  Matrix r;
  Vector l;
};

struct LossAndGradient {
  double loss = 0.0;
  Gradient grad;
};

/// relu'(0) = 0; for |r_i| = 0 in the general form the r/|r| direction is 0.
LossAndGradient loss_and_grad(const TwoLayerNet& net, const Dataset& data);
double loss(const TwoLayerNet& net, const Dataset& data);

enum class Optimizer { gd, adam };

struct TrainConfig {
  Optimizer optimizer = Optimizer::gd;
  double learning_rate = 1e-3;
  std::size_t max_steps = 10'000;
  double stop_loss = 1e-6;
  std::size_t record_every = 100;
  /// Train only w with R and l frozen (linear least squares in w).
  bool freeze_inner = false;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double divergence_factor = 1e6;

  void validate() const;
};

enum class StopReason { stop_loss, max_steps };

struct TrainResult {
  TwoLayerNet net;
  double final_loss = 0.0;
  std::size_t steps = 0;
  StopReason reason = StopReason::max_steps;
  std::vector<std::pair<std::size_t, double>> history;  // (step, loss)
};

TrainResult train(TwoLayerNet net, const Dataset& data, const TrainConfig& cfg);

/// Upper bound on the spectral norm of the loss Hessian at the current
/// parameters: the largest eigenvalue of J J^T / M (J the output Jacobian)
/// plus the largest per-neuron norm of the residual-weighted second-derivative
/// block. With frozen inner weights the loss is quadratic and the bound is
/// exact. GD from these parameters is locally stable below 2 / value.
double loss_curvature(const TwoLayerNet& net, const Dataset& data, bool freeze_inner = false);

/// (sum_i |a_i - b_i|^p)^{1/p}, an unnormalized sum over the test points.
double lp_discrepancy(std::span<const double> a, std::span<const double> b, int p);
double lp_discrepancy(const TwoLayerNet& net, const SpectralSolution& lfp,
                      const Matrix& points, int p);

const char* to_string(NetForm form);
const char* to_string(StopReason reason);

}  // namespace lfp
