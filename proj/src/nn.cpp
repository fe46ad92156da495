#include "lfp/nn.hpp"

#include <cmath>
#include <random>
#include <string>

namespace lfp {

const char* to_string(NetForm form) { return form == NetForm::one_d ? "one_d" : "general"; }

const char* to_string(StopReason reason) {
  return reason == StopReason::stop_loss ? "stop_loss" : "max_steps";
}

void TwoLayerNet::validate() const {
  require(dim >= 1, ErrorCode::invalid_argument, "network input dimension must be positive");
  require(w.size() >= 1, ErrorCode::invalid_argument, "network width must be positive");
  require(r.rows() == w.size() && l.size() == w.size() &&
              r.cols() == static_cast<Eigen::Index>(dim),
          ErrorCode::dimension_mismatch, "network parameter shapes are inconsistent");
  require(form == NetForm::general || dim == 1, ErrorCode::invalid_argument,
          "the one_d network form requires d = 1");
  require(w.allFinite() && r.allFinite() && l.allFinite(), ErrorCode::invalid_argument,
          "network parameters must be finite");
}

namespace {

void validate_distribution(const Distribution& d, const char* name, bool allow_xavier) {
  const std::string what = std::string("initialization of ") + name;
  switch (d.kind) {
    case Distribution::Kind::uniform:
      require(std::isfinite(d.lo) && std::isfinite(d.hi) && d.lo <= d.hi,
              ErrorCode::invalid_spec, what + ": uniform bounds must satisfy lo <= hi");
      break;
    case Distribution::Kind::normal:
      require(std::isfinite(d.variance) && d.variance >= 0.0, ErrorCode::invalid_spec,
              what + ": normal variance must be non-negative");
      break;
    case Distribution::Kind::xavier_normal:
      require(allow_xavier, ErrorCode::invalid_spec, what + ": Xavier normal is not defined");
      break;
  }
}

double sample(const Distribution& d, double xavier_fan_sum, std::mt19937_64& rng) {
  switch (d.kind) {
    case Distribution::Kind::uniform:
      if (d.lo == d.hi) return d.lo;
      return std::uniform_real_distribution<double>(d.lo, d.hi)(rng);
    case Distribution::Kind::normal:
      if (d.variance == 0.0) return 0.0;
      return std::normal_distribution<double>(0.0, std::sqrt(d.variance))(rng);
    case Distribution::Kind::xavier_normal:
      return std::normal_distribution<double>(0.0, std::sqrt(2.0 / xavier_fan_sum))(rng);
  }
  return 0.0;
}

}  // namespace

void InitSpec::validate() const {
  validate_distribution(w, "w", true);
  validate_distribution(r, "r", true);
  validate_distribution(l, "l", false);
}

TwoLayerNet init_net(std::size_t dim, std::size_t width, const InitSpec& spec, NetForm form) {
  require(width >= 1, ErrorCode::invalid_argument, "network width must be positive");
  require(dim >= 1, ErrorCode::invalid_argument, "network input dimension must be positive");
  require(form == NetForm::general || dim == 1, ErrorCode::invalid_argument,
          "the one_d network form requires d = 1");
  spec.validate();

  const auto n = static_cast<Eigen::Index>(width);
  const double fan_n = static_cast<double>(width);
  std::mt19937_64 rng(spec.seed);
  TwoLayerNet net;
  net.dim = dim;
  net.form = form;
  net.w.resize(n);
  net.r.resize(n, static_cast<Eigen::Index>(dim));
  net.l.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) net.w(i) = sample(spec.w, fan_n + 1.0, rng);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < net.r.cols(); ++a) {
      net.r(i, a) = sample(spec.r, static_cast<double>(dim) + fan_n, rng);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) net.l(i) = sample(spec.l, 0.0, rng);
  return net;
}

TwoLayerNet apply_asi(const TwoLayerNet& net) {
  net.validate();
  const Eigen::Index n = net.w.size();
  TwoLayerNet out;
  out.dim = net.dim;
  out.form = net.form;
  out.w.resize(2 * n);
  out.w << net.w, -net.w;
  out.r.resize(2 * n, net.r.cols());
  out.r << net.r, net.r;
  out.l.resize(2 * n);
  out.l << net.l, net.l;
  return out;
}

LfpCoefficients coefficients_from_init(const TwoLayerNet& net) {
  net.validate();
  const Vector r_sq = net.r.rowwise().squaredNorm();
  return coefficients_from_moments({net.w.data(), net.width()},
                                   {r_sq.data(), static_cast<std::size_t>(r_sq.size())},
                                   static_cast<int>(net.dim));
}

namespace {

// Per-neuron pre-activation z = r·x + bias, and the derivative of z with
// respect to l and to the scalar multiplying r/|r| (general form).
struct NeuronTerms {
  Vector bias;    // -|r| l (general) or -r l (one_d)
  Vector dz_dl;   // -|r| or -r
  Vector l_dir;   // l / |r| (general, 0 if |r| = 0) or l (one_d)
  bool one_d = false;

  // dz/dr = x - l_dir * r (general) or x - l (one_d); this is the subtracted part.
  double shift(Eigen::Index k, double r) const { return one_d ? l_dir(k) : l_dir(k) * r; }
};

NeuronTerms neuron_terms(const TwoLayerNet& net) {
  const Eigen::Index n = net.w.size();
  NeuronTerms t{Vector(n), Vector(n), Vector(n), net.form == NetForm::one_d};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (net.form == NetForm::one_d) {
      const double r = net.r(i, 0);
      t.bias(i) = -r * net.l(i);
      t.dz_dl(i) = -r;
      t.l_dir(i) = net.l(i);
    } else {
      const double norm = net.r.row(i).norm();
      t.bias(i) = -norm * net.l(i);
      t.dz_dl(i) = -norm;
      t.l_dir(i) = norm > 0.0 ? net.l(i) / norm : 0.0;
    }
  }
  return t;
}

class Evaluator {
 public:
  explicit Evaluator(const Dataset& data)
      : x_(data.inputs()), y_(data.targets()), inv_m_(1.0 / static_cast<double>(data.size())) {}

  // Caches the activations for a following gradient() call.
  double outputs(const TwoLayerNet& net, const NeuronTerms& t) {
    z_.noalias() = net.r * x_.transpose();
    z_.colwise() += t.bias;
    z_ = z_.cwiseMax(0.0);
    residual_.noalias() = z_.transpose() * net.w;
    residual_ -= y_;
    return 0.5 * inv_m_ * residual_.squaredNorm();
  }

  void gradient(const TwoLayerNet& net, const NeuronTerms& t, bool freeze_inner, Gradient& grad) {
    grad.w.noalias() = inv_m_ * (z_ * residual_);
    if (freeze_inner) {
      grad.r.setZero(net.r.rows(), net.r.cols());
      grad.l.setZero(net.l.size());
      return;
    }
    weighted_ = (z_.array() > 0.0).cast<double>().matrix() * residual_.asDiagonal();
    active_ = weighted_.rowwise().sum();
    grad.r.noalias() = weighted_ * x_;
    if (t.one_d) {
      grad.r.col(0) -= active_.cwiseProduct(t.l_dir);
    } else {
      grad.r -= active_.cwiseProduct(t.l_dir).asDiagonal() * net.r;
    }
    const Vector scale = inv_m_ * net.w;
    grad.r = scale.asDiagonal() * grad.r;
    grad.l = scale.cwiseProduct(t.dz_dl).cwiseProduct(active_);
  }

 private:
  Matrix x_;
  Vector y_;
  double inv_m_;
  Matrix z_;
  Vector residual_;
  Matrix weighted_;
  Vector active_;
};

}  // namespace

double forward(const TwoLayerNet& net, std::span<const double> x) {
  require(x.size() == net.dim, ErrorCode::dimension_mismatch,
          "input dimension does not match the network");
  const NeuronTerms t = neuron_terms(net);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < net.w.size(); ++k) {
    double z = t.bias(k);
    for (std::size_t a = 0; a < x.size(); ++a) z += net.r(k, static_cast<Eigen::Index>(a)) * x[a];
    if (z > 0.0) acc += net.w(k) * z;
  }
  return acc;
}

Vector forward(const TwoLayerNet& net, const Matrix& points) {
  require(points.cols() == static_cast<Eigen::Index>(net.dim), ErrorCode::dimension_mismatch,
          "input dimension does not match the network");
  const NeuronTerms t = neuron_terms(net);
  Vector out = Vector::Zero(points.rows());
  constexpr Eigen::Index chunk = 4096;
  for (Eigen::Index start = 0; start < points.rows(); start += chunk) {
    const Eigen::Index rows = std::min(chunk, points.rows() - start);
    Matrix z = net.r * points.middleRows(start, rows).transpose();
    z.colwise() += t.bias;
    out.segment(start, rows).noalias() = z.cwiseMax(0.0).transpose() * net.w;
  }
  return out;
}

LossAndGradient loss_and_grad(const TwoLayerNet& net, const Dataset& data) {
  net.validate();
  require(data.dim() == net.dim, ErrorCode::dimension_mismatch,
          "dataset dimension does not match the network");
  Evaluator ev(data);
  const NeuronTerms t = neuron_terms(net);
  LossAndGradient out;
  out.loss = ev.outputs(net, t);
  ev.gradient(net, t, false, out.grad);
  return out;
}

double loss(const TwoLayerNet& net, const Dataset& data) {
  net.validate();
  require(data.dim() == net.dim, ErrorCode::dimension_mismatch,
          "dataset dimension does not match the network");
  Evaluator ev(data);
  return ev.outputs(net, neuron_terms(net));
}

void TrainConfig::validate() const {
  require(std::isfinite(learning_rate) && learning_rate >= 0.0, ErrorCode::invalid_argument,
          "learning rate must be finite and non-negative");
  require(stop_loss >= 0.0, ErrorCode::invalid_argument, "stop loss must be non-negative");
  require(record_every >= 1, ErrorCode::invalid_argument, "record_every must be >= 1");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0,
          ErrorCode::invalid_argument, "Adam betas must lie in [0, 1)");
  require(adam_epsilon > 0.0, ErrorCode::invalid_argument, "Adam epsilon must be positive");
  require(divergence_factor > 1.0, ErrorCode::invalid_argument,
          "divergence factor must exceed 1");
}

namespace {

struct AdamState {
  Gradient m;
  Gradient v;
  double beta1_power = 1.0;
  double beta2_power = 1.0;
};

template <class Param, class Moment>
void adam_update(Param& p, const Moment& g, Moment& m, Moment& v, const TrainConfig& cfg,
                 double bias1, double bias2) {
  m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
  v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
  p.array() -= cfg.learning_rate * (m.array() / bias1) /
               ((v.array() / bias2).sqrt() + cfg.adam_epsilon);
}

}  // namespace

TrainResult train(TwoLayerNet net, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  net.validate();
  require(data.dim() == net.dim, ErrorCode::dimension_mismatch,
          "dataset dimension does not match the network");

  Evaluator ev(data);
  Gradient grad;
  AdamState adam;
  if (cfg.optimizer == Optimizer::adam) {
    adam.m = {Vector::Zero(net.w.size()), Matrix::Zero(net.r.rows(), net.r.cols()),
              Vector::Zero(net.l.size())};
    adam.v = adam.m;
  }

  TrainResult out;
  NeuronTerms t = neuron_terms(net);
  double current = ev.outputs(net, t);
  const double initial = current;
  out.history.emplace_back(0, current);

  while (true) {
    if (current <= cfg.stop_loss) {
      out.reason = StopReason::stop_loss;
      break;
    }
    if (out.steps >= cfg.max_steps) {
      out.reason = StopReason::max_steps;
      break;
    }
    ev.gradient(net, t, cfg.freeze_inner, grad);
    if (cfg.optimizer == Optimizer::gd) {
      net.w -= cfg.learning_rate * grad.w;
      if (!cfg.freeze_inner) {
        net.r -= cfg.learning_rate * grad.r;
        net.l -= cfg.learning_rate * grad.l;
      }
    } else {
      adam.beta1_power *= cfg.adam_beta1;
      adam.beta2_power *= cfg.adam_beta2;
      const double bias1 = 1.0 - adam.beta1_power;
      const double bias2 = 1.0 - adam.beta2_power;
      adam_update(net.w, grad.w, adam.m.w, adam.v.w, cfg, bias1, bias2);
      if (!cfg.freeze_inner) {
        adam_update(net.r, grad.r, adam.m.r, adam.v.r, cfg, bias1, bias2);
        adam_update(net.l, grad.l, adam.m.l, adam.v.l, cfg, bias1, bias2);
      }
    }
    ++out.steps;
    t = neuron_terms(net);
    current = ev.outputs(net, t);
    if (!std::isfinite(current) || current > cfg.divergence_factor * std::max(initial, 1e-300)) {
      fail(ErrorCode::divergence, "training diverged at step " + std::to_string(out.steps) +
                                      ": loss " + std::to_string(current) + " vs initial " +
                                      std::to_string(initial) + " (learning rate " +
                                      std::to_string(cfg.learning_rate) + ")");
    }
    if (out.steps % cfg.record_every == 0) out.history.emplace_back(out.steps, current);
  }
  if (out.history.back().first != out.steps) out.history.emplace_back(out.steps, current);
  out.final_loss = current;
  out.net = std::move(net);
  return out;
}

double loss_curvature(const TwoLayerNet& net, const Dataset& data, bool freeze_inner) {
  net.validate();
  require(data.dim() == net.dim, ErrorCode::dimension_mismatch,
          "dataset dimension does not match the network");
  const NeuronTerms t = neuron_terms(net);
  const Matrix& x = data.inputs();
  const Eigen::Index m = x.rows();
  const auto d = static_cast<Eigen::Index>(net.dim);
  Matrix ntk = Matrix::Zero(m, m);
  Vector act(m);
  Vector z(m);
  Matrix dzdr(m, d);
  for (Eigen::Index k = 0; k < net.w.size(); ++k) {
    for (Eigen::Index i = 0; i < m; ++i) {
      z(i) = t.bias(k) + x.row(i).dot(net.r.row(k));
      act(i) = z(i) > 0.0 ? 1.0 : 0.0;
      z(i) = std::max(z(i), 0.0);
      for (Eigen::Index a = 0; a < d; ++a) dzdr(i, a) = x(i, a) - t.shift(k, net.r(k, a));
    }
    ntk.noalias() += z * z.transpose();
    if (!freeze_inner) {
      const double w2 = net.w(k) * net.w(k);
      const Matrix inner = dzdr * dzdr.transpose();
      ntk.noalias() += w2 * (act * act.transpose()).cwiseProduct(
                                inner.array().matrix() +
                                Matrix::Constant(m, m, t.dz_dl(k) * t.dz_dl(k)));
    }
  }
  ntk /= static_cast<double>(m);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(ntk, Eigen::EigenvaluesOnly);
  const double gauss_newton = eig.eigenvalues().maxCoeff();
  if (freeze_inner) return gauss_newton;

  // Residual term sum_i res_i * d2h_i / d theta^2 couples only parameters of
  // the same neuron, so its norm is the largest norm over neurons.
  const Vector residual = forward(net, x) - data.targets();
  const Eigen::Index p = d + 2;  // w, r_1..r_d, l
  Matrix block(p, p);
  double residual_norm = 0.0;
  for (Eigen::Index k = 0; k < net.w.size(); ++k) {
    block.setZero();
    const double norm = net.r.row(k).norm();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t.bias(k) + x.row(i).dot(net.r.row(k)) <= 0.0) continue;
      const double g = residual(i) / static_cast<double>(m);
      for (Eigen::Index a = 0; a < d; ++a) block(0, 1 + a) += g * (x(i, a) - t.shift(k, net.r(k, a)));
      block(0, d + 1) += g * t.dz_dl(k);
      if (net.form == NetForm::one_d) {
        block(1, 2) -= g * net.w(k);
      } else if (norm > 0.0) {
        for (Eigen::Index a = 0; a < d; ++a) {
          const double ua = net.r(k, a) / norm;
          block(1 + a, d + 1) -= g * net.w(k) * ua;
          for (Eigen::Index b = 0; b < d; ++b) {
            const double ub = net.r(k, b) / norm;
            block(1 + a, 1 + b) -= g * net.w(k) * net.l(k) * ((a == b ? 1.0 : 0.0) - ua * ub) / norm;
          }
        }
      }
    }
    const Matrix sym = block.selfadjointView<Eigen::Upper>();
    const Eigen::SelfAdjointEigenSolver<Matrix> local(sym, Eigen::EigenvaluesOnly);
    residual_norm = std::max(residual_norm, local.eigenvalues().cwiseAbs().maxCoeff());
  }
  return gauss_newton + residual_norm;
}

double lp_discrepancy(std::span<const double> a, std::span<const double> b, int p) {
  require(a.size() == b.size(), ErrorCode::dimension_mismatch,
          "discrepancy needs values at common test points");
  require(p >= 1, ErrorCode::invalid_argument, "discrepancy order p must be >= 1");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::pow(std::abs(a[i] - b[i]), p);
  return std::pow(acc, 1.0 / p);
}

double lp_discrepancy(const TwoLayerNet& net, const SpectralSolution& lfp,
                      const Matrix& points, int p) {
  const Vector a = forward(net, points);
  const Vector b = evaluate_spectrum(lfp, points);
  return lp_discrepancy({a.data(), static_cast<std::size_t>(a.size())},
                        {b.data(), static_cast<std::size_t>(b.size())}, p);
}

}  // namespace lfp
