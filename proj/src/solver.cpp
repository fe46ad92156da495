#include "lfp/solver.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace lfp {

void RidgeConfig::validate() const {
  require(std::isfinite(epsilon) && epsilon >= 0.0, ErrorCode::invalid_argument,
          "ridge epsilon must be finite and non-negative");
  require(solver_tolerance > 0.0, ErrorCode::invalid_argument,
          "solver tolerance must be positive");
  require(max_refinements >= 0, ErrorCode::invalid_argument,
          "refinement count must be non-negative");
}

namespace {

struct PositiveHalfTable {
  std::vector<double> weights;
  Matrix freqs;  // half_size x d
};

PositiveHalfTable positive_table(const FrequencyLattice& lattice, const LfpCoefficients& c) {
  PositiveHalfTable t{positive_weights(lattice, c),
                      Matrix(static_cast<Eigen::Index>(lattice.half_size()), lattice.dim())};
  for (std::size_t h = 0; h < lattice.half_size(); ++h) {
    const auto f = lattice.frequency(lattice.positive(h));
    for (int a = 0; a < lattice.dim(); ++a) t.freqs(static_cast<Eigen::Index>(h), a) = f[a];
  }
  return t;
}

double kernel_value(const PositiveHalfTable& t, const double* diff, int dim) {
  double acc = 0.0;
  const auto n = static_cast<Eigen::Index>(t.weights.size());
  for (Eigen::Index h = 0; h < n; ++h) {
    double phase = 0.0;
    for (int a = 0; a < dim; ++a) phase += t.freqs(h, a) * diff[a];
    acc += t.weights[static_cast<std::size_t>(h)] * std::cos(two_pi * phase);
  }
  return 2.0 * acc;
}

}  // namespace

Matrix kernel_matrix(const Matrix& a, const Matrix& b, const FrequencyLattice& lattice,
                     const LfpCoefficients& c) {
  require(a.cols() == lattice.dim() && b.cols() == lattice.dim(),
          ErrorCode::dimension_mismatch, "point dimension does not match the lattice");
  const PositiveHalfTable t = positive_table(lattice, c);
  const int d = lattice.dim();
  Matrix k(a.rows(), b.rows());
  std::vector<double> diff(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      for (int q = 0; q < d; ++q) diff[static_cast<std::size_t>(q)] = a(i, q) - b(j, q);
      k(i, j) = kernel_value(t, diff.data(), d);
    }
  }
  return k;
}

Matrix gram_matrix(const Matrix& inputs, const FrequencyLattice& lattice,
                   const LfpCoefficients& c) {
  require(inputs.rows() >= 1, ErrorCode::invalid_argument, "Gram matrix needs points");
  require(inputs.cols() == lattice.dim(), ErrorCode::dimension_mismatch,
          "point dimension does not match the lattice");
  require(lattice.size() > 0, ErrorCode::invalid_argument, "lattice is empty");
  const PositiveHalfTable t = positive_table(lattice, c);
  const int d = lattice.dim();
  const Eigen::Index m = inputs.rows();
  Matrix g(m, m);
  std::vector<double> diff(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      for (int q = 0; q < d; ++q) diff[static_cast<std::size_t>(q)] = inputs(i, q) - inputs(j, q);
      g(i, j) = kernel_value(t, diff.data(), d);
      g(j, i) = g(i, j);
    }
  }
  return g;
}

namespace {

class AugmentedSolver {
 public:
  AugmentedSolver(const Matrix& system, bool with_intercept)
      : llt_(system), with_intercept_(with_intercept) {
    if (llt_.info() != Eigen::Success) {
      fail(ErrorCode::singular,
           "ridge system is not positive definite (Cholesky failed); the Gram "
           "matrix is singular for these inputs");
    }
    rcond_ = llt_.rcond();
    if (!(rcond_ > std::numeric_limits<double>::epsilon())) {
      fail(ErrorCode::singular, "ridge system is numerically singular, condition estimate " +
                                    std::to_string(rcond_ > 0 ? 1.0 / rcond_ : INFINITY));
    }
    if (with_intercept_) {
      ones_solve_ = llt_.solve(Vector::Ones(system.rows()));
      ones_dot_ = ones_solve_.sum();
    }
  }

  double rcond() const { return rcond_; }

  // Solves [[S, 1], [1^T, 0]] [alpha; b] = [top; bottom] (or S alpha = top).
  void solve(const Vector& top, double bottom, Vector& alpha, double& b) const {
    Vector u = llt_.solve(top);
    if (!with_intercept_) {
      alpha = std::move(u);
      b = 0.0;
      return;
    }
    b = (u.sum() - bottom) / ones_dot_;
    alpha = u - b * ones_solve_;
  }

 private:
  Eigen::LLT<Matrix> llt_;
  bool with_intercept_;
  double rcond_ = 0.0;
  Vector ones_solve_;
  double ones_dot_ = 0.0;
};

}  // namespace

LfpSolution solve_lfp(const Dataset& data, LatticePtr lattice, const LfpCoefficients& c,
                      const RidgeConfig& cfg, const SpectralSolution* initial) {
  cfg.validate();
  c.validate();
  require(lattice != nullptr, ErrorCode::invalid_argument, "solve_lfp needs a lattice");
  require(static_cast<int>(data.dim()) == lattice->dim() && c.dim == lattice->dim(),
          ErrorCode::dimension_mismatch,
          "dataset, lattice and coefficient dimensions must agree");
  if (initial != nullptr) {
    require(initial->lattice().dim() == lattice->dim() &&
                initial->lattice().half_size() == lattice->half_size() &&
                initial->lattice().period() == lattice->period(),
            ErrorCode::dimension_mismatch, "initial spectrum lives on a different lattice");
  }

  DualSolution dual;
  dual.lattice = lattice;
  dual.coeffs = c;
  dual.config = cfg;
  dual.inputs = data.inputs();
  dual.targets = data.targets();
  if (initial != nullptr) dual.initial = *initial;

  Vector rhs = data.targets();
  if (initial != nullptr) rhs -= evaluate_spectrum(*initial, data.inputs());

  dual.gram = gram_matrix(data.inputs(), *lattice, c);
  const Eigen::Index m = dual.gram.rows();
  Matrix system = dual.gram;
  system.diagonal().array() += cfg.epsilon;

  const bool with_intercept = cfg.intercept == InterceptMode::unpenalized;
  const AugmentedSolver solver(system, with_intercept);
  dual.rcond = solver.rcond();

  solver.solve(rhs, 0.0, dual.alpha, dual.intercept);
  const double scale = rhs.norm();
  auto residual = [&](Vector& r_top, double& r_bottom) {
    r_top = rhs - system * dual.alpha;
    if (with_intercept) r_top.array() -= dual.intercept;
    r_bottom = with_intercept ? -dual.alpha.sum() : 0.0;
    const double n = std::sqrt(r_top.squaredNorm() + r_bottom * r_bottom);
    return scale > 0.0 ? n / scale : n;
  };
  Vector r_top(m);
  double r_bottom = 0.0;
  double rel = residual(r_top, r_bottom);
  for (int it = 0; it < cfg.max_refinements && rel > cfg.solver_tolerance; ++it) {
    Vector d_alpha;
    double d_b = 0.0;
    solver.solve(r_top, r_bottom, d_alpha, d_b);
    dual.alpha += d_alpha;
    dual.intercept += d_b;
    const double next = residual(r_top, r_bottom);
    if (!(next < rel)) {
      rel = next;
      break;
    }
    rel = next;
  }
  dual.system_residual = rel;

  // h(xi) = c(xi) sum_i alpha_i exp(-2 pi i xi·x_i) on the positive half.
  const std::vector<double> weights = positive_weights(*lattice, c);
  std::vector<Complex> coeffs(lattice->half_size());
  std::vector<double> x(data.dim());
  for (std::size_t h = 0; h < coeffs.size(); ++h) {
    const std::size_t j = lattice->positive(h);
    Complex acc{0.0, 0.0};
    for (Eigen::Index i = 0; i < m; ++i) {
      for (std::size_t a = 0; a < x.size(); ++a) x[a] = data.inputs()(i, static_cast<Eigen::Index>(a));
      const double t = two_pi * lattice->dot(j, x);
      acc += dual.alpha(i) * Complex(std::cos(t), -std::sin(t));
    }
    coeffs[h] = weights[h] * acc;
  }
  SpectralSolution spectral(lattice, std::move(coeffs), dual.intercept);
  if (initial != nullptr) spectral += *initial;

  return LfpSolution{std::move(dual), std::move(spectral)};
}

Vector predict(const DualSolution& sol, const Matrix& points) {
  require(points.cols() == sol.inputs.cols(), ErrorCode::dimension_mismatch,
          "prediction points have the wrong dimension");
  Vector out = kernel_matrix(points, sol.inputs, *sol.lattice, sol.coeffs) * sol.alpha;
  out.array() += sol.intercept;
  if (sol.initial) out += evaluate_spectrum(*sol.initial, points);
  return out;
}

Vector predict(const SpectralSolution& sol, const Matrix& points) {
  return evaluate_spectrum(sol, points);
}

double interpolation_residual(const DualSolution& sol, const Dataset& data) {
  return (predict(sol, data.inputs()) - data.targets()).cwiseAbs().maxCoeff();
}

double interpolation_residual(const SpectralSolution& sol, const Dataset& data) {
  return (predict(sol, data.inputs()) - data.targets()).cwiseAbs().maxCoeff();
}

double largest_eigenvalue(const Matrix& symmetric, int max_iterations, double tolerance) {
  require(symmetric.rows() == symmetric.cols() && symmetric.rows() > 0,
          ErrorCode::dimension_mismatch, "power iteration needs a square matrix");
  const Eigen::Index n = symmetric.rows();
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.1 * static_cast<double>(i % 7);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector w = symmetric * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - lambda) <= tolerance * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  // One more Rayleigh quotient on the final iterate.
  return std::max(lambda, v.dot(symmetric * v));
}

}  // namespace lfp
