#include "lfp/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lfp {

// ------------------------------------------------------ LinearFlowProblem

LinearFlowProblem::LinearFlowProblem(Matrix p, Vector g, Vector u_ini, double rank_tolerance)
    : p_(std::move(p)), g_(std::move(g)), u_ini_(std::move(u_ini)) {
  require(p_.rows() >= 1 && p_.cols() >= p_.rows(), ErrorCode::dimension_mismatch,
          "P must be M x N with 1 <= M <= N");
  require(g_.size() == p_.rows(), ErrorCode::dimension_mismatch, "g must have M entries");
  require(u_ini_.size() == p_.cols(), ErrorCode::dimension_mismatch,
          "u_ini must have N entries");
  singular_values_ = Eigen::BDCSVD<Matrix>(p_).singularValues();
  const double largest = singular_values_(0);
  const double smallest = singular_values_(singular_values_.size() - 1);
  if (!(largest > 0.0) || smallest <= rank_tolerance * largest) {
    fail(ErrorCode::rank_deficient,
         "P is rank deficient: smallest singular value " + std::to_string(smallest) +
             " vs largest " + std::to_string(largest));
  }
}

Vector min_norm_closed_form(const LinearFlowProblem& problem) {
  const Matrix& p = problem.p();
  const Eigen::LLT<Matrix> llt(p * p.transpose());
  require(llt.info() == Eigen::Success, ErrorCode::rank_deficient, "P P^T is not invertible");
  const Vector rhs = problem.g() - p * problem.u_ini();
  return p.transpose() * llt.solve(rhs) + problem.u_ini();
}

Vector project_null_space(const Matrix& p, const Vector& z) {
  const Eigen::LLT<Matrix> llt(p * p.transpose());
  require(llt.info() == Eigen::Success, ErrorCode::rank_deficient, "P P^T is not invertible");
  return z - p.transpose() * llt.solve(p * z);
}

namespace {

template <class Rate, class State>
void advance(Integrator integrator, double dt, State& s, const Rate& rate) {
  if (integrator == Integrator::euler) {
    s += dt * rate(s);
    return;
  }
  const State k1 = rate(s);
  const State k2 = rate(State(s + (0.5 * dt) * k1));
  const State k3 = rate(State(s + (0.5 * dt) * k2));
  const State k4 = rate(State(s + dt * k3));
  s += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

LinearFlowResult integrate_linear_flow(const LinearFlowProblem& problem,
                                       const LinearFlowOptions& options) {
  require(options.t_end >= 0.0, ErrorCode::invalid_argument, "flow end time must be >= 0");
  const Matrix& p = problem.p();
  const Matrix ppt = p * p.transpose();

  LinearFlowResult out;
  out.lambda_max = largest_eigenvalue(ppt);
  const double bound = 2.0 / out.lambda_max;
  double dt = options.dt > 0.0 ? options.dt : 1.0 / out.lambda_max;
  if (!(dt < bound)) {
    fail(ErrorCode::step_size, "step " + std::to_string(dt) +
                                   " violates the stability bound 2/lambda_max = " +
                                   std::to_string(bound));
  }
  const auto n_steps = static_cast<std::size_t>(std::ceil(options.t_end / dt - 1e-12));
  if (n_steps > 0) dt = options.t_end / static_cast<double>(n_steps);
  out.dt = dt;

  const Vector pt_g = p.transpose() * problem.g();
  const auto rate = [&](const Vector& u) -> Vector { return pt_g - p.transpose() * (p * u); };
  const double g_norm = problem.g().norm();
  const std::size_t every = std::max<std::size_t>(options.record_every, 1);

  out.u = problem.u_ini();
  double residual = (p * out.u - problem.g()).norm();
  out.times.push_back(0.0);
  out.residuals.push_back(residual);
  for (std::size_t step = 0; step < n_steps; ++step) {
    if (options.residual_tolerance > 0.0 && residual <= options.residual_tolerance * g_norm) {
      out.converged = true;
      break;
    }
    advance(options.integrator, dt, out.u, rate);
    out.t = static_cast<double>(step + 1) * dt;
    ++out.steps;
    residual = (p * out.u - problem.g()).norm();
    if (out.steps % every == 0 || step + 1 == n_steps) {
      out.times.push_back(out.t);
      out.residuals.push_back(residual);
    }
  }
  if (options.residual_tolerance > 0.0 && residual <= options.residual_tolerance * g_norm) {
    out.converged = true;
  }
  return out;
}

// ----------------------------------------------------------- spectral flow

namespace {

using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

// exp(-2 pi i xi_h · x_i), positive half x samples.
ComplexMatrix phase_matrix(const FrequencyLattice& lattice, const Matrix& inputs) {
  ComplexMatrix e(static_cast<Eigen::Index>(lattice.half_size()), inputs.rows());
  std::vector<double> x(static_cast<std::size_t>(inputs.cols()));
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    for (Eigen::Index a = 0; a < inputs.cols(); ++a) x[static_cast<std::size_t>(a)] = inputs(i, a);
    for (std::size_t h = 0; h < lattice.half_size(); ++h) {
      const double t = two_pi * lattice.dot(lattice.positive(h), x);
      e(static_cast<Eigen::Index>(h), i) = Complex(std::cos(t), -std::sin(t));
    }
  }
  return e;
}

}  // namespace

SpectralFlowResult integrate_spectral_flow(const Dataset& data, LatticePtr lattice,
                                           const LfpCoefficients& c,
                                           const SpectralSolution* h_ini,
                                           const SpectralFlowOptions& options) {
  c.validate();
  require(lattice != nullptr, ErrorCode::invalid_argument, "flow needs a lattice");
  require(static_cast<int>(data.dim()) == lattice->dim() && c.dim == lattice->dim(),
          ErrorCode::dimension_mismatch, "dataset, lattice and coefficient dimensions differ");
  require(options.t_max > 0.0, ErrorCode::invalid_argument, "t_max must be positive");
  const std::size_t half = lattice->half_size();
  for (std::size_t idx : options.tracked) {
    require(idx < half, ErrorCode::invalid_argument, "tracked frequency index out of range");
  }

  const Matrix gram = gram_matrix(data.inputs(), *lattice, c);
  SpectralFlowResult out{SpectralSolution::zero(lattice)};
  out.lambda_max = largest_eigenvalue(gram);
  out.tracked = options.tracked;
  const double bound = 2.0 / out.lambda_max;
  out.dt = options.dt > 0.0 ? options.dt : 1.5 / out.lambda_max;
  if (!(out.dt < bound)) {
    fail(ErrorCode::step_size, "flow step " + std::to_string(out.dt) +
                                   " violates the stability bound 2/lambda_max(G) = " +
                                   std::to_string(bound));
  }

  const ComplexMatrix e = phase_matrix(*lattice, data.inputs());
  const std::vector<double> weights_std = positive_weights(*lattice, c);
  const ComplexVector weights =
      Eigen::Map<const Vector>(weights_std.data(), static_cast<Eigen::Index>(half)).cast<Complex>();
  const double intercept = h_ini != nullptr ? h_ini->intercept() : 0.0;
  const Vector& y = data.targets();

  ComplexVector state = ComplexVector::Zero(static_cast<Eigen::Index>(half));
  if (h_ini != nullptr) {
    require(h_ini->lattice().half_size() == half, ErrorCode::dimension_mismatch,
            "initial spectrum lives on a different lattice");
    const auto init = h_ini->positive_half();
    for (std::size_t h = 0; h < half; ++h) state(static_cast<Eigen::Index>(h)) = init[h];
  }

  const auto outputs = [&](const ComplexVector& s) -> Vector {
    Vector hx = 2.0 * (e.adjoint() * s).real();
    hx.array() += intercept;
    return hx;
  };
  const auto rate = [&](const ComplexVector& s) -> ComplexVector {
    const Vector r = y - outputs(s);
    return weights.cwiseProduct(e * r.cast<Complex>());
  };
  const auto snapshot = [&](double t, double residual) {
    FlowSnapshot snap{t, residual, {}};
    snap.tracked.reserve(out.tracked.size());
    for (std::size_t idx : out.tracked) snap.tracked.push_back(state(static_cast<Eigen::Index>(idx)));
    out.history.push_back(std::move(snap));
  };

  const double target = options.relative_tolerance * y.norm();
  const std::size_t every = std::max<std::size_t>(options.record_every, 1);
  double residual = (outputs(state) - y).norm();
  snapshot(0.0, residual);
  std::size_t increases = 0;
  while (true) {
    if (residual <= target) {
      out.converged = true;
      break;
    }
    if (out.t >= options.t_max || out.steps >= options.max_steps) {
      out.warning = "flow stopped at t=" + std::to_string(out.t) + " with relative residual " +
                    std::to_string(residual / std::max(y.norm(), 1e-300)) +
                    " above tolerance";
      break;
    }
    advance(options.integrator, out.dt, state, rate);
    ++out.steps;
    out.t = static_cast<double>(out.steps) * out.dt;
    const double next = (outputs(state) - y).norm();
    increases = next > residual ? increases + 1 : 0;
    if (increases >= options.divergence_window) {
      fail(ErrorCode::divergence,
           "spectral flow residual grew for " + std::to_string(increases) +
               " consecutive steps (t=" + std::to_string(out.t) +
               ", residual=" + std::to_string(next) + ", dt=" + std::to_string(out.dt) + ")");
    }
    residual = next;
    if (out.steps % every == 0) snapshot(out.t, residual);
  }
  if (out.history.back().t != out.t) snapshot(out.t, residual);

  const ComplexVector final_rate = rate(state);
  out.final_rate.resize(half);
  std::vector<Complex> coeffs(half);
  for (std::size_t h = 0; h < half; ++h) {
    coeffs[h] = state(static_cast<Eigen::Index>(h));
    out.final_rate[h] = std::abs(final_rate(static_cast<Eigen::Index>(h)));
  }
  out.final_state = SpectralSolution(lattice, std::move(coeffs), intercept);
  return out;
}

std::vector<FrequencyConvergence> per_frequency_convergence(const SpectralFlowResult& run,
                                                            const SpectralSolution& target) {
  require(!run.history.empty(), ErrorCode::invalid_argument, "trajectory has no snapshots");
  const FrequencyLattice& lattice = target.lattice();
  const auto limit = target.positive_half();
  std::vector<FrequencyConvergence> table;
  table.reserve(run.tracked.size());
  for (std::size_t q = 0; q < run.tracked.size(); ++q) {
    const std::size_t idx = run.tracked[q];
    FrequencyConvergence row{idx, lattice.norm(lattice.positive(idx)), std::nullopt};
    const double initial_gap = std::abs(run.history.front().tracked[q] - limit[idx]);
    for (const FlowSnapshot& snap : run.history) {
      if (std::abs(snap.tracked[q] - limit[idx]) <= 0.5 * initial_gap) {
        row.time_to_half = snap.t;
        break;
      }
    }
    table.push_back(row);
  }
  std::stable_sort(table.begin(), table.end(),
                   [](const auto& a, const auto& b) { return a.norm < b.norm; });
  return table;
}

// ------------------------------------------------------ weighted problem

SpectralSolution WeightedFormulation::to_spectrum(const Vector& v) const {
  require(v.size() == static_cast<Eigen::Index>(2 * weights.size()),
          ErrorCode::dimension_mismatch, "weighted vector has the wrong length");
  std::vector<Complex> coeffs(weights.size());
  for (std::size_t h = 0; h < weights.size(); ++h) {
    const double s = std::sqrt(0.5 * weights[h]);
    const auto k = static_cast<Eigen::Index>(2 * h);
    coeffs[h] = Complex(s * v(k), s * v(k + 1));
  }
  return SpectralSolution(lattice, std::move(coeffs), intercept);
}

Vector WeightedFormulation::to_weighted(const SpectralSolution& s) const {
  const auto coeffs = s.positive_half();
  require(coeffs.size() == weights.size(), ErrorCode::dimension_mismatch,
          "spectrum lives on a different lattice");
  Vector v(static_cast<Eigen::Index>(2 * weights.size()));
  for (std::size_t h = 0; h < weights.size(); ++h) {
    const double s_inv = 1.0 / std::sqrt(0.5 * weights[h]);
    const auto k = static_cast<Eigen::Index>(2 * h);
    v(k) = coeffs[h].real() * s_inv;
    v(k + 1) = coeffs[h].imag() * s_inv;
  }
  return v;
}

WeightedFormulation weighted_formulation(const Dataset& data, LatticePtr lattice,
                                         const LfpCoefficients& c,
                                         const SpectralSolution* h_ini) {
  require(lattice != nullptr, ErrorCode::invalid_argument, "weighted problem needs a lattice");
  require(static_cast<int>(data.dim()) == lattice->dim(), ErrorCode::dimension_mismatch,
          "dataset and lattice dimensions differ");
  WeightedFormulation wf;
  wf.lattice = lattice;
  wf.weights = positive_weights(*lattice, c);
  wf.intercept = h_ini != nullptr ? h_ini->intercept() : 0.0;

  const std::size_t half = wf.weights.size();
  const Eigen::Index m = data.inputs().rows();
  Matrix q(m, static_cast<Eigen::Index>(2 * half));
  std::vector<double> x(data.dim());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (std::size_t a = 0; a < x.size(); ++a) x[a] = data.inputs()(i, static_cast<Eigen::Index>(a));
    for (std::size_t h = 0; h < half; ++h) {
      const double t = two_pi * lattice->dot(lattice->positive(h), x);
      const double s = std::sqrt(2.0 * wf.weights[h]);
      q(i, static_cast<Eigen::Index>(2 * h)) = s * std::cos(t);
      q(i, static_cast<Eigen::Index>(2 * h + 1)) = -s * std::sin(t);
    }
  }
  Vector g = data.targets();
  g.array() -= wf.intercept;
  Vector u_ini = h_ini != nullptr ? wf.to_weighted(*h_ini)
                                  : Vector::Zero(static_cast<Eigen::Index>(2 * half));
  wf.problem.emplace(std::move(q), std::move(g), std::move(u_ini));
  return wf;
}

// ------------------------------------------------------ equivalence report

double EquivalenceReport::max_distance() const {
  return std::max({flow_vs_ridge, flow_vs_closed, ridge_vs_closed});
}

EquivalenceReport equivalence_report(const Dataset& data, LatticePtr lattice,
                                     const LfpCoefficients& c, const SpectralSolution* h_ini,
                                     const EquivalenceOptions& options) {
  require(!options.epsilons.empty(), ErrorCode::invalid_argument,
          "equivalence report needs at least one ridge epsilon");

  const WeightedFormulation wf = weighted_formulation(data, lattice, c, h_ini);
  SpectralSolution closed = wf.to_spectrum(min_norm_closed_form(*wf.problem));

  SpectralFlowResult flow = integrate_spectral_flow(data, lattice, c, h_ini, options.flow);

  std::vector<RidgePoint> path;
  std::optional<SpectralSolution> ridge;
  double smallest = INFINITY;
  RidgeConfig cfg;
  cfg.intercept = InterceptMode::none;
  for (double eps : options.epsilons) {
    cfg.epsilon = eps;
    LfpSolution sol = solve_lfp(data, lattice, c, cfg, h_ini);
    path.push_back({eps, relative_l2_distance(sol.spectral, closed),
                    interpolation_residual(sol.spectral, data)});
    if (eps < smallest) {
      smallest = eps;
      ridge = std::move(sol.spectral);
    }
  }

  EquivalenceReport rep{std::move(flow.final_state), std::move(*ridge), std::move(closed)};
  rep.ridge_path = std::move(path);
  rep.flow_vs_ridge = relative_l2_distance(rep.flow_limit, rep.ridge_limit);
  rep.flow_vs_closed = relative_l2_distance(rep.flow_limit, rep.closed_form);
  rep.ridge_vs_closed = relative_l2_distance(rep.ridge_limit, rep.closed_form);
  rep.residual_flow = interpolation_residual(rep.flow_limit, data);
  rep.residual_ridge = interpolation_residual(rep.ridge_limit, data);
  rep.residual_closed = interpolation_residual(rep.closed_form, data);
  rep.flow_converged = flow.converged;
  rep.flow_time = flow.t;
  rep.flow_steps = flow.steps;
  return rep;
}

}  // namespace lfp
