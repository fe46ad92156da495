#include "doctest.h"
#include "lfp/flow.hpp"
#include "oracles.hpp"

#include <random>

using namespace lfp;

TEST_CASE("closed form on small matrices") {
  auto solve = [](Matrix p, Vector g, Vector u0) {
    return min_norm_closed_form(LinearFlowProblem(std::move(p), std::move(g), std::move(u0)));
  };
  Matrix p(1, 2);
  p << 1, 0;
  Vector g(1);
  g << 2;
  Vector u = solve(p, g, Vector::Zero(2));
  CHECK(u(0) == doctest::Approx(2.0));
  CHECK(u(1) == doctest::Approx(0.0));

  Vector u0(2);
  u0 << 0, 5;
  u = solve(p, g, u0);
  CHECK(u(0) == doctest::Approx(2.0));
  CHECK(u(1) == doctest::Approx(5.0));

  p << 1, 1;
  u = solve(p, g, Vector::Zero(2));
  CHECK(u(0) == doctest::Approx(1.0));
  CHECK(u(1) == doctest::Approx(1.0));

  Matrix dup(2, 3);
  dup << 1, 2, 3, 1, 2, 3;
  try {
    LinearFlowProblem(dup, Vector::Zero(2), Vector::Zero(3));
    FAIL("expected rank_deficient");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::rank_deficient);
  }
  CHECK_THROWS_AS(LinearFlowProblem(Matrix::Ones(3, 2), Vector::Zero(3), Vector::Zero(2)), Error);
}

TEST_CASE("linear flow trajectories") {
  Matrix p(1, 1);
  p << 1.7;
  Vector g(1), u0(1);
  g << 0.9;
  u0 << -0.4;
  const LinearFlowProblem scalar(p, g, u0);
  for (Integrator integ : {Integrator::rk4, Integrator::euler}) {
    LinearFlowOptions opt;
    opt.integrator = integ;
    opt.t_end = 0.8;
    opt.dt = integ == Integrator::rk4 ? 1e-3 : 1e-5;
    const auto r = integrate_linear_flow(scalar, opt);
    const double c = 1.7;
    const double exact = g(0) / c + (u0(0) - g(0) / c) * std::exp(-c * c * 0.8);
    CHECK(r.t == doctest::Approx(0.8));
    CHECK(r.u(0) == doctest::Approx(exact).epsilon(integ == Integrator::rk4 ? 1e-12 : 1e-4));
  }

  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  Matrix big(5, 20);
  for (Eigen::Index i = 0; i < big.size(); ++i) big.data()[i] = n(rng);
  Vector gb(5), ub(20);
  for (auto& v : gb) v = n(rng);
  for (auto& v : ub) v = n(rng);
  const LinearFlowProblem prob(big, gb, ub);
  const double smin = prob.singular_values().minCoeff();
  LinearFlowOptions opt;
  opt.t_end = 40.0 / (smin * smin);
  const auto r = integrate_linear_flow(prob, opt);
  const Vector closed = min_norm_closed_form(prob);
  CHECK((r.u - closed).norm() / closed.norm() < 1e-6);

  const LinearFlowProblem still(big, big * ub, ub);
  opt.t_end = 5.0;
  CHECK((integrate_linear_flow(still, opt).u - ub).norm() < 1e-12);

  LinearFlowOptions unstable;
  unstable.dt = 2.5 / prob.singular_values()(0) / prob.singular_values()(0);
  try {
    integrate_linear_flow(prob, unstable);
    FAIL("expected step_size");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::step_size);
  }
}

TEST_CASE("spectral flow reductions") {
  const auto lat = build_lattice(1, 1.0, 2);
  const auto c = make_coefficients(1, 0, 1);
  Matrix x(1, 1);
  x << 0.0;
  Vector y(1);
  y << 1.0;
  const Dataset one(x, y);
  SpectralFlowOptions opt;
  opt.dt = 1e-3;
  opt.t_max = 0.7;
  const auto r = integrate_spectral_flow(one, lat, c, nullptr, opt);
  const double h0 = evaluate_spectrum(r.final_state, std::span<const double>(x.data(), 1));
  CHECK(h0 == doctest::Approx(1.0 - std::exp(-2.0 * r.t)).epsilon(1e-10));

  const Dataset zero(x, Vector::Zero(1));
  const auto z = integrate_spectral_flow(zero, lat, c, nullptr, {});
  CHECK(spectral_l2_norm(z.final_state) == 0.0);
  CHECK(z.converged);
}

TEST_CASE("spectral flow limit equals the ridge limit") {
  const auto lat = build_lattice(1, 1.0, 16);
  const auto c = make_coefficients(0.8, 1.1, 1);
  Matrix x(4, 1);
  x << 0.05, 0.31, 0.52, 0.84;
  Vector y(4);
  y << 0.3, -1.0, 0.7, 0.2;
  const Dataset data(x, y);
  const auto flow = integrate_spectral_flow(data, lat, c, nullptr, {});
  REQUIRE(flow.converged);
  RidgeConfig cfg;
  cfg.epsilon = 1e-10;
  cfg.intercept = InterceptMode::none;
  const auto ridge = solve_lfp(data, lat, c, cfg);
  CHECK(relative_l2_distance(flow.final_state, ridge.spectral) < 1e-5);

  const auto h = oracle::min_norm_spectrum(x, y, oracle::enumerate_lattice(1, 1.0, 16), 0.8, 1.1);
  double diff = 0.0, norm = 0.0;
  for (std::size_t j = 0; j < lat->size(); ++j) {
    diff += std::norm(flow.final_state.coefficient(j) - h(static_cast<Eigen::Index>(j)));
    norm += std::norm(h(static_cast<Eigen::Index>(j)));
  }
  CHECK(std::sqrt(diff / norm) < 1e-5);
}

TEST_CASE("low frequencies converge first") {
  const auto lat = build_lattice(1, 1.0, 16);
  const auto c = make_coefficients(1.0, 1.0, 1);
  const int m = 32;
  Matrix x(m, 1);
  Vector y(m);
  for (int i = 0; i < m; ++i) {
    x(i, 0) = double(i) / m;
    y(i) = std::sin(2 * oracle::pi * x(i, 0)) + std::sin(2 * oracle::pi * 6 * x(i, 0));
  }
  const Dataset data(x, y);
  SpectralFlowOptions opt;
  opt.tracked = {0, 5};
  opt.record_every = 1;
  const auto run = integrate_spectral_flow(data, lat, c, nullptr, opt);
  REQUIRE(run.converged);
  const auto table = per_frequency_convergence(run, run.final_state);
  REQUIRE(table.size() == 2);
  CHECK(table[0].norm < table[1].norm);
  REQUIRE(table[0].time_to_half.has_value());
  REQUIRE(table[1].time_to_half.has_value());
  CHECK(*table[0].time_to_half <= *table[1].time_to_half);
}

TEST_CASE("weighted formulation round trip") {
  const auto lat = build_lattice(2, 1.0, 4);
  const auto c = make_coefficients(1.0, 0.5, 2);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  Matrix x(3, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  const Dataset data(x, Vector::Ones(3));
  std::vector<Complex> half(lat->half_size());
  for (auto& h : half) h = Complex(n(rng), n(rng));
  const SpectralSolution s(lat, half, 0.0);
  const auto wf = weighted_formulation(data, lat, c, &s);
  const Vector v = wf.to_weighted(s);
  CHECK(v.norm() == doctest::Approx(fp_norm(s, c)).epsilon(1e-12));
  CHECK(relative_l2_distance(wf.to_spectrum(v), s) < 1e-14);
  const Vector at_x = wf.problem->p() * v;
  const Vector direct = evaluate_spectrum(s, x);
  CHECK((at_x - direct).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("equivalence report") {
  const auto lat = build_lattice(1, 1.0, 10);
  const auto c = make_coefficients(1.2, 0.6, 1);
  Matrix x(3, 1);
  x << 0.1, 0.45, 0.8;
  const Dataset zero(x, Vector::Zero(3));
  const auto z = equivalence_report(zero, lat, c, nullptr);
  CHECK(z.max_distance() == 0.0);
  CHECK(spectral_l2_norm(z.closed_form) == 0.0);

  Vector y(3);
  y << 1.0, -0.5, 0.25;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  const auto w = positive_weights(*lat, c);
  std::vector<Complex> half(w.size());
  for (std::size_t h = 0; h < w.size(); ++h) {
    half[h] = 0.3 * std::sqrt(w[h]) * Complex(n(rng), n(rng));
  }
  const SpectralSolution h_ini(lat, half, 0.0);
  const Dataset data(x, y);
  const auto rep = equivalence_report(data, lat, c, &h_ini);
  CHECK(rep.max_distance() < 1e-5);

  const auto wf = weighted_formulation(data, lat, c, &h_ini);
  const Vector d = wf.to_weighted(rep.flow_limit) - wf.problem->u_ini();
  Vector z0(d.size());
  for (auto& e : z0) e = n(rng);
  const Vector nz = project_null_space(wf.problem->p(), z0);
  CHECK(std::abs(d.dot(nz)) < 1e-6 * d.norm() * nz.norm());
}
