#include "doctest.h"
#include "lfp/solver.hpp"
#include "oracles.hpp"

#include <random>

using namespace lfp;

namespace {

Dataset random_1d(std::size_t m, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::normal_distribution<double> n;
  Matrix x(static_cast<Eigen::Index>(m), 1);
  Vector y(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x(i, 0) = u(rng);
    y(i) = n(rng);
  }
  return Dataset(x, y);
}

}  // namespace

TEST_CASE("gram matrix") {
  const auto lat = build_lattice(1, 1.0, 2);
  const auto c = make_coefficients(1, 0, 1);
  Matrix x(2, 1);
  x << 0.0, 0.5;
  const Matrix g = gram_matrix(x, *lat, c);
  CHECK(g(0, 1) == doctest::Approx(-2.0));
  CHECK(g(0, 0) == doctest::Approx(2.0));

  const auto lat2 = build_lattice(1, 2.0, 9);
  const auto c2 = make_coefficients(0.4, 1.3, 1);
  const Dataset data = random_1d(6, 11);
  const Matrix gl = gram_matrix(data.inputs(), *lat2, c2);
  const Matrix go = oracle::gram(data.inputs(), oracle::enumerate_lattice(1, 2.0, 9), 0.4, 1.3);
  CHECK((gl - go).cwiseAbs().maxCoeff() < 1e-12 * go.cwiseAbs().maxCoeff());
  const double gamma = gamma_l2_norm(*lat2, c2);
  CHECK(gl(3, 3) == doctest::Approx(gamma * gamma).epsilon(1e-13));

  Matrix x2(3, 2);
  x2 << 0.1, 0.2, -0.3, 0.7, 0.5, -0.5;
  const auto lat3 = build_lattice(2, 3.0, 5);
  const Matrix g2 = gram_matrix(x2, *lat3, make_coefficients(1.0, 0.5, 2));
  const Matrix g2o = oracle::gram(x2, oracle::enumerate_lattice(2, 3.0, 5), 1.0, 0.5);
  CHECK((g2 - g2o).cwiseAbs().maxCoeff() < 1e-12 * g2o.cwiseAbs().maxCoeff());
}

TEST_CASE("trivial solves") {
  const auto lat = build_lattice(1, 4.0, 20);
  const auto c = make_coefficients(1, 1, 1);
  Matrix x(1, 1);
  x << 0.0;
  Vector y(1);
  y << 1.0;
  const auto sol = solve_lfp(Dataset(x, y), lat, c, {});
  CHECK(sol.dual.alpha.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(sol.dual.intercept == doctest::Approx(1.0));
  CHECK(spectral_l2_norm(sol.spectral - SpectralSolution(lat, std::vector<Complex>(lat->half_size()),
                                                         sol.spectral.intercept())) < 1e-12);

  const Dataset zero = random_1d(5, 2).with_targets(Vector::Zero(5));
  const auto z = solve_lfp(zero, lat, c, {});
  CHECK(z.dual.alpha.norm() == 0.0);
  CHECK(z.dual.intercept == 0.0);
  CHECK(spectral_l2_norm(z.spectral) == 0.0);
  CHECK(interpolation_residual(z.spectral, zero) == 0.0);
}

TEST_CASE("ridge solution matches the minimum-norm oracle") {
  const auto lat = build_lattice(1, 1.0, 12);
  const auto c = make_coefficients(0.5, 1.5, 1);
  const Dataset data = random_1d(5, 7, 0.0, 1.0);
  RidgeConfig cfg;
  cfg.epsilon = 0.0;
  cfg.intercept = InterceptMode::none;
  const auto sol = solve_lfp(data, lat, c, cfg);

  const auto ref_lat = oracle::enumerate_lattice(1, 1.0, 12);
  const auto h = oracle::min_norm_spectrum(data.inputs(), data.targets(), ref_lat, 0.5, 1.5);
  double diff = 0.0, norm = 0.0;
  for (std::size_t j = 0; j < lat->size(); ++j) {
    diff += std::norm(sol.spectral.coefficient(j) - h(static_cast<Eigen::Index>(j)));
    norm += std::norm(h(static_cast<Eigen::Index>(j)));
  }
  CHECK(std::sqrt(diff / norm) < 1e-9);
  CHECK(fp_norm(sol.spectral, c) ==
        doctest::Approx(oracle::fp_norm(h, ref_lat, 0.5, 1.5, 1)).epsilon(1e-9));
  CHECK(interpolation_residual(sol.spectral, data) < 1e-10);
}

TEST_CASE("regularization path") {
  const auto lat = build_lattice(1, 20.0, 2000);
  const auto c = make_coefficients(0.0245, 0.0028, 1);
  const Dataset data = random_1d(12, 1);
  double prev = std::numeric_limits<double>::infinity();
  const double ymax = data.targets().cwiseAbs().maxCoeff();
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
    RidgeConfig cfg;
    cfg.epsilon = eps;
    const auto sol = solve_lfp(data, lat, c, cfg);
    const double res = interpolation_residual(sol.spectral, data);
    const double predicted = eps * sol.dual.alpha.cwiseAbs().maxCoeff();
    CHECK(res == doctest::Approx(predicted).epsilon(1e-4));
    CHECK(res <= prev);
    if (eps <= 1e-6) CHECK(res < 1e-3 * ymax);
    prev = res;
  }
}

TEST_CASE("dual and spectral predictions agree") {
  const auto lat = build_lattice(1, 5.0, 80);
  const auto c = make_coefficients(1.0, 2.0, 1);
  const Dataset data = random_1d(8, 3);
  const auto sol = solve_lfp(data, lat, c, {});
  Matrix pts(200, 1);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) pts(i, 0) = u(rng);
  const Vector a = predict(sol.dual, pts);
  const Vector b = predict(sol.spectral, pts);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9 * a.cwiseAbs().maxCoeff());
  const Vector at_train = predict(sol.dual, data.inputs());
  CHECK((at_train - data.targets()).cwiseAbs().maxCoeff() ==
        doctest::Approx(interpolation_residual(sol.dual, data)).epsilon(1e-9));
}

TEST_CASE("shift invariance on a periodic lattice") {
  const auto lat = build_lattice(1, 4.0, 60);
  const auto c = make_coefficients(1.0, 1.0, 1);
  const Dataset data = random_1d(6, 4);
  const double delta = 0.3;
  Matrix shifted = data.inputs().array() + delta;
  const auto a = solve_lfp(data, lat, c, {});
  const auto b = solve_lfp(Dataset(shifted, data.targets()), lat, c, {});
  for (double x : {-0.8, -0.2, 0.1, 0.55}) {
    const double xs = x + delta;
    CHECK(evaluate_spectrum(b.spectral, std::span<const double>(&xs, 1)) ==
          doctest::Approx(evaluate_spectrum(a.spectral, std::span<const double>(&x, 1))).epsilon(1e-8));
  }
}

TEST_CASE("solver validation") {
  const auto lat = build_lattice(2, 1.0, 3);
  const Dataset data = random_1d(3, 1);
  CHECK_THROWS_AS(solve_lfp(data, lat, make_coefficients(1, 1, 2), {}), Error);
  RidgeConfig bad;
  bad.epsilon = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);

  Matrix same(2, 1);
  same << 0.25, 0.25;
  Vector y(2);
  y << 1.0, 2.0;
  try {
    Dataset(same, y);
    FAIL("expected coincident inputs to be rejected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
  }

  // Points one period apart are indistinguishable to every lattice frequency.
  Matrix x(2, 1);
  x << 0.0, 1.0;
  RidgeConfig exact;
  exact.epsilon = 0.0;
  exact.intercept = InterceptMode::none;
  try {
    solve_lfp(Dataset(x, y), build_lattice(1, 1.0, 4), make_coefficients(1, 1, 1), exact);
    FAIL("expected a singular system");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singular);
  }
}

TEST_CASE("largest eigenvalue") {
  Matrix m(3, 3);
  m << 4, 1, 0, 1, 3, 0, 0, 0, 1;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  CHECK(largest_eigenvalue(m) == doctest::Approx(eig.eigenvalues().maxCoeff()).epsilon(1e-10));
}
