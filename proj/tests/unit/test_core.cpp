#include "doctest.h"

#include <algorithm>
#include <span>
#include "lfp/core.hpp"
#include "oracles.hpp"

#include <random>

using namespace lfp;

TEST_CASE("lattice sizes and ordering") {
  CHECK(build_lattice(1, 20.0, 2000)->size() == 3998);
  CHECK(build_lattice(2, 24.0, 120)->size() == 239u * 239u - 1);

  const auto tiny = build_lattice(1, 1.0, 2);
  REQUIRE(tiny->size() == 2);
  CHECK(tiny->frequency(0)[0] == -1.0);
  CHECK(tiny->frequency(1)[0] == 1.0);

  const auto lat = build_lattice(2, 3.0, 4);
  const auto ref = oracle::enumerate_lattice(2, 3.0, 4);
  REQUIRE(lat->size() == ref.size());
  for (std::size_t j = 0; j < lat->size(); ++j) {
    CHECK(lat->index(j)[0] == ref[j].k[0]);
    CHECK(lat->index(j)[1] == ref[j].k[1]);
    CHECK(lat->norm(j) == doctest::Approx(ref[j].norm).epsilon(1e-15));
    const auto n = lat->negated(j);
    CHECK(lat->index(n)[0] == -lat->index(j)[0]);
    CHECK(lat->index(n)[1] == -lat->index(j)[1]);
  }
  for (std::size_t h = 0; h < lat->half_size(); ++h) {
    const auto k = lat->index(lat->positive(h));
    CHECK((k[0] > 0 || (k[0] == 0 && k[1] > 0)));
  }
}

TEST_CASE("lattice validation") {
  CHECK_THROWS_AS(build_lattice(0, 1.0, 2), Error);
  CHECK_THROWS_AS(build_lattice(1, 0.0, 2), Error);
  CHECK_THROWS_AS(build_lattice(1, 1.0, 1), Error);
  try {
    build_lattice(3, 1.0, 1000, 1000);
    FAIL("expected size_limit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::size_limit);
  }
}

TEST_CASE("lfp coefficient values") {
  const double one = 1.0, two = 2.0;
  CHECK(lfp_coefficient({&one, 1}, make_coefficients(1, 0, 1)) == doctest::Approx(1.0));
  CHECK(lfp_coefficient({&two, 1}, make_coefficients(1, 0, 1)) == doctest::Approx(1.0 / 16));
  CHECK(lfp_coefficient({&one, 1}, make_coefficients(0, 4 * oracle::pi * oracle::pi, 1)) ==
        doctest::Approx(4 * oracle::pi * oracle::pi));
  const double zero = 0.0;
  try {
    lfp_coefficient({&zero, 1}, make_coefficients(1, 1, 1));
    FAIL("expected domain error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::domain);
  }
  CHECK_THROWS_AS(make_coefficients(-1, 1, 1), Error);
  CHECK_THROWS_AS(make_coefficients(0, 0, 1), Error);
}

TEST_CASE("coefficients from moments") {
  std::vector<double> w(7, 1.0), r2(7, 1.0);
  auto c = coefficients_from_moments(w, r2, 1);
  CHECK(c.a == doctest::Approx(2.0));
  CHECK(c.b == doctest::Approx(4 * oracle::pi * oracle::pi));

  std::vector<double> w0(3, 0.0), r0{1.0, 4.0, 9.0};
  c = coefficients_from_moments(w0, r0, 1);
  CHECK(c.b == 0.0);
  CHECK(c.a == doctest::Approx(14.0 / 3));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uw(-0.1, 0.1), ur(-0.25, 0.25);
  std::vector<double> ws(100000), rs(100000);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    ws[i] = uw(rng);
    const double r = ur(rng);
    rs[i] = r * r;
  }
  c = coefficients_from_moments(ws, rs, 1);
  CHECK(c.a == doctest::Approx((0.25 * 0.25 + 0.01) / 3).epsilon(0.02));
  CHECK(c.b == doctest::Approx(4 * oracle::pi * oracle::pi * (0.0625 / 3) * (0.01 / 3)).epsilon(0.02));
}

TEST_CASE("spectrum evaluation") {
  const auto lat = build_lattice(1, 1.0, 4);
  const auto zero = SpectralSolution(lat, std::vector<Complex>(lat->half_size()), 3.0);
  const double x = 0.37;
  CHECK(evaluate_spectrum(zero, std::span<const double>(&x, 1)) == 3.0);

  for (int v = 1; v <= 3; ++v) {
    std::vector<Complex> half(lat->half_size());
    half[static_cast<std::size_t>(v - 1)] = Complex(0.0, -0.5);
    const SpectralSolution s(lat, half, 0.0);
    for (double t : {0.0, 0.1, 0.25, 0.8}) {
      CHECK(evaluate_spectrum(s, std::span<const double>(&t, 1)) == doctest::Approx(std::sin(2 * oracle::pi * v * t)).epsilon(1e-14));
    }
  }

  const auto lat2 = build_lattice(2, 2.0, 3);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  std::vector<Complex> half(lat2->half_size());
  for (auto& h : half) h = Complex(n(rng), n(rng));
  const SpectralSolution s(lat2, half, 0.5);
  const auto ref = oracle::enumerate_lattice(2, 2.0, 3);
  oracle::CVector full(static_cast<Eigen::Index>(lat2->size()));
  for (std::size_t j = 0; j < lat2->size(); ++j) full(static_cast<Eigen::Index>(j)) = s.coefficient(j);
  for (int t = 0; t < 100; ++t) {
    const double p[2] = {n(rng), n(rng)};
    CHECK(evaluate_spectrum(s, std::span<const double>(p, 2)) == doctest::Approx(oracle::evaluate(full, ref, p, 0.5)).epsilon(1e-12));
  }

  std::vector<Complex> full_vec(full.data(), full.data() + full.size());
  const auto back = SpectralSolution::from_full(lat2, full_vec, 0.5);
  CHECK(relative_l2_distance(back, s) == 0.0);
  full_vec[0] += Complex(1.0, 0.0);
  CHECK_THROWS_AS(SpectralSolution::from_full(lat2, full_vec, 0.5), Error);
}

TEST_CASE("fp norm and gamma norm") {
  const auto lat = build_lattice(1, 1.0, 16);
  const auto c = make_coefficients(0.3, 0.7, 1);
  CHECK(fp_norm(SpectralSolution::zero(lat), c) == 0.0);
  double prev = 0.0;
  for (int v = 1; v <= 10; ++v) {
    std::vector<Complex> half(lat->half_size());
    half[static_cast<std::size_t>(v - 1)] = Complex(0.0, -0.5);
    const double value = fp_norm(SpectralSolution(lat, half, 0.0), c);
    CHECK(value == doctest::Approx(std::sqrt(1.0 / (2.0 * c.at_norm(v)))).epsilon(1e-14));
    CHECK(value > prev);
    prev = value;
  }

  CHECK(gamma_l2_norm(*build_lattice(1, 1.0, 2), make_coefficients(1, 0, 1)) ==
        doctest::Approx(std::sqrt(2.0)));
  double last = 0.0;
  for (int k : {10, 100, 1000, 10000}) {
    const double g = gamma_l2_norm(*build_lattice(1, 1.0, k), make_coefficients(0, 1, 1));
    double partial = 0.0;
    for (int q = 1; q < k; ++q) partial += 1.0 / (double(q) * q);
    CHECK(g == doctest::Approx(std::sqrt(2 * partial)).epsilon(1e-12));
    CHECK(g >= last);
    last = g;
  }
  CHECK(last == doctest::Approx(oracle::pi / std::sqrt(3.0)).epsilon(1e-4));
}

TEST_CASE("spectral arithmetic") {
  const auto lat = build_lattice(1, 1.0, 3);
  SpectralSolution a(lat, {Complex(1, 2), Complex(3, 0)}, 1.0);
  const SpectralSolution b(lat, {Complex(0, 1), Complex(-1, 0)}, 2.0);
  const auto s = a + b;
  CHECK(s.positive_half()[0] == Complex(1, 3));
  CHECK(s.intercept() == 3.0);
  const auto d = 2.0 * (a - b);
  CHECK(d.positive_half()[1] == Complex(8, 0));
  const auto other = SpectralSolution::zero(build_lattice(1, 1.0, 4));
  CHECK_THROWS_AS(a += other, Error);
}
