#include "lfp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "parallel.hpp"

namespace lfp {

const char* to_string(BoundVariant variant) { return variant == BoundVariant::i ? "i" : "ii"; }

double rademacher_bound(double q, double gamma_l2, std::size_t m, std::optional<double> c0) {
  require(q >= 0.0 && gamma_l2 >= 0.0, ErrorCode::invalid_argument,
          "Rademacher bound needs non-negative Q and ||gamma||");
  require(m >= 1, ErrorCode::invalid_argument, "Rademacher bound needs M >= 1");
  require(!c0 || *c0 >= 0.0, ErrorCode::invalid_argument, "zero-frequency cap must be >= 0");
  const double root_m = std::sqrt(static_cast<double>(m));
  const double base = q * gamma_l2 / root_m;
  return c0 ? *c0 / root_m + base : base;
}

MonteCarloEstimate empirical_rademacher_mc(const Matrix& points, const FrequencyLattice& lattice,
                                           const LfpCoefficients& c, double q,
                                           std::size_t trials, std::uint64_t seed) {
  require(trials >= 1, ErrorCode::invalid_argument, "Monte-Carlo estimate needs trials >= 1");
  require(q >= 0.0, ErrorCode::invalid_argument, "ball radius Q must be non-negative");
  const Matrix g = gram_matrix(points, lattice, c);
  const Eigen::Index m = g.rows();
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  Vector eps(m);
  std::vector<double> values(trials);
  for (double& value : values) {
    for (Eigen::Index i = 0; i < m; ++i) eps(i) = coin(rng) ? 1.0 : -1.0;
    value = q / static_cast<double>(m) * std::sqrt(std::max(0.0, eps.dot(g * eps)));
  }
  const auto n = static_cast<double>(trials);
  MonteCarloEstimate out;
  out.trials = trials;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (trials > 1) {
    double var = 0.0;
    for (double v : values) var += (v - out.mean) * (v - out.mean);
    out.standard_error = std::sqrt(var / (n - 1.0) / n);
  }
  return out;
}

void BoundInputs::validate() const {
  require(fp_norm_f >= 0.0 && gamma_l2 >= 0.0, ErrorCode::invalid_argument,
          "norms in the bound must be non-negative");
  require(m >= 1, ErrorCode::invalid_argument, "sample count M must be >= 1");
  require(delta > 0.0 && delta < 1.0, ErrorCode::invalid_argument, "delta must lie in (0, 1)");
  require(!sup_norm_f || *sup_norm_f >= 0.0, ErrorCode::invalid_argument,
          "sup norm must be non-negative");
}

double confidence_factor(std::size_t m, double delta) {
  const auto mm = static_cast<double>(m);
  return 2.0 / std::sqrt(mm) + 4.0 * std::sqrt(2.0 * std::log(4.0 / delta) / mm);
}

double generalization_bound(const BoundInputs& inputs, BoundVariant variant) {
  inputs.validate();
  const double product = inputs.fp_norm_f * inputs.gamma_l2;
  const double factor = confidence_factor(inputs.m, inputs.delta);
  if (variant == BoundVariant::i) return product * factor;
  require(inputs.sup_norm_f.has_value(), ErrorCode::missing_field,
          "variant (ii) of the generalization bound needs sup_norm_f");
  return (*inputs.sup_norm_f + 2.0 * product) * factor;
}

double zero_freq_cap(double sup_norm, double fp_norm, double gamma_l2) {
  require(sup_norm >= 0.0 && fp_norm >= 0.0 && gamma_l2 >= 0.0, ErrorCode::invalid_argument,
          "zero-frequency cap needs non-negative norms");
  return sup_norm + fp_norm * gamma_l2;
}

double sup_norm_estimate(const PointFunction& f, const Box& domain, std::size_t resolution) {
  const std::size_t d = domain.lo.size();
  require(d >= 1 && domain.hi.size() == d, ErrorCode::dimension_mismatch,
          "sup-norm domain must have matching lo/hi bounds");
  require(resolution >= 1, ErrorCode::invalid_argument, "grid resolution must be >= 1");
  std::vector<std::size_t> counter(d, 0);
  std::vector<double> x(d);
  double best = 0.0;
  const auto res = static_cast<double>(resolution);
  while (true) {
    for (std::size_t a = 0; a < d; ++a) {
      x[a] = domain.lo[a] + (domain.hi[a] - domain.lo[a]) * static_cast<double>(counter[a]) / res;
    }
    best = std::max(best, std::abs(f(x)));
    std::size_t a = d;
    while (a > 0) {
      --a;
      if (++counter[a] <= resolution) break;
      counter[a] = 0;
      if (a == 0) return best;
    }
  }
}

double sup_norm_estimate(const PointFunction& f, const PointFunction& h_ini, const Box& domain,
                         std::size_t resolution) {
  return sup_norm_estimate([&](std::span<const double> x) { return f(x) - h_ini(x); }, domain,
                           resolution);
}

double zero_freq_cap(const SpectralSolution& difference, const LfpCoefficients& c,
                     double gamma_l2, const Box& domain, std::size_t resolution) {
  const double sup = sup_norm_estimate(
      [&](std::span<const double> x) { return evaluate_spectrum(difference, x); }, domain,
      resolution);
  return zero_freq_cap(sup, fp_norm(difference, c), gamma_l2);
}

SpectralSolution spectrum_from_samples(const PointFunction& f, LatticePtr lattice,
                                       std::size_t samples_per_axis) {
  require(lattice != nullptr, ErrorCode::invalid_argument, "spectrum needs a lattice");
  require(samples_per_axis >= 1, ErrorCode::invalid_argument, "need at least one sample per axis");
  const auto d = static_cast<std::size_t>(lattice->dim());
  const std::size_t s = samples_per_axis;
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) total *= s;

  std::vector<double> values(total);
  std::vector<double> x(d);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rest = n;
    for (std::size_t a = d; a-- > 0;) {
      x[a] = lattice->period() * static_cast<double>(rest % s) / static_cast<double>(s);
      rest /= s;
    }
    values[n] = f(x);
  }

  std::vector<double> cos_table(s);
  std::vector<double> sin_table(s);
  for (std::size_t q = 0; q < s; ++q) {
    const double t = two_pi * static_cast<double>(q) / static_cast<double>(s);
    cos_table[q] = std::cos(t);
    sin_table[q] = std::sin(t);
  }

  const auto inv_total = 1.0 / static_cast<double>(total);
  std::vector<Complex> coeffs(lattice->half_size());
  const auto ls = static_cast<long long>(s);
  for (std::size_t h = 0; h < coeffs.size(); ++h) {
    const auto k = lattice->index(lattice->positive(h));
    Complex acc{0.0, 0.0};
    for (std::size_t n = 0; n < total; ++n) {
      std::size_t rest = n;
      long long phase = 0;
      for (std::size_t a = d; a-- > 0;) {
        phase += static_cast<long long>(k[a]) * static_cast<long long>(rest % s);
        rest /= s;
      }
      const auto q = static_cast<std::size_t>(((phase % ls) + ls) % ls);
      acc += values[n] * Complex(cos_table[q], -sin_table[q]);
    }
    coeffs[h] = acc * inv_total;
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) * inv_total;
  return SpectralSolution(std::move(lattice), std::move(coeffs), mean);
}

TruncationReport gamma_truncation(int dim, double period, int half_width,
                                  const LfpCoefficients& c) {
  TruncationReport out;
  out.at_k = gamma_l2_norm(*build_lattice(dim, period, half_width), c);
  out.at_2k = gamma_l2_norm(*build_lattice(dim, period, 2 * half_width), c);
  out.relative_difference = out.at_2k > 0.0 ? (out.at_2k - out.at_k) / out.at_2k : 0.0;
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t q = i; q <= j; ++q) ranks[order[q]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::dimension_mismatch,
          "Spearman correlation needs paired samples");
  if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

void SweepConfig::validate() const {
  require(!frequencies.empty(), ErrorCode::config, "sweep needs at least one frequency");
  for (double v : frequencies) {
    require(std::isfinite(v) && v > 0.0, ErrorCode::config, "sweep frequencies must be positive");
  }
  require(train_samples >= 1 && test_samples >= 1, ErrorCode::config,
          "sweep needs training and test samples");
  require(width >= 2 && width % 2 == 0, ErrorCode::config,
          "sweep width counts neurons after ASI and must be even");
  require(lattice_period > 0.0 && lattice_half_width >= 2, ErrorCode::config,
          "sweep lattice needs L' > 0 and K >= 2");
  require(delta > 0.0 && delta < 1.0, ErrorCode::config, "delta must lie in (0, 1)");
  require(workers >= 1, ErrorCode::config, "workers must be >= 1");
  init.validate();
  train.validate();
}

namespace {

Dataset sine_samples(double v, std::size_t m, bool include_right_end) {
  Matrix x(static_cast<Eigen::Index>(m), 1);
  Vector y(static_cast<Eigen::Index>(m));
  const double denom = include_right_end && m > 1 ? static_cast<double>(m - 1)
                                                  : static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    x(i, 0) = static_cast<double>(j) / denom;
    y(i) = std::sin(two_pi * v * x(i, 0));
  }
  return Dataset(std::move(x), std::move(y));
}

std::size_t dft_samples(int half_width) { return static_cast<std::size_t>(4 * half_width); }

}  // namespace

SweepResult fpnorm_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const LatticePtr lattice = build_lattice(1, cfg.lattice_period, cfg.lattice_half_width);
  SweepResult out;
  out.rows.resize(cfg.frequencies.size());

  detail::parallel_for(cfg.frequencies.size(), cfg.workers, [&](std::size_t idx) {
    SweepRow& row = out.rows[idx];
    const double v = cfg.frequencies[idx];
    row.v = v;
    try {
      InitSpec spec = cfg.init;
      spec.seed = cfg.seed + idx;
      const TwoLayerNet net = apply_asi(init_net(1, cfg.width / 2, spec, NetForm::general));
      const LfpCoefficients c = coefficients_from_init(net);
      row.a = c.a;
      row.b = c.b;

      const PointFunction target = [v](std::span<const double> x) {
        return std::sin(two_pi * v * x[0]);
      };
      const SpectralSolution f_hat =
          spectrum_from_samples(target, lattice, dft_samples(cfg.lattice_half_width));
      row.fp_norm = fp_norm(f_hat, c);
      const double gamma = gamma_l2_norm(*lattice, c);
      BoundInputs in;
      in.fp_norm_f = row.fp_norm;
      in.gamma_l2 = gamma;
      in.sup_norm_f = sup_norm_estimate(target, Box{{0.0}, {1.0}}, cfg.sup_resolution);
      in.m = cfg.train_samples;
      in.delta = cfg.delta;
      row.bound_i = generalization_bound(in, BoundVariant::i);
      row.bound_ii = generalization_bound(in, BoundVariant::ii);

      const Dataset train_data = sine_samples(v, cfg.train_samples, false);
      const Dataset test_data = sine_samples(v, cfg.test_samples, true);
      const TrainResult trained = train(net, train_data, cfg.train);
      row.train_loss = trained.final_loss;
      row.steps = trained.steps;
      row.stop_reason = to_string(trained.reason);
      row.test_loss = loss(trained.net, test_data);
    } catch (const std::exception& e) {
      row.error = e.what();
      row.train_loss = row.test_loss = std::numeric_limits<double>::quiet_NaN();
    }
  });

  double max_fp = 0.0;
  for (const auto& row : out.rows) {
    if (std::isfinite(row.fp_norm)) max_fp = std::max(max_fp, row.fp_norm);
  }
  for (auto& row : out.rows) row.fp_norm_normalized = max_fp > 0.0 ? row.fp_norm / max_fp : 0.0;

  std::vector<std::size_t> order(out.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto i, auto j) { return out.rows[i].v < out.rows[j].v; });
  out.fp_norm_increasing = true;
  for (std::size_t q = 1; q < order.size(); ++q) {
    const auto& prev = out.rows[order[q - 1]];
    const auto& cur = out.rows[order[q]];
    if (!(cur.v > prev.v && cur.fp_norm > prev.fp_norm)) out.fp_norm_increasing = false;
  }

  std::vector<double> fps;
  std::vector<double> tests;
  for (const auto& row : out.rows) {
    if (row.error.empty()) {
      fps.push_back(row.fp_norm);
      tests.push_back(row.test_loss);
    }
  }
  out.spearman_fp_vs_test = spearman(fps, tests);
  return out;
}

void BoundValidityConfig::validate() const {
  require(tasks >= 1 && samples >= 1, ErrorCode::config, "bound validity needs tasks and samples");
  require(v_max >= 1.0, ErrorCode::config, "v_max must be >= 1");
  require(delta > 0.0 && delta < 1.0, ErrorCode::config, "delta must lie in (0, 1)");
  require(init_width >= 2 && init_width % 2 == 0, ErrorCode::config,
          "initialization width counts neurons after ASI and must be even");
  require(lattice_period > 0.0 && lattice_half_width >= 2, ErrorCode::config,
          "lattice needs L' > 0 and K >= 2");
  require(epsilon >= 0.0 && risk_grid >= 1, ErrorCode::config,
          "epsilon must be >= 0 and the risk grid non-empty");
}

BoundValidityResult bound_validity(const BoundValidityConfig& cfg) {
  cfg.validate();
  const LatticePtr lattice = build_lattice(1, cfg.lattice_period, cfg.lattice_half_width);
  const auto v_count = static_cast<std::size_t>(std::floor(cfg.v_max));

  Matrix grid(static_cast<Eigen::Index>(cfg.risk_grid), 1);
  for (Eigen::Index n = 0; n < grid.rows(); ++n) {
    grid(n, 0) = (static_cast<double>(n) + 0.5) / static_cast<double>(cfg.risk_grid);
  }

  BoundValidityResult out;
  std::size_t holding = 0;
  for (std::size_t s = 0; s < cfg.tasks; ++s) {
    BoundValidityRow row;
    row.task = s;
    row.v = static_cast<double>(1 + s % v_count);
    const double v = row.v;
    const PointFunction target = [v](std::span<const double> x) {
      return std::sin(two_pi * v * x[0]);
    };

    std::mt19937_64 rng(cfg.seed + s);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix x(static_cast<Eigen::Index>(cfg.samples), 1);
    Vector y(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      x(i, 0) = unif(rng);
      y(i) = target(std::span<const double>(&x(i, 0), 1));
    }
    const Dataset data(std::move(x), std::move(y));

    InitSpec spec{Distribution::xavier_normal(), Distribution::xavier_normal(),
                  Distribution::uniform(-1.0, 1.0), cfg.seed + s};
    const LfpCoefficients c =
        coefficients_from_init(init_net(1, cfg.init_width / 2, spec, NetForm::general));

    RidgeConfig ridge;
    ridge.epsilon = cfg.epsilon;
    const LfpSolution sol = solve_lfp(data, lattice, c, ridge);

    const Vector truth = grid.col(0).unaryExpr([v](double t) { return std::sin(two_pi * v * t); });
    row.risk = (evaluate_spectrum(sol.spectral, grid) - truth).squaredNorm() /
               static_cast<double>(grid.rows());

    const SpectralSolution f_hat =
        spectrum_from_samples(target, lattice, dft_samples(cfg.lattice_half_width));
    row.fp_norm_target = fp_norm(f_hat, c);
    row.fp_norm_solution = fp_norm(sol.spectral, c);
    BoundInputs in;
    in.fp_norm_f = row.fp_norm_target;
    in.gamma_l2 = gamma_l2_norm(*lattice, c);
    in.sup_norm_f = sup_norm_estimate(target, Box{{0.0}, {1.0}}, cfg.risk_grid);
    in.m = cfg.samples;
    in.delta = cfg.delta;
    row.bound_ii = generalization_bound(in, BoundVariant::ii);
    row.holds = row.risk <= row.bound_ii;
    if (row.holds) ++holding;
    out.rows.push_back(row);
  }
  out.fraction_holding = static_cast<double>(holding) / static_cast<double>(cfg.tasks);
  return out;
}

}  // namespace lfp
