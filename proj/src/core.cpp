#include "lfp/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lfp {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::config: return "configuration error";
    case ErrorCode::io: return "i/o error";
    case ErrorCode::size_limit: return "size limit exceeded";
    case ErrorCode::domain: return "domain error";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::singular: return "singular system";
    case ErrorCode::rank_deficient: return "rank deficient";
    case ErrorCode::step_size: return "step size too large";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::tolerance: return "tolerance violation";
    case ErrorCode::missing_field: return "missing field";
    case ErrorCode::invalid_spec: return "invalid specification";
  }
  return "unknown error";
}

// ---------------------------------------------------------------- Dataset

Dataset::Dataset(Matrix inputs, Vector targets)
    : inputs_(std::move(inputs)), targets_(std::move(targets)) {
  require(inputs_.rows() >= 1, ErrorCode::invalid_argument,
          "dataset needs at least one sample");
  require(inputs_.cols() >= 1, ErrorCode::invalid_argument,
          "dataset input dimension must be positive");
  require(targets_.size() == inputs_.rows(), ErrorCode::dimension_mismatch,
          "dataset has " + std::to_string(inputs_.rows()) + " inputs but " +
              std::to_string(targets_.size()) + " targets");
  require(inputs_.allFinite() && targets_.allFinite(), ErrorCode::invalid_argument,
          "dataset contains non-finite values");

  const Eigen::Index m = inputs_.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      if (inputs_.row(i) == inputs_.row(j)) {
        fail(ErrorCode::invalid_argument, "dataset inputs " + std::to_string(i) +
                                              " and " + std::to_string(j) +
                                              " coincide");
      }
    }
  }

  domain_.lo.resize(dim());
  domain_.hi.resize(dim());
  for (std::size_t a = 0; a < dim(); ++a) {
    domain_.lo[a] = inputs_.col(static_cast<Eigen::Index>(a)).minCoeff();
    domain_.hi[a] = inputs_.col(static_cast<Eigen::Index>(a)).maxCoeff();
  }
}

Dataset Dataset::with_targets(Vector targets) const {
  return Dataset(inputs_, std::move(targets));
}

// ------------------------------------------------------- FrequencyLattice

FrequencyLattice::FrequencyLattice(int dim, double period, int half_width,
                                   std::size_t max_size)
    : dim_(dim), period_(period), half_width_(half_width) {
  require(dim >= 1, ErrorCode::invalid_argument, "lattice dimension must be positive");
  require(half_width >= 2, ErrorCode::invalid_argument, "lattice half-width K must be >= 2");
  require(std::isfinite(period) && period > 0.0, ErrorCode::invalid_argument,
          "lattice period L' must be positive");

  const std::size_t side = 2 * static_cast<std::size_t>(half_width) - 1;
  const double estimate = std::pow(static_cast<double>(side), dim) - 1.0;
  require(estimate <= static_cast<double>(max_size), ErrorCode::size_limit,
          "lattice with K=" + std::to_string(half_width) + " in d=" + std::to_string(dim) +
              " exceeds the cap of " + std::to_string(max_size) + " frequencies");
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= side;
  const std::size_t count = total - 1;

  const auto d = static_cast<std::size_t>(dim);
  indices_.reserve(count * d);
  frequencies_.reserve(count * d);
  norms_.reserve(count);

  // Odometer over the index box, last axis fastest: lexicographic order.
  std::vector<int> k(d, -(half_width - 1));
  for (std::size_t n = 0; n < total; ++n) {
    const bool origin = std::all_of(k.begin(), k.end(), [](int v) { return v == 0; });
    if (!origin) {
      double sq = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        const double f = static_cast<double>(k[a]) / period;
        indices_.push_back(k[a]);
        frequencies_.push_back(f);
        sq += f * f;
      }
      norms_.push_back(std::sqrt(sq));
    }
    for (std::size_t a = d; a-- > 0;) {
      if (k[a] < half_width - 1) {
        ++k[a];
        break;
      }
      k[a] = -(half_width - 1);
    }
  }
}

double FrequencyLattice::dot(std::size_t j, std::span<const double> x) const {
  const auto f = frequency(j);
  double s = 0.0;
  for (std::size_t a = 0; a < f.size(); ++a) s += f[a] * x[a];
  return s;
}

LatticePtr build_lattice(int dim, double period, int half_width, std::size_t max_size) {
  return std::make_shared<const FrequencyLattice>(dim, period, half_width, max_size);
}

// -------------------------------------------------------- LfpCoefficients

void LfpCoefficients::validate() const {
  require(std::isfinite(a) && std::isfinite(b), ErrorCode::invalid_argument,
          "LFP coefficients must be finite");
  require(a >= 0.0 && b >= 0.0, ErrorCode::invalid_argument,
          "LFP coefficients must be non-negative");
  require(a + b > 0.0, ErrorCode::invalid_argument, "LFP coefficients A + B must be positive");
  require(dim >= 1, ErrorCode::invalid_argument, "LFP coefficient dimension must be positive");
}

double LfpCoefficients::at_norm(double norm) const {
  const double low = std::pow(norm, dim + 1);
  return a / (low * norm * norm) + b / low;
}

LfpCoefficients make_coefficients(double a, double b, int dim) {
  LfpCoefficients c{a, b, dim};
  c.validate();
  return c;
}

double lfp_coefficient(std::span<const double> xi, const LfpCoefficients& c) {
  require(xi.size() == static_cast<std::size_t>(c.dim), ErrorCode::dimension_mismatch,
          "frequency dimension does not match the coefficients");
  double sq = 0.0;
  for (double v : xi) sq += v * v;
  require(sq > 0.0, ErrorCode::domain, "LFP coefficient is singular at xi = 0");
  return c.at_norm(std::sqrt(sq));
}

LfpCoefficients coefficients_from_moments(std::span<const double> w,
                                          std::span<const double> r_norm_sq, int dim) {
  require(w.size() == r_norm_sq.size() && !w.empty(), ErrorCode::dimension_mismatch,
          "neuron moment arrays must be non-empty and of equal length");
  double s_a = 0.0;
  double s_b = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double w2 = w[i] * w[i];
    s_a += r_norm_sq[i] + w2;
    s_b += r_norm_sq[i] * w2;
  }
  const double n = static_cast<double>(w.size());
  return LfpCoefficients{s_a / n, two_pi * two_pi * (s_b / n), dim};
}

std::vector<double> positive_weights(const FrequencyLattice& lattice,
                                     const LfpCoefficients& c) {
  c.validate();
  require(lattice.dim() == c.dim, ErrorCode::dimension_mismatch,
          "lattice and coefficient dimensions differ");
  std::vector<double> out(lattice.half_size());
  for (std::size_t h = 0; h < out.size(); ++h) {
    out[h] = c.at_norm(lattice.norm(lattice.positive(h)));
  }
  return out;
}

// ------------------------------------------------------- SpectralSolution

SpectralSolution::SpectralSolution(LatticePtr lattice, std::vector<Complex> positive_half,
                                   double intercept)
    : lattice_(std::move(lattice)), coeffs_(std::move(positive_half)), intercept_(intercept) {
  require(lattice_ != nullptr, ErrorCode::invalid_argument, "spectrum needs a lattice");
  require(coeffs_.size() == lattice_->half_size(), ErrorCode::dimension_mismatch,
          "spectrum has " + std::to_string(coeffs_.size()) +
              " coefficients, lattice half has " + std::to_string(lattice_->half_size()));
}

SpectralSolution SpectralSolution::zero(LatticePtr lattice) {
  const std::size_t n = lattice->half_size();
  return SpectralSolution(std::move(lattice), std::vector<Complex>(n), 0.0);
}

SpectralSolution SpectralSolution::from_full(LatticePtr lattice, std::span<const Complex> full,
                                             double intercept) {
  require(full.size() == lattice->size(), ErrorCode::dimension_mismatch,
          "full spectrum length does not match the lattice");
  double scale = 0.0;
  for (const Complex& z : full) scale = std::max(scale, std::abs(z));
  const double tol = 1e-12 * std::max(scale, 1e-300);
  for (std::size_t j = 0; j < full.size(); ++j) {
    const Complex mirror = std::conj(full[lattice->negated(j)]);
    if (std::abs(full[j] - mirror) > tol) {
      fail(ErrorCode::tolerance,
           "spectrum is not Hermitian at lattice entry " + std::to_string(j));
    }
  }
  std::vector<Complex> half(lattice->half_size());
  for (std::size_t h = 0; h < half.size(); ++h) half[h] = full[lattice->positive(h)];
  return SpectralSolution(std::move(lattice), std::move(half), intercept);
}

Complex SpectralSolution::coefficient(std::size_t j) const {
  const std::size_t half = lattice_->half_size();
  if (j >= half) return coeffs_[j - half];
  return std::conj(coeffs_[lattice_->negated(j) - half]);
}

void SpectralSolution::check_same_lattice(const SpectralSolution& other) const {
  require(lattice_ == other.lattice_ ||
              (lattice_->dim() == other.lattice_->dim() &&
               lattice_->period() == other.lattice_->period() &&
               lattice_->half_width() == other.lattice_->half_width()),
          ErrorCode::dimension_mismatch, "spectra live on different lattices");
}

SpectralSolution& SpectralSolution::operator+=(const SpectralSolution& other) {
  check_same_lattice(other);
  for (std::size_t h = 0; h < coeffs_.size(); ++h) coeffs_[h] += other.coeffs_[h];
  intercept_ += other.intercept_;
  return *this;
}

SpectralSolution& SpectralSolution::operator-=(const SpectralSolution& other) {
  check_same_lattice(other);
  for (std::size_t h = 0; h < coeffs_.size(); ++h) coeffs_[h] -= other.coeffs_[h];
  intercept_ -= other.intercept_;
  return *this;
}

SpectralSolution& SpectralSolution::operator*=(double s) {
  for (Complex& z : coeffs_) z *= s;
  intercept_ *= s;
  return *this;
}

SpectralSolution operator+(SpectralSolution lhs, const SpectralSolution& rhs) {
  lhs += rhs;
  return lhs;
}

SpectralSolution operator-(SpectralSolution lhs, const SpectralSolution& rhs) {
  lhs -= rhs;
  return lhs;
}

SpectralSolution operator*(double s, SpectralSolution rhs) {
  rhs *= s;
  return rhs;
}

double evaluate_spectrum(const SpectralSolution& s, std::span<const double> x) {
  const FrequencyLattice& lat = s.lattice();
  require(x.size() == static_cast<std::size_t>(lat.dim()), ErrorCode::dimension_mismatch,
          "evaluation point dimension does not match the lattice");
  require(std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }),
          ErrorCode::invalid_argument, "evaluation point is not finite");
  // h(xi) e^{i t} + conj(h(xi)) e^{-i t} = 2 (re cos t - im sin t); the
  // imaginary parts cancel exactly.
  const auto coeffs = s.positive_half();
  double acc = 0.0;
  for (std::size_t h = 0; h < coeffs.size(); ++h) {
    const double t = two_pi * lat.dot(lat.positive(h), x);
    acc += coeffs[h].real() * std::cos(t) - coeffs[h].imag() * std::sin(t);
  }
  return s.intercept() + 2.0 * acc;
}

Vector evaluate_spectrum(const SpectralSolution& s, const Matrix& points) {
  Vector out(points.rows());
  std::vector<double> x(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index a = 0; a < points.cols(); ++a) x[static_cast<std::size_t>(a)] = points(i, a);
    out(i) = evaluate_spectrum(s, x);
  }
  return out;
}

double fp_norm(const SpectralSolution& s, const LfpCoefficients& c) {
  const std::vector<double> weights = positive_weights(s.lattice(), c);
  const auto coeffs = s.positive_half();
  double acc = 0.0;
  for (std::size_t h = 0; h < coeffs.size(); ++h) acc += std::norm(coeffs[h]) / weights[h];
  return std::sqrt(2.0 * acc);
}

double gamma_l2_norm(const FrequencyLattice& lattice, const LfpCoefficients& c) {
  require(lattice.size() > 0, ErrorCode::invalid_argument, "lattice is empty");
  const std::vector<double> weights = positive_weights(lattice, c);
  double acc = 0.0;
  for (double w : weights) acc += w;
  return std::sqrt(2.0 * acc);
}

double spectral_l2_norm(const SpectralSolution& s) {
  double acc = 0.0;
  for (const Complex& z : s.positive_half()) acc += std::norm(z);
  return std::sqrt(s.intercept() * s.intercept() + 2.0 * acc);
}

double relative_l2_distance(const SpectralSolution& a, const SpectralSolution& b) {
  const double scale = std::max(spectral_l2_norm(a), spectral_l2_norm(b));
  if (scale == 0.0) return 0.0;
  return spectral_l2_norm(a - b) / scale;
}

}  // namespace lfp
