#pragma once

// Domain types shared by every module: datasets, truncated frequency
// lattices, the LFP frequency weight c(xi) and Hermitian spectra.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lfp/error.hpp"

namespace lfp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// Axis-aligned box, one (lo, hi) pair per input dimension.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Labeled samples {(x_i, y_i)}. Inputs are stored one point per row.
class Dataset {
 public:
  Dataset(Matrix inputs, Vector targets);

  std::size_t dim() const { return static_cast<std::size_t>(inputs_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(inputs_.rows()); }
  const Matrix& inputs() const { return inputs_; }
  const Vector& targets() const { return targets_; }
  const Box& domain() const { return domain_; }

  Dataset with_targets(Vector targets) const;

 private:
  Matrix inputs_;
  Vector targets_;
  Box domain_;
};

/// Truncated lattice (1/L')(Z^d ∩ [-K+1, K-1]^d) without the origin.
///
/// Frequencies are ordered lexicographically in the integer index k. Because
/// the index box is symmetric, entry j and entry size()-1-j are negatives of
/// each other, and the entries [half_size(), size()) are exactly the
/// lexicographically positive indices.
class FrequencyLattice {
 public:
  static constexpr std::size_t default_max_size = 10'000'000;

  FrequencyLattice(int dim, double period, int half_width,
                   std::size_t max_size = default_max_size);

  int dim() const { return dim_; }
  double period() const { return period_; }
  int half_width() const { return half_width_; }

  std::size_t size() const { return norms_.size(); }
  std::size_t half_size() const { return norms_.size() / 2; }

  std::span<const int> index(std::size_t j) const {
    return {indices_.data() + j * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  std::span<const double> frequency(std::size_t j) const {
    return {frequencies_.data() + j * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  double norm(std::size_t j) const { return norms_[j]; }
  std::size_t negated(std::size_t j) const { return size() - 1 - j; }

  /// Full-lattice position of the h-th lexicographically positive frequency.
  std::size_t positive(std::size_t h) const { return half_size() + h; }

  /// xi · x for the full-lattice entry j.
  double dot(std::size_t j, std::span<const double> x) const;

 private:
  int dim_;
  double period_;
  int half_width_;
  std::vector<int> indices_;
  std::vector<double> frequencies_;
  std::vector<double> norms_;
};

using LatticePtr = std::shared_ptr<const FrequencyLattice>;

/// Validates and builds a lattice; the returned pointer is shared by spectra.
LatticePtr build_lattice(int dim, double period, int half_width,
                         std::size_t max_size = FrequencyLattice::default_max_size);

/// c(xi) = A / |xi|^{d+3} + B / |xi|^{d+1}, the squared LFP frequency weight.
struct LfpCoefficients {
  double a = 0.0;
  double b = 0.0;
  int dim = 1;

  void validate() const;
  /// Weight as a function of |xi|; |xi| must be positive.
  double at_norm(double norm) const;
};

LfpCoefficients make_coefficients(double a, double b, int dim);

/// Throws ErrorCode::domain for xi = 0.
double lfp_coefficient(std::span<const double> xi, const LfpCoefficients& c);

/// A = mean(|r|^2 + w^2), B = 4 pi^2 mean(|r|^2 w^2) over the given neurons.
LfpCoefficients coefficients_from_moments(std::span<const double> w,
                                          std::span<const double> r_norm_sq,
                                          int dim);

/// c(xi) on the positive half of the lattice, in positive-half order.
std::vector<double> positive_weights(const FrequencyLattice& lattice,
                                     const LfpCoefficients& c);

/// Hermitian spectrum on a lattice plus an unpenalized intercept.
///
/// Only the positive half is stored; h(-xi) = conj(h(xi)) holds by
/// construction, so evaluation is real without any symmetrization.
class SpectralSolution {
 public:
  SpectralSolution(LatticePtr lattice, std::vector<Complex> positive_half,
                   double intercept);

  static SpectralSolution zero(LatticePtr lattice);

  /// Builds from coefficients on the whole lattice (lattice order). Throws
  /// ErrorCode::tolerance if h(-xi) differs from conj(h(xi)) by more than
  /// 1e-12 relative to the largest coefficient.
  static SpectralSolution from_full(LatticePtr lattice,
                                    std::span<const Complex> full,
                                    double intercept);

  const FrequencyLattice& lattice() const { return *lattice_; }
  const LatticePtr& lattice_ptr() const { return lattice_; }
  std::span<const Complex> positive_half() const { return coeffs_; }
  std::vector<Complex>& mutable_positive_half() { return coeffs_; }
  double intercept() const { return intercept_; }
  void set_intercept(double b) { intercept_ = b; }

  /// Coefficient at a full-lattice position.
  Complex coefficient(std::size_t j) const;

  SpectralSolution& operator+=(const SpectralSolution& other);
  SpectralSolution& operator-=(const SpectralSolution& other);
  SpectralSolution& operator*=(double s);

 private:
  void check_same_lattice(const SpectralSolution& other) const;

  LatticePtr lattice_;
  std::vector<Complex> coeffs_;
  double intercept_;
};

SpectralSolution operator+(SpectralSolution lhs, const SpectralSolution& rhs);
SpectralSolution operator-(SpectralSolution lhs, const SpectralSolution& rhs);
SpectralSolution operator*(double s, SpectralSolution rhs);

/// b + sum_xi h(xi) exp(2 pi i xi·x), summed in (+xi, -xi) pairs.
double evaluate_spectrum(const SpectralSolution& s, std::span<const double> x);
Vector evaluate_spectrum(const SpectralSolution& s, const Matrix& points);

/// (sum_{xi != 0} c(xi)^{-1} |h(xi)|^2)^{1/2}; the intercept is unpenalized.
double fp_norm(const SpectralSolution& s, const LfpCoefficients& c);

/// (sum_xi c(xi))^{1/2} over the stored (truncated) lattice.
double gamma_l2_norm(const FrequencyLattice& lattice, const LfpCoefficients& c);

/// Plain l2 norm of a spectrum over the full lattice, intercept included.
double spectral_l2_norm(const SpectralSolution& s);

/// ||a - b|| / max(||a||, ||b||), zero when both vanish.
double relative_l2_distance(const SpectralSolution& a, const SpectralSolution& b);

}  // namespace lfp
