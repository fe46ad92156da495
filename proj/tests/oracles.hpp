#pragma once

// Reference computations used by the tests. They work on the full complex
// lattice with straightforward loops and general-purpose decompositions and
// never call the library's numerical routines, so agreement with the library
// is a real cross-check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
constexpr double pi = 3.14159265358979323846;

struct Freq {
  std::vector<int> k;
  std::vector<double> xi;
  double norm;
};

// Every nonzero k in [-K+1, K-1]^d, lexicographic, scaled by 1/period.
inline std::vector<Freq> enumerate_lattice(int d, double period, int half_width) {
  std::vector<Freq> out;
  std::vector<int> k(static_cast<std::size_t>(d), -(half_width - 1));
  while (true) {
    if (std::any_of(k.begin(), k.end(), [](int v) { return v != 0; })) {
      Freq f{k, {}, 0.0};
      double s = 0.0;
      for (int v : k) {
        f.xi.push_back(v / period);
        s += (v / period) * (v / period);
      }
      f.norm = std::sqrt(s);
      out.push_back(f);
    }
    int a = d - 1;
    while (a >= 0 && k[static_cast<std::size_t>(a)] == half_width - 1) {
      k[static_cast<std::size_t>(a)] = -(half_width - 1);
      --a;
    }
    if (a < 0) break;
    ++k[static_cast<std::size_t>(a)];
  }
  return out;
}

inline double weight(double a, double b, int d, double norm) {
  return a / std::pow(norm, d + 3) + b / std::pow(norm, d + 1);
}

inline double phase(const Freq& f, const double* x) {
  double s = 0.0;
  for (std::size_t a = 0; a < f.xi.size(); ++a) s += f.xi[a] * x[a];
  return 2.0 * pi * s;
}

// G_ij = sum_xi c(xi) exp(2 pi i xi (x_i - x_j)), taking the real part at the end.
inline Eigen::MatrixXd gram(const Eigen::MatrixXd& x, const std::vector<Freq>& lat, double a,
                            double b) {
  const int d = static_cast<int>(x.cols());
  const auto m = x.rows();
  CMatrix g = CMatrix::Zero(m, m);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> xr = x;
  for (const auto& f : lat) {
    const double c = weight(a, b, d, f.norm);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        g(i, j) += c * std::exp(cd(0.0, phase(f, xr.row(i).data()) - phase(f, xr.row(j).data())));
      }
    }
  }
  return g.real();
}

// Minimum weighted-norm interpolant over the full complex lattice, with the
// intercept fixed at zero:  min sum |h(xi)|^2 / c(xi)  s.t.  sum h(xi) e^{2 pi i xi x_j} = y_j.
// Solved as the least-norm solution of A u = y, u = h / sqrt(c), by a complete
// orthogonal decomposition. Returns h on the full lattice in enumeration order.
inline CVector min_norm_spectrum(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const std::vector<Freq>& lat, double a, double b) {
  const int d = static_cast<int>(x.cols());
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> xr = x;
  CMatrix am(x.rows(), static_cast<Eigen::Index>(lat.size()));
  std::vector<double> sc(lat.size());
  for (std::size_t q = 0; q < lat.size(); ++q) {
    sc[q] = std::sqrt(weight(a, b, d, lat[q].norm));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      am(i, static_cast<Eigen::Index>(q)) = sc[q] * std::exp(cd(0.0, phase(lat[q], xr.row(i).data())));
    }
  }
  const CVector yc = y.cast<cd>();
  const CVector u = am.completeOrthogonalDecomposition().solve(yc);
  CVector h(u.size());
  for (Eigen::Index q = 0; q < u.size(); ++q) h(q) = sc[static_cast<std::size_t>(q)] * u(q);
  return h;
}

inline double evaluate(const CVector& h, const std::vector<Freq>& lat, const double* x,
                       double intercept = 0.0) {
  cd s = intercept;
  for (std::size_t q = 0; q < lat.size(); ++q) {
    s += h(static_cast<Eigen::Index>(q)) * std::exp(cd(0.0, phase(lat[q], x)));
  }
  return s.real();
}

inline double fp_norm(const CVector& h, const std::vector<Freq>& lat, double a, double b, int d) {
  double s = 0.0;
  for (std::size_t q = 0; q < lat.size(); ++q) {
    s += std::norm(h(static_cast<Eigen::Index>(q))) / weight(a, b, d, lat[q].norm);
  }
  return std::sqrt(s);
}

// Naive network output, straight from the defining formula.
template <class T>
T net_output_as(const Eigen::Matrix<T, Eigen::Dynamic, 1>& w,
                const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& r,
                const Eigen::Matrix<T, Eigen::Dynamic, 1>& l, bool one_d, const T* x) {
  T out = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    T z;
    if (one_d) {
      z = r(i, 0) * (x[0] - l(i));
    } else {
      T dot = 0, sq = 0;
      for (Eigen::Index a = 0; a < r.cols(); ++a) {
        dot += r(i, a) * x[a];
        sq += r(i, a) * r(i, a);
      }
      z = dot - std::sqrt(sq) * l(i);
    }
    if (z > 0) out += w(i) * z;
  }
  return out;
}

// (1 / 2M) sum_j (h(x_j) - y_j)^2 with the naive network output, in precision T.
template <class T>
T net_loss_as(const Eigen::Matrix<T, Eigen::Dynamic, 1>& w,
              const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& r,
              const Eigen::Matrix<T, Eigen::Dynamic, 1>& l, bool one_d, const Eigen::MatrixXd& x,
              const Eigen::VectorXd& y) {
  T s = 0;
  std::vector<T> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    for (Eigen::Index a = 0; a < x.cols(); ++a) row[static_cast<std::size_t>(a)] = x(j, a);
    const T e = net_output_as<T>(w, r, l, one_d, row.data()) - static_cast<T>(y(j));
    s += e * e;
  }
  return s / (2 * static_cast<T>(x.rows()));
}

inline double net_output(const Eigen::VectorXd& w, const Eigen::MatrixXd& r,
                         const Eigen::VectorXd& l, bool one_d, const double* x) {
  return net_output_as<double>(w, r, l, one_d, x);
}

inline double net_loss(const Eigen::VectorXd& w, const Eigen::MatrixXd& r,
                       const Eigen::VectorXd& l, bool one_d, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y) {
  return net_loss_as<double>(w, r, l, one_d, x, y);
}

// Smallest |pre-activation| over all neurons and samples.
inline double min_abs_preactivation(const Eigen::VectorXd& w, const Eigen::MatrixXd& r,
                                    const Eigen::VectorXd& l, bool one_d,
                                    const Eigen::MatrixXd& x) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      double z;
      if (one_d) {
        z = r(i, 0) * (x(j, 0) - l(i));
      } else {
        z = r.row(i).dot(x.row(j)) - r.row(i).norm() * l(i);
      }
      best = std::min(best, std::abs(z));
    }
  }
  return best;
}

inline double spearman(std::vector<double> a, std::vector<double> b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t s = 0; s < idx.size();) {
      std::size_t e = s;
      while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[s]]) ++e;
      for (std::size_t t = s; t <= e; ++t) r[idx[t]] = 0.5 * static_cast<double>(s + e) + 1.0;
      s = e + 1;
    }
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

}  // namespace oracle
