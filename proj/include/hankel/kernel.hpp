#pragma once

// The two-sample statistic I_{n1,n2}: squared L2(dW) distance between the
// empirical orthogonally invariant Hankel transforms of two samples, with
// dW(T) the standard Wishart weight (det T)^nu etr(-T) / Gamma_m(nu + (m+1)/2).
//
// Expanding the square gives a Gram form in the pair kernel
//
//   h(X, Y) = etr(-X - Y) 0F1(nu + (m+1)/2; X, Y)
//
// so I = mean h(X_i, X_j) + mean h(Y_k, Y_l) - 2 mean h(X_i, Y_k).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hankel/error.hpp"
#include "hankel/parallel.hpp"
#include "hankel/series.hpp"
#include "hankel/spectral_matrix.hpp"
#include "hankel/specfun.hpp"

namespace hankel {

/// A non-empty sample of symmetric matrices of a common dimension.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(std::vector<SpectralMatrix> matrices) : matrices_(std::move(matrices)) {
    if (matrices_.empty()) throw input_error("SampleSet: sample must contain at least one matrix");
    for (const auto& m : matrices_)
      if (m.dim() != matrices_.front().dim())
        throw dimension_mismatch("SampleSet: matrices of different dimensions");
  }

  std::size_t size() const { return matrices_.size(); }
  int dim() const { return matrices_.empty() ? 0 : matrices_.front().dim(); }
  const SpectralMatrix& operator[](std::size_t i) const { return matrices_[i]; }
  std::span<const SpectralMatrix> matrices() const { return matrices_; }
  auto begin() const { return matrices_.begin(); }
  auto end() const { return matrices_.end(); }

 private:
  std::vector<SpectralMatrix> matrices_;
};

/// Worst-case convergence report over a batch of kernel evaluations.
struct KernelDiagnostics {
  std::size_t evaluations = 0;
  // pairs whose series hit max_degree before meeting the tolerance
  std::size_t nonconverged = 0;
  // pairs skipped because an a-priori bound put h below kNegligibleKernel
  std::size_t bounded = 0;
  // PSD inputs with a (numerically) zero eigenvalue
  std::size_t rank_deficient = 0;
  int max_degree_used = 0;
  double worst_ratio = 0.0;

  bool converged() const { return nonconverged == 0; }

  void record(int degree, bool converged, double ratio) {
    ++evaluations;
    if (!converged) ++nonconverged;
    max_degree_used = std::max(max_degree_used, degree);
    if (std::isfinite(ratio)) worst_ratio = std::max(worst_ratio, ratio);
    else worst_ratio = std::numeric_limits<double>::infinity();
  }

  void merge(const KernelDiagnostics& o) {
    evaluations += o.evaluations;
    nonconverged += o.nonconverged;
    bounded += o.bounded;
    rank_deficient += o.rank_deficient;
    max_degree_used = std::max(max_degree_used, o.max_degree_used);
    worst_ratio = std::max(worst_ratio, o.worst_ratio);
  }
};

struct StatisticValue {
  double i_value = 0.0;
  double scaled = 0.0;
  double nu = 1.0;
  std::size_t n1 = 0, n2 = 0;
  KernelDiagnostics diagnostics;
};

/// Kernel values below this are stored as zero without summing the series.
inline constexpr double kNegligibleKernel = 1e-40;

namespace detail {

// h values are summed as integers in units of 2^-60 so that every block sum
// is exact and independent of evaluation order.
inline constexpr double kFixedPointScale = 1152921504606846976.0;  // 2^60

inline double bessel_b(double nu, int m) { return nu + 0.5 * (m + 1); }

inline double spectral_trace(std::span<const double> ev) {
  long double s = 0.0L;
  for (double v : ev) s += v;
  return static_cast<double>(s);
}

/// Rigorous upper bound on log h(X, Y) for PSD X, Y, from
/// C_k(X) <= l1(X)^k C_k(I), sum_k C_k(I) = m^k and a Jensen bound on [b]_k.
inline double log_kernel_upper_bound(std::span<const double> x, std::span<const double> y, double b) {
  const int m = static_cast<int>(x.size());
  const double lx = std::max(x.front(), 0.0), ly = std::max(y.front(), 0.0);
  const double base = -spectral_trace(x) - spectral_trace(y);
  if (lx == 0.0 || ly == 0.0) return base;
  const long double bm = b - 0.5L * (m - 1);
  const long double c = std::log(static_cast<long double>(m) * lx * ly);
  const long double lg_bm = log_gamma(bm);
  long double best = -std::numeric_limits<long double>::infinity(), acc = 0.0L;
  for (int k = 0; k < 1000000; ++k) {
    const long double t = k * c - log_gamma(k + 1.0L) - m * (log_gamma(bm + static_cast<long double>(k) / m) - lg_bm);
    if (t > best) {
      acc = acc * std::exp(best - t) + 1.0L;
      best = t;
    } else {
      acc += std::exp(t - best);
      if (t < best - 60.0L) break;
    }
  }
  return base + static_cast<double>(best + std::log(acc));
}

inline void check_sample_matrix(const SpectralMatrix& m, KernelDiagnostics& diag) {
  const double tol = 1e-8 * std::max(std::abs(m.trace()), std::numeric_limits<double>::min());
  if (m.min_eigenvalue() < -tol)
    throw input_error("kernel: sample matrix is not positive semi-definite (min eigenvalue " +
                      std::to_string(m.min_eigenvalue()) + ")");
  if (m.min_eigenvalue() <= tol) ++diag.rank_deficient;
}

}  // namespace detail

/// h(X, Y) = etr(-X - Y) 0F1(nu + (m+1)/2; X, Y), combined in log space.
inline SeriesValue pair_kernel(const SpectralMatrix& x, const SpectralMatrix& y, double nu,
                               const SeriesControl& ctl = {}) {
  ctl.validate();
  require_same_dim(x, y, "pair_kernel");
  const int m = x.dim();
  detail::require_bessel_order(nu, m);
  KernelDiagnostics diag;
  detail::check_sample_matrix(x, diag);
  detail::check_sample_matrix(y, diag);
  const double b = detail::bessel_b(nu, m);
  int degree = std::min(ctl.max_degree, detail::kInitialTableDegree);
  FastZonalTable tx(x.eigenvalues(), degree), ty(y.eigenvalues(), degree);
  for (;;) {
    const auto w = SeriesWeights::shared(m, b, degree);
    const auto out = pair_series(tx, ty, *w, ctl, 1, degree);
    if (!out.needs_more) {
      SeriesValue s = detail::to_value(out);
      s.log_abs += -detail::spectral_trace(x.eigenvalues()) - detail::spectral_trace(y.eigenvalues());
      s.value = std::exp(s.log_abs);
      return s;
    }
    degree = std::min(ctl.max_degree, 2 * degree);
    tx.extend(degree);
    ty.extend(degree);
  }
}

/// Symmetric matrix of kernel values h(M_i, M_j) over a pooled list of
/// matrices, plus the exact fixed-point copies used for block sums.
///
/// Zonal tables start at a low degree and are extended only for the pairs
/// whose series has not converged yet, so a few matrices with large spectra
/// do not make every pair pay for a high-degree table.
class KernelGram {
 public:
  static constexpr int kInitialDegree = 32;

  KernelGram(std::span<const SpectralMatrix> matrices, double nu, const SeriesControl& ctl = {},
             int parallelism = 1)
      : n_(matrices.size()), nu_(nu) {
    ctl.validate();
    if (n_ == 0) throw input_error("KernelGram: no matrices");
    m_ = matrices.front().dim();
    for (const auto& mat : matrices) {
      if (mat.dim() != m_) throw dimension_mismatch("KernelGram: matrices of different dimensions");
      detail::check_sample_matrix(mat, diagnostics_);
    }
    detail::require_bessel_order(nu, m_);
    const double b = detail::bessel_b(nu, m_);

    value_.assign(n_ * n_, 0.0);
    fixed_.assign(n_ * n_, 0);

    std::vector<double> traces(n_);
    for (std::size_t i = 0; i < n_; ++i) traces[i] = detail::spectral_trace(matrices[i].eigenvalues());

    struct Pair {
      std::uint32_t i, j;
    };
    std::vector<Pair> pending;
    pending.reserve(n_ * (n_ + 1) / 2);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j) {
        const double ub = detail::log_kernel_upper_bound(matrices[i].eigenvalues(), matrices[j].eigenvalues(), b);
        if (ub < std::log(kNegligibleKernel)) {
          ++diagnostics_.bounded;
          continue;
        }
        pending.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
      }

    int degree = std::min(ctl.max_degree, kInitialDegree);
    std::vector<std::unique_ptr<FastZonalTable>> tables(n_);
    std::vector<char> needed(n_);
    while (!pending.empty()) {
      std::fill(needed.begin(), needed.end(), 0);
      for (const auto& p : pending) needed[p.i] = needed[p.j] = 1;
      parallel_for(n_, parallelism, [&](std::size_t i) {
        if (!needed[i]) return;
        if (!tables[i]) tables[i] = std::make_unique<FastZonalTable>(matrices[i].eigenvalues(), degree);
        else tables[i]->extend(degree);
      });
      const auto weights = SeriesWeights::shared(m_, b, degree);

      std::vector<detail::SeriesOutcome> outcomes(pending.size());
      parallel_for(pending.size(), parallelism, [&](std::size_t t) {
        outcomes[t] = pair_series(*tables[pending[t].i], *tables[pending[t].j], *weights, ctl, 1, degree);
      });

      std::vector<Pair> again;
      for (std::size_t t = 0; t < pending.size(); ++t) {
        const auto& out = outcomes[t];
        const auto [i, j] = pending[t];
        if (out.needs_more) {
          again.push_back(pending[t]);
          continue;
        }
        diagnostics_.record(out.degree, out.converged, out.ratio);
        const double h = std::exp(static_cast<double>(out.log_abs) - traces[i] - traces[j]);
        if (!(h >= 0.0 && h <= 1.0 + 1e-9))
          throw consistency_error("KernelGram: kernel value " + std::to_string(h) + " outside [0, 1]");
        store(i, j, h);
      }
      pending = std::move(again);
      degree = std::min(ctl.max_degree, 2 * degree);
    }
  }

  std::size_t size() const { return n_; }
  int dim() const { return m_; }
  double nu() const { return nu_; }
  double value(std::size_t i, std::size_t j) const { return value_[i * n_ + j]; }
  std::int64_t fixed(std::size_t i, std::size_t j) const { return fixed_[i * n_ + j]; }
  const KernelDiagnostics& diagnostics() const { return diagnostics_; }

  /// I for the samples {M_a : a in xs} and {M_b : b in ys} (indices may repeat).
  double statistic(std::span<const std::size_t> xs, std::span<const std::size_t> ys) const {
    if (xs.empty() || ys.empty()) throw input_error("statistic: empty sample");
    const __int128 a = block_sum(xs, xs), bb = block_sum(ys, ys), c = block_sum(xs, ys);
    const __int128 n1 = static_cast<__int128>(xs.size()), n2 = static_cast<__int128>(ys.size());
    const __int128 num = n2 * n2 * a + n1 * n1 * bb - 2 * n1 * n2 * c;
    const long double den = static_cast<long double>(n1 * n1 * n2 * n2) * kFixed;
    double i_value = static_cast<double>(static_cast<long double>(num) / den);
    if (i_value < 0.0) {
      if (i_value < -1e-10)
        throw consistency_error("statistic: I = " + std::to_string(i_value) + " is negative beyond rounding");
      i_value = 0.0;
    }
    return i_value;
  }

 private:
  static constexpr long double kFixed = detail::kFixedPointScale;

  void store(std::size_t i, std::size_t j, double h) {
    const auto f = static_cast<std::int64_t>(std::llround(static_cast<long double>(h) * kFixed));
    value_[i * n_ + j] = value_[j * n_ + i] = h;
    fixed_[i * n_ + j] = fixed_[j * n_ + i] = f;
  }

  __int128 block_sum(std::span<const std::size_t> a, std::span<const std::size_t> b) const {
    __int128 s = 0;
    for (std::size_t i : a) {
      const std::int64_t* row = fixed_.data() + i * n_;
      for (std::size_t j : b) s += row[j];
    }
    return s;
  }

  std::size_t n_ = 0;
  int m_ = 0;
  double nu_ = 1.0;
  std::vector<double> value_;
  std::vector<std::int64_t> fixed_;
  KernelDiagnostics diagnostics_;
};

namespace detail {

inline std::vector<std::size_t> iota_indices(std::size_t begin, std::size_t count) {
  std::vector<std::size_t> v(count);
  std::iota(v.begin(), v.end(), begin);
  return v;
}

inline std::vector<SpectralMatrix> pooled(const SampleSet& xs, const SampleSet& ys) {
  if (xs.dim() != ys.dim()) throw dimension_mismatch("statistic: samples of different dimensions");
  std::vector<SpectralMatrix> all(xs.begin(), xs.end());
  all.insert(all.end(), ys.begin(), ys.end());
  return all;
}

}  // namespace detail

inline double scale_factor(std::size_t n1, std::size_t n2) {
  return static_cast<double>(n1) * static_cast<double>(n2) / static_cast<double>(n1 + n2);
}

/// I_{n1,n2} and (n1 n2 / N) I from a pooled Gram whose first n1 entries are the x sample.
inline StatisticValue statistic_from_gram(const KernelGram& gram, std::size_t n1) {
  const std::size_t n2 = gram.size() - n1;
  StatisticValue s;
  s.n1 = n1;
  s.n2 = n2;
  s.nu = gram.nu();
  s.i_value = gram.statistic(detail::iota_indices(0, n1), detail::iota_indices(n1, n2));
  s.scaled = scale_factor(n1, n2) * s.i_value;
  s.diagnostics = gram.diagnostics();
  return s;
}

inline StatisticValue statistic(const SampleSet& xs, const SampleSet& ys, double nu, const SeriesControl& ctl = {},
                                int parallelism = 1) {
  const auto all = detail::pooled(xs, ys);
  const KernelGram gram(all, nu, ctl, parallelism);
  return statistic_from_gram(gram, xs.size());
}

inline double scaled_statistic(const SampleSet& xs, const SampleSet& ys, double nu, const SeriesControl& ctl = {},
                               int parallelism = 1) {
  return statistic(xs, ys, nu, ctl, parallelism).scaled;
}

/// H_n(T) = (1/n) sum_j J_nu(T, X_j) for one fixed sample and many T.
///
/// Holds growable zonal tables for the sample, so an instance must stay
/// confined to one thread.
class EmpiricalTransform {
 public:
  EmpiricalTransform(const SampleSet& sample, double nu, const SeriesControl& ctl = {})
      : nu_(nu), ctl_(ctl), m_(sample.dim()) {
    ctl.validate();
    if (sample.size() == 0) throw input_error("EmpiricalTransform: empty sample");
    detail::require_bessel_order(nu, m_);
    const int degree = std::min(ctl.max_degree, detail::kInitialTableDegree);
    for (const auto& x : sample) tables_.emplace_back(x.eigenvalues(), degree);
  }

  /// Mean of J_nu(T, X_j); `diag`, when given, receives the series reports.
  double operator()(const SpectralMatrix& t, KernelDiagnostics* diag = nullptr) {
    if (t.dim() != m_) throw dimension_mismatch("EmpiricalTransform: argument dimension");
    const double b = detail::bessel_b(nu_, m_);
    int degree = std::min(ctl_.max_degree, detail::kInitialTableDegree);
    ZonalTable tt(t.eigenvalues(), degree);
    long double sum = 0.0L;
    for (auto& x : tables_) {
      for (;;) {
        if (x.degree() < degree) x.extend(degree);
        if (tt.degree() < degree) tt.extend(degree);
        const auto w = SeriesWeights::shared(m_, b, degree);
        const auto out = pair_series(tt, x, *w, ctl_, -1, degree);
        if (out.needs_more) {
          degree = std::min(ctl_.max_degree, 2 * degree);
          continue;
        }
        if (diag) diag->record(out.degree, out.converged, out.ratio);
        sum += out.sign * std::exp(out.log_abs);
        break;
      }
    }
    return static_cast<double>(sum / static_cast<long double>(tables_.size()));
  }

 private:
  double nu_;
  SeriesControl ctl_;
  int m_;
  std::vector<ZonalTable> tables_;
};

inline double empirical_transform(const SampleSet& sample, const SpectralMatrix& t, double nu,
                                  const SeriesControl& ctl = {}) {
  EmpiricalTransform h(sample, nu, ctl);
  return h(t);
}

}  // namespace hankel
