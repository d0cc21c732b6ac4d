#pragma once

// Special functions of matrix argument: multivariate gamma, generalized
// Pochhammer symbols, zonal polynomials and the 0F1 hypergeometric series of
// one and two matrix arguments, plus the Bessel-type functions J_nu built on
// them.
//
// Zonal polynomials are evaluated through Jack P-polynomials (alpha = 2)
// with the one-variable-at-a-time branching rule; the catalog in
// catalog.hpp holds the argument-independent coefficients. Spectra are
// normalized by their largest absolute eigenvalue and every scale factor is
// carried in log space, so large Wishart spectra neither overflow nor lose
// the small layers.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "hankel/catalog.hpp"
#include "hankel/error.hpp"
#include "hankel/partition.hpp"
#include "hankel/series.hpp"
#include "hankel/spectral_matrix.hpp"

namespace hankel {

namespace detail {

inline long double log_gamma(long double x) {
  int sign = 0;
  return ::lgammal_r(x, &sign);
}

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && std::floor(x) == x; }

}  // namespace detail

/// log |Gamma_m(a)| with Gamma_m(a) = pi^{m(m-1)/4} prod_{i=1..m} Gamma(a - (i-1)/2).
/// Throws parameter_error at a pole of any factor.
inline double mv_gamma_ln(int m, double a) {
  if (m < 1) throw input_error("mv_gamma_ln: dimension must be positive");
  long double acc = 0.25L * m * (m - 1) * std::log(std::numbers::pi_v<long double>);
  for (int i = 1; i <= m; ++i) {
    const double x = a - 0.5 * (i - 1);
    if (detail::is_nonpositive_integer(x))
      throw parameter_error("mv_gamma_ln: Gamma(" + std::to_string(x) + ") is a pole");
    acc += detail::log_gamma(x);
  }
  return static_cast<double>(acc);
}

/// [a]_kappa = prod_i (a - (i-1)/2)_{kappa_i}; the empty partition gives 1.
inline double gen_pochhammer(double a, const Partition& kappa) {
  long double prod = 1.0L;
  for (int i = 1; i <= kappa.length(); ++i) {
    const long double base = a - 0.5L * (i - 1);
    for (int j = 0; j < kappa.part(i); ++j) prod *= base + j;
  }
  return static_cast<double>(prod);
}

/// Values of the Jack P-polynomials P_kappa(x / s) for one spectrum x, for
/// every catalogued partition up to `degree()`, with s = max |x_i|.
///
/// The table grows on demand with `extend`; values already computed never
/// change, so a table may be shared read-only once it has been extended far
/// enough. `Real` = double is enough for series with non-negative terms;
/// alternating series keep the extra bits of long double.
template <class Real>
class BasicZonalTable {
 public:
  using value_type = Real;

  explicit BasicZonalTable(std::span<const double> spectrum, int degree = 0) {
    if (spectrum.empty()) throw dimension_mismatch("ZonalTable: empty spectrum");
    long double s = 0.0L;
    for (double v : spectrum) {
      if (!std::isfinite(v)) throw input_error("ZonalTable: non-finite eigenvalue");
      s = std::max(s, std::fabs(static_cast<long double>(v)));
    }
    if (s == 0.0L) s = 1.0L;
    log_scale_ = std::log(s);
    x_.reserve(spectrum.size());
    for (double v : spectrum) x_.push_back(static_cast<Real>(v / s));
    levels_.resize(x_.size());
    var_pow_.resize(x_.size());
    elem_pow_.resize(x_.size());
    extend(std::max(degree, 0));
  }

  int dim() const { return static_cast<int>(x_.size()); }
  int degree() const { return degree_; }
  long double log_scale() const { return log_scale_; }
  const PartitionCatalog& catalog() const { return *catalog_; }

  /// P_kappa(x / s) in all m variables, indexed by catalog position.
  Real value(std::size_t idx) const { return levels_.back()[idx]; }

  void extend(int degree) {
    if (degree <= degree_) return;
    catalog_ = PartitionCatalog::shared(dim(), degree);
    const PartitionCatalog& cat = *catalog_;
    const std::size_t first = degree_ < 0 ? 0 : cat.layer_begin(degree_ + 1);
    const std::size_t last = cat.layer_end(degree);

    Real elem = 1;
    for (std::size_t n = 0; n < x_.size(); ++n) {
      elem *= x_[n];
      auto& vp = var_pow_[n];
      auto& ep = elem_pow_[n];
      if (vp.empty()) {
        vp.push_back(1);
        ep.push_back(1);
      }
      while (static_cast<int>(vp.size()) <= degree) {
        vp.push_back(vp.back() * x_[n]);
        ep.push_back(ep.back() * elem);
      }
    }

    for (int n = 1; n <= dim(); ++n) {
      const auto& lev = cat.level(n);
      auto& cur = levels_[static_cast<std::size_t>(n - 1)];
      cur.resize(last, 0);
      const auto& vp = var_pow_[static_cast<std::size_t>(n - 1)];
      const auto& ep = elem_pow_[static_cast<std::size_t>(n - 1)];
      for (std::size_t idx = first; idx < last; ++idx) {
        const Partition& p = cat.at(idx);
        if (p.length() > n) continue;
        if (p.length() == n) {
          cur[idx] = ep[static_cast<std::size_t>(p.part(n))] * cur[lev.reduced[idx]];
          continue;
        }
        const std::uint32_t t0 = lev.term_begin[idx], t1 = lev.term_begin[idx + 1];
        if (n == 1) {
          // only the empty partition has a value in zero variables
          Real sum = 0;
          for (std::uint32_t t = t0; t < t1; ++t)
            if (lev.mu[t] == 0) sum += vp[lev.exponent[t]] * static_cast<Real>(lev.psi[t]);
          cur[idx] = sum;
          continue;
        }
        const Real* prev = levels_[static_cast<std::size_t>(n - 2)].data();
        const std::uint32_t* mu = lev.mu.data();
        const std::uint16_t* ex = lev.exponent.data();
        const double* psi = lev.psi.data();
        Real sum = 0;
        for (std::uint32_t t = t0; t < t1; ++t) sum += prev[mu[t]] * vp[ex[t]] * static_cast<Real>(psi[t]);
        cur[idx] = sum;
      }
    }
    degree_ = degree;
  }

 private:
  std::vector<Real> x_;
  long double log_scale_ = 0.0L;
  int degree_ = -1;
  std::shared_ptr<const PartitionCatalog> catalog_;
  std::vector<std::vector<Real>> levels_;
  std::vector<std::vector<Real>> var_pow_;
  std::vector<std::vector<Real>> elem_pow_;
};

using ZonalTable = BasicZonalTable<long double>;
using FastZonalTable = BasicZonalTable<double>;

/// Per-partition coefficients of the 0F1 series for a fixed dimension m and
/// parameter b, stored as mantissas relative to a per-degree log offset:
///
///   single: C_k(X) / ([b]_k k!)                   = s^k P_k(x/s) * single(idx) * e^{single_offset(k)}
///   pair:   C_k(X) C_k(Y) / (C_k(I) [b]_k k!)    = (s t)^k P_k(x/s) P_k(y/t) * pair(idx) * e^{pair_offset(k)}
class SeriesWeights {
 public:
  SeriesWeights(int m, double b, int degree) : m_(m), b_(b), degree_(degree) {
    if (!(b > 0.5 * (m - 1)))
      throw parameter_error("0F1: parameter b must exceed (m-1)/2 so that [b]_kappa stays positive");
    auto cat = PartitionCatalog::shared(m, degree);
    const std::size_t count = cat->layer_end(degree);
    single_.resize(count);
    pair_.resize(count);
    single_offset_.resize(static_cast<std::size_t>(degree) + 1);
    pair_offset_.resize(static_cast<std::size_t>(degree) + 1);
    std::vector<long double> log_single(count), log_pair(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
      const Partition& p = cat->at(idx);
      long double log_poch = 0.0L;
      for (int i = 1; i <= p.length(); ++i) {
        const long double base = b - 0.5L * (i - 1);
        for (int j = 0; j < p.part(i); ++j) log_poch += std::log(base + j);
      }
      const long double common = p.weight() * std::log(kZonalAlpha) - cat->log_upper_hooks(idx) - log_poch;
      log_single[idx] = common;
      log_pair[idx] = common - cat->log_unit_value(idx);
    }
    for (int k = 0; k <= degree; ++k) {
      const std::size_t lo = cat->layer_begin(k), hi = cat->layer_end(k);
      const long double s_off = *std::max_element(log_single.begin() + lo, log_single.begin() + hi);
      const long double p_off = *std::max_element(log_pair.begin() + lo, log_pair.begin() + hi);
      single_offset_[static_cast<std::size_t>(k)] = s_off;
      pair_offset_[static_cast<std::size_t>(k)] = p_off;
      for (std::size_t idx = lo; idx < hi; ++idx) {
        single_[idx] = std::exp(log_single[idx] - s_off);
        pair_[idx] = std::exp(log_pair[idx] - p_off);
      }
    }
  }

  int dim() const { return m_; }
  double b() const { return b_; }
  int degree() const { return degree_; }
  long double single(std::size_t idx) const { return single_[idx]; }
  long double pair(std::size_t idx) const { return pair_[idx]; }
  long double single_offset(int k) const { return single_offset_[static_cast<std::size_t>(k)]; }
  long double pair_offset(int k) const { return pair_offset_[static_cast<std::size_t>(k)]; }

  static std::shared_ptr<const SeriesWeights> shared(int m, double b, int min_degree) {
    static std::mutex mutex;
    static std::map<std::pair<int, double>, std::shared_ptr<const SeriesWeights>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{m, b}];
    if (!slot || slot->degree() < min_degree) {
      const int degree = std::max(min_degree, slot ? slot->degree() : 0);
      slot = std::make_shared<const SeriesWeights>(m, b, degree);
    }
    return slot;
  }

 private:
  int m_;
  double b_;
  int degree_;
  std::vector<long double> single_, pair_;
  std::vector<long double> single_offset_, pair_offset_;
};

namespace detail {

/// Signed sum kept as mantissa * e^{log_scale}.
class ScaledSum {
 public:
  void add(long double mantissa, long double log_scale) {
    if (mantissa == 0.0L) return;
    if (acc_ == 0.0L) {
      acc_ = mantissa;
      scale_ = log_scale;
    } else if (log_scale > scale_) {
      acc_ = acc_ * std::exp(scale_ - log_scale) + mantissa;
      scale_ = log_scale;
    } else {
      acc_ += mantissa * std::exp(log_scale - scale_);
    }
    if (acc_ != 0.0L) {
      // keep the mantissa near 1
      const long double shift = std::log(std::fabs(acc_));
      acc_ /= std::exp(shift);
      scale_ += shift;
    }
  }
  bool zero() const { return acc_ == 0.0L; }
  int sign() const { return acc_ < 0.0L ? -1 : 1; }
  long double log_abs() const {
    return acc_ == 0.0L ? -std::numeric_limits<long double>::infinity() : scale_ + std::log(std::fabs(acc_));
  }

 private:
  long double acc_ = 0.0L;
  long double scale_ = 0.0L;
};

// rounding-error allowance per unit roundoff of the table type
inline constexpr long double kRoundoffFactor = 16.0L;

struct SeriesOutcome {
  long double log_abs = -std::numeric_limits<long double>::infinity();
  int sign = 1;
  int degree = 0;
  bool converged = false;
  double ratio = std::numeric_limits<double>::infinity();
  // stopped at the table's degree before convergence and before max_degree
  bool needs_more = false;
  // log(largest layer / |sum|); large values mean digits lost to cancellation
  double cancellation = 0.0;
};

/// Sums layers 0..min(max_degree, available) of a series whose layer k is
/// `layer(k) = (mantissa, log_scale)`, applying the truncation policy.
///
/// A sum whose estimated rounding error, `roundoff` times the largest layer,
/// exceeds rel_tol relative to the result is reported as not converged.
template <class Layer>
SeriesOutcome run_series(Layer&& layer, const SeriesControl& ctl, int available, long double roundoff) {
  ScaledSum sum;
  SeriesOutcome out;
  const int limit = std::min(ctl.max_degree, available);
  int small = 0;
  long double largest = -std::numeric_limits<long double>::infinity();
  for (int k = 0; k <= limit; ++k) {
    const auto [mantissa, log_scale] = layer(k);
    sum.add(mantissa, log_scale);
    if (mantissa != 0.0L) largest = std::max(largest, log_scale + std::log(std::fabs(mantissa)));
    out.degree = k;
    double ratio;
    if (mantissa == 0.0L) {
      ratio = 0.0;
    } else if (sum.zero()) {
      ratio = std::numeric_limits<double>::infinity();
    } else {
      ratio = static_cast<double>(std::exp(log_scale + std::log(std::fabs(mantissa)) - sum.log_abs()));
    }
    out.ratio = ratio;
    small = ratio <= ctl.rel_tol ? small + 1 : 0;
    if (k > 0 && small >= ctl.consecutive_small_layers) {
      out.converged = true;
      break;
    }
  }
  out.log_abs = sum.log_abs();
  out.sign = sum.sign();
  out.needs_more = !out.converged && limit < ctl.max_degree;
  if (std::isfinite(largest)) {
    out.cancellation = static_cast<double>(largest - out.log_abs);
    if (out.converged && roundoff * std::exp(largest - out.log_abs) > ctl.rel_tol) out.converged = false;
  }
  return out;
}

inline SeriesValue to_value(const SeriesOutcome& o) {
  SeriesValue v;
  v.log_abs = static_cast<double>(o.log_abs);
  v.value = o.sign * static_cast<double>(std::exp(o.log_abs));
  v.achieved_degree = o.degree;
  v.converged = o.converged;
  v.last_layer_ratio = o.ratio;
  return v;
}

}  // namespace detail

/// sum_k sum_{|kappa|=k} C_kappa(X) / ([b]_kappa k!) using a prepared table.
/// `sign` = -1 evaluates at -X.
template <class Real>
detail::SeriesOutcome single_series(const BasicZonalTable<Real>& x, const SeriesWeights& w,
                                           const SeriesControl& ctl, int sign = 1) {
  const PartitionCatalog& cat = x.catalog();
  const int available = std::min(x.degree(), w.degree());
  return detail::run_series(
      [&](int k) {
        long double acc = 0.0L;
        for (std::size_t idx = cat.layer_begin(k); idx < cat.layer_end(k); ++idx)
          acc += static_cast<long double>(x.value(idx)) * w.single(idx);
        if (sign < 0 && (k & 1)) acc = -acc;
        return std::pair{acc, k * x.log_scale() + w.single_offset(k)};
      },
      ctl, available, detail::kRoundoffFactor * std::numeric_limits<Real>::epsilon());
}

/// sum_k sum_{|kappa|=k} C_kappa(X) C_kappa(Y) / (C_kappa(I) [b]_kappa k!).
/// `sign` = -1 evaluates at (-X, Y).
template <class Real>
detail::SeriesOutcome pair_series(const BasicZonalTable<Real>& x, const BasicZonalTable<Real>& y, const SeriesWeights& w,
                                         const SeriesControl& ctl, int sign = 1, int available = -1) {
  const PartitionCatalog& cat = x.catalog();
  const int limit = std::min({x.degree(), y.degree(), w.degree()});
  available = available < 0 ? limit : std::min(available, limit);
  const long double log_st = x.log_scale() + y.log_scale();
  return detail::run_series(
      [&](int k) {
        long double acc = 0.0L;
        for (std::size_t idx = cat.layer_begin(k); idx < cat.layer_end(k); ++idx)
          acc += static_cast<long double>(x.value(idx) * y.value(idx)) * w.pair(idx);
        if (sign < 0 && (k & 1)) acc = -acc;
        return std::pair{acc, k * log_st + w.pair_offset(k)};
      },
      ctl, available, detail::kRoundoffFactor * std::numeric_limits<Real>::epsilon());
}

namespace detail {

inline constexpr int kInitialTableDegree = 16;

inline std::vector<double> negated(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x = -x;
  return out;
}

inline void require_bessel_order(double nu, int m) {
  if (!(nu > 0.5 * (m - 2)))
    throw parameter_error("J_nu: order nu must exceed (m-2)/2 (got nu=" + std::to_string(nu) +
                          ", m=" + std::to_string(m) + ")");
}

}  // namespace detail

/// C_kappa at the given spectrum, normalized so that sum_{|kappa|=k} C_kappa = (trace)^k.
inline double zonal(const Partition& kappa, std::span<const double> eigenvalues) {
  if (eigenvalues.empty()) throw dimension_mismatch("zonal: empty spectrum");
  if (kappa.length() > static_cast<int>(eigenvalues.size())) return 0.0;
  const int k = kappa.weight();
  ZonalTable table(eigenvalues, k);
  const auto idx = table.catalog().index_of(kappa);
  const long double log_coef = k * std::log(kZonalAlpha) + detail::log_gamma(k + 1.0L) -
                               table.catalog().log_upper_hooks(*idx) + k * table.log_scale();
  return static_cast<double>(std::exp(log_coef) * table.value(*idx));
}

/// 0F1(b; X) for a spectrum of any sign.
inline SeriesValue hyp0f1_single(double b, std::span<const double> spectrum, const SeriesControl& ctl = {}) {
  ctl.validate();
  const int m = static_cast<int>(spectrum.size());
  if (m == 0) throw dimension_mismatch("hyp0f1_single: empty spectrum");
  int degree = std::min(ctl.max_degree, detail::kInitialTableDegree);
  ZonalTable table(spectrum, degree);
  for (;;) {
    auto w = SeriesWeights::shared(m, b, degree);
    auto out = single_series(table, *w, ctl);
    if (!out.needs_more) return detail::to_value(out);
    degree = std::min(ctl.max_degree, 2 * degree);
    table.extend(degree);
  }
}

inline SeriesValue hyp0f1_single(double b, const SpectralMatrix& x, const SeriesControl& ctl = {}) {
  return hyp0f1_single(b, x.eigenvalues(), ctl);
}

/// 0F1(b; X, Y) for two spectra of equal dimension.
inline SeriesValue hyp0f1_double(double b, std::span<const double> x, std::span<const double> y,
                                 const SeriesControl& ctl = {}) {
  ctl.validate();
  if (x.size() != y.size()) throw dimension_mismatch("hyp0f1_double: spectra differ in dimension");
  const int m = static_cast<int>(x.size());
  if (m == 0) throw dimension_mismatch("hyp0f1_double: empty spectrum");
  int degree = std::min(ctl.max_degree, detail::kInitialTableDegree);
  ZonalTable tx(x, degree), ty(y, degree);
  for (;;) {
    auto w = SeriesWeights::shared(m, b, degree);
    auto out = pair_series(tx, ty, *w, ctl);
    if (!out.needs_more) return detail::to_value(out);
    degree = std::min(ctl.max_degree, 2 * degree);
    tx.extend(degree);
    ty.extend(degree);
  }
}

inline SeriesValue hyp0f1_double(double b, const SpectralMatrix& x, const SpectralMatrix& y,
                                 const SeriesControl& ctl = {}) {
  return hyp0f1_double(b, x.eigenvalues(), y.eigenvalues(), ctl);
}

/// J_nu(T) = 0F1(nu + (m+1)/2; -T).
inline SeriesValue bessel_J(double nu, std::span<const double> t, const SeriesControl& ctl = {}) {
  const int m = static_cast<int>(t.size());
  detail::require_bessel_order(nu, m);
  return hyp0f1_single(nu + 0.5 * (m + 1), detail::negated(t), ctl);
}

inline SeriesValue bessel_J(double nu, const SpectralMatrix& t, const SeriesControl& ctl = {}) {
  return bessel_J(nu, t.eigenvalues(), ctl);
}

/// J_nu(S, T) = 0F1(nu + (m+1)/2; -S, T).
inline SeriesValue bessel_J2(double nu, std::span<const double> s, std::span<const double> t,
                             const SeriesControl& ctl = {}) {
  if (s.size() != t.size()) throw dimension_mismatch("bessel_J2: spectra differ in dimension");
  const int m = static_cast<int>(s.size());
  detail::require_bessel_order(nu, m);
  return hyp0f1_double(nu + 0.5 * (m + 1), detail::negated(s), t, ctl);
}

inline SeriesValue bessel_J2(double nu, const SpectralMatrix& s, const SpectralMatrix& t,
                             const SeriesControl& ctl = {}) {
  return bessel_J2(nu, s.eigenvalues(), t.eigenvalues(), ctl);
}

}  // namespace hankel
