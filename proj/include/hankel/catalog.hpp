#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "hankel/partition.hpp"

namespace hankel {

/// Jack parameter of the zonal polynomials.
inline constexpr long double kZonalAlpha = 2.0L;

/// Immutable index of all partitions with at most `max_length` parts and
/// weight at most `max_degree`, ordered by weight and then reverse
/// lexicographically. A catalog built for a larger degree has the smaller
/// one as a prefix, so indices stay valid when a catalog is regrown.
///
/// Besides the partitions themselves the catalog carries everything about the
/// Jack P-polynomials (alpha = 2) that does not depend on the argument:
///
///  * the branching rule P_k(x_1..x_n) = sum_mu P_mu(x_1..x_{n-1}) x_n^{|k|-|mu|} psi_{k/mu},
///    over horizontal strips k/mu, stored per level n for partitions with
///    fewer than n parts;
///  * the reduction P_k(x_1..x_n) = (x_1...x_n)^{k_n} P_{k - k_n}(x_1..x_n) for
///    partitions with exactly n parts;
///  * log of the upper hook product c'_k and of P_k(1^m).
class PartitionCatalog {
 public:
  struct Level {
    // Branching terms of partition idx live in [term_begin[idx], term_begin[idx + 1]).
    std::vector<std::uint32_t> term_begin;
    std::vector<std::uint32_t> mu;
    // power of x_n carried by the term, |k| - |mu|
    std::vector<std::uint16_t> exponent;
    std::vector<double> psi;
    // For partitions of length exactly n: index of k - (k_n^n).
    std::vector<std::uint32_t> reduced;
  };

  PartitionCatalog(int max_length, int max_degree) : max_length_(max_length), max_degree_(max_degree) {
    if (max_length < 1) throw input_error("catalog: max_length must be positive");
    if (max_degree < 0) throw input_error("catalog: max_degree must be non-negative");
    if (max_degree > 65535) throw input_error("catalog: max_degree must be below 65536");
    layer_begin_.reserve(static_cast<std::size_t>(max_degree) + 2);
    for (int k = 0; k <= max_degree; ++k) {
      layer_begin_.push_back(parts_.size());
      for (auto& p : partitions(k, max_length)) {
        index_.emplace(std::vector<int>(p.parts().begin(), p.parts().end()),
                       static_cast<std::uint32_t>(parts_.size()));
        parts_.push_back(std::move(p));
      }
    }
    layer_begin_.push_back(parts_.size());

    log_upper_hooks_.resize(parts_.size());
    log_unit_value_.resize(parts_.size());
    for (std::size_t idx = 0; idx < parts_.size(); ++idx) fill_hooks(idx);

    levels_.resize(static_cast<std::size_t>(max_length));
    for (int n = 1; n <= max_length; ++n) build_level(n);
  }

  int max_length() const { return max_length_; }
  int max_degree() const { return max_degree_; }
  std::size_t size() const { return parts_.size(); }
  const Partition& at(std::size_t idx) const { return parts_[idx]; }
  int degree(std::size_t idx) const { return parts_[idx].weight(); }

  std::size_t layer_begin(int k) const { return layer_begin_[static_cast<std::size_t>(k)]; }
  std::size_t layer_end(int k) const { return layer_begin_[static_cast<std::size_t>(k) + 1]; }

  std::optional<std::size_t> index_of(const Partition& p) const {
    auto it = index_.find(std::vector<int>(p.parts().begin(), p.parts().end()));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// log prod_{s in k} (alpha (a(s) + 1) + l(s)).
  long double log_upper_hooks(std::size_t idx) const { return log_upper_hooks_[idx]; }
  /// log P_k(1, ..., 1) with max_length ones.
  long double log_unit_value(std::size_t idx) const { return log_unit_value_[idx]; }

  const Level& level(int n) const { return levels_[static_cast<std::size_t>(n - 1)]; }

  /// Process-wide catalog for `max_length` covering at least `min_degree`.
  static std::shared_ptr<const PartitionCatalog> shared(int max_length, int min_degree) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const PartitionCatalog>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[max_length];
    if (!slot || slot->max_degree() < min_degree) {
      int degree = std::max(min_degree, slot ? slot->max_degree() : 0);
      slot = std::make_shared<const PartitionCatalog>(max_length, degree);
    }
    return slot;
  }

 private:
  static long double box_ratio(int arm, int leg) {
    // b(s) = (alpha a + l + 1) / (alpha a + l + alpha)
    const long double base = kZonalAlpha * arm + leg;
    return (base + 1.0L) / (base + kZonalAlpha);
  }

  void fill_hooks(std::size_t idx) {
    const Partition& p = parts_[idx];
    const long double m = max_length_;
    long double upper = 0.0L, unit_num = 0.0L, lower = 0.0L;
    for (int i = 1; i <= p.length(); ++i) {
      for (int j = 1; j <= p.part(i); ++j) {
        const int arm = p.part(i) - j;
        const int leg = p.conjugate(j) - i;
        upper += std::log(kZonalAlpha * (arm + 1) + leg);
        lower += std::log(kZonalAlpha * arm + leg + 1);
        unit_num += std::log(m - (i - 1) + kZonalAlpha * (j - 1));
      }
    }
    log_upper_hooks_[idx] = upper;
    log_unit_value_[idx] = unit_num - lower;
  }

  // psi_{k/mu} = prod over boxes s of mu lying in a row that meets the strip
  // and in a column that does not, of b_mu(s) / b_k(s).
  static long double branching_coefficient(const std::vector<int>& kappa, const std::vector<int>& mu,
                                           const std::vector<int>& kappa_conj,
                                           const std::vector<int>& mu_conj) {
    long double psi = 1.0L;
    for (std::size_t i = 0; i < kappa.size(); ++i) {
      const int mu_i = i < mu.size() ? mu[i] : 0;
      if (kappa[i] == mu_i) continue;
      for (int j = 1; j <= mu_i; ++j) {
        const auto col = static_cast<std::size_t>(j - 1);
        if (kappa_conj[col] != mu_conj[col]) continue;
        const int leg = mu_conj[col] - static_cast<int>(i) - 1;
        psi *= box_ratio(mu_i - j, leg) / box_ratio(kappa[i] - j, leg);
      }
    }
    return psi;
  }

  static std::vector<int> conjugate_of(const std::vector<int>& parts, int width) {
    std::vector<int> conj(static_cast<std::size_t>(std::max(width, 0)), 0);
    for (int p : parts)
      for (int j = 0; j < p; ++j) ++conj[static_cast<std::size_t>(j)];
    return conj;
  }

  void build_level(int n) {
    Level& lev = levels_[static_cast<std::size_t>(n - 1)];
    lev.term_begin.assign(parts_.size() + 1, 0);
    lev.reduced.assign(parts_.size(), 0);

    std::vector<int> mu;
    for (std::size_t idx = 0; idx < parts_.size(); ++idx) {
      lev.term_begin[idx] = static_cast<std::uint32_t>(lev.mu.size());
      const Partition& p = parts_[idx];
      if (p.length() > n) continue;
      std::vector<int> kappa(p.parts().begin(), p.parts().end());
      if (p.length() == n) {
        const int last = kappa.back();
        std::vector<int> rest;
        for (int part : kappa)
          if (part > last) rest.push_back(part - last);
        lev.reduced[idx] = index_.at(rest);
        continue;
      }
      // length < n: enumerate mu with k_1 >= mu_1 >= k_2 >= ... >= mu_{n-1} >= 0
      const int width = kappa.empty() ? 0 : kappa.front();
      const auto kappa_conj = conjugate_of(kappa, width);
      mu.assign(static_cast<std::size_t>(n - 1), 0);
      enumerate_strips(kappa, 0, n - 1, mu, [&](const std::vector<int>& cand) {
        std::vector<int> trimmed;
        for (int part : cand)
          if (part > 0) trimmed.push_back(part);
        const std::uint32_t mu_idx = index_.at(trimmed);
        lev.mu.push_back(mu_idx);
        lev.exponent.push_back(static_cast<std::uint16_t>(p.weight() - parts_[mu_idx].weight()));
        lev.psi.push_back(static_cast<double>(
            branching_coefficient(kappa, trimmed, kappa_conj, conjugate_of(trimmed, width))));
      });
    }
    lev.term_begin[parts_.size()] = static_cast<std::uint32_t>(lev.mu.size());
  }

  template <class Emit>
  static void enumerate_strips(const std::vector<int>& kappa, std::size_t row, int rows,
                               std::vector<int>& mu, Emit&& emit) {
    if (static_cast<int>(row) == rows) {
      emit(mu);
      return;
    }
    const int hi = row < kappa.size() ? kappa[row] : 0;
    const int lo = row + 1 < kappa.size() ? kappa[row + 1] : 0;
    for (int v = hi; v >= lo; --v) {
      mu[row] = v;
      enumerate_strips(kappa, row + 1, rows, mu, emit);
    }
  }

  int max_length_;
  int max_degree_;
  std::vector<Partition> parts_;
  std::vector<std::size_t> layer_begin_;
  std::map<std::vector<int>, std::uint32_t> index_;
  std::vector<long double> log_upper_hooks_;
  std::vector<long double> log_unit_value_;
  std::vector<Level> levels_;
};

}  // namespace hankel
