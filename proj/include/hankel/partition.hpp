#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <functional>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "hankel/error.hpp"

namespace hankel {

/// Integer partition kappa = (k_1 >= k_2 >= ... >= k_l > 0).
///
/// Rows and columns are 1-based in the accessors below, matching the usual
/// Young-diagram conventions: `part(i)` is the length of row i and
/// `conjugate(j)` the height of column j. Both return 0 outside the diagram.
class Partition {
 public:
  Partition() = default;

  explicit Partition(std::vector<int> parts) : parts_(std::move(parts)) {
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (parts_[i] <= 0) throw input_error("partition parts must be positive");
      if (i > 0 && parts_[i] > parts_[i - 1])
        throw input_error("partition parts must be non-increasing");
    }
    weight_ = std::accumulate(parts_.begin(), parts_.end(), 0);
  }

  Partition(std::initializer_list<int> parts) : Partition(std::vector<int>(parts)) {}

  std::span<const int> parts() const { return parts_; }
  int weight() const { return weight_; }
  int length() const { return static_cast<int>(parts_.size()); }
  bool empty() const { return parts_.empty(); }

  int part(int i) const {
    return (i >= 1 && i <= length()) ? parts_[static_cast<std::size_t>(i - 1)] : 0;
  }

  int conjugate(int j) const {
    if (j < 1) return 0;
    int h = 0;
    for (int p : parts_) {
      if (p >= j) ++h; else break;
    }
    return h;
  }

  bool contains(int i, int j) const { return j >= 1 && j <= part(i); }

  friend bool operator==(const Partition&, const Partition&) = default;
  friend std::strong_ordering operator<=>(const Partition& a, const Partition& b) {
    return a.parts_ <=> b.parts_;
  }

  friend std::ostream& operator<<(std::ostream& os, const Partition& p) {
    os << '(';
    for (std::size_t i = 0; i < p.parts_.size(); ++i) os << (i ? "," : "") << p.parts_[i];
    return os << ')';
  }

 private:
  std::vector<int> parts_;
  int weight_ = 0;
};

namespace detail {

inline void enumerate_partitions(int remaining, int max_part, int slots, std::vector<int>& prefix,
                                 const std::function<void(const std::vector<int>&)>& emit) {
  if (remaining == 0) {
    emit(prefix);
    return;
  }
  if (slots == 0) return;
  for (int p = std::min(remaining, max_part); p >= 1; --p) {
    // the remaining slots must be able to absorb what is left
    if (static_cast<long>(p) * slots < remaining) break;
    prefix.push_back(p);
    enumerate_partitions(remaining - p, p, slots - 1, prefix, emit);
    prefix.pop_back();
  }
}

}  // namespace detail

/// All partitions of k with at most max_length parts, reverse-lexicographic.
inline std::vector<Partition> partitions(int k, int max_length) {
  if (k < 0) throw input_error("partitions: k must be non-negative");
  if (max_length < 1) throw input_error("partitions: max_length must be positive");
  std::vector<Partition> out;
  std::vector<int> prefix;
  detail::enumerate_partitions(k, k, max_length, prefix,
                               [&](const std::vector<int>& p) { out.emplace_back(p); });
  return out;
}

}  // namespace hankel
