#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "hankel/error.hpp"

namespace hankel {

/// A real symmetric matrix together with its spectrum (sorted descending).
///
/// Construction rejects inputs whose asymmetry exceeds `symmetry_tol` times
/// the largest absolute entry and then stores the symmetrized matrix. Every
/// function of matrix argument in this library depends on the spectrum only.
class SpectralMatrix {
 public:
  static constexpr double kDefaultSymmetryTol = 1e-10;

  SpectralMatrix() = default;

  explicit SpectralMatrix(const Eigen::MatrixXd& entries, double symmetry_tol = kDefaultSymmetryTol) {
    if (entries.rows() != entries.cols() || entries.rows() == 0)
      throw dimension_mismatch("SpectralMatrix: entries must be a non-empty square matrix");
    if (!entries.allFinite()) throw input_error("SpectralMatrix: entries must be finite");
    const double scale = entries.cwiseAbs().maxCoeff();
    const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
    if (asym > symmetry_tol * std::max(scale, 1e-300))
      throw input_error("SpectralMatrix: matrix is not symmetric within tolerance");
    entries_ = 0.5 * (entries + entries.transpose());
    if (entries_.rows() == 1) {
      eigenvalues_ = {entries_(0, 0)};
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries_, Eigen::EigenvaluesOnly);
      if (solver.info() != Eigen::Success) throw input_error("SpectralMatrix: eigen-solver failed");
      const auto& ev = solver.eigenvalues();
      eigenvalues_.assign(ev.data(), ev.data() + ev.size());
      std::sort(eigenvalues_.begin(), eigenvalues_.end(), std::greater<>());
    }
  }

  /// Diagonal matrix with the given spectrum.
  static SpectralMatrix diagonal(std::span<const double> spectrum) {
    if (spectrum.empty()) throw dimension_mismatch("SpectralMatrix: empty spectrum");
    Eigen::VectorXd d(static_cast<Eigen::Index>(spectrum.size()));
    for (std::size_t i = 0; i < spectrum.size(); ++i) d(static_cast<Eigen::Index>(i)) = spectrum[i];
    return SpectralMatrix(Eigen::MatrixXd(d.asDiagonal()));
  }

  static SpectralMatrix diagonal(std::initializer_list<double> spectrum) {
    return diagonal(std::span<const double>(spectrum.begin(), spectrum.size()));
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  std::span<const double> eigenvalues() const { return eigenvalues_; }

  double trace() const { return entries_.trace(); }
  double min_eigenvalue() const { return eigenvalues_.back(); }
  double max_eigenvalue() const { return eigenvalues_.front(); }

  bool is_positive_definite() const { return min_eigenvalue() > 0.0; }
  /// Eigenvalues no smaller than -tol * max(|trace|, tiny).
  bool is_positive_semidefinite(double tol = 1e-8) const {
    return min_eigenvalue() >= -tol * std::max(std::abs(trace()), 1e-300);
  }

  SpectralMatrix scaled(double c) const { return SpectralMatrix(c * entries_); }

  friend bool operator==(const SpectralMatrix& a, const SpectralMatrix& b) {
    return a.entries_ == b.entries_;
  }

 private:
  Eigen::MatrixXd entries_;
  std::vector<double> eigenvalues_;
};

inline void require_same_dim(const SpectralMatrix& a, const SpectralMatrix& b, const char* what) {
  if (a.dim() != b.dim()) throw dimension_mismatch(std::string(what) + ": dimension mismatch");
}

}  // namespace hankel
