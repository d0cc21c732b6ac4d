#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>

#include "hankel/error.hpp"

namespace hankel {

/// Divisor applied to the centered outer-product sum of a block of vectors.
enum class CovNormalization { sum, sample, ml };

inline std::string to_string(CovNormalization n) {
  switch (n) {
    case CovNormalization::sum: return "sum";
    case CovNormalization::sample: return "sample";
    case CovNormalization::ml: return "ml";
  }
  return "sum";
}

inline CovNormalization parse_normalization(std::string_view s) {
  if (s == "sum") return CovNormalization::sum;
  if (s == "sample") return CovNormalization::sample;
  if (s == "ml") return CovNormalization::ml;
  throw input_error("unknown covariance normalization '" + std::string(s) + "' (expected sum, sample or ml)");
}

/// sum_t (r_t - mean)(r_t - mean)' over the rows of `rows`, divided per `norm`.
inline Eigen::MatrixXd centered_covariance(const Eigen::MatrixXd& rows, CovNormalization norm) {
  const Eigen::Index n = rows.rows();
  if (n < 1) throw input_error("covariance: no observations");
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - mean;
  Eigen::MatrixXd s = centered.transpose() * centered;
  switch (norm) {
    case CovNormalization::sum: break;
    case CovNormalization::sample:
      if (n < 2) throw input_error("covariance: sample normalization needs at least two observations");
      s /= static_cast<double>(n - 1);
      break;
    case CovNormalization::ml: s /= static_cast<double>(n); break;
  }
  return 0.5 * (s + s.transpose());
}

}  // namespace hankel
