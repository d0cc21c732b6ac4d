#pragma once

#include <cmath>
#include <limits>

#include "hankel/error.hpp"

namespace hankel {

/// Truncation policy for the layer-by-layer hypergeometric series.
///
/// Summation stops once `consecutive_small_layers` successive degree layers
/// are each at most `rel_tol` times the running partial sum, or when
/// `max_degree` is reached (then the result is flagged as not converged).
struct SeriesControl {
  int max_degree = 120;
  double rel_tol = 1e-12;
  int consecutive_small_layers = 2;

  void validate() const {
    if (max_degree < 1) throw input_error("SeriesControl: max_degree must be >= 1");
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw input_error("SeriesControl: rel_tol must lie in (0, 1)");
    if (consecutive_small_layers < 1)
      throw input_error("SeriesControl: consecutive_small_layers must be >= 1");
  }
};

struct SeriesValue {
  double value = 0.0;
  /// log |value|; finite even when `value` itself over- or underflows.
  double log_abs = -std::numeric_limits<double>::infinity();
  int achieved_degree = 0;
  bool converged = false;
  double last_layer_ratio = std::numeric_limits<double>::infinity();
};

}  // namespace hankel
