#pragma once

#include "hankel/catalog.hpp"
#include "hankel/config.hpp"
#include "hankel/covariance.hpp"
#include "hankel/csv.hpp"
#include "hankel/error.hpp"
#include "hankel/kernel.hpp"
#include "hankel/marketdata.hpp"
#include "hankel/matrix_csv.hpp"
#include "hankel/parallel.hpp"
#include "hankel/partition.hpp"
#include "hankel/powerstudy.hpp"
#include "hankel/resampling.hpp"
#include "hankel/rng.hpp"
#include "hankel/sampling.hpp"
#include "hankel/series.hpp"
#include "hankel/specfun.hpp"
#include "hankel/spectral_matrix.hpp"

namespace hankel {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace hankel
