#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hankel/error.hpp"
#include "hankel/kernel.hpp"
#include "hankel/parallel.hpp"
#include "hankel/rng.hpp"
#include "hankel/sampling.hpp"

namespace hankel {

/// Lower empirical quantile: the ceil(q n)-th order statistic (1-based),
/// clamped to the first one for q = 0.
inline double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw input_error("quantile: empty input");
  if (!(q >= 0.0 && q <= 1.0)) throw input_error("quantile: q must lie in [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  const auto n = v.size();
  auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
  return v[k - 1];
}

struct TwoSampleResult {
  StatisticValue statistic;
  double p_value = 1.0;
  std::size_t replications = 0;
  // resampled statistics at least as large as the observed one
  std::size_t exceedances = 0;
  std::uint64_t seed = 0;
  std::string method = "pooled_bootstrap";
};

struct WarpSpeedReport {
  double rejection_rate = 0.0;
  std::size_t rejections = 0;
  double alpha = 0.05;
  std::size_t replications = 0;
  double critical_value = 0.0;
  std::uint64_t seed = 0;
  KernelDiagnostics diagnostics;
};

namespace detail {

inline void draw_pooled_indices(std::size_t pool, std::vector<std::size_t>& xs, std::vector<std::size_t>& ys,
                                Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
  for (auto& i : xs) i = pick(rng);
  for (auto& i : ys) i = pick(rng);
}

}  // namespace detail

/// Add-one bootstrap p-value from B with-replacement resamples of the pooled
/// sample; kernel values come from one pooled Gram built up front.
inline TwoSampleResult pooled_bootstrap_pvalue(const SampleSet& xs, const SampleSet& ys, double nu, std::size_t B,
                                               std::uint64_t seed, const SeriesControl& ctl = {},
                                               int parallelism = 1) {
  if (B < 100) throw input_error("bootstrap: at least 100 replications are required");
  const auto all = detail::pooled(xs, ys);
  const KernelGram gram(all, nu, ctl, parallelism);
  TwoSampleResult r;
  r.statistic = statistic_from_gram(gram, xs.size());
  r.replications = B;
  r.seed = seed;

  std::vector<char> exceed(B, 0);
  parallel_for(B, parallelism, [&](std::size_t b) {
    Rng rng = make_stream(seed, b);
    std::vector<std::size_t> ix(xs.size()), iy(ys.size());
    detail::draw_pooled_indices(all.size(), ix, iy, rng);
    exceed[b] = gram.statistic(ix, iy) >= r.statistic.i_value;
  });
  r.exceedances = static_cast<std::size_t>(std::count(exceed.begin(), exceed.end(), 1));
  r.p_value = static_cast<double>(1 + r.exceedances) / static_cast<double>(B + 1);
  return r;
}

/// Warp-speed bootstrap power estimate: each of N replications draws fresh
/// samples and one pooled resample; all resample statistics share one
/// critical value, the empirical (1 - alpha) quantile.
inline WarpSpeedReport warp_speed_power(const DistributionSpec& spec_x, const DistributionSpec& spec_y,
                                        std::size_t n1, std::size_t n2, double nu, double alpha, std::size_t N,
                                        std::uint64_t seed, const SeriesControl& ctl = {}, int parallelism = 1) {
  if (N < 100) throw input_error("warp-speed: at least 100 replications are required");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw input_error("warp-speed: alpha must lie in [0, 1)");
  if (n1 < 1 || n2 < 1) throw input_error("warp-speed: sample sizes must be positive");
  if (spec_x.d != spec_y.d) throw dimension_mismatch("warp-speed: distributions of different dimensions");
  const MatrixSampler sx(spec_x), sy(spec_y);

  std::vector<double> observed(N), resampled(N);
  std::vector<KernelDiagnostics> diags(N);
  parallel_for(N, parallelism, [&](std::size_t r) {
    Rng rng = make_stream(seed, r);
    const SampleSet x = sx.sample(n1, rng);
    const SampleSet y = sy.sample(n2, rng);
    const auto all = detail::pooled(x, y);
    const KernelGram gram(all, nu, ctl, 1);
    observed[r] = gram.statistic(detail::iota_indices(0, n1), detail::iota_indices(n1, n2));
    std::vector<std::size_t> ix(n1), iy(n2);
    detail::draw_pooled_indices(all.size(), ix, iy, rng);
    resampled[r] = gram.statistic(ix, iy);
    diags[r] = gram.diagnostics();
  });

  WarpSpeedReport rep;
  rep.alpha = alpha;
  rep.replications = N;
  rep.seed = seed;
  for (const auto& d : diags) rep.diagnostics.merge(d);
  rep.critical_value = quantile(resampled, 1.0 - alpha);
  // a level-0 test never rejects
  if (alpha > 0.0)
    rep.rejections = static_cast<std::size_t>(
        std::count_if(observed.begin(), observed.end(), [&](double v) { return v > rep.critical_value; }));
  rep.rejection_rate = static_cast<double>(rep.rejections) / static_cast<double>(N);
  return rep;
}

}  // namespace hankel
