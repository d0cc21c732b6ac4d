#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hankel/covariance.hpp"
#include "hankel/csv.hpp"
#include "hankel/error.hpp"
#include "hankel/kernel.hpp"
#include "hankel/parallel.hpp"
#include "hankel/resampling.hpp"
#include "hankel/spectral_matrix.hpp"

namespace hankel {

/// Close prices of d assets on a common, strictly increasing time axis.
struct PriceSeries {
  std::vector<std::string> assets;
  std::vector<std::int64_t> timestamps;  // seconds since the epoch
  std::vector<std::string> time_labels;  // timestamps as written in the input
  std::vector<std::vector<double>> closes;  // closes[asset][row]
  // input rows lost to missing values or to the timestamp join
  std::size_t dropped = 0;

  std::size_t size() const { return timestamps.size(); }
  int dim() const { return static_cast<int>(assets.size()); }
};

struct ColumnSchema {
  std::string time_col = "timestamp";
  std::vector<std::string> close_cols;
};

/// Seconds since 1970-01-01T00:00:00Z for an integer epoch or an ISO-8601
/// date / date-time (`YYYY-MM-DD[( |T)HH:MM[:SS[.fff]]][Z|+HH:MM|-HH:MM]`).
/// Epoch values above 1e11 are taken as milliseconds.
inline std::optional<std::int64_t> parse_timestamp(std::string_view s) {
  s = csv::trim(s);
  if (s.empty()) return std::nullopt;
  auto all_digits = [](std::string_view t) {
    return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  auto number = [](std::string_view t, int& out) {
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    return ec == std::errc() && p == t.data() + t.size();
  };
  if (all_digits(s.front() == '-' ? s.substr(1) : s) && (s.size() < 5 || s[4] != '-')) {
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return std::abs(v) > 100'000'000'000LL ? v / 1000 : v;
  }
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0, mo = 0, d = 0;
  if (!number(s.substr(0, 4), y) || !number(s.substr(5, 2), mo) || !number(s.substr(8, 2), d)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  std::int64_t secs = std::chrono::sys_days(ymd).time_since_epoch().count() * 86400LL;
  s.remove_prefix(10);
  if (s.empty()) return secs;
  if (s.front() != 'T' && s.front() != ' ') return std::nullopt;
  s.remove_prefix(1);
  int hh = 0, mm = 0, ss = 0;
  if (s.size() < 5 || s[2] != ':' || !number(s.substr(0, 2), hh) || !number(s.substr(3, 2), mm)) return std::nullopt;
  s.remove_prefix(5);
  if (!s.empty() && s.front() == ':') {
    if (s.size() < 3 || !number(s.substr(1, 2), ss)) return std::nullopt;
    s.remove_prefix(3);
    if (!s.empty() && s.front() == '.') {
      s.remove_prefix(1);
      while (!s.empty() && s.front() >= '0' && s.front() <= '9') s.remove_prefix(1);
    }
  }
  if (hh > 24 || mm > 59 || ss > 60) return std::nullopt;
  secs += hh * 3600LL + mm * 60LL + ss;
  if (s.empty() || s == "Z") return secs;
  if ((s.front() == '+' || s.front() == '-') && s.size() == 6 && s[3] == ':') {
    int oh = 0, om = 0;
    if (!number(s.substr(1, 2), oh) || !number(s.substr(4, 2), om)) return std::nullopt;
    const std::int64_t off = oh * 3600LL + om * 60LL;
    return s.front() == '+' ? secs - off : secs + off;
  }
  return std::nullopt;
}

namespace detail {

struct PriceRows {
  std::vector<std::string> assets;
  std::map<std::int64_t, std::pair<std::string, std::vector<double>>> rows;
  std::size_t total = 0;
  std::size_t missing = 0;
};

inline bool missing_field(std::string_view f) {
  return f.empty() || f == "NA" || f == "NaN" || f == "nan" || f == "null";
}

inline PriceRows read_price_file(const std::string& path, const ColumnSchema& schema, bool all_other_columns) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open price file '" + path + "'");
  auto where = [&](int line) { return path + ":" + std::to_string(line) + ": "; };
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty() || line.front() == '#') continue;
    auto fields = csv::split(line, line_no);
    // banner lines before the header are skipped
    if (std::find(fields.begin(), fields.end(), schema.time_col) != fields.end()) {
      header = std::move(fields);
      break;
    }
  }
  if (header.empty()) throw input_error(path + ": no header row with a '" + schema.time_col + "' column");
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw input_error(where(line_no) + "no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t tcol = column(schema.time_col);
  PriceRows out;
  std::vector<std::size_t> cols;
  if (all_other_columns) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (c != tcol) {
        cols.push_back(c);
        out.assets.push_back(header[c]);
      }
  } else {
    for (const auto& name : schema.close_cols) {
      const auto c = column(name);
      cols.push_back(c);
      out.assets.push_back(name);
    }
  }
  if (cols.empty()) throw input_error(path + ": no close columns");

  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty() || line.front() == '#') continue;
    const auto f = csv::split(line, line_no);
    ++out.total;
    if (f.size() != header.size())
      throw input_error(where(line_no) + "expected " + std::to_string(header.size()) + " fields, found " +
                        std::to_string(f.size()));
    const auto t = parse_timestamp(f[tcol]);
    if (!t) throw input_error(where(line_no) + "cannot parse timestamp '" + f[tcol] + "'");
    std::vector<double> closes;
    bool missing = false;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto& field = f[cols[k]];
      if (missing_field(field)) {
        missing = true;
        break;
      }
      double v = 0.0;
      const auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || p != field.data() + field.size())
        throw input_error(where(line_no) + "cannot parse price '" + field + "' in column '" + out.assets[k] + "'");
      if (!(v > 0.0) || !std::isfinite(v))
        throw input_error(where(line_no) + "non-positive price " + field + " in column '" + out.assets[k] + "'");
      closes.push_back(v);
    }
    if (missing) {
      ++out.missing;
      continue;
    }
    if (!out.rows.emplace(*t, std::pair{f[tcol], std::move(closes)}).second)
      throw input_error(where(line_no) + "duplicate timestamp '" + f[tcol] + "'");
  }
  return out;
}

}  // namespace detail

/// Reads one CSV with a time column and one close column per asset (every
/// other column when `schema.close_cols` is empty). Rows may come in any order
/// and are sorted by time; rows with a missing close are dropped and counted.
inline PriceSeries load_close_series(const std::string& path, const ColumnSchema& schema) {
  auto rows = detail::read_price_file(path, schema, schema.close_cols.empty());
  PriceSeries s;
  s.assets = rows.assets;
  s.closes.resize(s.assets.size());
  s.dropped = rows.missing;
  for (auto& [t, row] : rows.rows) {
    s.timestamps.push_back(t);
    s.time_labels.push_back(row.first);
    for (std::size_t k = 0; k < row.second.size(); ++k) s.closes[k].push_back(row.second[k]);
  }
  return s;
}

/// Per-asset files merged on the timestamp (inner join). Each file contributes
/// its close column(s): `schema.close_cols[i]` for file i when given, else every
/// non-time column. Rows without a partner in every file are dropped and counted.
inline PriceSeries load_close_series(const std::vector<std::string>& paths, const ColumnSchema& schema) {
  if (paths.empty()) throw input_error("load_close_series: no input files");
  if (paths.size() == 1) return load_close_series(paths.front(), schema);
  if (!schema.close_cols.empty() && schema.close_cols.size() != paths.size())
    throw input_error("load_close_series: give one close column per file");
  std::vector<detail::PriceRows> files;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    ColumnSchema one{schema.time_col, {}};
    if (!schema.close_cols.empty()) one.close_cols = {schema.close_cols[i]};
    files.push_back(detail::read_price_file(paths[i], one, schema.close_cols.empty()));
  }
  PriceSeries s;
  for (const auto& f : files) s.assets.insert(s.assets.end(), f.assets.begin(), f.assets.end());
  s.closes.resize(s.assets.size());
  std::size_t matched = 0;
  for (const auto& [t, row] : files.front().rows) {
    bool everywhere = true;
    for (std::size_t i = 1; i < files.size() && everywhere; ++i) everywhere = files[i].rows.count(t) > 0;
    if (!everywhere) continue;
    ++matched;
    s.timestamps.push_back(t);
    s.time_labels.push_back(row.first);
    std::size_t k = 0;
    for (const auto& f : files)
      for (double v : f.rows.at(t).second) s.closes[k++].push_back(v);
  }
  for (const auto& f : files) s.dropped += f.missing + (f.rows.size() - matched);
  return s;
}

/// Rows with from <= timestamp <= to.
inline PriceSeries time_window(const PriceSeries& series, std::int64_t from, std::int64_t to) {
  PriceSeries out;
  out.assets = series.assets;
  out.closes.resize(series.assets.size());
  out.dropped = series.dropped;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (series.timestamps[t] < from || series.timestamps[t] > to) continue;
    out.timestamps.push_back(series.timestamps[t]);
    out.time_labels.push_back(series.time_labels[t]);
    for (std::size_t k = 0; k < series.closes.size(); ++k) out.closes[k].push_back(series.closes[k][t]);
  }
  return out;
}

/// r_t = log(close_t / close_{t-1}) per asset.
inline std::vector<Eigen::VectorXd> log_returns(const PriceSeries& series) {
  if (series.size() < 2) throw input_error("log_returns: need at least two prices");
  const int d = series.dim();
  std::vector<Eigen::VectorXd> out(series.size() - 1, Eigen::VectorXd(d));
  for (std::size_t t = 1; t < series.size(); ++t)
    for (int j = 0; j < d; ++j) out[t - 1](j) = std::log(series.closes[j][t] / series.closes[j][t - 1]);
  return out;
}

struct ReturnBlock {
  std::string label;
  std::size_t first_return = 0;  // index into the full return list
  std::vector<Eigen::VectorXd> returns;
  SpectralMatrix covariance;
  CovNormalization normalization = CovNormalization::sum;
  // zero or rank-deficient covariance
  bool degenerate = false;
};

struct BlockSet {
  std::vector<ReturnBlock> blocks;
  std::size_t block_length = 0;
  // trailing returns that did not fill a block
  std::size_t remainder = 0;
};

inline Eigen::MatrixXd stack_rows(const std::vector<Eigen::VectorXd>& v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), v.front().size());
  for (std::size_t i = 0; i < v.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = v[i].transpose();
  return m;
}

/// Consecutive non-overlapping blocks of exactly `block_length` returns, one
/// covariance per block. `labels[i]`, when given, names the block starting at
/// return i.
inline BlockSet block_covariances(const std::vector<Eigen::VectorXd>& returns, std::size_t block_length,
                                  CovNormalization norm = CovNormalization::sum,
                                  const std::vector<std::string>& labels = {}, int parallelism = 1) {
  if (block_length < 2) throw input_error("block_covariances: block length must be at least 2");
  if (returns.size() < block_length)
    throw input_error("block_covariances: block length " + std::to_string(block_length) + " exceeds the " +
                      std::to_string(returns.size()) + " available returns");
  const auto d = returns.front().size();
  for (const auto& r : returns)
    if (r.size() != d) throw dimension_mismatch("block_covariances: returns of different dimensions");
  BlockSet out;
  out.block_length = block_length;
  const std::size_t count = returns.size() / block_length;
  out.remainder = returns.size() - count * block_length;
  out.blocks.resize(count);
  parallel_for(count, parallelism, [&](std::size_t b) {
    auto& blk = out.blocks[b];
    blk.first_return = b * block_length;
    blk.label = blk.first_return < labels.size() ? labels[blk.first_return] : std::to_string(b + 1);
    blk.returns.assign(returns.begin() + static_cast<std::ptrdiff_t>(blk.first_return),
                       returns.begin() + static_cast<std::ptrdiff_t>(blk.first_return + block_length));
    blk.normalization = norm;
    blk.covariance = SpectralMatrix(centered_covariance(stack_rows(blk.returns), norm));
    blk.degenerate = blk.covariance.min_eigenvalue() <= 1e-12 * std::abs(blk.covariance.trace());
  });
  return out;
}

/// Labels for block_covariances: return i ends at price i+1.
inline std::vector<std::string> return_labels(const PriceSeries& s) {
  return {s.time_labels.begin() + 1, s.time_labels.end()};
}

/// Index of the first block whose first return ends at or after `when`.
inline std::size_t split_index_at(const BlockSet& set, const PriceSeries& series, std::int64_t when) {
  for (std::size_t b = 0; b < set.blocks.size(); ++b)
    if (series.timestamps[set.blocks[b].first_return + 1] >= when) return b;
  return set.blocks.size();
}

inline SampleSet block_sample(std::span<const ReturnBlock> blocks) {
  std::vector<SpectralMatrix> m;
  m.reserve(blocks.size());
  for (const auto& b : blocks) m.push_back(b.covariance);
  return SampleSet(std::move(m));
}

/// Two-sample test between the covariance matrices of two block groups.
inline TwoSampleResult change_test(std::span<const ReturnBlock> blocks_a, std::span<const ReturnBlock> blocks_b,
                                   double nu, std::size_t B, std::uint64_t seed, const SeriesControl& ctl = {},
                                   int parallelism = 1) {
  if (blocks_a.empty() || blocks_b.empty()) throw input_error("change_test: both block groups must be non-empty");
  return pooled_bootstrap_pvalue(block_sample(blocks_a), block_sample(blocks_b), nu, B, seed, ctl, parallelism);
}

/// Plot-ready per-block summary: label, group, trace, eigenvalues.
inline std::string block_trace_csv(const BlockSet& set, std::size_t split) {
  std::ostringstream os;
  os << std::setprecision(17);
  const int d = set.blocks.empty() ? 0 : set.blocks.front().covariance.dim();
  os << "block,label,group,first_return,trace,degenerate";
  for (int j = 0; j < d; ++j) os << ",eig" << j + 1;
  os << '\n';
  for (std::size_t b = 0; b < set.blocks.size(); ++b) {
    const auto& blk = set.blocks[b];
    os << b + 1 << ',' << csv::quote(blk.label) << ',' << (b < split ? 'A' : 'B') << ',' << blk.first_return << ','
       << blk.covariance.trace() << ',' << (blk.degenerate ? 1 : 0);
    for (double e : blk.covariance.eigenvalues()) os << ',' << e;
    os << '\n';
  }
  return os.str();
}

}  // namespace hankel
