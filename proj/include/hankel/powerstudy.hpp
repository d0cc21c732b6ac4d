#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hankel/config.hpp"
#include "hankel/csv.hpp"
#include "hankel/error.hpp"
#include "hankel/resampling.hpp"
#include "hankel/sampling.hpp"

namespace hankel {

struct ScenarioSpec {
  DistributionSpec row_spec;
  DistributionSpec col_spec;
  std::size_t n1 = 20, n2 = 20;
  double nu = 1.0;
  double alpha = 0.05;
  std::size_t replications = 1000;
  std::uint64_t seed = 1;
  SeriesControl ctl;
};

struct PowerRow {
  ScenarioSpec scenario;
  double rejection_percent = std::numeric_limits<double>::quiet_NaN();
  std::size_t rejections = 0;
  double critical_value = std::numeric_limits<double>::quiet_NaN();
  double runtime_seconds = 0.0;
  KernelDiagnostics diagnostics;
  // empty unless the scenario failed
  std::string error;
  // the failure was an internal consistency check, not bad input
  bool inconsistent = false;

  bool ok() const { return error.empty(); }
};

/// Runs every scenario in order; a failing scenario is recorded in its row
/// and does not stop the others. `progress`, when set, is called after each row.
inline std::vector<PowerRow> run_power_table(const std::vector<ScenarioSpec>& scenarios, int parallelism = 1,
                                             const std::function<void(const PowerRow&)>& progress = {}) {
  if (scenarios.empty()) throw input_error("power table: no scenarios");
  std::vector<PowerRow> rows;
  rows.reserve(scenarios.size());
  for (const auto& sc : scenarios) {
    PowerRow row;
    row.scenario = sc;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto rep = warp_speed_power(sc.row_spec, sc.col_spec, sc.n1, sc.n2, sc.nu, sc.alpha, sc.replications,
                                        sc.seed, sc.ctl, parallelism);
      row.rejection_percent = 100.0 * rep.rejection_rate;
      row.rejections = rep.rejections;
      row.critical_value = rep.critical_value;
      row.diagnostics = rep.diagnostics;
    } catch (const consistency_error& e) {
      row.error = e.what();
      row.inconsistent = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(std::move(row));
    if (progress) progress(rows.back());
  }
  return rows;
}

enum class TableFormat { csv, markdown };

namespace detail {

inline std::string fixed1(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << v;
  return os.str();
}

inline std::string full_precision(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

inline std::string emit_csv(const std::vector<PowerRow>& rows) {
  std::ostringstream os;
  os << "row,col,n1,n2,nu,alpha,replications,seed,max_degree,rel_tol,consecutive_small_layers,"
        "rejections,rejection_percent,critical_value,runtime_seconds,evaluations,nonconverged,bounded,"
        "rank_deficient,max_degree_used,worst_ratio,error\n";
  for (const auto& r : rows) {
    const auto& s = r.scenario;
    os << csv::quote(s.row_spec.str()) << ',' << csv::quote(s.col_spec.str()) << ',' << s.n1 << ','
       << s.n2 << ',' << detail::full_precision(s.nu) << ',' << detail::full_precision(s.alpha) << ','
       << s.replications << ',' << s.seed << ',' << s.ctl.max_degree << ',' << detail::full_precision(s.ctl.rel_tol)
       << ',' << s.ctl.consecutive_small_layers << ',' << r.rejections << ',' << detail::fixed1(r.rejection_percent)
       << ',' << detail::full_precision(r.critical_value) << ',' << std::fixed << std::setprecision(3)
       << r.runtime_seconds << std::defaultfloat << ',' << r.diagnostics.evaluations << ','
       << r.diagnostics.nonconverged << ',' << r.diagnostics.bounded << ',' << r.diagnostics.rank_deficient << ','
       << r.diagnostics.max_degree_used << ',' << detail::full_precision(r.diagnostics.worst_ratio) << ','
       << csv::quote(r.error) << '\n';
  }
  return os.str();
}

/// One grid per (n1, n2) pair: row specs down, column specs across, in
/// first-appearance order. Cells without a scenario stay blank.
inline std::string emit_markdown(const std::vector<PowerRow>& rows) {
  std::vector<std::pair<std::size_t, std::size_t>> sizes;
  for (const auto& r : rows) {
    const std::pair sz{r.scenario.n1, r.scenario.n2};
    if (std::find(sizes.begin(), sizes.end(), sz) == sizes.end()) sizes.push_back(sz);
  }
  std::ostringstream os;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    std::vector<std::string> row_labels, col_labels;
    std::map<std::pair<std::string, std::string>, const PowerRow*> cells;
    auto add = [](std::vector<std::string>& v, const std::string& s) {
      if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
    };
    for (const auto& r : rows) {
      if (std::pair{r.scenario.n1, r.scenario.n2} != sizes[g]) continue;
      const auto rl = r.scenario.row_spec.label(), cl = r.scenario.col_spec.label();
      add(row_labels, rl);
      add(col_labels, cl);
      cells[{rl, cl}] = &r;
    }
    if (g) os << '\n';
    os << "| n1=" << sizes[g].first << ", n2=" << sizes[g].second << " |";
    for (const auto& c : col_labels) os << ' ' << c << " |";
    os << "\n|---|";
    for (std::size_t j = 0; j < col_labels.size(); ++j) os << "---|";
    os << '\n';
    for (const auto& rl : row_labels) {
      os << "| " << rl << " |";
      for (const auto& cl : col_labels) {
        auto it = cells.find({rl, cl});
        if (it == cells.end()) os << "  |";
        else if (!it->second->ok()) os << " error |";
        else os << ' ' << detail::fixed1(it->second->rejection_percent) << " |";
      }
      os << '\n';
    }
  }
  return os.str();
}

inline std::string emit_table(const std::vector<PowerRow>& rows, TableFormat format) {
  return format == TableFormat::csv ? emit_csv(rows) : emit_markdown(rows);
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline void apply_settings(const config::Table& t, ScenarioSpec& s) {
  auto positive = [](long long v, const char* key) {
    if (v < 1) throw input_error(std::string("config: ") + key + " must be positive");
    return static_cast<std::size_t>(v);
  };
  if (auto v = t.find("n1")) s.n1 = positive(v->as_integer("n1"), "n1");
  if (auto v = t.find("n2")) s.n2 = positive(v->as_integer("n2"), "n2");
  if (auto v = t.find("nu")) s.nu = v->as_number("nu");
  if (auto v = t.find("alpha")) s.alpha = v->as_number("alpha");
  if (auto v = t.find("replications")) s.replications = positive(v->as_integer("replications"), "replications");
  if (auto v = t.find("seed")) s.seed = static_cast<std::uint64_t>(v->as_integer("seed"));
  if (auto v = t.find("max_degree")) s.ctl.max_degree = static_cast<int>(v->as_integer("max_degree"));
  if (auto v = t.find("rel_tol")) s.ctl.rel_tol = v->as_number("rel_tol");
  if (auto v = t.find("consecutive_small_layers"))
    s.ctl.consecutive_small_layers = static_cast<int>(v->as_integer("consecutive_small_layers"));
}

inline DistributionSpec spec_at(const config::Value& v, std::string_view key) {
  try {
    return DistributionSpec::parse(v.as_string(key));
  } catch (const input_error& e) {
    throw input_error("config line " + std::to_string(v.line) + ": " + e.what());
  } catch (const parameter_error& e) {
    throw input_error("config line " + std::to_string(v.line) + ": " + e.what());
  }
}

}  // namespace detail

/// Scenarios from a config document:
///
///   [defaults]   n1, n2, nu, alpha, replications, seed, max_degree, rel_tol
///   [grid]       rows = [...], cols = [...] (default rows), upper_triangle = bool,
///                sizes = [[n1, n2], ...]
///   [[scenario]] row = "...", col = "...", plus any [defaults] key
///
/// Scenarios without an explicit seed get one derived from the default seed
/// and their position, so every cell uses independent random streams.
inline std::vector<ScenarioSpec> load_scenarios(const config::Document& doc, std::uint64_t seed_override = 0) {
  ScenarioSpec defaults;
  if (const auto* t = doc.table("defaults")) detail::apply_settings(*t, defaults);
  if (seed_override != 0) defaults.seed = seed_override;

  std::vector<ScenarioSpec> out;
  std::vector<bool> explicit_seed;
  if (const auto* grid = doc.table("grid")) {
    const auto* rows_v = grid->find("rows");
    if (!rows_v) throw input_error("config line " + std::to_string(grid->line) + ": [grid] needs rows");
    std::vector<DistributionSpec> rows, cols;
    for (const auto& v : rows_v->as_array("rows")) rows.push_back(detail::spec_at(v, "rows"));
    if (const auto* cols_v = grid->find("cols"))
      for (const auto& v : cols_v->as_array("cols")) cols.push_back(detail::spec_at(v, "cols"));
    else
      cols = rows;
    bool upper = false;
    if (const auto* u = grid->find("upper_triangle")) upper = u->as_bool("upper_triangle");
    std::vector<std::pair<std::size_t, std::size_t>> sizes{{defaults.n1, defaults.n2}};
    if (const auto* sz = grid->find("sizes")) {
      sizes.clear();
      for (const auto& pair : sz->as_array("sizes")) {
        const auto& p = pair.as_array("sizes");
        if (p.size() != 2) throw input_error("config line " + std::to_string(pair.line) + ": sizes entries are [n1, n2]");
        sizes.emplace_back(p[0].as_integer("n1"), p[1].as_integer("n2"));
      }
    }
    for (const auto& [n1, n2] : sizes)
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) {
          if (upper && j < i) continue;
          ScenarioSpec s = defaults;
          s.row_spec = rows[i];
          s.col_spec = cols[j];
          s.n1 = n1;
          s.n2 = n2;
          out.push_back(s);
          explicit_seed.push_back(false);
        }
  }
  for (const auto& t : doc.array("scenario")) {
    ScenarioSpec s = defaults;
    const auto* row = t.find("row");
    const auto* col = t.find("col");
    if (!row || !col) throw input_error("config line " + std::to_string(t.line) + ": [[scenario]] needs row and col");
    s.row_spec = detail::spec_at(*row, "row");
    s.col_spec = detail::spec_at(*col, "col");
    detail::apply_settings(t, s);
    out.push_back(s);
    explicit_seed.push_back(t.find("seed") != nullptr && seed_override == 0);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!explicit_seed[i]) out[i].seed = detail::splitmix64(defaults.seed ^ detail::splitmix64(i));
    out[i].ctl.validate();
    if (out[i].row_spec.d != out[i].col_spec.d)
      throw input_error("config: scenario " + std::to_string(i + 1) + " mixes dimensions");
  }
  return out;
}

}  // namespace hankel
