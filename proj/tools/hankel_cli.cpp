// hankel: special functions, two-sample tests, power studies and the
// market-data pipeline from the command line.
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical non-convergence,
// 3 internal inconsistency.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hankel/hankel.hpp"

namespace {

using json = nlohmann::ordered_json;

enum Exit { kOk = 0, kUsage = 1, kNonConverged = 2, kInternal = 3 };

struct Common {
  int parallel = 1;
  std::uint64_t seed = 0;
  hankel::SeriesControl ctl;
  std::vector<std::string> argv;
};

std::string format_value(double v) {
  char buf[64];
  const double a = std::abs(v);
  if (v == 0.0 || (a >= 1e-4 && a < 1e15))
    std::snprintf(buf, sizeof buf, "%.10f", v);
  else
    std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string command_line(const std::vector<std::string>& argv) {
  std::string s;
  for (const auto& a : argv) {
    if (!s.empty()) s += ' ';
    s += a.find(' ') == std::string::npos ? a : "'" + a + "'";
  }
  return s;
}

json control_json(const hankel::SeriesControl& c) {
  return {{"max_degree", c.max_degree}, {"rel_tol", c.rel_tol}, {"consecutive_small_layers", c.consecutive_small_layers}};
}

json diagnostics_json(const hankel::KernelDiagnostics& d) {
  json j = {{"evaluations", d.evaluations},
            {"nonconverged", d.nonconverged},
            {"bounded", d.bounded},
            {"rank_deficient", d.rank_deficient},
            {"max_degree_used", d.max_degree_used}};
  if (std::isfinite(d.worst_ratio)) j["worst_ratio"] = d.worst_ratio;
  else j["worst_ratio"] = "inf";
  return j;
}

json result_json(const hankel::TwoSampleResult& r) {
  return {{"statistic", r.statistic.i_value},
          {"scaled_statistic", r.statistic.scaled},
          {"p_value", r.p_value},
          {"replications", r.replications},
          {"exceedances", r.exceedances},
          {"n1", r.statistic.n1},
          {"n2", r.statistic.n2},
          {"method", r.method}};
}

json envelope(const std::string& command, const Common& c, json config) {
  config["seed"] = c.seed;
  config["parallel"] = c.parallel;
  config["series"] = control_json(c.ctl);
  return {{"tool", "hankel"}, {"version", hankel::kVersion}, {"command", command},
          {"command_line", command_line(c.argv)}, {"config", std::move(config)}};
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw hankel::input_error("cannot write '" + path + "'");
  out << text;
}

std::vector<double> expand_spectrum(const std::vector<double>& v, int m, const char* name) {
  if (v.empty()) throw hankel::input_error(std::string("--") + name + " is required");
  if (m <= 0 || static_cast<int>(v.size()) == m) return v;
  if (v.size() == 1) return std::vector<double>(static_cast<std::size_t>(m), v.front());
  throw hankel::input_error(std::string("--") + name + " has " + std::to_string(v.size()) +
                            " eigenvalues but --m is " + std::to_string(m));
}

// ---------------------------------------------------------------- specfun

struct SpecfunArgs {
  std::string fn;
  double nu = 1.0;
  double b = 0.0;
  double a = 0.0;
  int m = 0;
  std::vector<double> x, y;
  std::vector<int> kappa;
  bool json_out = false;
};

int run_specfun(const SpecfunArgs& s, const Common& c) {
  namespace h = hankel;
  h::SeriesValue v;
  bool series = true;
  if (s.fn == "mvgamma") {
    if (s.m < 1) throw h::input_error("mvgamma needs --m >= 1");
    const double ln = h::mv_gamma_ln(s.m, s.a);
    v.value = std::exp(ln);
    v.log_abs = ln;
    v.converged = true;
    series = false;
  } else if (s.fn == "zonal") {
    const auto x = expand_spectrum(s.x, s.m, "x");
    if (s.kappa.empty()) throw h::input_error("zonal needs --kappa");
    v.value = h::zonal(h::Partition(s.kappa), x);
    v.log_abs = std::log(std::abs(v.value));
    v.converged = true;
    series = false;
  } else if (s.fn == "J" || s.fn == "0F1") {
    const auto x = expand_spectrum(s.x, s.m, "x");
    v = s.fn == "J" ? h::bessel_J(s.nu, x, c.ctl) : h::hyp0f1_single(s.b, x, c.ctl);
  } else if (s.fn == "J2" || s.fn == "0F1two") {
    const auto x = expand_spectrum(s.x, s.m, "x");
    const auto y = expand_spectrum(s.y, static_cast<int>(x.size()), "y");
    v = s.fn == "J2" ? h::bessel_J2(s.nu, x, y, c.ctl) : h::hyp0f1_double(s.b, x, y, c.ctl);
  } else {
    throw h::input_error("unknown --fn '" + s.fn + "'");
  }
  if (s.json_out) {
    json cfg = {{"fn", s.fn}, {"nu", s.nu}, {"b", s.b}, {"a", s.a}, {"m", s.m}, {"x", s.x}, {"y", s.y},
                {"kappa", s.kappa}};
    json out = envelope("specfun", c, cfg);
    out["value"] = v.value;
    out["log_abs"] = v.log_abs;
    if (series) {
      out["achieved_degree"] = v.achieved_degree;
      out["converged"] = v.converged;
      out["last_layer_ratio"] = std::isfinite(v.last_layer_ratio) ? json(v.last_layer_ratio) : json("inf");
    }
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << format_value(v.value) << '\n';
    if (series)
      std::cout << "# degree=" << v.achieved_degree << " converged=" << (v.converged ? "yes" : "no")
                << " last_layer_ratio=" << v.last_layer_ratio << " log_abs=" << std::setprecision(17) << v.log_abs
                << '\n';
  }
  if (!v.converged) {
    if (v.achieved_degree < c.ctl.max_degree)
      std::cerr << "hankel: cancellation between terms exceeds the requested accuracy\n";
    else
      std::cerr << "hankel: series did not converge within max_degree=" << c.ctl.max_degree << '\n';
    return kNonConverged;
  }
  return kOk;
}

// ---------------------------------------------------------------- test

struct PipelineArgs {
  std::string time_col = "timestamp";
  std::vector<std::string> close_cols;
  std::size_t block = 24;
  std::string norm = "sum";
};

json pipeline_json(const PipelineArgs& p) {
  return {{"time_col", p.time_col}, {"close_cols", p.close_cols}, {"block", p.block}, {"normalization", p.norm}};
}

struct TestArgs {
  std::string x, y, out;
  std::size_t boot = 1000;
  double nu = 1.0;
  bool pipeline = false;
  PipelineArgs pipe;
};

hankel::BlockSet pipeline_blocks(const std::string& path, const PipelineArgs& p, int parallel) {
  const auto series = hankel::load_close_series(path, hankel::ColumnSchema{p.time_col, p.close_cols});
  if (series.dropped) std::cerr << "hankel: " << path << ": dropped " << series.dropped << " rows\n";
  const auto returns = hankel::log_returns(series);
  auto blocks = hankel::block_covariances(returns, p.block, hankel::parse_normalization(p.norm),
                                          hankel::return_labels(series), parallel);
  if (blocks.remainder)
    std::cerr << "hankel: " << path << ": " << blocks.remainder << " trailing returns do not fill a block\n";
  return blocks;
}

int run_test(const TestArgs& t, const Common& c) {
  std::vector<hankel::SpectralMatrix> xs, ys;
  json inputs;
  if (t.pipeline) {
    const auto bx = pipeline_blocks(t.x, t.pipe, c.parallel);
    const auto by = pipeline_blocks(t.y, t.pipe, c.parallel);
    for (const auto& b : bx.blocks) xs.push_back(b.covariance);
    for (const auto& b : by.blocks) ys.push_back(b.covariance);
    inputs = {{"x_blocks", xs.size()}, {"y_blocks", ys.size()}};
  } else {
    xs = hankel::matrices_of(hankel::read_matrix_csv(t.x));
    ys = hankel::matrices_of(hankel::read_matrix_csv(t.y));
  }
  const hankel::SampleSet sx(std::move(xs)), sy(std::move(ys));
  if (sx.dim() != sy.dim()) throw hankel::dimension_mismatch("test: the two samples have different dimensions");
  const auto r = hankel::pooled_bootstrap_pvalue(sx, sy, t.nu, t.boot, c.seed, c.ctl, c.parallel);

  json cfg = {{"x", t.x}, {"y", t.y}, {"nu", t.nu}, {"boot", t.boot}, {"pipeline", t.pipeline}};
  if (t.pipeline) cfg["pipeline_options"] = pipeline_json(t.pipe);
  json out = envelope("test", c, cfg);
  if (!inputs.is_null()) out["inputs"] = inputs;
  out["result"] = result_json(r);
  out["diagnostics"] = diagnostics_json(r.statistic.diagnostics);
  write_text(t.out, out.dump(2) + "\n");
  if (!r.statistic.diagnostics.converged()) {
    std::cerr << "hankel: " << r.statistic.diagnostics.nonconverged << " kernel series did not converge\n";
    return kNonConverged;
  }
  return kOk;
}

// ---------------------------------------------------------------- power

struct PowerArgs {
  std::string config, out_csv, out_md;
  std::size_t replications = 0;
};

std::string comment_block(const json& env) {
  std::ostringstream os;
  os << "# hankel " << hankel::kVersion << " power\n";
  os << "# command: " << env["command_line"].get<std::string>() << '\n';
  os << "# config: " << env["config"].dump() << '\n';
  return os.str();
}

int run_power(const PowerArgs& p, Common c) {
  const auto doc = hankel::config::parse_file(p.config);
  const auto* defaults = doc.table("defaults");
  // --seed overrides the file; with neither, draw one
  if (c.seed == 0 && !(defaults && defaults->find("seed"))) c.seed = hankel::entropy_seed();
  auto scenarios = hankel::load_scenarios(doc, c.seed);
  if (c.seed == 0) c.seed = static_cast<std::uint64_t>(defaults->find("seed")->as_integer("seed"));
  if (scenarios.empty()) throw hankel::input_error(p.config + ": no scenarios");
  if (p.replications)
    for (auto& s : scenarios) s.replications = p.replications;
  json cfg = {{"config", p.config}, {"replications_override", p.replications}, {"scenarios", scenarios.size()}};
  const json env = envelope("power", c, cfg);

  const auto rows = hankel::run_power_table(scenarios, c.parallel, [&](const hankel::PowerRow& r) {
    std::cerr << r.scenario.row_spec.label() << " vs " << r.scenario.col_spec.label() << " (" << r.scenario.n1
              << "/" << r.scenario.n2 << "): ";
    if (r.ok()) std::cerr << hankel::detail::fixed1(r.rejection_percent) << "%";
    else std::cerr << "error: " << r.error;
    std::cerr << " [" << std::fixed << std::setprecision(1) << r.runtime_seconds << std::defaultfloat << " s]\n";
  });
  const std::string header = comment_block(env);
  const std::string csv = header + hankel::emit_csv(rows);
  const std::string md = header + "\n" + hankel::emit_markdown(rows);
  if (!p.out_csv.empty()) write_text(p.out_csv, csv);
  if (!p.out_md.empty()) write_text(p.out_md, md);
  if (p.out_csv.empty() && p.out_md.empty()) std::cout << md;

  int code = kOk;
  for (const auto& r : rows)
    if (!r.ok()) code = std::max(code, r.inconsistent ? int(kInternal) : int(kUsage));
  return code;
}

// ---------------------------------------------------------------- data

struct DataArgs {
  std::vector<std::string> inputs;
  std::string out, blocks_csv, split_date, from, to;
  long long split_index = -1;
  std::size_t boot = 1000;
  double nu = 1.0;
  PipelineArgs pipe;
};

int run_data(const DataArgs& d, const Common& c) {
  const hankel::ColumnSchema schema{d.pipe.time_col, d.pipe.close_cols};
  auto series = hankel::load_close_series(d.inputs, schema);
  if (!d.from.empty() || !d.to.empty()) {
    auto bound = [](const std::string& text, const char* flag, std::int64_t fallback) {
      if (text.empty()) return fallback;
      const auto t = hankel::parse_timestamp(text);
      if (!t) throw hankel::input_error(std::string("cannot parse ") + flag + " '" + text + "'");
      return *t;
    };
    series = hankel::time_window(series, bound(d.from, "--from", std::numeric_limits<std::int64_t>::min()),
                                 bound(d.to, "--to", std::numeric_limits<std::int64_t>::max()));
  }
  const auto returns = hankel::log_returns(series);
  const auto blocks = hankel::block_covariances(returns, d.pipe.block, hankel::parse_normalization(d.pipe.norm),
                                                hankel::return_labels(series), c.parallel);
  std::size_t split = 0;
  if (d.split_index >= 0 && !d.split_date.empty())
    throw hankel::input_error("give either --split-index or --split-date");
  if (d.split_index >= 0) {
    split = static_cast<std::size_t>(d.split_index);
  } else if (!d.split_date.empty()) {
    const auto when = hankel::parse_timestamp(d.split_date);
    if (!when) throw hankel::input_error("cannot parse --split-date '" + d.split_date + "'");
    split = hankel::split_index_at(blocks, series, *when);
  } else {
    throw hankel::input_error("--split-index or --split-date is required");
  }
  if (split == 0 || split >= blocks.blocks.size())
    throw hankel::input_error("split leaves an empty group (" + std::to_string(blocks.blocks.size()) +
                              " blocks, split at " + std::to_string(split) + ")");
  const std::span<const hankel::ReturnBlock> all(blocks.blocks);
  const auto r = hankel::change_test(all.first(split), all.subspan(split), d.nu, d.boot, c.seed, c.ctl, c.parallel);

  json cfg = {{"inputs", d.inputs}, {"nu", d.nu}, {"boot", d.boot}, {"split_index", d.split_index},
              {"split_date", d.split_date}, {"from", d.from}, {"to", d.to}, {"pipeline", pipeline_json(d.pipe)}};
  json out = envelope("data", c, cfg);
  out["series"] = {{"assets", series.assets},
                   {"prices", series.size()},
                   {"dropped_rows", series.dropped},
                   {"first", series.time_labels.front()},
                   {"last", series.time_labels.back()}};
  std::size_t degenerate = 0;
  json per_block = json::array();
  for (std::size_t b = 0; b < blocks.blocks.size(); ++b) {
    const auto& blk = blocks.blocks[b];
    degenerate += blk.degenerate;
    per_block.push_back({{"label", blk.label},
                         {"group", b < split ? "A" : "B"},
                         {"trace", blk.covariance.trace()},
                         {"min_eigenvalue", blk.covariance.min_eigenvalue()},
                         {"degenerate", blk.degenerate}});
  }
  out["blocks"] = {{"total", blocks.blocks.size()},
                   {"group_a", split},
                   {"group_b", blocks.blocks.size() - split},
                   {"block_length", blocks.block_length},
                   {"remainder_returns", blocks.remainder},
                   {"degenerate", degenerate},
                   {"normalization", d.pipe.norm},
                   {"per_block", per_block}};
  out["result"] = result_json(r);
  out["diagnostics"] = diagnostics_json(r.statistic.diagnostics);
  write_text(d.out, out.dump(2) + "\n");
  if (!d.blocks_csv.empty()) {
    std::ostringstream head;
    head << "# hankel " << hankel::kVersion << " data\n# command: " << command_line(c.argv) << '\n';
    write_text(d.blocks_csv, head.str() + hankel::block_trace_csv(blocks, split));
  }
  if (!r.statistic.diagnostics.converged()) {
    std::cerr << "hankel: " << r.statistic.diagnostics.nonconverged << " kernel series did not converge\n";
    return kNonConverged;
  }
  return kOk;
}

void add_pipeline_options(CLI::App* cmd, PipelineArgs& p) {
  cmd->add_option("--time-col", p.time_col, "Timestamp column name")->capture_default_str();
  cmd->add_option("--close-cols", p.close_cols, "Close-price columns, comma separated")->delimiter(',');
  cmd->add_option("--block", p.block, "Returns per block")->capture_default_str();
  cmd->add_option("--norm", p.norm, "Block covariance normalization: sum, sample or ml")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  Common common;
  common.argv.assign(argv, argv + argc);
  CLI::App app{"Two-sample test for orthogonally equivalent distributions of positive definite matrices"};
  app.set_version_flag("--version", hankel::kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--parallel", common.parallel, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--seed", common.seed, "Random seed (0 = draw from entropy; echoed in output)")->capture_default_str();
  app.add_option("--max-degree", common.ctl.max_degree, "Series truncation degree")->capture_default_str();
  app.add_option("--rel-tol", common.ctl.rel_tol, "Series relative tolerance")->capture_default_str();
  app.add_option("--small-layers", common.ctl.consecutive_small_layers,
                 "Consecutive small layers needed to stop a series")
      ->capture_default_str();

  SpecfunArgs sf;
  auto* specfun = app.add_subcommand("specfun", "Evaluate a special function of matrix argument");
  specfun->add_option("--fn", sf.fn, "J, J2, 0F1, 0F1two, zonal or mvgamma")
      ->required()
      ->check(CLI::IsMember({"J", "J2", "0F1", "0F1two", "zonal", "mvgamma"}));
  specfun->add_option("--nu", sf.nu, "Bessel order")->capture_default_str();
  specfun->add_option("--b", sf.b, "0F1 parameter");
  specfun->add_option("--a", sf.a, "mvgamma argument");
  specfun->add_option("--m", sf.m, "Matrix dimension (a single --x value is repeated m times)");
  specfun->add_option("--x", sf.x, "Eigenvalues of the first argument")->delimiter(',');
  specfun->add_option("--y", sf.y, "Eigenvalues of the second argument")->delimiter(',');
  specfun->add_option("--kappa", sf.kappa, "Partition for zonal, e.g. 2,1")->delimiter(',');
  specfun->add_flag("--json", sf.json_out, "Print a JSON record");

  TestArgs ts;
  auto* test = app.add_subcommand("test", "Pooled-bootstrap two-sample test");
  test->add_option("x", ts.x, "First sample (matrix CSV, or price CSV with --pipeline)")->required();
  test->add_option("y", ts.y, "Second sample")->required();
  test->add_option("--boot", ts.boot, "Bootstrap replications")->capture_default_str();
  test->add_option("--nu", ts.nu, "Kernel order")->capture_default_str();
  test->add_option("--out", ts.out, "Result JSON path (default stdout)");
  test->add_flag("--pipeline", ts.pipeline, "Inputs are price CSVs: use block covariances of log-returns");
  add_pipeline_options(test, ts.pipe);

  PowerArgs pw;
  auto* power = app.add_subcommand("power", "Warp-speed bootstrap power table");
  power->add_option("--config", pw.config, "Scenario file")->required();
  power->add_option("--out-csv", pw.out_csv, "CSV output path");
  power->add_option("--out-md", pw.out_md, "Markdown output path");
  power->add_option("--replications", pw.replications, "Override the replication count of every scenario");

  DataArgs da;
  auto* data = app.add_subcommand("data", "Covariance change test on close-price data");
  data->add_option("--input", da.inputs, "Price CSV; several files are joined on the timestamp")->required();
  data->add_option("--from", da.from, "Drop rows before this time");
  data->add_option("--to", da.to, "Drop rows after this time");
  data->add_option("--split-index", da.split_index, "First block of the second group (0-based)");
  data->add_option("--split-date", da.split_date, "First block ending at or after this time starts group B");
  data->add_option("--boot", da.boot, "Bootstrap replications")->capture_default_str();
  data->add_option("--nu", da.nu, "Kernel order")->capture_default_str();
  data->add_option("--out", da.out, "Result JSON path (default stdout)");
  data->add_option("--blocks-csv", da.blocks_csv, "Per-block traces and eigenvalues (plot-ready CSV)");
  add_pipeline_options(data, da.pipe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    common.ctl.validate();
    common.parallel = hankel::resolve_parallelism(common.parallel);
    if (*power) return run_power(pw, common);
    if (common.seed == 0) common.seed = hankel::entropy_seed();
    if (*specfun) return run_specfun(sf, common);
    if (*test) return run_test(ts, common);
    if (*data) return run_data(da, common);
  } catch (const hankel::consistency_error& e) {
    std::cerr << "hankel: internal inconsistency: " << e.what() << '\n';
    return kInternal;
  } catch (const std::invalid_argument& e) {
    std::cerr << "hankel: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "hankel: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "hankel: internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
