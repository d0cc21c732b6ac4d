#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hankel/csv.hpp"
#include "hankel/error.hpp"
#include "hankel/spectral_matrix.hpp"

namespace hankel {

struct LabeledMatrix {
  std::string id;
  SpectralMatrix matrix;
};

/// One matrix per line: `id,m,v11,v12,...,v1m,v22,...,vmm` (upper triangle,
/// row-major). Values are written with 17 significant digits, so reading the
/// output back gives identical matrices.
inline void write_matrix_csv(std::ostream& os, const std::vector<LabeledMatrix>& rows) {
  const auto old = os.precision(17);
  for (const auto& r : rows) {
    const auto& e = r.matrix.entries();
    os << csv::quote(r.id) << ',' << e.rows();
    for (Eigen::Index i = 0; i < e.rows(); ++i)
      for (Eigen::Index j = i; j < e.cols(); ++j) os << ',' << e(i, j);
    os << '\n';
  }
  os.precision(old);
}

inline void write_matrix_csv(std::ostream& os, const std::vector<SpectralMatrix>& matrices) {
  std::vector<LabeledMatrix> rows;
  for (std::size_t i = 0; i < matrices.size(); ++i) rows.push_back({std::to_string(i + 1), matrices[i]});
  write_matrix_csv(os, rows);
}

/// Blank lines, `#` comments and a leading `id,m,...` header are skipped.
inline std::vector<LabeledMatrix> read_matrix_csv(std::istream& in, const std::string& source = "matrix csv") {
  std::vector<LabeledMatrix> out;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw input_error(source + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty() || line.front() == '#') continue;
    const auto f = csv::split(line, line_no);
    if (out.empty() && f.size() >= 2 && f[1] == "m") continue;
    if (f.size() < 3) fail("expected id, m and matrix entries");
    int m = 0;
    {
      const auto [p, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), m);
      if (ec != std::errc() || p != f[1].data() + f[1].size() || m < 1) fail("bad matrix dimension '" + f[1] + "'");
    }
    const std::size_t expect = 2 + static_cast<std::size_t>(m) * (m + 1) / 2;
    if (f.size() != expect)
      fail("m=" + std::to_string(m) + " needs " + std::to_string(expect - 2) + " entries, found " +
           std::to_string(f.size() - 2));
    Eigen::MatrixXd e(m, m);
    std::size_t k = 2;
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j, ++k) {
        double v = 0.0;
        const auto [p, ec] = std::from_chars(f[k].data(), f[k].data() + f[k].size(), v);
        if (ec != std::errc() || p != f[k].data() + f[k].size()) fail("cannot parse entry '" + f[k] + "'");
        e(i, j) = e(j, i) = v;
      }
    try {
      out.push_back({f[0], SpectralMatrix(e)});
    } catch (const input_error& err) {
      fail(err.what());
    }
  }
  if (out.empty()) throw input_error(source + ": no matrices");
  return out;
}

inline std::vector<LabeledMatrix> read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open matrix file '" + path + "'");
  return read_matrix_csv(in, path);
}

inline std::vector<SpectralMatrix> matrices_of(const std::vector<LabeledMatrix>& rows) {
  std::vector<SpectralMatrix> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.matrix);
  return out;
}

}  // namespace hankel
