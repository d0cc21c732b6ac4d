#pragma once

// Random matrices for the power study.
//
// The Wishart family is rate-parametrized: W_d(a, Sigma) has density
// proportional to (det X)^{a-(d+1)/2} etr(-Sigma X), i.e. the conventional
// Wishart with 2a degrees of freedom and scale (2 Sigma)^{-1}, mean a Sigma^{-1}.
// IW_d(a, Sigma) is the conventional inverse Wishart with a degrees of freedom
// and scale Sigma, mean Sigma / (a - d - 1).

#include <Eigen/Dense>

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hankel/covariance.hpp"
#include "hankel/error.hpp"
#include "hankel/kernel.hpp"
#include "hankel/rng.hpp"
#include "hankel/spectral_matrix.hpp"

namespace hankel {

namespace detail {

inline Eigen::MatrixXd standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = z(rng);
  return g;
}

// Lower-triangular Bartlett factor A with W = L A A' L' ~ Wishart(df, L L').
inline Eigen::MatrixXd bartlett_factor(int d, double df, Rng& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    std::chi_squared_distribution<double> chi(df - i);
    a(i, i) = std::sqrt(chi(rng));
    for (int j = 0; j < i; ++j) a(i, j) = z(rng);
  }
  return a;
}

inline Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& s, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) throw parameter_error(std::string(what) + ": scale matrix must be positive definite");
  return llt.matrixL();
}

inline SpectralMatrix symmetric_result(const Eigen::MatrixXd& x) {
  return SpectralMatrix(0.5 * (x + x.transpose()));
}

}  // namespace detail

/// One draw from W_d(a, Sigma); requires a > (d-1)/2.
inline SpectralMatrix sample_wishart(double a, const SpectralMatrix& sigma, Rng& rng) {
  const int d = sigma.dim();
  if (!(a > 0.5 * (d - 1))) throw parameter_error("Wishart: shape a must exceed (d-1)/2");
  const Eigen::MatrixXd l = detail::cholesky_lower((2.0 * sigma.entries()).inverse(), "Wishart");
  const Eigen::MatrixXd b = l * detail::bartlett_factor(d, 2.0 * a, rng);
  return detail::symmetric_result(b * b.transpose());
}

/// One draw from the conventional Wishart with `df` degrees of freedom and
/// scale Sigma (mean df * Sigma); requires df > d - 1.
inline SpectralMatrix sample_wishart_df(double df, const SpectralMatrix& sigma, Rng& rng) {
  const int d = sigma.dim();
  if (!(df > d - 1)) throw parameter_error("Wishart: degrees of freedom must exceed d-1");
  const Eigen::MatrixXd l = detail::cholesky_lower(sigma.entries(), "Wishart");
  const Eigen::MatrixXd b = l * detail::bartlett_factor(d, df, rng);
  return detail::symmetric_result(b * b.transpose());
}

/// One draw from IW_d(a, Sigma); requires a > d - 1.
inline SpectralMatrix sample_inv_wishart(double a, const SpectralMatrix& sigma, Rng& rng) {
  const int d = sigma.dim();
  if (!(a > d - 1)) throw parameter_error("inverse Wishart: shape a must exceed d-1");
  const Eigen::MatrixXd l = detail::cholesky_lower(sigma.entries().inverse(), "inverse Wishart");
  const Eigen::MatrixXd b = l * detail::bartlett_factor(d, a, rng);
  const Eigen::MatrixXd binv =
      b.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));
  return detail::symmetric_result(binv.transpose() * binv);
}

/// Covariance of `nvec` i.i.d. uniform [0,1]^d vectors.
inline SpectralMatrix sample_cov_uniform(int d, int nvec, Rng& rng,
                                         CovNormalization norm = CovNormalization::sum) {
  if (d < 1) throw parameter_error("CMU: dimension must be positive");
  if (nvec < 2) throw parameter_error("CMU: need at least two vectors per matrix");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd rows(nvec, d);
  for (int i = 0; i < nvec; ++i)
    for (int j = 0; j < d; ++j) rows(i, j) = u(rng);
  return SpectralMatrix(centered_covariance(rows, norm));
}

/// Covariance of `nvec` i.i.d. multivariate t vectors z / sqrt(g/a), z ~ N(0, Sigma), g ~ chi2_a.
inline SpectralMatrix sample_cov_t(double a, const SpectralMatrix& sigma, int d, int nvec, Rng& rng,
                                   CovNormalization norm = CovNormalization::sum) {
  if (sigma.dim() != d) throw dimension_mismatch("CMT: scale matrix dimension differs from d");
  if (!(a > 0.0)) throw parameter_error("CMT: degrees of freedom must be positive");
  if (nvec < 2) throw parameter_error("CMT: need at least two vectors per matrix");
  const Eigen::MatrixXd l = detail::cholesky_lower(sigma.entries(), "CMT");
  std::chi_squared_distribution<double> chi(a);
  Eigen::MatrixXd rows(nvec, d);
  for (int i = 0; i < nvec; ++i) {
    const Eigen::VectorXd z = l * detail::standard_normal_matrix(d, 1, rng);
    rows.row(i) = z.transpose() / std::sqrt(chi(rng) / a);
  }
  return SpectralMatrix(centered_covariance(rows, norm));
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of diag(R) moved into Q.
inline Eigen::MatrixXd sample_haar_orthogonal(int m, Rng& rng) {
  if (m < 1) throw input_error("Haar: dimension must be positive");
  const Eigen::MatrixXd g = detail::standard_normal_matrix(m, m, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int j = 0; j < m; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

/// The scale matrices with names in distribution specs.
inline Eigen::MatrixXd named_matrix(std::string_view name, int d) {
  if (name == "I") {
    if (d < 1) throw input_error("distribution spec: sigma=I needs d");
    return Eigen::MatrixXd::Identity(d, d);
  }
  if (name == "K2") {
    Eigen::MatrixXd k(2, 2);
    k << std::cos(0.7), std::sin(0.7), std::sin(0.7), std::cos(0.7);
    return k;
  }
  if (name == "K3") {
    Eigen::MatrixXd k(3, 3);
    k << 1, -1, 0.95, -1, 5, 0.01, 0.95, 0.01, 7;
    return k;
  }
  throw input_error("distribution spec: unknown matrix '" + std::string(name) + "'");
}

enum class Family { Wishart, InvWishart, CovUniform, CovT };

/// How the two numbers of W(a, Sigma) are read: `rate` follows the density
/// etr(-Sigma X) (mean a Sigma^{-1}); `df` is the conventional Wishart with a
/// degrees of freedom and scale Sigma (mean a Sigma).
enum class WishartParam { rate, df };

/// A distribution in canonical text form, e.g. `W(d=2,a=2.5,sigma=I)`,
/// `IW(d=2,a=4,sigma=2.5*I)`, `CMU(d=2,nvec=3)`, `CMT(d=2,a=3,sigma=K2,nvec=3)`.
///
/// sigma is `I`, `K2`, `K3` or `c*NAME`. nvec defaults to d+1 (fewer than d+1
/// vectors give singular matrices, which the kernel accepts). Wishart specs
/// accept `param=rate` (default) or `param=df`.
struct DistributionSpec {
  Family family = Family::Wishart;
  int d = 0;
  double a = 0.0;
  double sigma_coef = 1.0;
  std::string sigma_name = "I";
  int nvec = 0;
  WishartParam param = WishartParam::rate;
  CovNormalization normalization = CovNormalization::sum;

  SpectralMatrix sigma() const { return SpectralMatrix(sigma_coef * named_matrix(sigma_name, d)); }

  static DistributionSpec parse(std::string_view text);

  std::string str() const {
    std::ostringstream os;
    os.precision(15);
    switch (family) {
      case Family::Wishart:
        os << "W(d=" << d << ",a=" << a << ",sigma=" << sigma_str()
           << (param == WishartParam::df ? ",param=df" : "") << ")";
        break;
      case Family::InvWishart: os << "IW(d=" << d << ",a=" << a << ",sigma=" << sigma_str() << ")"; break;
      case Family::CovUniform: os << "CMU(d=" << d << ",nvec=" << nvec << norm_str() << ")"; break;
      case Family::CovT:
        os << "CMT(d=" << d << ",a=" << a << ",sigma=" << sigma_str() << ",nvec=" << nvec << norm_str() << ")";
        break;
    }
    return os.str();
  }

  /// Short label in the style of the power tables, e.g. `W2(2.5, I)`.
  std::string label() const {
    std::ostringstream os;
    os.precision(15);
    switch (family) {
      case Family::Wishart:
        os << "W" << d << "(" << a << ", " << sigma_str() << (param == WishartParam::df ? "; df" : "") << ")";
        break;
      case Family::InvWishart: os << "IW" << d << "(" << a << ", " << sigma_str() << ")"; break;
      case Family::CovUniform: os << "CMU" << d; break;
      case Family::CovT: os << "CMT" << d << "(" << a << ", " << sigma_str() << ")"; break;
    }
    return os.str();
  }

  void validate() const {
    if (d < 1) throw input_error("distribution spec: d must be positive");
    const bool has_sigma = family != Family::CovUniform;
    if (has_sigma) {
      const auto s = named_matrix(sigma_name, d);
      if (s.rows() != d) throw dimension_mismatch("distribution spec: sigma dimension differs from d");
      if (!(sigma_coef > 0.0)) throw parameter_error("distribution spec: sigma coefficient must be positive");
      if (!SpectralMatrix(s).is_positive_definite())
        throw parameter_error("distribution spec: sigma must be positive definite");
    }
    switch (family) {
      case Family::Wishart:
        if (param == WishartParam::rate && !(a > 0.5 * (d - 1)))
          throw parameter_error("W: shape a must exceed (d-1)/2");
        if (param == WishartParam::df && !(a > d - 1))
          throw parameter_error("W: degrees of freedom a must exceed d-1");
        break;
      case Family::InvWishart:
        if (!(a > d - 1)) throw parameter_error("IW: shape a must exceed d-1");
        break;
      case Family::CovT:
        if (!(a > 0.0)) throw parameter_error("CMT: a must be positive");
        [[fallthrough]];
      case Family::CovUniform:
        if (nvec < 2) throw parameter_error("covariance spec: nvec must be at least 2");
        break;
    }
  }

  friend bool operator==(const DistributionSpec& x, const DistributionSpec& y) { return x.str() == y.str(); }

 private:
  std::string norm_str() const {
    return normalization == CovNormalization::sum ? "" : ",norm=" + to_string(normalization);
  }

  std::string sigma_str() const {
    if (sigma_coef == 1.0) return sigma_name;
    std::ostringstream os;
    os.precision(15);
    os << sigma_coef << "*" << sigma_name;
    return os.str();
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline double parse_number(std::string_view s, std::string_view what) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw input_error("distribution spec: bad number '" + std::string(s) + "' for " + std::string(what));
  return v;
}

inline int parse_int(std::string_view s, std::string_view what) {
  const double v = parse_number(s, what);
  if (v != std::floor(v)) throw input_error("distribution spec: " + std::string(what) + " must be an integer");
  return static_cast<int>(v);
}

}  // namespace detail

inline DistributionSpec DistributionSpec::parse(std::string_view text) {
  const auto t = detail::trim(text);
  const auto open = t.find('(');
  if (open == std::string_view::npos || t.back() != ')')
    throw input_error("distribution spec: expected NAME(key=value,...) but got '" + std::string(text) + "'");
  const auto name = detail::trim(t.substr(0, open));
  DistributionSpec spec;
  if (name == "W") spec.family = Family::Wishart;
  else if (name == "IW") spec.family = Family::InvWishart;
  else if (name == "CMU") spec.family = Family::CovUniform;
  else if (name == "CMT") spec.family = Family::CovT;
  else throw input_error("distribution spec: unknown family '" + std::string(name) + "'");

  std::map<std::string, std::string> kv;
  std::string_view body = t.substr(open + 1, t.size() - open - 2);
  while (!detail::trim(body).empty()) {
    const auto comma = body.find(',');
    const auto item = detail::trim(body.substr(0, comma));
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw input_error("distribution spec: expected key=value, got '" + std::string(item) + "'");
    const std::string key(detail::trim(item.substr(0, eq)));
    if (!kv.emplace(key, std::string(detail::trim(item.substr(eq + 1)))).second)
      throw input_error("distribution spec: duplicate key '" + key + "'");
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }

  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  if (auto v = take("sigma")) {
    const auto star = v->find('*');
    if (star != std::string::npos) {
      spec.sigma_coef = detail::parse_number(std::string_view(*v).substr(0, star), "sigma coefficient");
      spec.sigma_name = std::string(detail::trim(std::string_view(*v).substr(star + 1)));
    } else {
      spec.sigma_name = *v;
    }
  }
  if (auto v = take("d")) spec.d = detail::parse_int(*v, "d");
  else if (spec.sigma_name == "K2") spec.d = 2;
  else if (spec.sigma_name == "K3") spec.d = 3;
  if (auto v = take("a")) spec.a = detail::parse_number(*v, "a");
  else if (spec.family != Family::CovUniform) throw input_error("distribution spec: missing a");
  if (auto v = take("param")) {
    if (spec.family != Family::Wishart) throw input_error("distribution spec: param applies to W only");
    if (*v == "rate") spec.param = WishartParam::rate;
    else if (*v == "df") spec.param = WishartParam::df;
    else throw input_error("distribution spec: param must be rate or df");
  }
  if (auto v = take("norm")) {
    if (spec.family != Family::CovUniform && spec.family != Family::CovT)
      throw input_error("distribution spec: norm applies to CMU and CMT only");
    spec.normalization = parse_normalization(*v);
  }
  if (auto v = take("nvec")) spec.nvec = detail::parse_int(*v, "nvec");
  else spec.nvec = spec.d + 1;
  if (spec.family == Family::CovUniform) spec.sigma_name = "I";
  if (spec.family == Family::Wishart || spec.family == Family::InvWishart) spec.nvec = 0;
  if (!kv.empty()) throw input_error("distribution spec: unknown key '" + kv.begin()->first + "'");
  spec.validate();
  return spec;
}

/// Draws from one DistributionSpec with the scale factors computed once.
class MatrixSampler {
 public:
  explicit MatrixSampler(DistributionSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    if (spec_.family != Family::CovUniform) sigma_ = spec_.sigma();
  }

  const DistributionSpec& spec() const { return spec_; }

  SpectralMatrix operator()(Rng& rng) const {
    switch (spec_.family) {
      case Family::Wishart:
        return spec_.param == WishartParam::df ? sample_wishart_df(spec_.a, sigma_, rng)
                                               : sample_wishart(spec_.a, sigma_, rng);
      case Family::InvWishart: return sample_inv_wishart(spec_.a, sigma_, rng);
      case Family::CovUniform: return sample_cov_uniform(spec_.d, spec_.nvec, rng, spec_.normalization);
      case Family::CovT: return sample_cov_t(spec_.a, sigma_, spec_.d, spec_.nvec, rng, spec_.normalization);
    }
    throw input_error("unknown family");
  }

  SampleSet sample(std::size_t n, Rng& rng) const {
    std::vector<SpectralMatrix> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back((*this)(rng));
    return SampleSet(std::move(out));
  }

 private:
  DistributionSpec spec_;
  SpectralMatrix sigma_;
};

}  // namespace hankel
