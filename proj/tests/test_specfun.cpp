#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "hankel/sampling.hpp"
#include "hankel/specfun.hpp"
#include "oracles.hpp"

using hankel::Partition;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

std::vector<double> random_spectrum(std::mt19937_64& rng, int m, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(m));
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(MvGamma, Examples) {
  EXPECT_NEAR(hankel::mv_gamma_ln(1, 3.0), std::log(2.0), 1e-14);
  EXPECT_NEAR(hankel::mv_gamma_ln(2, 2.5), std::log(3.0 * std::numbers::pi / 4.0), 1e-14);
  EXPECT_THROW(hankel::mv_gamma_ln(2, 0.5), hankel::parameter_error);
}

TEST(MvGamma, ProductOfScalarGammas) {
  for (int m = 1; m <= 4; ++m)
    for (double a : {2.0, 2.7, 5.25}) {
      double want = 0.25 * m * (m - 1) * std::log(std::numbers::pi);
      for (int i = 1; i <= m; ++i) want += std::lgamma(a - 0.5 * (i - 1));
      EXPECT_NEAR(hankel::mv_gamma_ln(m, a), want, 1e-12);
    }
}

TEST(GenPochhammer, Examples) {
  EXPECT_DOUBLE_EQ(hankel::gen_pochhammer(2.0, Partition{1}), 2.0);
  EXPECT_DOUBLE_EQ(hankel::gen_pochhammer(2.0, Partition{1, 1}), 3.0);
  EXPECT_DOUBLE_EQ(hankel::gen_pochhammer(2.0, Partition{2}), 6.0);
  EXPECT_DOUBLE_EQ(hankel::gen_pochhammer(2.0, Partition{}), 1.0);
  // (3.5)_3 (3)_1 = 3.5 * 4.5 * 5.5 * 3
  EXPECT_NEAR(hankel::gen_pochhammer(3.5, Partition{3, 1}), 3.5 * 4.5 * 5.5 * 3.0, 1e-12);
}

TEST(Zonal, Examples) {
  EXPECT_NEAR(hankel::zonal(Partition{1}, std::vector<double>{1, 2}), 3.0, 1e-14);
  EXPECT_NEAR(hankel::zonal(Partition{2}, std::vector<double>{1, 1}), 8.0 / 3.0, 1e-14);
  EXPECT_NEAR(hankel::zonal(Partition{1, 1}, std::vector<double>{1, 1}), 4.0 / 3.0, 1e-14);
  EXPECT_EQ(hankel::zonal(Partition{1, 1, 1}, std::vector<double>{2, 5}), 0.0);
  EXPECT_EQ(hankel::zonal(Partition{}, std::vector<double>{2, 5}), 1.0);
}

TEST(Zonal, MatchesJamesRecurrence) {
  std::mt19937_64 rng(7);
  for (int k = 1; k <= 7; ++k) {
    const oracle::JamesZonal james(k);
    for (int m = 1; m <= 4; ++m)
      for (int rep = 0; rep < 3; ++rep) {
        const auto x = random_spectrum(rng, m, 0.1, 3.0);
        for (const auto& kappa : james.partitions()) {
          const double got = hankel::zonal(Partition(kappa), x);
          const double want = static_cast<int>(kappa.size()) > m ? 0.0 : james(kappa, x);
          if (want == 0.0) EXPECT_EQ(got, 0.0);
          else EXPECT_LT(rel_err(got, want), 1e-11) << "k=" << k << " m=" << m << " kappa=" << Partition(kappa);
        }
      }
  }
}

TEST(Zonal, SumRuleAndHomogeneity) {
  std::mt19937_64 rng(11);
  for (int m = 1; m <= 3; ++m)
    for (int rep = 0; rep < 10; ++rep) {
      const auto x = random_spectrum(rng, m, 0.01, 5.0);
      double tr = 0.0;
      for (double v : x) tr += v;
      for (int k = 0; k <= 12; ++k) {
        long double s = 0.0L;
        for (const auto& p : hankel::partitions(k, m)) s += hankel::zonal(p, x);
        EXPECT_LT(rel_err(static_cast<double>(s), std::pow(tr, k)), 1e-12);
      }
      const double t = 1.7;
      std::vector<double> tx = x;
      for (auto& v : tx) v *= t;
      for (const auto& p : hankel::partitions(5, m))
        EXPECT_LT(rel_err(hankel::zonal(p, tx), std::pow(t, 5) * hankel::zonal(p, x)), 1e-12);
    }
}

TEST(Zonal, InvariantUnderSpectrumOrder) {
  const std::vector<double> a{0.3, 2.0, 1.1}, b{2.0, 1.1, 0.3};
  for (const auto& p : hankel::partitions(6, 3)) EXPECT_LT(rel_err(hankel::zonal(p, a), hankel::zonal(p, b)), 1e-13);
}

TEST(Hyp0F1, ConstantTerm) {
  EXPECT_DOUBLE_EQ(hankel::hyp0f1_single(2.0, std::vector<double>{0.0, 0.0}).value, 1.0);
  const auto v = hankel::hyp0f1_single(2.0, std::vector<double>{0.0});
  EXPECT_DOUBLE_EQ(v.value, 1.0);
  EXPECT_TRUE(v.converged);
}

TEST(Hyp0F1, ScalarSeriesOracle) {
  for (double b : {1.5, 2.0, 3.5})
    for (double z = -25.0; z <= 25.0; z += 0.5) {
      const auto v = hankel::hyp0f1_single(b, std::vector<double>{z});
      ASSERT_TRUE(v.converged) << "b=" << b << " z=" << z;
      EXPECT_LT(rel_err(v.value, oracle::hyp0f1_scalar(b, z)), 1e-10) << "b=" << b << " z=" << z;
    }
  EXPECT_NEAR(hankel::hyp0f1_single(2.0, std::vector<double>{-1.0}).value, 0.5767248078, 1e-10);
}

TEST(Hyp0F1, RankOneReduction) {
  for (double x : {-3.0, 0.4, 2.0}) {
    const double two = hankel::hyp0f1_single(2.5, std::vector<double>{x, 0.0}).value;
    EXPECT_LT(rel_err(two, oracle::hyp0f1_scalar(2.5, x)), 1e-12);
  }
}

TEST(Hyp0F1, TwoArgumentReductions) {
  std::mt19937_64 rng(3);
  for (double x : {0.3, 2.0})
    for (double y : {0.5, 4.0}) {
      const auto v = hankel::hyp0f1_double(2.0, std::vector<double>{x}, std::vector<double>{y});
      EXPECT_LT(rel_err(v.value, oracle::hyp0f1_scalar(2.0, x * y)), 1e-12);
    }
  for (int m = 2; m <= 3; ++m)
    for (int rep = 0; rep < 5; ++rep) {
      const auto x = random_spectrum(rng, m, 0.1, 2.0);
      const auto y = random_spectrum(rng, m, 0.1, 2.0);
      const double t = 1.3;
      const double b = 0.5 * (m + 1) + 1.0;
      std::vector<double> tx = x, ti(static_cast<std::size_t>(m), t);
      for (auto& v : tx) v *= t;
      EXPECT_LT(rel_err(hankel::hyp0f1_double(b, x, ti).value, hankel::hyp0f1_single(b, tx).value), 1e-12);
      EXPECT_LT(rel_err(hankel::hyp0f1_double(b, x, y).value, hankel::hyp0f1_double(b, y, x).value), 1e-13);
    }
}

TEST(BesselJ, ClassicalBesselCrossCheck) {
  // m = 1: J_nu(t) = Gamma(nu+1) t^{-nu/2} J_nu^classical(2 sqrt t)
  for (double nu : {0.5, 1.0, 2.5})
    for (double t = 0.25; t <= 25.0; t += 0.25) {
      const double z = 2.0 * std::sqrt(t);
      const double want =
          boost::math::tgamma(nu + 1.0) * std::pow(t, -0.5 * nu) * boost::math::cyl_bessel_j(nu, z);
      const auto v = hankel::bessel_J(nu, std::vector<double>{t});
      ASSERT_TRUE(v.converged);
      EXPECT_NEAR(v.value, want, 1e-12 * std::max(1.0, std::abs(want))) << "nu=" << nu << " t=" << t;
    }
}

TEST(BesselJ, Examples) {
  EXPECT_DOUBLE_EQ(hankel::bessel_J(1.0, std::vector<double>{0.0, 0.0, 0.0}).value, 1.0);
  EXPECT_NEAR(hankel::bessel_J(1.0, std::vector<double>{1.0}).value, 0.5767248078, 1e-10);
  for (double t : {0.5, 3.0}) {
    const double v = hankel::bessel_J(1.0, hankel::SpectralMatrix::diagonal({t, 0.0})).value;
    EXPECT_LT(rel_err(v, oracle::hyp0f1_scalar(2.5, -t)), 1e-12);
  }
}

TEST(BesselJ, OrderPrecondition) {
  EXPECT_THROW(hankel::bessel_J(0.1, std::vector<double>{1, 1, 1}), hankel::parameter_error);
  EXPECT_NO_THROW(hankel::bessel_J(0.6, std::vector<double>{1, 1, 1}));
  EXPECT_THROW(hankel::bessel_J2(0.4, std::vector<double>{1, 1, 1}, std::vector<double>{1, 1, 1}),
               hankel::parameter_error);
  EXPECT_THROW(hankel::bessel_J2(1.0, std::vector<double>{1, 1}, std::vector<double>{1}), hankel::dimension_mismatch);
}

TEST(BesselJ2, Reductions) {
  for (double s : {0.5, 2.0})
    for (double t : {0.3, 3.0})
      EXPECT_LT(rel_err(hankel::bessel_J2(1.0, std::vector<double>{s}, std::vector<double>{t}).value,
                        hankel::bessel_J(1.0, std::vector<double>{s * t}).value),
                1e-12);
  const std::vector<double> s{2.0, 0.7, 0.1};
  const double t = 0.8;
  const std::vector<double> ts{t * 2.0, t * 0.7, t * 0.1};
  EXPECT_LT(rel_err(hankel::bessel_J2(1.0, s, std::vector<double>(3, t)).value, hankel::bessel_J(1.0, ts).value),
            1e-12);
}

TEST(BesselJ2, BoundedOnPositiveDefinitePairs) {
  hankel::Rng rng(5);
  for (int m = 2; m <= 3; ++m) {
    const auto sigma = hankel::SpectralMatrix(Eigen::MatrixXd::Identity(m, m) / (m + 2.0));
    for (int rep = 0; rep < 100; ++rep) {
      const auto s = hankel::sample_wishart_df(m + 2.0, sigma, rng);
      const auto t = hankel::sample_wishart_df(m + 2.0, sigma, rng);
      const auto v = hankel::bessel_J2(1.0, s, t);
      EXPECT_TRUE(v.converged);
      EXPECT_LE(std::abs(v.value), 1.0 + 1e-12);
    }
  }
}

TEST(Series, NonConvergenceIsFlagged) {
  hankel::SeriesControl ctl;
  ctl.max_degree = 5;
  const auto v = hankel::hyp0f1_single(2.0, std::vector<double>{30.0}, ctl);
  EXPECT_FALSE(v.converged);
  EXPECT_EQ(v.achieved_degree, 5);
}

TEST(Series, CancellationIsFlagged) {
  // terms reach ~e^56 while the sum is O(1e3): long double cannot resolve it
  const auto v = hankel::hyp0f1_single(2.0, std::vector<double>{-200.0, -200.0});
  EXPECT_FALSE(v.converged);
  EXPECT_LT(v.achieved_degree, hankel::SeriesControl{}.max_degree);
}

TEST(Series, ControlValidation) {
  hankel::SeriesControl ctl;
  ctl.rel_tol = 0.0;
  EXPECT_THROW(ctl.validate(), hankel::input_error);
  ctl = {};
  ctl.max_degree = 0;
  EXPECT_THROW(hankel::hyp0f1_single(2.0, std::vector<double>{1.0}, ctl), hankel::input_error);
  EXPECT_THROW(hankel::SeriesWeights(3, 0.9, 10), hankel::parameter_error);
}

TEST(Series, LargeArgumentsStayFinite) {
  // the value overflows a double but log_abs does not
  hankel::SeriesControl ctl;
  ctl.max_degree = 1500;
  const double x = 2e5, b = 2.0, z = 2.0 * std::sqrt(x);
  const auto v = hankel::hyp0f1_single(b, std::vector<double>{x}, ctl);
  EXPECT_TRUE(v.converged);
  EXPECT_TRUE(std::isfinite(v.log_abs));
  EXPECT_GT(v.log_abs, 800.0);
  // Gamma(b) x^((1-b)/2) I_{b-1}(z) with I_v(z) ~ e^z / sqrt(2 pi z)
  const double asymptotic = std::lgamma(b) + 0.5 * (1.0 - b) * std::log(x) + z - 0.5 * std::log(2.0 * M_PI * z);
  EXPECT_NEAR(v.log_abs, asymptotic, 1e-2);
  const auto cut = hankel::hyp0f1_single(b, std::vector<double>{1e6});
  EXPECT_FALSE(cut.converged);
  EXPECT_TRUE(std::isfinite(cut.log_abs));
}
