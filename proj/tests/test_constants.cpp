#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "kdl/constants.hpp"
#include "kdl/error.hpp"
#include "kdl/quadrature.hpp"

using namespace kdl;
using mp = boost::multiprecision::cpp_bin_float_50;

namespace {

constexpr double kGamma = 0.57721566490153286;

// The defining formulas evaluated literally in 50 digits.
mp S50(double tt) {
  const mp t = tt;
  const mp num = 1 + 2 * t * t - boost::multiprecision::cosh(2 * t);
  // 1 - coth t written as -2 / (e^{2t} - 1) so large t keeps its digits.
  const mp one_minus_coth = -2 / boost::multiprecision::expm1(2 * t);
  return num * one_minus_coth / (2 * t * t * t);
}

mp prefactor50(double tt) {
  const mp t = tt;
  const mp sh = boost::multiprecision::sinh(t);
  return 1 / (t * t) - 1 / (sh * sh);
}

double phi50(double t) { return static_cast<double>(prefactor50(t) * boost::multiprecision::log(S50(t))); }

double psi50(double t) {
  return static_cast<double>(prefactor50(t) * (boost::multiprecision::log(S50(t)) + 1 - mp(kGamma)) / 2);
}

}  // namespace

TEST_CASE("phi endpoint at zero") {
  CHECK(std::abs(phi(1e-8) + std::log(3.0) / 3.0) <= 1e-6);
  CHECK(phi(0.0) == doctest::Approx(-std::log(3.0) / 3.0).epsilon(1e-15));
}

TEST_CASE("golden values from a 50-digit evaluation") {
  struct G {
    double t, phi, S, psi;
  };
  const G golden[] = {
      {0.01, -0.36953114999301214046, 0.33001551121661467231, 0.0},
      {0.5, -0.50977210975726636313, 0.20057540783692501608, -0.18781013142141374782},
      {1.0, -0.5866831223690858962, 0.11929707288236235042, -0.23501035758627603263},
      {2.0, -0.54865847157764351144, 0.042697912205680065793, -0.23755161329204221304},
      {30.0, -0.012107488139496012706, 0.0, 0.0},
      {50.0, -0.0049716864787377533941, 0.0, 0.0},
  };
  for (const G& g : golden) {
    CAPTURE(g.t);
    CHECK(phi(g.t) == doctest::Approx(g.phi).epsilon(1e-13));
    if (g.S != 0.0) CHECK(S_of_t(g.t) == doctest::Approx(g.S).epsilon(1e-13));
    if (g.psi != 0.0) CHECK(psi_limit(g.t) == doctest::Approx(g.psi).epsilon(1e-13));
  }
  CHECK(radial_prefactor(1.0) == doctest::Approx(0.27593833903368953359).epsilon(1e-14));
}

TEST_CASE("phi, S and psi agree with the literal formulas in 50 digits") {
  for (double t : {0.02, 0.05, 0.1, 0.3, 0.7, 1.5, 3.0, 7.0, 12.0, 25.0, 29.9, 30.1, 40.0, 80.0}) {
    CAPTURE(t);
    CHECK(phi(t) == doctest::Approx(phi50(t)).epsilon(1e-13));
    CHECK(psi_limit(t) == doctest::Approx(psi50(t)).epsilon(1e-13));
    CHECK(S_of_t(t) == doctest::Approx(static_cast<double>(S50(t))).epsilon(1e-13));
    CHECK(radial_prefactor(t) == doctest::Approx(static_cast<double>(prefactor50(t))).epsilon(1e-13));
  }
}

TEST_CASE("S limits") {
  CHECK(S_of_t(0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(S_of_t(1e-9) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  CHECK(std::abs(S_of_t(30.0) * 2.0 * 30.0 * 30.0 * 30.0 - 1.0) <= 1e-6);
}

TEST_CASE("psi and phi are tied by the prefactor") {
  for (double t : {0.1, 1.0, 10.0}) {
    CHECK(std::abs(2.0 * psi_limit(t) - (1.0 - kGamma) * radial_prefactor(t) - phi(t)) <= 1e-12);
  }
}

TEST_CASE("route continuity at the switch points") {
  for (double s : {kSeriesBelow, kAsymptoticAbove}) {
    const double below = std::nextafter(s, 0.0);
    CHECK(std::abs(phi(below) - phi(s)) <= 1e-10);
    CHECK(std::abs(S_of_t(below) - S_of_t(s)) <= 1e-10);
    CHECK(std::abs(psi_limit(below) - psi_limit(s)) <= 1e-10);
    CHECK(std::abs(radial_prefactor(below) - radial_prefactor(s)) <= 1e-10);
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(phi(-1e-3), Error);
  CHECK_THROWS_AS(S_of_t(-1.0), Error);
  CHECK_THROWS_AS(psi_limit(-1.0), Error);
  CHECK_THROWS_AS(gaussian_log_moment(0.0), Error);
  CHECK_THROWS_AS(covariance_suite(-1.0), Error);
  CHECK_THROWS_AS(compute_constant_table(1e-13), Error);
}

TEST_CASE("integral of phi against the golden value and an independent quadrature") {
  const double golden = -3.877234408309957674241313;
  CHECK(integral_phi() == doctest::Approx(golden).epsilon(1e-12));
  boost::math::quadrature::exp_sinh<double> es;
  const double oracle = es.integrate([](double t) { return phi(t); }, 1e-13);
  CHECK(integral_phi() == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(compute_constant_table(1e-9).integral_phi == doctest::Approx(golden).epsilon(1e-9));
}

TEST_CASE("constant identities") {
  const ConstantTable& t = constant_table();
  CHECK(t.c_star == doctest::Approx(1.0 - kGamma + t.integral_phi).epsilon(1e-15));
  CHECK(t.d_star == doctest::Approx(kGamma / 2.0 - 2.0 * (1.0 - kGamma) - 2.0 * t.integral_phi).epsilon(1e-15));
  CHECK(std::abs(-kGamma / 2.0 + 2.0 * c_star() + d_star()) <= 1e-12);
  CHECK(d_star() > 0.0);
  CHECK(d_star() == doctest::Approx(7.197507978873747499998907).epsilon(1e-12));
  CHECK(c_star() == doctest::Approx(-3.454450073211490534847825).epsilon(1e-12));
  CHECK(t.exact_covariance_limit == doctest::Approx(-2.708980049616457007144401).epsilon(1e-12));
  CHECK(t.gamma == kGamma);
  CHECK(t.series_split == 0.01);
  CHECK(t.tail_start == 100.0);
}

TEST_CASE("twice the integral of Psi equals 1 - gamma + int Phi") {
  boost::math::quadrature::exp_sinh<double> es;
  const double two_psi = 2.0 * es.integrate([](double t) { return psi_limit(t); }, 1e-13);
  CHECK(two_psi == doctest::Approx(1.0 - kGamma + integral_phi()).epsilon(1e-9));
}

TEST_CASE("normalization identity") {
  CHECK(std::abs(normalization_identity_check(1e-8) - 1.0) <= 1e-8);
  for (double T : {0.5, 2.0, 5.0, 20.0}) {
    const QuadratureResult r = integrate_adaptive([](double t) { return radial_prefactor(t); }, 0.0, T, 1e-13);
    CHECK(r.value == doctest::Approx(1.0 / std::tanh(T) - 1.0 / T).epsilon(1e-11));
  }
  CHECK(radial_prefactor(0.5) > 0.0);
  CHECK(radial_prefactor(0.5) < 1.01 / 3.0);
}

TEST_CASE("Kac-Rice density suite") {
  const KacRiceDensityPoint z = s_n_suite(100, 0.0);
  CHECK(z.s0 == doctest::Approx(101.0 / 100.0).epsilon(1e-15));

  const KacRiceDensityPoint p = s_n_suite(10000, 1.0);
  CHECK(std::abs(p.psi_n - p.psi_limit) <= 0.01);

  const KacRiceDensityPoint big = s_n_suite(1000000, 2.0);
  CHECK(std::abs(big.s0 - (1.0 - std::exp(-4.0)) / 4.0) <= 1e-5);
  // Riemann limits of the first two derivatives of (1 - e^{-2t}) / (2t).
  const double t = 2.0;
  const double d1 = (std::exp(-2 * t) * (2 * t + 1) - 1) / (2 * t * t);
  const double d2 = (1 - std::exp(-2 * t) * (2 * t * t + 2 * t + 1)) * 2 / (2 * t * t * t) * 1.0;
  CHECK(std::abs(big.s1 - d1) <= 1e-5);
  CHECK(std::abs(big.s2 - d2) <= 1e-5);
  CHECK(big.s_tilde == doctest::Approx(big.s2 - big.s1 * big.s1 / big.s0).epsilon(1e-10));
}

TEST_CASE("s_tilde is a variance and psi_n is finite") {
  for (int n : {2, 10, 100, 1000, 10000}) {
    const double l = std::log(static_cast<double>(n));
    for (double frac : {0.0, 1e-4, 0.01, 0.1, 0.5, 1.0}) {
      const double t = frac * l * l * l * l;
      const KacRiceDensityPoint p = s_n_suite(n, t);
      CHECK(p.s0 > 0.0);
      CHECK(p.s_tilde >= 0.0);
      if (t > 0.0) CHECK(std::isfinite(p.psi_n));
    }
  }
  CHECK_THROWS_AS(s_n_suite(1, 0.5), Error);
  CHECK_THROWS_AS(s_n_suite(100, -0.1), Error);
  CHECK_THROWS_AS(s_n_suite(100, 500.0), Error);
}

TEST_CASE("psi_n approaches Psi at the Riemann-sum rate") {
  const double ts[] = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
  double err[3] = {0, 0, 0};
  const int ns[] = {1000, 10000, 100000};
  for (int i = 0; i < 3; ++i) {
    for (double t : ts) err[i] = std::max(err[i], std::abs(s_n_suite(ns[i], t).psi_n - psi_limit(t)));
  }
  CHECK(err[1] < 0.01);
  CHECK(err[0] / err[2] >= 5.0);
}

TEST_CASE("int psi_n converges to int Psi along the ladder") {
  const double target = c_star() / 2.0;
  double prev = 1e300;
  for (int n : {1000, 10000, 100000}) {
    const double e = std::abs(integral_psi_n(n, 1e-8) - target);
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("Gaussian log moment") {
  CHECK(gaussian_log_moment(1.0) == doctest::Approx((1.0 - kGamma) / 2.0).epsilon(1e-15));
  CHECK(std::abs(gaussian_log_moment(std::exp(kGamma - 1.0))) <= 1e-16);

  const double s = 2.0;
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd(0.0, std::sqrt(s / 2.0));
  const int draws = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double a = nd(gen), b = nd(gen);
    const double r2 = a * a + b * b;
    const double v = r2 > 0.0 ? r2 * 0.5 * std::log(r2) : 0.0;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
  CHECK(std::abs(mean - gaussian_log_moment(s)) <= 4.0 * se);
}

TEST_CASE("covariance suite") {
  const CovarianceSuite z = covariance_suite(0.0);
  CHECK(z.s0 == doctest::Approx(1.0));
  CHECK(z.s1 == doctest::Approx(0.5));
  CHECK(z.s2 == doctest::Approx(1.0 / 3.0));
  CHECK(z.det == doctest::Approx(1.0 / 12.0).epsilon(1e-15));

  const double l = std::log(1e4);
  for (double b = 0.0; b <= l * l * l; b = b < 1 ? b + 0.003 : b * 1.07) {
    CAPTURE(b);
    const CovarianceSuite c = covariance_suite(b);
    CHECK(c.det > 0.0);
    const double direct = c.s0 * c.s2 - c.s1 * c.s1;
    CHECK(std::abs(c.det - direct) <= 1e-12 * std::max(c.det, c.s0 * c.s2));
  }
}

TEST_CASE("covariance suite against 50-digit moments") {
  for (double b : {0.005, 0.3, 1.0, 4.0, 40.0}) {
    boost::math::quadrature::tanh_sinh<mp> ts;
    const mp B = b;
    mp m[3];
    for (int l = 0; l < 3; ++l) {
      m[l] = ts.integrate([&](mp t) { return boost::multiprecision::exp(-t * B) * boost::multiprecision::pow(t, l); },
                          mp(0), mp(1));
    }
    const CovarianceSuite c = covariance_suite(b);
    CHECK(c.s0 == doctest::Approx(static_cast<double>(m[0])).epsilon(1e-14));
    CHECK(c.s1 == doctest::Approx(static_cast<double>(m[1])).epsilon(1e-14));
    CHECK(c.s2 == doctest::Approx(static_cast<double>(m[2])).epsilon(1e-13));
    CHECK(c.det == doctest::Approx(static_cast<double>(m[0] * m[2] - m[1] * m[1])).epsilon(1e-12));
  }
}

TEST_CASE("T_n") {
  CHECK_THROWS_AS(T_n(10), Error);
  for (int n : {200, 1000, 100000, 1000000}) {
    const double l = std::log(static_cast<double>(n));
    CHECK(T_n(n) > l * l * l);
  }
  const double l = std::log(1e6);
  CHECK(std::abs(T_n(1000000) / (l * l * l) - 1.0) <= 0.01);
}

TEST_CASE("Kac-Rice quadratures at n = 256") {
  // Values minted by an independent double-precision Riemann sum in Python.
  CHECK(kac_rice_quadrature(256) == doctest::Approx(-3.066).epsilon(2e-3));
  CHECK(kac_rice_exact_mean(256) == doctest::Approx(-1.1730).epsilon(2e-3));
  CHECK(kac_rice_upper_limit(64) == 40.0 * 64);
}
