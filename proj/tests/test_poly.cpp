#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>
#include <set>

#include "kdl/error.hpp"
#include "kdl/poly.hpp"
#include "kdl/roots.hpp"

using namespace kdl;
using mp = boost::multiprecision::cpp_bin_float_50;

namespace {

struct MpComplex {
  mp re, im;
};

// Horner in 50 digits; returns f(z).
MpComplex horner50(const Coefficients& p, double theta) {
  const mp zr = boost::multiprecision::cos(mp(theta));
  const mp zi = boost::multiprecision::sin(mp(theta));
  MpComplex acc{0, 0};
  for (int k = p.degree(); k >= 0; --k) {
    const mp r = acc.re * zr - acc.im * zi + mp(p[static_cast<std::size_t>(k)].real());
    const mp i = acc.re * zi + acc.im * zr + mp(p[static_cast<std::size_t>(k)].imag());
    acc = {r, i};
  }
  return acc;
}

double rel_err50(const cplx& got, const MpComplex& want) {
  const mp dr = mp(got.real()) - want.re;
  const mp di = mp(got.imag()) - want.im;
  const mp num = boost::multiprecision::sqrt(dr * dr + di * di);
  const mp den = boost::multiprecision::sqrt(want.re * want.re + want.im * want.im);
  return static_cast<double>(num / den);
}

std::vector<cplx> multiply(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<cplx> c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

void check_moments(const CoefficientDistribution& d, int draws) {
  const Coefficients p = sample_kac(d, draws - 1, 2024, 0);
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (const cplx& c : p.values()) {
    const double a2 = std::norm(c);
    sum += c.real();
    sum2 += a2;
    sum4 += a2 * a2;
  }
  const double n = draws;
  const double mean = sum / n;
  const double var = sum2 / n;
  const double se_mean = std::sqrt(var / n);
  const double se_var = std::sqrt((sum4 / n - var * var) / n);
  CHECK(std::abs(mean) <= 4.0 * se_mean);
  CHECK(std::abs(var - 1.0) <= 4.0 * se_var);
}

}  // namespace

TEST_CASE("rademacher samples are signs and deterministic") {
  const CoefficientDistribution d{DistKind::Rademacher};
  const Coefficients a = sample_kac(d, 8, 42, 0);
  REQUIRE(a.values().size() == 9);
  for (const cplx& c : a.values()) CHECK((c == cplx(1.0) || c == cplx(-1.0)));
  CHECK(a == sample_kac(d, 8, 42, 0));
  CHECK_FALSE(sample_kac(d, 64, 42, 0) == sample_kac(d, 64, 42, 1));
  CHECK_FALSE(sample_kac(d, 64, 42, 0) == sample_kac(d, 64, 43, 0));
  CHECK(a.provenance().master_seed == 42);
  CHECK_FALSE(a.provenance().manual);
}

TEST_CASE("mean-zero variance-one kinds pass the sampling oracle") {
  check_moments({DistKind::Rademacher}, 100000);
  check_moments({DistKind::GaussianReal}, 100000);
  check_moments({DistKind::GaussianComplex}, 100000);
  check_moments({DistKind::UniformIntCentered, 240}, 100000);
}

TEST_CASE("complex gaussian splits its variance evenly") {
  const Coefficients p = sample_kac({DistKind::GaussianComplex}, 99999, 5, 0);
  double re2 = 0.0, im2 = 0.0;
  for (const cplx& c : p.values()) {
    re2 += c.real() * c.real();
    im2 += c.imag() * c.imag();
  }
  CHECK(re2 / 1e5 == doctest::Approx(0.5).epsilon(0.02));
  CHECK(im2 / 1e5 == doctest::Approx(0.5).epsilon(0.02));
  CHECK_FALSE(p.is_real());
}

TEST_CASE("theorem eligibility excludes atoms at zero and non-centered laws") {
  const std::vector<CoefficientDistribution> all = {
      {DistKind::Rademacher},          {DistKind::GaussianReal},         {DistKind::GaussianComplex},
      {DistKind::UniformIntCentered, 240}, {DistKind::UniformIntCentered, 7}, {DistKind::UniformIntRaw, 240}};
  for (const auto& d : all) {
    if (d.has_atom_at_zero()) CHECK_FALSE(d.theorem_eligible());
  }
  CHECK_FALSE(CoefficientDistribution{DistKind::UniformIntCentered, 7}.theorem_eligible());
  CHECK(CoefficientDistribution{DistKind::UniformIntCentered, 240}.theorem_eligible());
  CHECK_FALSE(CoefficientDistribution{DistKind::UniformIntRaw, 240}.theorem_eligible());
}

TEST_CASE("raw uniform integers cover 1..K") {
  const Coefficients p = sample_kac({DistKind::UniformIntRaw, 6}, 5999, 1, 0);
  std::set<double> seen;
  for (const cplx& c : p.values()) {
    CHECK(c.real() == std::round(c.real()));
    seen.insert(c.real());
  }
  CHECK(seen == std::set<double>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("distribution names round-trip") {
  for (const char* name : {"rademacher", "gaussian-real", "gaussian-complex", "uniform-centered:240", "uniform-raw:9"}) {
    CHECK(CoefficientDistribution::parse(name).name() == name);
  }
  CHECK(CoefficientDistribution::parse("gaussian").kind == DistKind::GaussianReal);
  CHECK_THROWS_AS(CoefficientDistribution::parse("cauchy"), Error);
  CHECK_THROWS_AS(CoefficientDistribution::parse("rademacher:3"), Error);
}

TEST_CASE("construction rejects degenerate input") {
  CHECK_THROWS_AS(Coefficients::real({1.0, 0.0}), Error);
  CHECK_THROWS_AS(Coefficients::real({1.0}), Error);
  CHECK_THROWS_AS(Coefficients::real({NAN, 1.0}), Error);
  try {
    Coefficients::real({1.0, 2.0, 0.0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateDegree);
  }
}

TEST_CASE("evaluate on hand examples") {
  const Coefficients p = Coefficients::real({-1.0, 0.0, 1.0});
  const EvalResult r = evaluate(p, 2.0);
  CHECK(r.f == cplx(3.0));
  CHECK(r.fp == cplx(4.0));
  CHECK(r.fpp == cplx(2.0));
  CHECK(r.scale == doctest::Approx(5.0));

  const Coefficients q = Coefficients::complex({{1.5, 1.0}, {-2.0, 0.5}, {3.0, 0.0}, {0.25, 0.0}});
  const EvalResult z = evaluate(q, 0.0);
  CHECK(z.f == q[0]);
  CHECK(z.fp == q[1]);
  CHECK(z.fpp == 2.0 * q[2]);
}

TEST_CASE("evaluation matches a 50-digit reference on the circle") {
  for (int n : {100, 1000, 3000}) {
    const Coefficients p = sample_kac({DistKind::GaussianReal}, n, 11, 0);
    for (double theta : {0.1, 1.0, 2.5, 3.14159}) {
      const cplx z = std::polar(1.0, theta);
      const MpComplex want = horner50(p, theta);
      // The reference point is the rounded double z, not the exact angle.
      const double tol = 1e-12 + 4e-16 * n * evaluate(p, z).scale /
                                     static_cast<double>(boost::multiprecision::sqrt(want.re * want.re + want.im * want.im));
      CHECK(rel_err50(evaluate(p, z).f, want) <= tol);
    }
  }
}

TEST_CASE("derivative product rule") {
  const std::vector<cplx> a{1.0, -2.0, 0.5, 3.0};
  const std::vector<cplx> b{{0.5, 1.0}, 2.0, -1.0};
  const Coefficients pa = Coefficients::complex(a);
  const Coefficients pb = Coefficients::complex(b);
  const Coefficients pq = Coefficients::complex(multiply(a, b));
  for (cplx z : {cplx(0.3, 0.7), cplx(-1.2, 0.1), cplx(2.0, -1.0)}) {
    const EvalResult ea = evaluate(pa, z), eb = evaluate(pb, z), e = evaluate(pq, z);
    const cplx want = ea.fp * eb.f + ea.f * eb.fp;
    CHECK(std::abs(e.fp - want) <= 1e-12 * std::abs(want));
    const cplx want2 = ea.fpp * eb.f + 2.0 * ea.fp * eb.fp + ea.f * eb.fpp;
    CHECK(std::abs(e.fpp - want2) <= 1e-12 * std::abs(want2));
  }
}

TEST_CASE("balanced evaluation agrees with plain evaluation outside the disk") {
  const Coefficients p = sample_kac({DistKind::Rademacher}, 40, 3, 0);
  const cplx z(1.3, -0.4);
  const EvalResult e = evaluate(p, z);
  const BalancedEval b = evaluate_balanced(p, z);
  CHECK(b.reversed);
  CHECK(std::abs(b.value * std::pow(z, 40) - e.f) <= 1e-12 * e.scale);
  CHECK(std::abs(b.derivative * std::pow(z, 39) - e.fp) <= 1e-11 * std::abs(e.fp));
  CHECK(b.log_abs_derivative(40, z) == doctest::Approx(std::log(std::abs(e.fp))).epsilon(1e-12));
}

TEST_CASE("reciprocal") {
  const Coefficients p = Coefficients::real({1.0, 2.0, 3.0});
  CHECK(reciprocal(p) == Coefficients::real({3.0, 2.0, 1.0}));
  CHECK(reciprocal(reciprocal(p)) == p);
  const Coefficients lin = reciprocal(Coefficients::real({1.0, 2.0}));
  CHECK(lin == Coefficients::real({2.0, 1.0}));
  CHECK(find_roots(lin).roots[0] == cplx(-2.0));
  try {
    reciprocal(Coefficients::real({0.0, 1.0, 1.0}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateReciprocal);
  }
}

TEST_CASE("reciprocal preserves the l1 norm and inverts the roots") {
  for (int trial = 0; trial < 10; ++trial) {
    const Coefficients p = sample_kac({DistKind::GaussianReal}, 5 + trial, 8, static_cast<std::uint64_t>(trial));
    const Coefficients r = reciprocal(p);
    double l1p = 0.0, l1r = 0.0;
    for (const cplx& c : p.values()) l1p += std::abs(c);
    for (const cplx& c : r.values()) l1r += std::abs(c);
    CHECK(l1p == doctest::Approx(l1r).epsilon(1e-15));
    const RootSet rp = find_roots(p);
    const RootSet rr = find_roots(r);
    for (const cplx& a : rp.roots) {
      double best = 1e300;
      for (const cplx& b : rr.roots) best = std::min(best, std::abs(1.0 / a - b));
      CHECK(best <= 1e-8 * (1.0 + std::abs(1.0 / a)));
    }
  }
}

TEST_CASE("circle extremes on constructed inputs") {
  const int n = 12;
  std::vector<double> mono(n + 1, 0.0);
  mono[n] = 1.0;
  const CircleExtremes e = circle_extremes(Coefficients::real(mono), 1.0, 16 * (n + 1), 0);
  CHECK(e.max == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.min == doctest::Approx(1.0).epsilon(1e-14));

  const CircleExtremes l = circle_extremes(Coefficients::real({-1.0, 1.0}), 1.0, 64, 0);
  CHECK(l.min <= 1e-14);
  CHECK(l.argmin == doctest::Approx(0.0));
  CHECK(l.max == doctest::Approx(2.0));
  CHECK_THROWS_AS(circle_extremes(Coefficients::real(mono), 1.0, 100, 0), Error);
}

TEST_CASE("circle values of derivatives match direct evaluation") {
  const Coefficients p = sample_kac({DistKind::Rademacher}, 30, 9, 0);
  const int pts = 16 * 31;
  const double radius = 1.0 + 1.0 / 30;
  for (int order = 0; order <= 2; ++order) {
    const std::vector<cplx> v = circle_values(p, radius, pts, order);
    for (int k : {0, 7, 100, 301}) {
      const EvalResult e = evaluate(p, std::polar(radius, 2.0 * std::numbers::pi * k / pts));
      const cplx want = order == 0 ? e.f : order == 1 ? e.fp : e.fpp;
      CHECK(std::abs(v[static_cast<std::size_t>(k)] - want) <= 1e-10 * (1.0 + std::abs(want)) * (order + 1) * 30);
    }
  }
}

TEST_CASE("the Salem-Zygmund event holds in at least 99% of Rademacher n = 512 trials") {
  const int n = 512;
  const double r = 1.0 + 1.0 / n;
  int hits = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const Coefficients p = sample_kac({DistKind::Rademacher}, n, 77, static_cast<std::uint64_t>(t));
    double worst = 0.0;
    for (int l = 0; l <= 2; ++l) {
      const double m = circle_extremes(p, r, 16 * (n + 1), l).max / std::pow(n, l + 0.5);
      worst = std::max(worst, m);
    }
    if (worst <= std::log(static_cast<double>(n))) ++hits;
  }
  CHECK(hits >= 990);
}
