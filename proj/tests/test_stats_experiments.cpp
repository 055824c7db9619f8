#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "kdl/constants.hpp"
#include "kdl/error.hpp"
#include "kdl/experiments.hpp"
#include "kdl/io.hpp"
#include "kdl/stats.hpp"

using namespace kdl;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Usage;
}

// Brute force: evaluate both empirical CDFs at every sample point.
double ks_brute(const std::vector<double>& a, const std::vector<double>& b) {
  double best = 0.0;
  std::vector<double> pts = a;
  pts.insert(pts.end(), b.begin(), b.end());
  for (double x : pts) {
    const double fa = std::count_if(a.begin(), a.end(), [&](double v) { return v <= x; }) / double(a.size());
    const double fb = std::count_if(b.begin(), b.end(), [&](double v) { return v <= x; }) / double(b.size());
    best = std::max(best, std::abs(fa - fb));
  }
  return best;
}

ExperimentConfig small_config(std::vector<int> ladder, int trials) {
  ExperimentConfig c;
  c.dist = {DistKind::Rademacher};
  c.n_ladder = std::move(ladder);
  c.trials = trials;
  c.master_seed = 11;
  return c;
}

Sampler fixed(std::function<Coefficients(int)> make) {
  return [make](int n, std::uint64_t, std::uint64_t) { return make(n); };
}

}  // namespace

TEST_CASE("summarize on a hand sample") {
  const std::vector<double> v = {4.0, 1.0, 3.0, 2.0, 5.0};
  const SummaryStats s = summarize(v);
  CHECK(s.count == 5);
  CHECK(s.mean == 3.0);
  CHECK(s.stddev == doctest::Approx(std::sqrt(2.5)));
  CHECK(s.std_error == doctest::Approx(std::sqrt(2.5 / 5.0)));
  CHECK(s.min == 1.0);
  CHECK(s.max == 5.0);
  CHECK(s.q50 == 3.0);
  CHECK(s.q25 == 2.0);
  CHECK(s.q75 == 4.0);
  CHECK(s.q05 == doctest::Approx(1.2));
  CHECK(s.q95 == doctest::Approx(4.8));

  const std::vector<double> one = {7.0};
  const SummaryStats o = summarize(one);
  CHECK(o.stddev == 0.0);
  CHECK(o.q05 == 7.0);
  CHECK(kind_of([] { summarize(std::vector<double>{}); }) == ErrorKind::EmptyInput);
}

TEST_CASE("summary quantiles are ordered") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::vector<double> v(1001);
  for (double& x : v) x = nd(gen);
  const SummaryStats s = summarize(v);
  CHECK(s.min <= s.q05);
  CHECK(s.q05 <= s.q25);
  CHECK(s.q25 <= s.q50);
  CHECK(s.q50 <= s.q75);
  CHECK(s.q75 <= s.q95);
  CHECK(s.q95 <= s.max);
}

TEST_CASE("KS distance matches brute force, including ties") {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> u(0, 9);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a(13 + rep), b(7 + 2 * rep);
    for (double& x : a) x = u(gen);
    for (double& x : b) x = u(gen) + (rep % 3 == 0 ? 0.5 : 0.0);
    CHECK(ks_two_sample(a, b).distance == doctest::Approx(ks_brute(a, b)).epsilon(1e-15));
  }
}

TEST_CASE("KS on identical and separated samples") {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  const KsResult same = ks_two_sample(a, a);
  CHECK(same.distance == 0.0);
  CHECK(same.p_value == doctest::Approx(1.0));
  const std::vector<double> b = {10, 11, 12, 13, 14};
  CHECK(ks_two_sample(a, b).distance == 1.0);
  // lambda = sqrt(2.5): 2 sum (-1)^{k-1} e^{-5 k^2}.
  CHECK(ks_two_sample(a, b).p_value == doctest::Approx(2.0 * (std::exp(-5.0) - std::exp(-20.0))).epsilon(1e-9));
}

TEST_CASE("Kolmogorov survival function") {
  CHECK(kolmogorov_survival(0.0) == 1.0);
  CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.0495).epsilon(0.01));
  CHECK(kolmogorov_survival(1.63) == doctest::Approx(0.0098).epsilon(0.02));
  CHECK(kolmogorov_survival(5.0) < 1e-20);
}

TEST_CASE("KS has the right size under the null") {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd;
  int rejected = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> a(300), b(300);
    for (double& x : a) x = nd(gen);
    for (double& x : b) x = nd(gen);
    if (ks_two_sample(a, b).p_value < 0.05) ++rejected;
  }
  CHECK(rejected <= 22);
}

TEST_CASE("config validation") {
  ExperimentConfig c = small_config({10, 20}, 3);
  CHECK_NOTHROW(c.validate());
  c.trials = 0;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::InvalidArgument);
  c = small_config({20, 10}, 3);
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::InvalidArgument);
  c = small_config({}, 3);
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::InvalidArgument);
  c = small_config({10}, 3);
  c.quad_factor = 8;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::InvalidArgument);
  c = small_config({10}, 3);
  c.workers = 0;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("omega parsing") {
  CHECK(Omega::parse("log2").kind == Omega::Kind::Log2);
  CHECK(Omega::parse("log3")(100) == doctest::Approx(std::pow(std::log(100.0), 3)));
  CHECK(Omega::parse("2.5")(100) == 2.5);
  CHECK(Omega::parse("2.5").name() == Omega::parse(Omega::parse("2.5").name()).name());
  CHECK_THROWS_AS(Omega::parse("-1"), Error);
  CHECK_THROWS_AS(Omega::parse("log4"), Error);
}

TEST_CASE("lln rejects laws that are not eligible") {
  ExperimentConfig c = small_config({10}, 2);
  c.dist = {DistKind::UniformIntRaw, 10};
  CHECK(kind_of([&] { run_lln(c); }) == ErrorKind::InvalidArgument);
  c.dist = {DistKind::UniformIntCentered, 3};
  CHECK(kind_of([&] { run_lln(c); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("lln statistic plumbing on x^2 - 1 and x^2 - 4") {
  ExperimentConfig c = small_config({2}, 3);
  c.sampler = fixed([](int) { return Coefficients::real({-1.0, 0.0, 1.0}); });
  const ExperimentReport a = run_lln(c);
  CHECK(a.rung(2).stats.mean == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
  CHECK(a.rung(2).guards.circle_roots == 3);
  CHECK(a.records.front().status == "circle-root");

  c.sampler = fixed([](int) { return Coefficients::real({-4.0, 0.0, 1.0}); });
  const ExperimentReport b = run_lln(c);
  CHECK(b.rung(2).stats.mean == doctest::Approx((std::log(16.0) - 4.0 * std::log(2.0)) / 2.0 + 0.0).epsilon(1e-14));
  CHECK(b.records.front().breakdown.has_value());
  CHECK(b.rung(2).metric("decomposition_identity_violations") == 0.0);
  CHECK(b.reference("minus_d_star") == -d_star());
}

TEST_CASE("lln double-root trials are kept out of the mean") {
  ExperimentConfig c = small_config({2}, 4);
  c.sampler = [](int, std::uint64_t trial, std::uint64_t) {
    return trial == 0 ? Coefficients::real({4.0, -4.0, 1.0}) : Coefficients::real({-4.0, 0.0, 1.0});
  };
  const ExperimentReport r = run_lln(c);
  CHECK(r.rung(2).guards.double_roots == 1);
  CHECK(r.rung(2).stats.count == 3);
  CHECK(r.records.size() == 4);
  CHECK(r.records.front().status == "double-root");
  CHECK(std::isinf(r.records.front().statistic));
}

TEST_CASE("reports do not depend on the worker count") {
  ExperimentConfig c = small_config({30, 60}, 12);
  const std::string one = report_to_json(run_lln(c)).dump();
  c.workers = 3;
  json j = report_to_json(run_lln(c));
  j["config"]["workers"] = 1;
  CHECK(j.dump() == one);
}

TEST_CASE("one-trial runs are reproducible") {
  ExperimentConfig c = small_config({40}, 1);
  const ExperimentReport a = run_lln(c);
  const ExperimentReport b = run_lln(c);
  CHECK(report_to_json(a).dump() == report_to_json(b).dump());
  CHECK(a.records.size() == 1);
  c.master_seed = 12;
  CHECK(report_to_json(run_lln(c)).dump() != report_to_json(a).dump());
}

TEST_CASE("lln records and rungs are consistent") {
  const ExperimentReport r = run_lln(small_config({20, 40, 80}, 10));
  CHECK(r.records.size() == 30);
  CHECK(r.rungs.size() == 3);
  CHECK(r.record_columns.size() == 6);
  for (const TrialRecord& rec : r.records) {
    CHECK(rec.values.size() == 6);
    if (rec.status == "ok") CHECK(rec.values[5] == rec.statistic);
  }
  for (const RungSummary& g : r.rungs) {
    CHECK(g.metric("decomposition_identity_violations") == 0.0);
    CHECK(g.metric("abs_deviation_from_minus_d_star") == std::abs(g.stats.mean + d_star()));
  }
}

TEST_CASE("clustering on x^n - 1 and minmod on x^n") {
  ExperimentConfig c = small_config({16, 64}, 2);
  c.sampler = fixed([](int n) {
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    v.front() = -1.0;
    v.back() = 1.0;
    return Coefficients::real(v);
  });
  const ExperimentReport cl = run_clustering(c);
  CHECK(cl.rung(16).stats.mean == 1.0);
  CHECK(cl.rung(64).stats.mean == 1.0);
  CHECK(cl.rung(64).metric("sector_bound_violations") == 0.0);

  c.sampler = fixed([](int n) {
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    v.back() = 1.0;
    return Coefficients::real(v);
  });
  const ExperimentReport mm = run_min_modulus(c);
  CHECK(mm.rung(64).stats.mean == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(mm.rung(16).metric("fraction_below_1_over_n") == 0.0);
}

TEST_CASE("circle minimum refinement finds the true minimum") {
  // 1 + z^n / (1 + 1e-3): minimum 1 - 1/(1 + 1e-3) at angles pi(2k+1)/n.
  const int n = 101;
  std::vector<double> v(n + 1, 0.0);
  v[0] = 1.0;
  v[n] = 1.0 / (1.0 + 1e-3);
  const auto [m, arg] = circle_minimum(Coefficients::real(v), 16 * (n + 1));
  CHECK(m == doctest::Approx(1.0 - 1.0 / (1.0 + 1e-3)).epsilon(1e-8));
  (void)arg;
}

TEST_CASE("mahler experiment on z^n + 2") {
  ExperimentConfig c = small_config({8, 32}, 2);
  c.sampler = fixed([](int n) {
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    v.front() = 2.0;
    v.back() = 1.0;
    return Coefficients::real(v);
  });
  const ExperimentReport r = run_mahler(c);
  // Trapezoid aliasing on 16 (n + 1) nodes leaves 2^{-33} / 33 at n = 32.
  CHECK(r.rung(32).stats.mean == doctest::Approx(std::log(2.0) - 0.5 * std::log(32.0)).epsilon(1e-10));
}

TEST_CASE("symmetry experiment wiring") {
  const ExperimentReport r = run_symmetry(small_config({40}, 30));
  const RungSummary& g = r.rung(40);
  CHECK(g.metric("ks_level") == doctest::Approx(0.01));
  CHECK(g.metric("ks_p_value") >= 0.0);
  CHECK(g.metric("ks_p_value") <= 1.0);
  CHECK(r.records.size() == 30);
}

TEST_CASE("kacrice precondition") {
  ExperimentConfig c = small_config({32}, 2);
  CHECK(kind_of([&] { run_kacrice_gaussian(c); }) == ErrorKind::InvalidArgument);
  c.dist = {DistKind::GaussianComplex};
  const ExperimentReport r = run_kacrice_gaussian(c);
  CHECK(r.rung(32).metric("annulus_lower_radius") == 0.0);
  CHECK(std::isfinite(r.rung(32).metric("exact_mean")));
}

TEST_CASE("parallel_for covers every index and rethrows in order") {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  try {
    parallel_for(10, 3, [](int i) {
      if (i == 3 || i == 7) throw Error(ErrorKind::Domain, std::to_string(i));
    });
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find('3') != std::string::npos);
  }
}
