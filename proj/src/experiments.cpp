#include "kdl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>

#include <boost/math/tools/minima.hpp>

#include "kdl/constants.hpp"
#include "kdl/error.hpp"
#include "kdl/roots.hpp"

namespace kdl {

namespace {

constexpr int kMaxAttempts = 16;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Outcome {
  std::optional<TrialRecord> record;
  GuardCounters guards;
};

using TrialFn = std::function<Outcome(int n, int trial)>;
using RungFn = std::function<void(int n, const std::vector<TrialRecord>&, RungSummary&)>;

Coefficients draw(const ExperimentConfig& c, int n, int trial, int attempt) {
  if (c.sampler) return c.sampler(n, static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(attempt));
  return sample_kac(c.dist, n, c.master_seed, static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(attempt));
}

int quad_points(const ExperimentConfig& c, int n) { return c.quad_factor * (n + 1); }

std::optional<RootSet> try_roots(const Coefficients& p, GuardCounters& g) {
  try {
    return find_roots(p);
  } catch (const NonConvergenceError&) {
    ++g.nonconvergences;
    return std::nullopt;
  }
}

void add(GuardCounters& into, const GuardCounters& g) {
  into.double_roots += g.double_roots;
  into.circle_roots += g.circle_roots;
  into.nonconvergences += g.nonconvergences;
  into.resamples += g.resamples;
}

std::vector<double> finite_statistics(const std::vector<TrialRecord>& records) {
  std::vector<double> out;
  for (const TrialRecord& r : records) {
    if (std::isfinite(r.statistic)) out.push_back(r.statistic);
  }
  return out;
}

ExperimentReport run_generic(const ExperimentConfig& config, std::string name, std::string statistic,
                             std::vector<std::string> columns, const TrialFn& trial_fn, const RungFn& rung_fn,
                             bool root_budget) {
  config.validate();
  ExperimentReport report;
  report.experiment = std::move(name);
  report.config = config;
  report.statistic = std::move(statistic);
  report.record_columns = std::move(columns);
  for (int n : config.n_ladder) {
    std::vector<Outcome> outcomes(static_cast<std::size_t>(config.trials));
    parallel_for(config.trials, config.workers,
                 [&](int t) { outcomes[static_cast<std::size_t>(t)] = trial_fn(n, t); });
    RungSummary rung;
    rung.n = n;
    std::vector<TrialRecord> records;
    for (Outcome& o : outcomes) {
      add(rung.guards, o.guards);
      if (o.record) records.push_back(std::move(*o.record));
    }
    if (root_budget && rung.guards.nonconvergences > 0.01 * config.trials) {
      throw Error(ErrorKind::ExperimentIntegrity,
                  "root finder failed on " + std::to_string(rung.guards.nonconvergences) + " of " +
                      std::to_string(config.trials) + " trials at n = " + std::to_string(n));
    }
    const std::vector<double> stats = finite_statistics(records);
    if (stats.empty()) {
      throw Error(ErrorKind::ExperimentIntegrity, "no usable trials at n = " + std::to_string(n));
    }
    rung.stats = summarize(stats);
    rung_fn(n, records, rung);
    report.records.insert(report.records.end(), std::make_move_iterator(records.begin()),
                          std::make_move_iterator(records.end()));
    report.rungs.push_back(std::move(rung));
  }
  return report;
}

void require_eligible(const ExperimentConfig& c, const char* what) {
  if (!c.sampler && !c.dist.theorem_eligible()) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + " needs a mean-zero, variance-one law without an atom at 0 (got " +
                    c.dist.name() + ")");
  }
}

std::vector<double> breakdown_values(const DiscriminantBreakdown& b) {
  return {b.sum_inside, b.sum_outside, b.mahler_term, b.log_n_term, b.total_log_abs_disc, b.theorem_statistic};
}

double log3_over_n(int n) {
  const double l = std::log(static_cast<double>(n));
  return l * l * l / n;
}

}  // namespace

double Omega::operator()(int n) const {
  const double l = std::log(static_cast<double>(n));
  switch (kind) {
    case Kind::Log2: return l * l;
    case Kind::Log3: return l * l * l;
    case Kind::Constant: return value;
  }
  return value;
}

std::string Omega::name() const {
  switch (kind) {
    case Kind::Log2: return "log2";
    case Kind::Log3: return "log3";
    case Kind::Constant: break;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Omega Omega::parse(const std::string& text) {
  if (text == "log2") return {Kind::Log2, 0.0};
  if (text == "log3") return {Kind::Log3, 0.0};
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(v > 0.0) || !std::isfinite(v))
    throw Error(ErrorKind::InvalidArgument, "omega must be log2, log3 or a positive number, got '" + text + "'");
  return {Kind::Constant, v};
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
  if (n_ladder.empty()) throw Error(ErrorKind::InvalidArgument, "n ladder is empty");
  for (std::size_t i = 0; i < n_ladder.size(); ++i) {
    if (n_ladder[i] < 1) throw Error(ErrorKind::InvalidArgument, "degrees must be >= 1");
    if (i > 0 && n_ladder[i] <= n_ladder[i - 1])
      throw Error(ErrorKind::InvalidArgument, "n ladder must be strictly increasing");
  }
  if (quad_factor < 16) throw Error(ErrorKind::InvalidArgument, "quad factor must be >= 16");
  if (workers < 1) throw Error(ErrorKind::InvalidArgument, "workers must be >= 1");
}

bool ExperimentConfig::same_fields(const ExperimentConfig& o) const {
  return dist == o.dist && n_ladder == o.n_ladder && trials == o.trials && master_seed == o.master_seed &&
         omega == o.omega && quad_factor == o.quad_factor && workers == o.workers;
}

double RungSummary::metric(const std::string& key) const {
  for (const auto& [k, v] : metrics) {
    if (k == key) return v;
  }
  throw Error(ErrorKind::InvalidArgument, "no metric '" + key + "'");
}

const RungSummary& ExperimentReport::rung(int n) const {
  for (const RungSummary& r : rungs) {
    if (r.n == n) return r;
  }
  throw Error(ErrorKind::InvalidArgument, "no rung for n = " + std::to_string(n));
}

double ExperimentReport::reference(const std::string& key) const {
  for (const auto& [k, v] : references) {
    if (k == key) return v;
  }
  throw Error(ErrorKind::InvalidArgument, "no reference '" + key + "'");
}

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(count, 0)));
  std::atomic<int> next{0};
  const auto work = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int threads = std::min(workers, count);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ExperimentReport run_lln(const ExperimentConfig& config) {
  require_eligible(config, "lln");
  const double minus_d = -d_star();
  const double exact_limit = constant_table().exact_covariance_limit;
  const TrialFn trial = [&](int n, int t) {
    Outcome out;
    const Coefficients p = draw(config, n, t, 0);
    const std::optional<RootSet> rs = try_roots(p, out.guards);
    if (!rs) return out;
    TrialRecord rec;
    rec.n = n;
    rec.trial = t;
    if (double_root_guard(*rs, p)) {
      ++out.guards.double_roots;
      rec.status = "double-root";
      rec.statistic = kNegInf;
      rec.values.assign(6, kNaN);
      rec.values[5] = kNegInf;
    } else if (circle_root_guard(*rs)) {
      // The statistic is still defined; only the split is not.
      ++out.guards.circle_roots;
      rec.status = "circle-root";
      const double total = log_abs_discriminant(p, *rs);
      rec.statistic = theorem_statistic(total, n);
      rec.values = {kNaN, kNaN, kNaN, kNaN, total, rec.statistic};
    } else {
      const DiscriminantBreakdown b = decompose(p, *rs, quad_points(config, n));
      rec.statistic = b.theorem_statistic;
      rec.values = breakdown_values(b);
      rec.breakdown = b;
    }
    out.record = std::move(rec);
    return out;
  };
  const RungFn rung = [&](int n, const std::vector<TrialRecord>& records, RungSummary& r) {
    (void)n;
    int violations = 0;
    for (const TrialRecord& rec : records) {
      if (!rec.breakdown) continue;
      const DiscriminantBreakdown& b = *rec.breakdown;
      if (std::abs(b.pieces_sum() - b.total_log_abs_disc) > 1e-8 * (1.0 + std::abs(b.total_log_abs_disc)))
        ++violations;
    }
    r.metrics = {
        {"deviation_from_minus_d_star", r.stats.mean - minus_d},
        {"abs_deviation_from_minus_d_star", std::abs(r.stats.mean - minus_d)},
        {"deviation_from_exact_covariance_limit", r.stats.mean - exact_limit},
        {"decomposition_identity_violations", violations},
    };
  };
  ExperimentReport report =
      run_generic(config, "lln", "theorem_statistic",
                  {"sum_inside", "sum_outside", "mahler_term", "log_n_term", "total", "theorem_statistic"}, trial,
                  rung, true);
  report.references = {{"minus_d_star", minus_d}, {"exact_covariance_limit", exact_limit}};
  return report;
}

ExperimentReport run_mahler(const ExperimentConfig& config) {
  const double target = -kEulerGamma / 2.0;
  const TrialFn trial = [&](int n, int t) {
    Outcome out;
    TrialRecord rec;
    rec.n = n;
    rec.trial = t;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      const Coefficients p = draw(config, n, t, attempt);
      const std::vector<cplx> v = circle_values(p, 1.0, quad_points(config, n), 0);
      double sum = 0.0;
      double smallest = std::numeric_limits<double>::infinity();
      for (const cplx& x : v) {
        const double a = std::abs(x);
        smallest = std::min(smallest, a);
        sum += std::log(a);
      }
      if (smallest < 1e-12) {
        ++out.guards.circle_roots;
        ++out.guards.resamples;
        continue;
      }
      const double log_m = sum / static_cast<double>(v.size());
      rec.attempt = attempt;
      rec.statistic = log_m - 0.5 * std::log(static_cast<double>(n));
      rec.values = {log_m, rec.statistic};
      out.record = std::move(rec);
      return out;
    }
    rec.status = "circle-root";
    rec.attempt = kMaxAttempts - 1;
    rec.statistic = kNegInf;
    rec.values = {kNegInf, kNegInf};
    out.record = std::move(rec);
    return out;
  };
  const RungFn rung = [&](int n, const std::vector<TrialRecord>&, RungSummary& r) {
    const double se = r.stats.std_error;
    r.metrics = {
        {"deviation_from_minus_half_gamma", r.stats.mean - target},
        {"deviation_in_se", se > 0.0 ? (r.stats.mean - target) / se : kNaN},
        {"gaussian_exact_mean", target + 0.5 * std::log1p(1.0 / n)},
        {"mahler_ratio", std::exp(r.stats.mean + kEulerGamma / 2.0)},
    };
  };
  ExperimentReport report =
      run_generic(config, "mahler", "normalized_log_mahler", {"log_mahler", "normalized_log_mahler"}, trial, rung,
                  false);
  report.references = {{"minus_half_gamma", target}};
  return report;
}

ExperimentReport run_symmetry(const ExperimentConfig& config) {
  require_eligible(config, "symmetry");
  const double level = 0.01 / static_cast<double>(config.n_ladder.size());
  const TrialFn trial = [&](int n, int t) {
    Outcome out;
    TrialRecord rec;
    rec.n = n;
    rec.trial = t;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      const Coefficients p = draw(config, n, t, attempt);
      const std::optional<RootSet> rs = try_roots(p, out.guards);
      if (!rs) return out;
      rec.attempt = attempt;
      if (double_root_guard(*rs, p)) {
        ++out.guards.double_roots;
        rec.status = "double-root";
        rec.statistic = kNegInf;
        rec.values = {kNaN, kNaN};
        out.record = std::move(rec);
        return out;
      }
      if (circle_root_guard(*rs)) {
        ++out.guards.circle_roots;
        ++out.guards.resamples;
        continue;
      }
      const DiscriminantBreakdown b = decompose(p, *rs, quad_points(config, n));
      rec.statistic = b.sum_inside;
      rec.values = {b.sum_inside, b.sum_outside};
      rec.breakdown = b;
      out.record = std::move(rec);
      return out;
    }
    rec.status = "circle-root";
    rec.statistic = kNegInf;
    rec.values = {kNaN, kNaN};
    out.record = std::move(rec);
    return out;
  };
  const RungFn rung = [&](int, const std::vector<TrialRecord>& records, RungSummary& r) {
    std::vector<double> inside, outside;
    for (const TrialRecord& rec : records) {
      if (!rec.breakdown) continue;
      inside.push_back(rec.values[0]);
      outside.push_back(rec.values[1]);
    }
    const KsResult ks = ks_two_sample(inside, outside);
    const SummaryStats out_stats = summarize(outside);
    r.metrics = {
        {"ks_distance", ks.distance},
        {"ks_p_value", ks.p_value},
        {"ks_level", level},
        {"ks_rejected", ks.p_value < level ? 1.0 : 0.0},
        {"outside_mean", out_stats.mean},
        {"outside_std", out_stats.stddev},
    };
  };
  ExperimentReport report =
      run_generic(config, "symmetry", "sum_inside", {"sum_inside", "sum_outside"}, trial, rung, true);
  report.references = {{"bonferroni_level", level}};
  return report;
}

ExperimentReport run_clustering(const ExperimentConfig& config) {
  const TrialFn trial = [&](int n, int t) {
    Outcome out;
    const Coefficients p = draw(config, n, t, 0);
    const std::optional<RootSet> rs = try_roots(p, out.guards);
    if (!rs) return out;
    const double width = config.omega(n) / n;
    RootStatsOptions opts;
    opts.annuli = {{1.0 - width, 1.0 + width}};
    const RootStats st = root_stats(rs->roots, n, opts);
    const CircleExtremes ext = circle_extremes(p, 1.0, quad_points(config, n), 0);
    double bound = kNaN;
    try {
      bound = erdos_turan_bound(p, 2.0 * ext.max);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InvalidBound) throw;
    }
    TrialRecord rec;
    rec.n = n;
    rec.trial = t;
    rec.statistic = static_cast<double>(st.annulus_counts.front().count) / n;
    const double within = std::isnan(bound) ? kNaN : (st.sector_count_S <= bound ? 1.0 : 0.0);
    rec.values = {rec.statistic,
                  static_cast<double>(st.sector_count_S),
                  bound,
                  within,
                  st.discrepancy,
                  static_cast<double>(st.inside_count),
                  static_cast<double>(st.outside_count)};
    out.record = std::move(rec);
    return out;
  };
  const RungFn rung = [&](int n, const std::vector<TrialRecord>& records, RungSummary& r) {
    int violations = 0, unavailable = 0;
    double disc = 0.0, sector = 0.0;
    for (const TrialRecord& rec : records) {
      if (std::isnan(rec.values[3])) ++unavailable;
      else if (rec.values[3] == 0.0) ++violations;
      disc += rec.values[4];
      sector += rec.values[1];
    }
    const double m = static_cast<double>(records.size());
    r.metrics = {
        {"omega_width", config.omega(n) / n},
        {"sector_bound_violations", violations},
        {"sector_bound_unavailable", unavailable},
        {"mean_sector_count", sector / m},
        {"mean_discrepancy", disc / m},
    };
  };
  return run_generic(config, "clustering", "annulus_fraction",
                     {"annulus_fraction", "sector_count", "erdos_turan_bound", "sector_within_bound", "discrepancy",
                      "inside_count", "outside_count"},
                     trial, rung, true);
}

std::pair<double, double> circle_minimum(const Coefficients& p, int points) {
  const std::vector<cplx> v = circle_values(p, 1.0, points, 0);
  const int m = static_cast<int>(v.size());
  std::vector<double> a(v.size());
  for (int i = 0; i < m; ++i) a[static_cast<std::size_t>(i)] = std::abs(v[static_cast<std::size_t>(i)]);
  std::vector<int> minima;
  for (int i = 0; i < m; ++i) {
    const double here = a[static_cast<std::size_t>(i)];
    if (here <= a[static_cast<std::size_t>((i + m - 1) % m)] && here <= a[static_cast<std::size_t>((i + 1) % m)])
      minima.push_back(i);
  }
  std::sort(minima.begin(), minima.end(), [&](int x, int y) {
    return a[static_cast<std::size_t>(x)] < a[static_cast<std::size_t>(y)];
  });
  if (minima.size() > 4) minima.resize(4);
  const double step = 2.0 * std::numbers::pi / m;
  double best = a[static_cast<std::size_t>(minima.empty() ? 0 : minima.front())];
  double best_angle = (minima.empty() ? 0 : minima.front()) * step;
  for (int i : minima) {
    const double center = i * step;
    const auto f = [&](double u) { return std::abs(evaluate(p, std::polar(1.0, center + u)).f); };
    const auto [u, value] = boost::math::tools::brent_find_minima(f, -step, step, 40);
    if (value < best) {
      best = value;
      best_angle = center + u;
    }
  }
  best_angle = std::fmod(best_angle + 2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
  return {best, best_angle};
}

ExperimentReport run_min_modulus(const ExperimentConfig& config) {
  const TrialFn trial = [&](int n, int t) {
    Outcome out;
    const Coefficients p = draw(config, n, t, 0);
    const auto [m, angle] = circle_minimum(p, quad_points(config, n));
    TrialRecord rec;
    rec.n = n;
    rec.trial = t;
    rec.statistic = std::sqrt(static_cast<double>(n)) * m;
    rec.values = {m, angle, rec.statistic, m < 1.0 / n ? 1.0 : 0.0};
    out.record = std::move(rec);
    return out;
  };
  const RungFn rung = [&](int, const std::vector<TrialRecord>& records, RungSummary& r) {
    double below = 0.0;
    for (const TrialRecord& rec : records) below += rec.values[3];
    r.metrics = {
        {"fraction_below_1_over_n", below / static_cast<double>(records.size())},
        {"median", r.stats.q50},
    };
  };
  return run_generic(config, "minmod", "scaled_min_modulus",
                     {"min_modulus", "argmin", "scaled_min_modulus", "below_1_over_n"}, trial, rung, false);
}

ExperimentReport run_kacrice_gaussian(const ExperimentConfig& config) {
  if (!config.sampler && config.dist.kind != DistKind::GaussianComplex)
    throw Error(ErrorKind::InvalidArgument, "kacrice needs the complex Gaussian law");
  const TrialFn trial = [&](int n, int t) {
    Outcome out;
    const Coefficients p = draw(config, n, t, 0);
    const std::optional<RootSet> rs = try_roots(p, out.guards);
    if (!rs) return out;
    const double lower = std::max(0.0, 1.0 - log3_over_n(n));
    const double shift = 1.5 * std::log(static_cast<double>(n));
    double sum = 0.0;
    int count = 0;
    for (const cplx& a : rs->roots) {
      const double r = std::abs(a);
      if (r < lower || r > 1.0) continue;
      sum += evaluate_balanced(p, a).log_abs_derivative(n, a) - shift;
      ++count;
    }
    TrialRecord rec;
    rec.n = n;
    rec.trial = t;
    rec.statistic = sum / n;
    rec.values = {rec.statistic, static_cast<double>(count)};
    out.record = std::move(rec);
    return out;
  };
  const RungFn rung = [&](int n, const std::vector<TrialRecord>&, RungSummary& r) {
    const double quad = kac_rice_quadrature(n);
    const double exact = kac_rice_exact_mean(n);
    const double se = r.stats.std_error;
    r.metrics = {
        {"quadrature", quad},
        {"gap_in_se", se > 0.0 ? (r.stats.mean - quad) / se : kNaN},
        {"exact_mean", exact},
        {"exact_gap_in_se", se > 0.0 ? (r.stats.mean - exact) / se : kNaN},
        {"annulus_lower_radius", std::max(0.0, 1.0 - log3_over_n(n))},
    };
  };
  return run_generic(config, "kacrice", "root_sum", {"root_sum", "roots_in_annulus"}, trial, rung, true);
}

}  // namespace kdl
