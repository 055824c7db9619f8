#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kdl/discriminant.hpp"
#include "kdl/poly.hpp"
#include "kdl/stats.hpp"

namespace kdl {

/// Growth of omega(n) for the clustering annulus {||z| - 1| <= omega(n)/n}:
/// "log2" (log^2 n, the default), "log3" (log^3 n) or a positive constant.
struct Omega {
  enum class Kind { Log2, Log3, Constant };
  Kind kind = Kind::Log2;
  double value = 0.0;

  double operator()(int n) const;
  std::string name() const;
  static Omega parse(const std::string& text);

  bool operator==(const Omega&) const = default;
};

/// Replaces sample_kac in a run (tests and wiring checks). Not serialized.
using Sampler = std::function<Coefficients(int n, std::uint64_t trial, std::uint64_t attempt)>;

struct ExperimentConfig {
  CoefficientDistribution dist;
  std::vector<int> n_ladder;
  int trials = 100;
  std::uint64_t master_seed = 0;
  Omega omega;
  int quad_factor = 16;  // quadrature nodes = quad_factor (n + 1)
  int workers = 1;
  Sampler sampler;

  /// Throws InvalidArgument on trials < 1, an empty or non-increasing ladder,
  /// quad_factor < 16 or workers < 1.
  void validate() const;

  bool same_fields(const ExperimentConfig& other) const;
};

struct GuardCounters {
  int double_roots = 0;
  int circle_roots = 0;
  int nonconvergences = 0;
  int resamples = 0;
};

struct TrialRecord {
  int n = 0;
  int trial = 0;
  int attempt = 0;  // sub-stream that produced the recorded sample
  std::string status = "ok";  // ok | double-root | circle-root
  double statistic = 0.0;
  std::vector<double> values;  // named by ExperimentReport::record_columns
  std::optional<DiscriminantBreakdown> breakdown;

  bool operator==(const TrialRecord&) const = default;
};

using Metrics = std::vector<std::pair<std::string, double>>;

struct RungSummary {
  int n = 0;
  SummaryStats stats;  // of the statistic over records with status ok
  GuardCounters guards;
  Metrics metrics;

  double metric(const std::string& key) const;
  bool operator==(const RungSummary&) const = default;
};

struct ExperimentReport {
  std::string experiment;
  ExperimentConfig config;
  std::string statistic;
  std::vector<std::string> record_columns;
  std::vector<TrialRecord> records;
  std::vector<RungSummary> rungs;
  Metrics references;

  const RungSummary& rung(int n) const;
  double reference(const std::string& key) const;
};

/// Theorem statistic (log|Delta| - 2 n log n)/n per trial, compared with -D*.
/// Double-root trials are kept with status "double-root" (statistic -inf) and
/// left out of the summary; root-finder failures above 1% of the trials raise
/// ExperimentIntegrity.
ExperimentReport run_lln(const ExperimentConfig& config);

/// int_0^1 log|f(e^{2 pi i t}) / sqrt(n)| dt per trial, compared with -gamma/2.
ExperimentReport run_mahler(const ExperimentConfig& config);

/// Inside sum versus outside sum of the breakdown, two-sample KS per rung at
/// level 0.01 / ladder size.
ExperimentReport run_symmetry(const ExperimentConfig& config);

/// Fraction of roots in the omega annulus, sector count versus the
/// Erdos-Turan bound (grid maximum doubled), dyadic arc discrepancy.
ExperimentReport run_clustering(const ExperimentConfig& config);

/// sqrt(n) min_{|z|=1} |f| with grid search plus local Brent refinement.
ExperimentReport run_min_modulus(const ExperimentConfig& config);

/// (1/n) sum over roots in A = {1 - log^3 n / n <= |a| <= 1} of
/// log|f'(a) / n^{3/2}| for complex Gaussian coefficients, against the
/// Kac-Rice quadrature and the exact Gaussian mean.
ExperimentReport run_kacrice_gaussian(const ExperimentConfig& config);

/// Minimum of |f| on the unit circle: grid search on quad_points nodes then
/// Brent refinement around the smallest local minima. Returns (min, angle).
std::pair<double, double> circle_minimum(const Coefficients& p, int quad_points);

/// Runs body(i) for i in [0, count) on `workers` threads. Exceptions are
/// rethrown in index order after all work finishes.
void parallel_for(int count, int workers, const std::function<void(int)>& body);

}  // namespace kdl
