#pragma once

#include <span>

namespace kdl {

struct SummaryStats {
  int count = 0;
  double mean = 0.0;
  double stddev = 0.0;     // unbiased; 0 when count = 1
  double std_error = 0.0;  // stddev / sqrt(count)
  double min = 0.0;
  double max = 0.0;
  double q05 = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;

  bool operator==(const SummaryStats&) const = default;
};

/// Quantiles by linear interpolation between order statistics.
SummaryStats summarize(std::span<const double> values);

/// Linear-interpolation quantile of an ascending sample, q in [0, 1].
double sorted_quantile(std::span<const double> sorted, double q);

struct KsResult {
  double distance = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov: sup |F_a - F_b| and the asymptotic
/// Kolmogorov p-value at lambda = sqrt(m n / (m + n)) * distance.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// P(K > lambda) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_survival(double lambda);

}  // namespace kdl
