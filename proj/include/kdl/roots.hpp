#pragma once

#include <utility>
#include <vector>

#include "kdl/poly.hpp"

namespace kdl {

struct RootOptions {
  double tol = 1e-12;  // max relative residual |f(a)| / sum |c_k||a|^k
  int max_iter = 200;  // Ehrlich-Aberth sweeps before the companion fallback
};

struct RootSet {
  std::vector<cplx> roots;
  std::vector<double> residuals;
  bool converged = false;
  int iterations = 0;
  bool used_fallback = false;

  double max_residual() const noexcept;
};

/// All n complex roots by simultaneous Ehrlich-Aberth iteration with Newton
/// polish. Real inputs get conjugate-pair symmetrization and real-axis
/// snapping. Falls back to a balanced companion-matrix eigen solve when the
/// iteration does not reach `tol`; throws NonConvergenceError if both fail.
RootSet find_roots(const Coefficients& p, const RootOptions& options = {});

/// |Im a| <= 1e-12 (1 + |a|) is treated as real.
inline constexpr double kRealSnapTolerance = 1e-12;
/// ||a| - 1| <= 1e-12 is treated as lying on the unit circle.
inline constexpr double kOnCircleTolerance = 1e-12;

struct AnnulusCount {
  double inner;
  double outer;
  int count;
};

struct RootStatsOptions {
  /// Closed annuli {inner <= |z| <= outer} to count.
  std::vector<std::pair<double, double>> annuli;
  /// Width of the annulus A = {1 - width <= |z| <= 1} that the almost-real
  /// sector S lives in. Non-positive means log^3(n)/n.
  double sector_annulus_width = 0.0;
};

struct RootStats {
  std::vector<AnnulusCount> annulus_counts;
  int sector_count_S = 0;
  double discrepancy = 0.0;  // max over dyadic arcs of |count - n |arc|/(2 pi)|
  int inside_count = 0;
  int outside_count = 0;
  int on_circle_count = 0;
};

RootStats root_stats(const RootSet& rs, int n, const RootStatsOptions& options = {});

/// Same, on a bare root list (no convergence precondition).
RootStats root_stats(const std::vector<cplx>& roots, int n, const RootStatsOptions& options = {});

/// Sector discrepancy bound
///   (2/pi) sqrt(n) + 16 sqrt(n log(max_on_circle / sqrt(|c_0 c_n|))).
/// Throws InvalidBound when the log argument is below 1.
double erdos_turan_bound(const Coefficients& p, double max_on_circle);

}  // namespace kdl
