#pragma once

#include <functional>

namespace kdl {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // Kronrod error estimate, summed over intervals
  int evaluations = 0;
  bool converged = false;
};

/// Globally adaptive 7/15-point Gauss-Kronrod on [a, b]: bisects the interval
/// with the largest error estimate until the total estimate is below
/// max(abs_tol, rel_tol |value|) or max_intervals is reached.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, double rel_tol = 0.0, int max_intervals = 4000);

/// Fixed 15-point Kronrod rule on [a, b] (no error control).
double integrate_kronrod15(const std::function<double(double)>& f, double a, double b);

}  // namespace kdl
