#pragma once

#include <string>

#include "kdl/poly.hpp"
#include "kdl/roots.hpp"

namespace kdl {

/// The additive split of log|Delta| into the inside sum, the outside sum, the
/// Mahler-measure term and the explicit log n term, plus the normalized
/// statistic (log|Delta| - 2 n log n) / n.
struct DiscriminantBreakdown {
  int n = 0;
  double sum_inside = 0.0;    // sum_{|a|<1} log|f'(a) / n^{3/2}|
  double sum_outside = 0.0;   // sum_{|a|>1} log|f'(a) / (a^{n-2} n^{3/2})|
  double mahler_term = 0.0;   // (n-2) int_0^1 log|f(e^{2 pi i t}) / sqrt(n)| dt
  double log_n_term = 0.0;    // (2n-1) log n
  double total_log_abs_disc = 0.0;
  double theorem_statistic = 0.0;

  double pieces_sum() const noexcept { return sum_inside + sum_outside + mahler_term + log_n_term; }
};

/// (log|Delta| - 2 n log n) / n, the one expression used everywhere.
double theorem_statistic(double log_abs_disc, int n) noexcept;

/// log|Delta(P)| = (n-2) log|c_n| + sum_j log|P'(a_j)|.
/// Throws DoubleRoot when double_root_guard fires.
double log_abs_discriminant(const Coefficients& p, const RootSet& rs);

/// Requires n >= 2, no double roots and no root on the unit circle.
/// The Mahler term is the trapezoid rule on quad_points nodes with the
/// root-based aliasing correction (1/N) sum log|1 - b_j^N| removed.
DiscriminantBreakdown decompose(const Coefficients& p, const RootSet& rs, int quad_points);

/// Exact integer discriminant, as a decimal string plus convenience views.
struct ExactInteger {
  std::string decimal;
  int sign = 0;           // -1, 0, +1
  double log_abs = 0.0;   // log|value|, -inf for zero

  bool is_zero() const noexcept { return sign == 0; }
};

/// (-1)^{n(n-1)/2} Res(P, P') / c_n via fraction-free (Bareiss) elimination
/// of the (2n-1) x (2n-1) Sylvester matrix over GMP integers.
ExactInteger exact_discriminant(const Coefficients& p, int degree_cap = 64);

struct MahlerResult {
  double log_M_quadrature = 0.0;
  double log_M_roots = 0.0;
  int points_used = 0;
  double nearest_root_distance_to_circle = 0.0;
};

/// Plain trapezoid average of log|P| on quad_points nodes of the unit circle,
/// and log|c_n| + sum log+|a_j|. Requires quad_points >= 16 (n + 1).
MahlerResult mahler(const Coefficients& p, const RootSet& rs, int quad_points);

/// Trapezoid average of log|P(e^{2 pi i k / N})| alone; throws GridCollision
/// if some node value is zero.
double log_mahler_quadrature(const Coefficients& p, int quad_points);

/// (1/N) sum_k log|r e^{2 pi i k / N} - alpha|; throws SingularCase if |alpha| = r.
double jensen_point(double r, cplx alpha, int quad_points);

/// True if two roots lie within 1e-9 (1 + |a|) of each other or some
/// |f'(a_j)| <= 1e-9 n^{3/2} max|c_k|.
bool double_root_guard(const RootSet& rs, const Coefficients& p);

/// True if some root has ||a| - 1| <= kOnCircleTolerance.
bool circle_root_guard(const RootSet& rs);

}  // namespace kdl
