#pragma once

namespace kdl {

/// Euler's constant, fixed literal.
inline constexpr double kEulerGamma = 0.57721566490153286;

// Switch points between evaluation routes for the hyperbolic densities.
inline constexpr double kSeriesBelow = 0.01;
inline constexpr double kAsymptoticAbove = 30.0;
// Quadrature split: series piece on [0, kSeriesBelow], adaptive piece up to
// kTailStart, closed-form tail beyond.
inline constexpr double kTailStart = 100.0;

/// 1/t^2 - 1/sinh^2(t), with its limit 1/3 at t = 0.
double radial_prefactor(double t);

/// S(t) = (1 + 2t^2 - cosh 2t)(1 - coth t) / (2 t^3); S(0) = 1/3.
double S_of_t(double t);

/// log S(t), evaluated without forming S for large t.
double log_S_of_t(double t);

/// Phi(t) = radial_prefactor(t) * log S(t); Phi(0) = -log(3)/3.
double phi(double t);

/// Psi(t) = radial_prefactor(t) * (log S(t) + 1 - gamma) / 2.
double psi_limit(double t);

struct ConstantTable {
  double gamma = kEulerGamma;
  double integral_phi = 0.0;
  double c_star = 0.0;  // 1 - gamma + int Phi
  double d_star = 0.0;  // gamma/2 - 2(1 - gamma) - 2 int Phi
  /// -gamma/2 + ((1 - gamma) + int Phi - log 4) / 2: the limit obtained when the
  /// conditional variance uses E|G_n'|^2 = s_n''/4 (see kac_rice_exact_mean).
  double exact_covariance_limit = 0.0;
  double tolerance = 0.0;
  double achieved_error = 0.0;
  double series_split = kSeriesBelow;
  double tail_start = kTailStart;
  int evaluations = 0;
};

/// int_0^infty Phi: series piece, adaptive Gauss-Kronrod piece to `tol`,
/// closed-form tail -(log 2 + 3 log T + 3)/T at T = 100.
/// Throws Accuracy if the adaptive piece misses `tol`.
ConstantTable compute_constant_table(double tol = 1e-12);

/// Process-wide table at the default tolerance, computed on first use.
const ConstantTable& constant_table();

double integral_phi(double tol = 1e-12);
double c_star();
double d_star();

/// Numerical value of int_0^infty (1/t^2 - 1/sinh^2 t) dt (which is 1).
double normalization_identity_check(double tol = 1e-10);

/// One point of the finite-n Kac-Rice density.
struct KacRiceDensityPoint {
  double t = 0.0;
  double s0 = 0.0;       // s_n(t) = (1/n) sum_{k=0}^n e^{-2tk/n}
  double s1 = 0.0;       // s_n'(t)
  double s2 = 0.0;       // s_n''(t)
  double s_tilde = 0.0;  // s_n'' - (s_n')^2 / s_n
  double psi_n = 0.0;    // s_tilde (log s_tilde + 1 - gamma) / (2 s_n)
  double psi_limit = 0.0;
};

/// Requires n >= 2 and 0 <= t <= log^4 n (Domain error otherwise).
KacRiceDensityPoint s_n_suite(int n, double t);

/// E[|Z|^2 log|Z|] = (s/2)(log s + 1 - gamma) for Z complex Gaussian, E|Z|^2 = s.
double gaussian_log_moment(double s);

struct CovarianceSuite {
  double s0 = 0.0;  // int_0^1 e^{-tb} dt
  double s1 = 0.0;  // int_0^1 t e^{-tb} dt
  double s2 = 0.0;  // int_0^1 t^2 e^{-tb} dt
  double det = 0.0; // s0 s2 - s1^2 in closed form
};

CovarianceSuite covariance_suite(double b);

/// T_n = -n log(1 - log^3(n)/n). Domain error when log^3 n >= n.
double T_n(int n);

/// int_0^{T_n} psi_n(t) dt.
double integral_psi_n(int n, double tol = 1e-9);

/// 2 int_0^{T} psi_n(t) e^{-2t/n} dt, T = T_n (or the whole disk when
/// log^3 n >= n): the Kac-Rice value for the mean of
/// (1/n) sum_{a in A} log|g_n'(a)/n^{3/2}| as written with s_n''.
double kac_rice_quadrature(int n, double tol = 1e-9);

/// Exact Gaussian mean of the same root sum: uses the conditional variance
/// s_tilde/4 and keeps the log r shift, i.e.
///   2 int_0^T [ psi_hat_n(t) + (t/n) s_hat(t) / s_n(t) ] dt,
/// psi_hat_n = s_hat (log s_hat + 1 - gamma) / (2 s_n), s_hat = s_tilde / 4.
double kac_rice_exact_mean(int n, double tol = 1e-9);

/// Upper limit used by the two functions above.
double kac_rice_upper_limit(int n);

}  // namespace kdl
