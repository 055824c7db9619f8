#include "kdl/constants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "kdl/error.hpp"
#include "kdl/quadrature.hpp"

namespace kdl {

namespace {

constexpr double kGamma = kEulerGamma;

void require_nonnegative(double t, const char* what) {
  if (!(t >= 0.0)) throw Error(ErrorKind::Domain, std::string(what) + ": t must be >= 0");
}

// sinh(x) - x without cancellation.
double sinh_minus_x(double x) {
  if (std::abs(x) >= 1.0) return std::sinh(x) - x;
  const double x2 = x * x;
  double term = x * x2 / 6.0;
  double sum = term;
  for (int k = 2; k < 30; ++k) {
    term *= x2 / ((2.0 * k) * (2.0 * k + 1.0));
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

double prefactor_series(double t) {
  const double u = t * t;
  return 1.0 / 3.0 + u * (-1.0 / 15.0 + u * (2.0 / 189.0 + u * (-1.0 / 675.0 + u * (2.0 / 10395.0))));
}

double log_S_series(double t) {
  const double u = t * t;
  return -std::log(3.0) - t + u * (-1.0 / 30.0 + u * (13.0 / 2100.0 + u * (-29.0 / 70875.0)));
}

double S_series(double t) {
  return 1.0 / 3.0 +
         t * (-1.0 / 3.0 +
              t * (7.0 / 45.0 + t * (-2.0 / 45.0 + t * (2.0 / 189.0 + t * (-1.0 / 315.0 + t * (13.0 / 14175.0))))));
}

double prefactor_direct(double t) {
  if (t > kAsymptoticAbove) {
    const double e = std::exp(-2.0 * t);
    const double d = 1.0 - e;
    return 1.0 / (t * t) - 4.0 * e / (d * d);
  }
  const double sh = std::sinh(t);
  return sinh_minus_x(t) * (sh + t) / (t * t * sh * sh);
}

double S_direct(double t) {
  const double sm = sinh_minus_x(t);
  const double sp = std::sinh(t) + t;
  return 2.0 * sm * sp / (std::expm1(2.0 * t) * t * t * t);
}

double log_S_large(double t) {
  const double e = std::exp(-2.0 * t);
  const double base = -std::log(2.0) - 3.0 * std::log(t);
  if (e == 0.0) return base;
  return base + std::log1p(-(2.0 + 4.0 * t * t) * e + e * e) - std::log1p(-e);
}

double phi_series(double t) { return prefactor_series(t) * log_S_series(t); }
double prefactor_unchecked(double t) { return t < kSeriesBelow ? prefactor_series(t) : prefactor_direct(t); }
double phi_unchecked(double t) {
  if (t < kSeriesBelow) return phi_series(t);
  return prefactor_direct(t) * log_S_of_t(t);
}

struct Piecewise {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = true;
};

Piecewise integrate_pieces(const std::function<double(double)>& f, const std::vector<double>& cuts, double tol) {
  Piecewise out;
  const double per_piece = tol / static_cast<double>(cuts.size() - 1);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const QuadratureResult r = integrate_adaptive(f, cuts[i], cuts[i + 1], per_piece);
    out.value += r.value;
    out.error += r.error;
    out.evaluations += r.evaluations;
    out.converged = out.converged && r.converged;
  }
  return out;
}

std::vector<double> cuts_up_to(double upper) {
  std::vector<double> cuts{0.0};
  for (double c : {1.0, 5.0, 20.0, 100.0, 500.0, 2000.0}) {
    if (c < upper) cuts.push_back(c);
  }
  cuts.push_back(upper);
  return cuts;
}

// Weighted moments of k/n under w_k = e^{-2tk/n}, k = 0..n.
struct Moments {
  double s0;
  double mean;
  double mean_sq;
  double var;
};

Moments weighted_moments(int n, double t) {
  const double dn = n;
  const double x = 2.0 * t / dn;
  double sw = 0.0, swk = 0.0;
  std::vector<double> w(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    w[static_cast<std::size_t>(k)] = std::exp(-x * k);
    sw += w[static_cast<std::size_t>(k)];
    swk += w[static_cast<std::size_t>(k)] * (k / dn);
  }
  const double mu = swk / sw;
  double sv = 0.0, swk2 = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double y = k / dn;
    sv += w[static_cast<std::size_t>(k)] * (y - mu) * (y - mu);
    swk2 += w[static_cast<std::size_t>(k)] * y * y;
  }
  return {sw / dn, mu, swk2 / sw, sv / sw};
}

double x_log_term(double s) {
  // s (log s + 1 - gamma), continuous at s = 0.
  return s > 0.0 ? s * (std::log(s) + 1.0 - kGamma) : 0.0;
}

KacRiceDensityPoint density_point(int n, double t) {
  const Moments m = weighted_moments(n, t);
  KacRiceDensityPoint p;
  p.t = t;
  p.s0 = m.s0;
  p.s1 = -2.0 * m.s0 * m.mean;
  p.s2 = 4.0 * m.s0 * m.mean_sq;
  p.s_tilde = 4.0 * m.s0 * m.var;
  p.psi_n = x_log_term(p.s_tilde) / (2.0 * p.s0);
  p.psi_limit = psi_limit(t);
  return p;
}

}  // namespace

double radial_prefactor(double t) {
  require_nonnegative(t, "radial_prefactor");
  return prefactor_unchecked(t);
}

double S_of_t(double t) {
  require_nonnegative(t, "S_of_t");
  if (t < kSeriesBelow) return S_series(t);
  if (t > kAsymptoticAbove) return std::exp(log_S_large(t));
  return S_direct(t);
}

double log_S_of_t(double t) {
  require_nonnegative(t, "log_S_of_t");
  if (t < kSeriesBelow) return log_S_series(t);
  if (t > kAsymptoticAbove) return log_S_large(t);
  return std::log(S_direct(t));
}

double phi(double t) {
  require_nonnegative(t, "phi");
  return phi_unchecked(t);
}

double psi_limit(double t) {
  require_nonnegative(t, "psi_limit");
  return prefactor_unchecked(t) * (log_S_of_t(t) + 1.0 - kGamma) / 2.0;
}

ConstantTable compute_constant_table(double tol) {
  if (!(tol >= 1e-12)) throw Error(ErrorKind::Domain, "integral_phi: tol must be >= 1e-12");
  ConstantTable table;
  table.tolerance = tol;

  const double head = integrate_kronrod15(phi_series, 0.0, kSeriesBelow);
  const Piecewise body =
      integrate_pieces(phi_unchecked, {kSeriesBelow, 1.0, 5.0, 20.0, kTailStart}, tol);
  const double T = kTailStart;
  const double tail = -(std::log(2.0) + 3.0 * std::log(T) + 3.0) / T;
  if (!body.converged || body.error > tol) {
    throw Error(ErrorKind::Accuracy, "integral_phi: adaptive quadrature reached error estimate " +
                                         std::to_string(body.error) + " above tol " + std::to_string(tol));
  }
  const double I = head + body.value + tail;
  table.integral_phi = I;
  table.achieved_error = body.error;
  table.evaluations = body.evaluations + 15;
  table.c_star = 1.0 - kGamma + I;
  table.d_star = kGamma / 2.0 - 2.0 * (1.0 - kGamma) - 2.0 * I;
  table.exact_covariance_limit = -kGamma / 2.0 + ((1.0 - kGamma) + I - std::log(4.0)) / 2.0;
  return table;
}

const ConstantTable& constant_table() {
  static const ConstantTable table = compute_constant_table(1e-12);
  return table;
}

double integral_phi(double tol) {
  if (tol == 1e-12) return constant_table().integral_phi;
  return compute_constant_table(tol).integral_phi;
}

double c_star() { return constant_table().c_star; }
double d_star() { return constant_table().d_star; }

double normalization_identity_check(double tol) {
  const double head = integrate_kronrod15(prefactor_series, 0.0, kSeriesBelow);
  const double abs_tol = std::max(tol * 0.1, 1e-14);
  const Piecewise body =
      integrate_pieces(prefactor_direct, {kSeriesBelow, 1.0, 5.0, 20.0, kTailStart}, abs_tol);
  const double T = kTailStart;
  const double e = std::exp(-2.0 * T);
  const double tail = 1.0 / T - 2.0 * e / (1.0 - e);
  return head + body.value + tail;
}

KacRiceDensityPoint s_n_suite(int n, double t) {
  if (n < 2) throw Error(ErrorKind::Domain, "s_n_suite: n must be >= 2");
  const double l = std::log(static_cast<double>(n));
  if (!(t >= 0.0) || t > l * l * l * l) throw Error(ErrorKind::Domain, "s_n_suite: t outside [0, log^4 n]");
  return density_point(n, t);
}

double gaussian_log_moment(double s) {
  if (!(s > 0.0)) throw Error(ErrorKind::Domain, "gaussian_log_moment: s must be > 0");
  return 0.5 * s * (std::log(s) + 1.0 - kGamma);
}

CovarianceSuite covariance_suite(double b) {
  if (!(b >= 0.0)) throw Error(ErrorKind::Domain, "covariance_suite: b must be >= 0");
  CovarianceSuite out;
  if (b < 1.0) {
    // S_l = sum_m (-b)^m / (m! (m + l + 1))
    double term = 1.0;
    for (int m = 0; m < 40; ++m) {
      out.s0 += term / (m + 1);
      out.s1 += term / (m + 2);
      out.s2 += term / (m + 3);
      term *= -b / (m + 1);
      if (std::abs(term) < 1e-20) break;
    }
  } else {
    const double e = std::exp(-b);
    out.s0 = -std::expm1(-b) / b;
    out.s1 = (1.0 - e * (1.0 + b)) / (b * b);
    out.s2 = (2.0 - e * (b * b + 2.0 * b + 2.0)) / (b * b * b);
  }
  const double b4 = b * b * b * b;
  if (b < kSeriesBelow) {
    out.det = out.s0 * out.s2 - out.s1 * out.s1;
  } else if (b <= 2.0) {
    const double h = b / 2.0;
    const double sm = 2.0 * sinh_minus_x(h);
    const double sp = 2.0 * std::sinh(h) + b;
    out.det = std::exp(-b) * sm * sp / b4;
  } else {
    const double e = std::exp(-b);
    const double one_minus = -std::expm1(-b);
    out.det = (one_minus * one_minus - b * b * e) / b4;
  }
  return out;
}

double T_n(int n) {
  const double dn = n;
  const double l = std::log(dn);
  const double x = l * l * l / dn;
  if (n < 2 || x >= 1.0) throw Error(ErrorKind::Domain, "T_n: needs log^3 n < n");
  return -dn * std::log1p(-x);
}

double kac_rice_upper_limit(int n) {
  if (n < 2) throw Error(ErrorKind::Domain, "Kac-Rice integrals need n >= 2");
  const double l = std::log(static_cast<double>(n));
  if (l * l * l < n) return T_n(n);
  return 40.0 * n;
}

double integral_psi_n(int n, double tol) {
  const double T = T_n(n);
  const auto f = [n](double t) { return density_point(n, t).psi_n; };
  return integrate_pieces(f, cuts_up_to(T), tol).value;
}

double kac_rice_quadrature(int n, double tol) {
  const double T = kac_rice_upper_limit(n);
  const double dn = n;
  const auto f = [n, dn](double t) {
    const Moments m = weighted_moments(n, t);
    const double s_tilde = 4.0 * m.s0 * m.var;
    return 2.0 * x_log_term(s_tilde) / (2.0 * m.s0) * std::exp(-2.0 * t / dn);
  };
  return integrate_pieces(f, cuts_up_to(T), tol).value;
}

double kac_rice_exact_mean(int n, double tol) {
  const double T = kac_rice_upper_limit(n);
  const double dn = n;
  const auto f = [n, dn](double t) {
    const Moments m = weighted_moments(n, t);
    const double s_hat = m.s0 * m.var;
    return 2.0 * (x_log_term(s_hat) / (2.0 * m.s0) + (t / dn) * s_hat / m.s0);
  };
  return integrate_pieces(f, cuts_up_to(T), tol).value;
}

}  // namespace kdl
