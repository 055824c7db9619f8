#include "kdl/discriminant.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "kdl/error.hpp"

namespace kdl {

namespace {

// log|f'(a)| and log|f'(a) / a^(n-2)| without forming a^n.
struct DerivativeLogs {
  double log_abs_fp;
  double log_abs_fp_over_power;
};

DerivativeLogs derivative_logs(const Coefficients& p, cplx a) {
  const int n = p.degree();
  const BalancedEval e = evaluate_balanced(p, a);
  const double base = std::log(std::abs(e.derivative));
  if (!e.reversed) return {base, base - (n - 2) * std::log(std::abs(a))};
  const double la = std::log(std::abs(a));
  return {base + (n - 1) * la, base + la};
}

double max_abs_coefficient(const Coefficients& p) {
  double m = 0.0;
  for (const cplx& c : p.values()) m = std::max(m, std::abs(c));
  return m;
}

void require_converged(const RootSet& rs, const Coefficients& p) {
  if (!rs.converged) throw Error(ErrorKind::InvalidArgument, "RootSet is not converged");
  if (static_cast<int>(rs.roots.size()) != p.degree())
    throw Error(ErrorKind::InvalidArgument, "RootSet size does not match the degree");
}

}  // namespace

double theorem_statistic(double log_abs_disc, int n) noexcept {
  const double dn = static_cast<double>(n);
  return (log_abs_disc - 2.0 * dn * std::log(dn)) / dn;
}

bool double_root_guard(const RootSet& rs, const Coefficients& p) {
  const std::vector<cplx>& z = rs.roots;
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      if (std::abs(z[i] - z[j]) <= 1e-9 * (1.0 + std::abs(z[i]))) return true;
    }
  }
  const double n = p.degree();
  const double log_threshold = std::log(1e-9 * std::pow(n, 1.5) * max_abs_coefficient(p));
  for (const cplx& a : z) {
    if (derivative_logs(p, a).log_abs_fp <= log_threshold) return true;
  }
  return false;
}

bool circle_root_guard(const RootSet& rs) {
  return std::any_of(rs.roots.begin(), rs.roots.end(),
                     [](cplx a) { return std::abs(std::abs(a) - 1.0) <= kOnCircleTolerance; });
}

double log_abs_discriminant(const Coefficients& p, const RootSet& rs) {
  require_converged(rs, p);
  if (double_root_guard(rs, p)) throw Error(ErrorKind::DoubleRoot, "polynomial has a (numerically) double root");
  const int n = p.degree();
  double total = (n - 2) * std::log(std::abs(p.leading()));
  for (const cplx& a : rs.roots) total += derivative_logs(p, a).log_abs_fp;
  return total;
}

DiscriminantBreakdown decompose(const Coefficients& p, const RootSet& rs, int quad_points) {
  require_converged(rs, p);
  const int n = p.degree();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "decompose needs n >= 2");
  if (quad_points < 16 * (n + 1)) throw Error(ErrorKind::InvalidArgument, "quad_points must be >= 16 (n + 1)");
  if (circle_root_guard(rs)) throw Error(ErrorKind::CircleRoot, "a root lies on the unit circle");
  if (double_root_guard(rs, p)) throw Error(ErrorKind::DoubleRoot, "polynomial has a (numerically) double root");

  const double dn = n;
  const double logn = std::log(dn);
  DiscriminantBreakdown b;
  b.n = n;
  double total = (n - 2) * std::log(std::abs(p.leading()));
  // Trapezoid on N nodes equals the true circle average plus
  // (1/N) sum_j log|1 - b_j^N|, b_j = a_j or 1/a_j (whichever is inside).
  const double big_n = quad_points;
  double aliasing = 0.0;
  bool collision = false;
  for (const cplx& a : rs.roots) {
    const DerivativeLogs d = derivative_logs(p, a);
    total += d.log_abs_fp;
    if (std::abs(a) < 1.0) {
      b.sum_inside += d.log_abs_fp - 1.5 * logn;
    } else {
      b.sum_outside += d.log_abs_fp_over_power - 1.5 * logn;
    }
    const cplx inner = std::abs(a) < 1.0 ? a : 1.0 / a;
    const double mod_pow = std::exp(big_n * std::log(std::abs(inner)));
    if (mod_pow > 0.0) {
      const cplx power = std::polar(mod_pow, std::fmod(big_n * std::arg(inner), 2.0 * std::numbers::pi));
      const double gap = std::abs(1.0 - power);
      if (gap < 1e-12) collision = true;
      aliasing += std::log(gap) / big_n;
    }
  }
  double log_m;
  if (collision) {
    // A root sits on a node; use Jensen's root product directly.
    log_m = std::log(std::abs(p.leading()));
    for (const cplx& a : rs.roots) log_m += std::max(0.0, std::log(std::abs(a)));
  } else {
    log_m = log_mahler_quadrature(p, quad_points) - aliasing;
  }
  b.mahler_term = (dn - 2.0) * (log_m - 0.5 * logn);
  b.log_n_term = (2.0 * dn - 1.0) * logn;
  b.total_log_abs_disc = total;
  b.theorem_statistic = theorem_statistic(total, n);
  return b;
}

ExactInteger exact_discriminant(const Coefficients& p, int degree_cap) {
  const int n = p.degree();
  if (n > degree_cap)
    throw Error(ErrorKind::OracleCap, "degree " + std::to_string(n) + " above oracle cap " + std::to_string(degree_cap));
  if (!p.is_real()) throw Error(ErrorKind::TypeError, "exact discriminant needs integer coefficients");
  std::vector<mpz_class> c(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    const double v = p[static_cast<std::size_t>(k)].real();
    if (v != std::trunc(v) || std::abs(v) > 0x1.0p53)
      throw Error(ErrorKind::TypeError, "exact discriminant needs integer coefficients");
    c[static_cast<std::size_t>(k)] = mpz_class(v);
  }

  ExactInteger out;
  if (n == 1) {
    out.decimal = "1";
    out.sign = 1;
    return out;
  }
  // Sylvester matrix of P (degree n) and P' (degree n-1), descending powers.
  const int size = 2 * n - 1;
  std::vector<std::vector<mpz_class>> m(static_cast<std::size_t>(size), std::vector<mpz_class>(static_cast<std::size_t>(size), 0));
  for (int r = 0; r < n - 1; ++r) {
    for (int k = 0; k <= n; ++k) m[r][static_cast<std::size_t>(r + k)] = c[static_cast<std::size_t>(n - k)];
  }
  for (int r = 0; r < n; ++r) {
    for (int k = 0; k <= n - 1; ++k) {
      const int power = n - 1 - k;
      m[static_cast<std::size_t>(n - 1 + r)][static_cast<std::size_t>(r + k)] =
          c[static_cast<std::size_t>(power + 1)] * (power + 1);
    }
  }

  // Bareiss: after step k every entry below/right is an exact minor.
  int sign = 1;
  mpz_class prev = 1;
  mpz_class det;
  bool singular = false;
  for (int k = 0; k < size - 1 && !singular; ++k) {
    if (m[k][k] == 0) {
      int swap = -1;
      for (int r = k + 1; r < size; ++r) {
        if (m[r][k] != 0) {
          swap = r;
          break;
        }
      }
      if (swap < 0) {
        singular = true;
        break;
      }
      std::swap(m[k], m[static_cast<std::size_t>(swap)]);
      sign = -sign;
    }
    for (int i = k + 1; i < size; ++i) {
      for (int j = k + 1; j < size; ++j) {
        mpz_class t = m[i][j] * m[k][k] - m[i][k] * m[k][j];
        mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
        m[i][j] = std::move(t);
      }
    }
    prev = m[k][k];
  }
  det = singular ? mpz_class(0) : mpz_class(m[size - 1][size - 1] * sign);

  // Delta = (-1)^{n(n-1)/2} Res(P, P') / c_n.
  mpz_class disc;
  mpz_divexact(disc.get_mpz_t(), det.get_mpz_t(), c[static_cast<std::size_t>(n)].get_mpz_t());
  if ((static_cast<long long>(n) * (n - 1) / 2) % 2 == 1) disc = -disc;

  out.decimal = disc.get_str();
  out.sign = sgn(disc);
  if (out.sign == 0) {
    out.log_abs = -std::numeric_limits<double>::infinity();
  } else {
    mpz_class a = abs(disc);
    long exp2 = 0;
    const double mant = mpz_get_d_2exp(&exp2, a.get_mpz_t());
    out.log_abs = std::log(mant) + static_cast<double>(exp2) * std::numbers::ln2;
  }
  return out;
}

double log_mahler_quadrature(const Coefficients& p, int quad_points) {
  const std::vector<cplx> v = circle_values(p, 1.0, quad_points, 0);
  double sum = 0.0;
  for (const cplx& x : v) {
    const double a = std::abs(x);
    if (a == 0.0) throw Error(ErrorKind::GridCollision, "polynomial vanishes at a quadrature node");
    sum += std::log(a);
  }
  return sum / quad_points;
}

MahlerResult mahler(const Coefficients& p, const RootSet& rs, int quad_points) {
  require_converged(rs, p);
  const int n = p.degree();
  if (quad_points < 16 * (n + 1)) throw Error(ErrorKind::InvalidArgument, "quad_points must be >= 16 (n + 1)");
  MahlerResult out;
  out.points_used = quad_points;
  out.nearest_root_distance_to_circle = std::numeric_limits<double>::infinity();
  out.log_M_roots = std::log(std::abs(p.leading()));
  const double step = 2.0 * std::numbers::pi / quad_points;
  for (const cplx& a : rs.roots) {
    const double r = std::abs(a);
    out.log_M_roots += std::max(0.0, std::log(r));
    out.nearest_root_distance_to_circle = std::min(out.nearest_root_distance_to_circle, std::abs(r - 1.0));
    if (std::abs(r - 1.0) <= 1e-14) {
      double theta = std::arg(a);
      if (theta < 0.0) theta += 2.0 * std::numbers::pi;
      const double node = std::round(theta / step) * step;
      if (std::abs(a - std::polar(1.0, node)) <= 1e-14)
        throw Error(ErrorKind::GridCollision, "a root lies on a quadrature node; shift the grid");
    }
  }
  out.log_M_quadrature = log_mahler_quadrature(p, quad_points);
  return out;
}

double jensen_point(double r, cplx alpha, int quad_points) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be positive");
  if (quad_points < 1) throw Error(ErrorKind::InvalidArgument, "quad_points must be positive");
  if (std::abs(std::abs(alpha) - r) <= 4.0 * std::numeric_limits<double>::epsilon() * r)
    throw Error(ErrorKind::SingularCase, "|alpha| = r");
  double sum = 0.0;
  for (int k = 0; k < quad_points; ++k) {
    const cplx node = std::polar(r, 2.0 * std::numbers::pi * k / quad_points);
    sum += std::log(std::abs(node - alpha));
  }
  return sum / quad_points;
}

}  // namespace kdl
