#include "kdl/poly.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "kdl/error.hpp"

namespace kdl {

namespace {

// Double-double helpers for the compensated Horner path.
struct dd {
  double hi = 0.0;
  double lo = 0.0;
};

inline dd two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

inline dd quick_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline dd add(dd x, dd y) {
  dd s = two_sum(x.hi, y.hi);
  s.lo += x.lo + y.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline dd mul(dd x, double y) {
  const double p = x.hi * y;
  const double e = std::fma(x.hi, y, -p) + x.lo * y;
  return quick_two_sum(p, e);
}

inline dd neg(dd x) { return {-x.hi, -x.lo}; }

struct cdd {
  dd re;
  dd im;
};

inline cdd mul(const cdd& x, cplx z) {
  return {add(mul(x.re, z.real()), neg(mul(x.im, z.imag()))),
          add(mul(x.re, z.imag()), mul(x.im, z.real()))};
}

inline cdd add(const cdd& x, const cdd& y) { return {add(x.re, y.re), add(x.im, y.im)}; }
inline cdd add(const cdd& x, cplx c) { return {add(x.re, dd{c.real(), 0.0}), add(x.im, dd{c.imag(), 0.0})}; }
inline cplx collapse(const cdd& x) { return {x.re.hi + x.re.lo, x.im.hi + x.im.lo}; }

constexpr int kCompensatedAbove = 512;

// Horner over c[0..n] in descending order (c[n] first) or, with `reversed`,
// over the reversed sequence (c[0] first) which evaluates z^n p(1/z).
template <bool Reversed>
EvalResult horner_plain(std::span<const cplx> c, cplx z) {
  const std::size_t m = c.size();
  auto at = [&](std::size_t i) { return Reversed ? c[i] : c[m - 1 - i]; };
  cplx f = at(0), fp = 0.0, fpp = 0.0;
  const double az = std::abs(z);
  double scale = std::abs(at(0));
  for (std::size_t i = 1; i < m; ++i) {
    fpp = fpp * z + fp;
    fp = fp * z + f;
    f = f * z + at(i);
    scale = scale * az + std::abs(at(i));
  }
  return {f, fp, 2.0 * fpp, scale};
}

template <bool Reversed>
EvalResult horner_compensated(std::span<const cplx> c, cplx z) {
  const std::size_t m = c.size();
  auto at = [&](std::size_t i) { return Reversed ? c[i] : c[m - 1 - i]; };
  cdd f{{at(0).real(), 0.0}, {at(0).imag(), 0.0}};
  cdd fp{}, fpp{};
  const double az = std::abs(z);
  double scale = std::abs(at(0));
  for (std::size_t i = 1; i < m; ++i) {
    fpp = add(mul(fpp, z), fp);
    fp = add(mul(fp, z), f);
    f = add(mul(f, z), at(i));
    scale = scale * az + std::abs(at(i));
  }
  return {collapse(f), collapse(fp), 2.0 * collapse(fpp), scale};
}

template <bool Reversed>
EvalResult horner(std::span<const cplx> c, cplx z) {
  if (static_cast<int>(c.size()) - 1 > kCompensatedAbove) return horner_compensated<Reversed>(c, z);
  return horner_plain<Reversed>(c, z);
}

template <bool Compensated>
BalancedEval balanced(std::span<const cplx> c, cplx z) {
  if (std::norm(z) <= 1.0) {
    const EvalResult e = Compensated ? horner<false>(c, z) : horner_plain<false>(c, z);
    return {e.f, e.fp, e.scale, false};
  }
  const int n = static_cast<int>(c.size()) - 1;
  const cplx w = 1.0 / z;
  const EvalResult r = Compensated ? horner<true>(c, w) : horner_plain<true>(c, w);
  // f(z) = z^n r(w),  f'(z) = z^(n-1) (n r(w) - w r'(w)).
  return {r.f, static_cast<double>(n) * r.f - w * r.fp, r.scale, true};
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

cplx CoefficientDistribution::draw(Stream& stream) const {
  switch (kind) {
    case DistKind::Rademacher:
      return stream.coin() ? 1.0 : -1.0;
    case DistKind::GaussianReal: {
      double a, b;
      stream.normal_pair(a, b);
      return a;
    }
    case DistKind::GaussianComplex: {
      double a, b;
      stream.normal_pair(a, b);
      return cplx(a, b) * std::numbers::sqrt2 * 0.5;
    }
    case DistKind::UniformIntCentered: {
      const double kk = static_cast<double>(k);
      const double u = static_cast<double>(stream.uniform_int(k));
      return (u - 0.5 * (kk + 1.0)) / std::sqrt((kk * kk - 1.0) / 12.0);
    }
    case DistKind::UniformIntRaw:
      return static_cast<double>(stream.uniform_int(k));
  }
  return 0.0;
}

std::string CoefficientDistribution::name() const {
  switch (kind) {
    case DistKind::Rademacher: return "rademacher";
    case DistKind::GaussianReal: return "gaussian-real";
    case DistKind::GaussianComplex: return "gaussian-complex";
    case DistKind::UniformIntCentered: return "uniform-centered:" + std::to_string(k);
    case DistKind::UniformIntRaw: return "uniform-raw:" + std::to_string(k);
  }
  return "?";
}

CoefficientDistribution CoefficientDistribution::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  CoefficientDistribution d;
  if (head == "rademacher") {
    d.kind = DistKind::Rademacher;
  } else if (head == "gaussian" || head == "gaussian-real") {
    d.kind = DistKind::GaussianReal;
  } else if (head == "gaussian-complex") {
    d.kind = DistKind::GaussianComplex;
  } else if (head == "uniform-centered") {
    d.kind = DistKind::UniformIntCentered;
  } else if (head == "uniform-raw") {
    d.kind = DistKind::UniformIntRaw;
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown distribution '" + text + "'");
  }
  const bool integer_kind = d.kind == DistKind::UniformIntCentered || d.kind == DistKind::UniformIntRaw;
  if (colon != std::string::npos) {
    if (!integer_kind) throw Error(ErrorKind::InvalidArgument, "distribution '" + head + "' takes no parameter");
    try {
      std::size_t used = 0;
      const long long k = std::stoll(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1 || k < 2) throw std::invalid_argument("k");
      d.k = static_cast<std::uint64_t>(k);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "bad support size in '" + text + "' (need integer K >= 2)");
    }
  }
  return d;
}

Coefficients::Coefficients(std::vector<cplx> coeffs, bool real, Provenance origin)
    : coeffs_(std::move(coeffs)), real_(real), origin_(origin) {
  if (coeffs_.size() < 2) throw Error(ErrorKind::DegenerateDegree, "need degree n >= 1");
  if (coeffs_.back() == 0.0) throw Error(ErrorKind::DegenerateDegree, "leading coefficient is zero");
  for (const cplx& c : coeffs_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw Error(ErrorKind::InvalidArgument, "non-finite coefficient");
  }
}

Coefficients Coefficients::real(std::vector<double> coeffs, Provenance origin) {
  return Coefficients(std::vector<cplx>(coeffs.begin(), coeffs.end()), true, origin);
}

Coefficients Coefficients::complex(std::vector<cplx> coeffs, Provenance origin) {
  const bool all_real = std::all_of(coeffs.begin(), coeffs.end(), [](cplx c) { return c.imag() == 0.0; });
  return Coefficients(std::move(coeffs), all_real, origin);
}

std::vector<double> Coefficients::real_values() const {
  std::vector<double> out(coeffs_.size());
  std::transform(coeffs_.begin(), coeffs_.end(), out.begin(), [](cplx c) { return c.real(); });
  return out;
}

Coefficients sample_kac(const CoefficientDistribution& dist, int n, std::uint64_t master_seed,
                        std::uint64_t trial, std::uint64_t attempt) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "degree must be >= 1");
  Stream stream(derive_key({master_seed, static_cast<std::uint64_t>(dist.kind), dist.k,
                            static_cast<std::uint64_t>(n), trial, attempt}));
  std::vector<cplx> c(static_cast<std::size_t>(n) + 1);
  for (cplx& x : c) x = dist.draw(stream);
  Provenance origin{false, master_seed, trial, attempt};
  if (dist.is_real()) {
    std::vector<double> re(c.size());
    std::transform(c.begin(), c.end(), re.begin(), [](cplx v) { return v.real(); });
    return Coefficients::real(std::move(re), origin);
  }
  return Coefficients::complex(std::move(c), origin);
}

EvalResult evaluate(const Coefficients& p, cplx z) { return horner<false>(p.values(), z); }

EvalResult evaluate_plain(std::span<const cplx> c, cplx z) { return horner_plain<false>(c, z); }

double BalancedEval::log_abs_derivative(int n, cplx z) const noexcept {
  const double base = std::log(std::abs(derivative));
  return reversed ? base + (n - 1) * std::log(std::abs(z)) : base;
}

BalancedEval evaluate_balanced(const Coefficients& p, cplx z) { return balanced<true>(p.values(), z); }

BalancedEval evaluate_balanced_plain(std::span<const cplx> c, cplx z) { return balanced<false>(c, z); }

Coefficients reciprocal(const Coefficients& p) {
  if (p[0] == 0.0) throw Error(ErrorKind::DegenerateReciprocal, "c_0 = 0, reciprocal would drop degree");
  std::vector<cplx> c(p.values().rbegin(), p.values().rend());
  if (p.is_real()) {
    std::vector<double> re(c.size());
    std::transform(c.begin(), c.end(), re.begin(), [](cplx v) { return v.real(); });
    return Coefficients::real(std::move(re), p.provenance());
  }
  return Coefficients::complex(std::move(c), p.provenance());
}

std::vector<cplx> circle_values(const Coefficients& p, double radius, int points, int order) {
  const int n = p.degree();
  if (points < n + 1) throw Error(ErrorKind::InvalidArgument, "circle grid needs at least n+1 points");
  if (order < 0 || order > 2) throw Error(ErrorKind::InvalidArgument, "derivative order must be 0, 1 or 2");
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be positive");

  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(points)));
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(points, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (int k = 0; k < points; ++k) buf[k][0] = buf[k][1] = 0.0;
  double rpow = 1.0;
  for (int j = 0; j <= n; ++j) {
    double weight = rpow;
    if (order >= 1) weight *= j;
    if (order == 2) weight *= (j - 1);
    const cplx v = p[static_cast<std::size_t>(j)] * weight;
    buf[j][0] = v.real();
    buf[j][1] = v.imag();
    rpow *= radius;
  }
  fftw_execute(plan);

  std::vector<cplx> out(static_cast<std::size_t>(points));
  const double step = 2.0 * std::numbers::pi / points;
  for (int k = 0; k < points; ++k) {
    cplx v(buf[k][0], buf[k][1]);
    if (order > 0) v /= std::pow(std::polar(radius, step * k), order);
    out[static_cast<std::size_t>(k)] = v;
  }
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return out;
}

CircleExtremes circle_extremes(const Coefficients& p, double radius, int grid_points, int order) {
  if (grid_points < 16 * (p.degree() + 1))
    throw Error(ErrorKind::InvalidArgument, "grid_points must be >= 16 (n + 1)");
  const std::vector<cplx> v = circle_values(p, radius, grid_points, order);
  CircleExtremes out{0.0, std::abs(v[0]), 0.0};
  std::size_t argmin = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double a = std::abs(v[k]);
    out.max = std::max(out.max, a);
    if (a < out.min) {
      out.min = a;
      argmin = k;
    }
  }
  out.argmin = 2.0 * std::numbers::pi * static_cast<double>(argmin) / grid_points;
  return out;
}

}  // namespace kdl
