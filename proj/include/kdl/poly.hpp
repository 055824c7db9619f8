#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kdl/rng.hpp"

namespace kdl {

using cplx = std::complex<double>;

enum class DistKind {
  Rademacher,
  GaussianReal,
  GaussianComplex,
  UniformIntCentered,
  UniformIntRaw,
};

/// Law of the i.i.d. coefficients of a Kac polynomial.
///
/// UniformIntCentered draws u uniform on {1..K} and returns
/// (u - (K+1)/2) / sqrt((K^2-1)/12), so it is mean zero, variance one. For odd
/// K it has an atom at 0 and is therefore not theorem-eligible.
/// UniformIntRaw is uniform on {1..K} and is not mean zero.
struct CoefficientDistribution {
  DistKind kind = DistKind::Rademacher;
  std::uint64_t k = 240;  // support size for the integer kinds

  bool is_real() const noexcept { return kind != DistKind::GaussianComplex; }
  bool is_integer() const noexcept {
    return kind == DistKind::Rademacher || kind == DistKind::UniformIntRaw;
  }
  bool mean_zero_unit_variance() const noexcept { return kind != DistKind::UniformIntRaw; }
  bool has_atom_at_zero() const noexcept {
    return kind == DistKind::UniformIntCentered && k % 2 == 1;
  }
  /// Mean zero, variance one, no atom at the origin.
  bool theorem_eligible() const noexcept {
    return mean_zero_unit_variance() && !has_atom_at_zero();
  }

  cplx draw(Stream& stream) const;

  /// Canonical name, e.g. "rademacher", "uniform-centered:240".
  std::string name() const;
  /// Inverse of name(); also accepts "gaussian" for the real Gaussian.
  static CoefficientDistribution parse(const std::string& text);

  bool operator==(const CoefficientDistribution&) const = default;
};

/// Where a coefficient vector came from.
struct Provenance {
  bool manual = true;
  std::uint64_t master_seed = 0;
  std::uint64_t trial = 0;
  std::uint64_t attempt = 0;

  bool operator==(const Provenance&) const = default;
};

/// Coefficients c_0..c_n of a degree-n polynomial, ascending order.
/// Construction enforces n >= 1 and c_n != 0.
class Coefficients {
 public:
  static Coefficients real(std::vector<double> coeffs, Provenance origin = {});
  static Coefficients complex(std::vector<cplx> coeffs, Provenance origin = {});

  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const cplx> values() const noexcept { return coeffs_; }
  cplx operator[](std::size_t k) const noexcept { return coeffs_[k]; }
  cplx leading() const noexcept { return coeffs_.back(); }
  bool is_real() const noexcept { return real_; }
  const Provenance& provenance() const noexcept { return origin_; }

  /// Real parts; only meaningful when is_real().
  std::vector<double> real_values() const;

  bool operator==(const Coefficients& other) const {
    return real_ == other.real_ && coeffs_ == other.coeffs_;
  }

 private:
  Coefficients(std::vector<cplx> coeffs, bool real, Provenance origin);

  std::vector<cplx> coeffs_;
  bool real_;
  Provenance origin_;
};

/// Samples (xi_0, ..., xi_n). A pure function of all arguments; `attempt`
/// selects an independent sub-stream used when a trial has to be resampled.
Coefficients sample_kac(const CoefficientDistribution& dist, int n, std::uint64_t master_seed,
                        std::uint64_t trial, std::uint64_t attempt = 0);

struct EvalResult {
  cplx f;
  cplx fp;
  cplx fpp;
  double scale;  // sum |c_k| |z|^k
};

/// Value and first two derivatives in one Horner pass. Above degree 512 the
/// accumulators are carried in double-double arithmetic.
EvalResult evaluate(const Coefficients& p, cplx z);

/// Plain double-precision Horner on a raw ascending coefficient span.
EvalResult evaluate_plain(std::span<const cplx> c, cplx z);

/// Evaluation that never overflows for |z| > 1.
///
/// For |z| <= 1 this is evaluate(). Otherwise it runs Horner on the reversed
/// coefficients at w = 1/z and reports value = f(z)/z^n,
/// derivative = f'(z)/z^(n-1) and scale = sum |c_k||z|^(k-n).
struct BalancedEval {
  cplx value;
  cplx derivative;
  double scale;
  bool reversed;

  double residual() const noexcept { return value == 0.0 ? 0.0 : std::abs(value) / scale; }
  /// Newton correction f(z)/f'(z).
  cplx newton_step(cplx z) const noexcept { return reversed ? z * value / derivative : value / derivative; }
  /// log |f'(z)|.
  double log_abs_derivative(int n, cplx z) const noexcept;
};

BalancedEval evaluate_balanced(const Coefficients& p, cplx z);
BalancedEval evaluate_balanced_plain(std::span<const cplx> c, cplx z);

/// z^n p(1/z): the coefficient sequence reversed. Requires c_0 != 0.
Coefficients reciprocal(const Coefficients& p);

/// f^(order)(radius * e^{2 pi i k / points}) for k = 0..points-1, computed as
/// one FFT. Requires points >= n + 1 and order in {0, 1, 2}.
std::vector<cplx> circle_values(const Coefficients& p, double radius, int points, int order);

struct CircleExtremes {
  double max;
  double min;
  double argmin;  // angle in [0, 2 pi)
};

/// Grid approximation of max/min of |f^(order)| on the circle |z| = radius.
/// Not a certified extremum. Requires grid_points >= 16 (n + 1).
CircleExtremes circle_extremes(const Coefficients& p, double radius, int grid_points, int order);

}  // namespace kdl
