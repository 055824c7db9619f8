#include "kdl/roots.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kdl/error.hpp"

namespace kdl {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// f/f' at z for the Aberth sweep: plain double Horner, reversed for |z| > 1.
cplx newton_ratio(std::span<const cplx> c, cplx z) {
  const std::size_t m = c.size();
  const int n = static_cast<int>(m) - 1;
  if (std::norm(z) <= 1.0) {
    cplx f = c[m - 1], fp = 0.0;
    for (std::size_t i = m - 1; i-- > 0;) {
      fp = fp * z + f;
      f = f * z + c[i];
    }
    return f / fp;
  }
  const cplx w = 1.0 / z;
  cplx r = c[0], rp = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    rp = rp * w + r;
    r = r * w + c[i];
  }
  return z * r / (static_cast<double>(n) * r - w * rp);
}

// Initial radius: geometric mean of root moduli of the part without zero roots.
double initial_radius(std::span<const cplx> c) {
  const int n = static_cast<int>(c.size()) - 1;
  int low = 0;
  while (low < n && c[static_cast<std::size_t>(low)] == 0.0) ++low;
  if (low == n) return 1.0;
  const double ratio = std::abs(c[static_cast<std::size_t>(low)]) / std::abs(c[static_cast<std::size_t>(n)]);
  const double r = std::pow(ratio, 1.0 / (n - low));
  return (std::isfinite(r) && r > 0.0) ? r : 1.0;
}

std::vector<cplx> initial_guesses(std::span<const cplx> c) {
  const int n = static_cast<int>(c.size()) - 1;
  const double r = initial_radius(c);
  std::vector<cplx> z(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    // Quarter-step offset keeps guesses off the real axis; the small
    // deterministic jitter breaks residual symmetries of the circle.
    const double jitter = 0.1 * std::sin(1.0 + 7.0 * k);
    const double theta = 2.0 * std::numbers::pi * (k + 0.25 + jitter) / n;
    z[static_cast<std::size_t>(k)] = std::polar(r, theta);
  }
  return z;
}

// Gauss-Seidel Ehrlich-Aberth. Returns number of sweeps used; `done` is true
// when every approximation stopped moving.
int aberth(std::span<const cplx> c, std::vector<cplx>& z, int max_iter, bool& done) {
  const std::size_t n = z.size();
  std::vector<char> frozen(n, 0);
  std::size_t active = n;
  int sweep = 0;
  while (sweep < max_iter && active > 0) {
    ++sweep;
    for (std::size_t i = 0; i < n; ++i) {
      if (frozen[i]) continue;
      const cplx zi = z[i];
      const cplx ratio = newton_ratio(c, zi);
      if (!std::isfinite(ratio.real()) || !std::isfinite(ratio.imag())) {
        // Exact zero of f' (or of f): nudge and retry next sweep.
        z[i] = zi + cplx(1e-8, 1e-8) * (1.0 + std::abs(zi));
        continue;
      }
      cplx sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const cplx d = zi - z[j];
        sum += std::conj(d) / std::norm(d);
      }
      const cplx step = ratio / (1.0 - ratio * sum);
      z[i] = zi - step;
      if (std::abs(step) <= 4.0 * kEps * std::max(std::abs(z[i]), kEps)) {
        frozen[i] = 1;
        --active;
      }
    }
  }
  done = active == 0;
  return sweep;
}

void newton_polish(const Coefficients& p, cplx& z, int steps) {
  BalancedEval e = evaluate_balanced(p, z);
  double best = e.residual();
  for (int s = 0; s < steps && best > 0.0; ++s) {
    const cplx step = e.newton_step(z);
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return;
    const cplx candidate = z - step;
    const BalancedEval ec = evaluate_balanced(p, candidate);
    if (!(ec.residual() < best)) return;
    z = candidate;
    e = ec;
    best = ec.residual();
  }
}

// Snap near-real roots, pair the rest into exact conjugates, re-polish.
void symmetrize(const Coefficients& p, std::vector<cplx>& z) {
  std::vector<std::size_t> upper, lower;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (std::abs(z[i].imag()) <= kRealSnapTolerance * (1.0 + std::abs(z[i]))) {
      z[i] = z[i].real();
      newton_polish(p, z[i], 3);  // stays real: real coefficients, real z
    } else if (z[i].imag() > 0.0) {
      upper.push_back(i);
    } else {
      lower.push_back(i);
    }
  }
  std::vector<char> taken(lower.size(), 0);
  for (std::size_t u : upper) {
    std::size_t best = lower.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lower.size(); ++k) {
      if (taken[k]) continue;
      const double d = std::abs(z[u] - std::conj(z[lower[k]]));
      if (d < best_dist) {
        best_dist = d;
        best = k;
      }
    }
    if (best == lower.size() || best_dist > 1e-6 * (1.0 + std::abs(z[u]))) continue;
    taken[best] = 1;
    cplx mid = 0.5 * (z[u] + std::conj(z[lower[best]]));
    newton_polish(p, mid, 3);
    z[u] = mid;
    z[lower[best]] = std::conj(mid);
  }
}

// Parlett-Reinsch diagonal balancing (radix 2).
template <typename Matrix>
void balance(Matrix& a) {
  const Eigen::Index n = a.rows();
  bool changed = true;
  while (changed) {
    changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      double col = 0.0, row = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        col += std::abs(a(j, i));
        row += std::abs(a(i, j));
      }
      if (col == 0.0 || row == 0.0) continue;
      double f = 1.0;
      const double s = col + row;
      while (col < row / 2.0) {
        col *= 2.0;
        row /= 2.0;
        f *= 2.0;
      }
      while (col >= row * 2.0) {
        col /= 2.0;
        row *= 2.0;
        f /= 2.0;
      }
      if ((col + row) < 0.95 * s) {
        changed = true;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

std::vector<cplx> companion_roots(const Coefficients& p) {
  const int n = p.degree();
  const cplx lead = p.leading();
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(n));
  if (p.is_real()) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) a(0, j) = -(p[static_cast<std::size_t>(n - 1 - j)] / lead).real();
    for (int i = 1; i < n; ++i) a(i, i - 1) = 1.0;
    balance(a);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(solver.eigenvalues()(i));
  } else {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 0; j < n; ++j) a(0, j) = -p[static_cast<std::size_t>(n - 1 - j)] / lead;
    for (int i = 1; i < n; ++i) a(i, i - 1) = 1.0;
    balance(a);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(a, false);
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(solver.eigenvalues()(i));
  }
  return out;
}

// A double root comes out of the iteration as a pair split by about
// sqrt(eps). When the midpoint is itself a root to working precision the
// pair is replaced by two copies of it.
void merge_double_roots(const Coefficients& p, std::vector<cplx>& z) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      if (z[i] == z[j] || std::abs(z[i] - z[j]) > 1e-7 * (1.0 + std::abs(z[i]))) continue;
      const cplx mid = 0.5 * (z[i] + z[j]);
      if (evaluate_balanced(p, mid).residual() <= 1e-14) z[i] = z[j] = mid;
    }
  }
}

RootSet finish(const Coefficients& p, std::vector<cplx> z, int iterations, const RootOptions& options,
               bool fallback) {
  for (cplx& root : z) newton_polish(p, root, 4);
  if (p.is_real()) symmetrize(p, z);
  merge_double_roots(p, z);
  RootSet rs;
  rs.iterations = iterations;
  rs.used_fallback = fallback;
  rs.residuals.reserve(z.size());
  for (const cplx& root : z) {
    const double r = evaluate_balanced(p, root).residual();
    rs.residuals.push_back(std::isfinite(r) ? r : std::numeric_limits<double>::infinity());
  }
  rs.roots = std::move(z);
  rs.converged = rs.max_residual() <= options.tol;
  return rs;
}

}  // namespace

double RootSet::max_residual() const noexcept {
  double worst = 0.0;
  for (double r : residuals) worst = std::max(worst, r);
  return worst;
}

RootSet find_roots(const Coefficients& p, const RootOptions& options) {
  const int n = p.degree();
  if (n == 1) {
    std::vector<cplx> z{-p[0] / p[1]};
    if (p.is_real()) z[0] = z[0].real();
    return finish(p, std::move(z), 0, options, false);
  }
  std::vector<cplx> z = initial_guesses(p.values());
  bool done = false;
  const int sweeps = aberth(p.values(), z, options.max_iter, done);
  RootSet rs = finish(p, std::move(z), sweeps, options, false);
  if (rs.converged) return rs;

  RootSet fb = finish(p, companion_roots(p), sweeps, options, true);
  if (fb.converged) return fb;
  const double worst = std::min(rs.max_residual(), fb.max_residual());
  throw NonConvergenceError("degree " + std::to_string(n) + " root solve failed, worst residual " +
                                std::to_string(worst),
                            worst);
}

RootStats root_stats(const RootSet& rs, int n, const RootStatsOptions& options) {
  if (!rs.converged) throw Error(ErrorKind::InvalidArgument, "root_stats needs a converged RootSet");
  return root_stats(rs.roots, n, options);
}

RootStats root_stats(const std::vector<cplx>& roots, int n, const RootStatsOptions& options) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  RootStats st;
  for (const auto& [inner, outer] : options.annuli) {
    int count = 0;
    for (const cplx& a : roots) {
      const double r = std::abs(a);
      if (r >= inner && r <= outer) ++count;
    }
    st.annulus_counts.push_back({inner, outer, count});
  }

  const double logn = std::log(static_cast<double>(n));
  const double width = options.sector_annulus_width > 0.0 ? options.sector_annulus_width : logn * logn * logn / n;
  const double half_width = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> angles;
  angles.reserve(roots.size());
  for (const cplx& a : roots) {
    const double r = std::abs(a);
    if (std::abs(r - 1.0) <= kOnCircleTolerance) {
      ++st.on_circle_count;
    } else if (r < 1.0) {
      ++st.inside_count;
    } else {
      ++st.outside_count;
    }
    const double theta = std::arg(a);  // (-pi, pi]
    if (r >= 1.0 - width && r <= 1.0) {
      if (std::abs(theta) <= half_width || std::numbers::pi - std::abs(theta) <= half_width) ++st.sector_count_S;
    }
    double t = theta < 0.0 ? theta + 2.0 * std::numbers::pi : theta;
    if (t >= 2.0 * std::numbers::pi) t = 0.0;
    angles.push_back(t);
  }

  // Dyadic arcs [2 pi j / 2^k, 2 pi (j+1) / 2^k), k <= ceil(log2 n).
  std::sort(angles.begin(), angles.end());
  const int kmax = static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max(n, 1)))));
  const double total = static_cast<double>(roots.size());
  for (int k = 0; k <= kmax; ++k) {
    const std::size_t arcs = std::size_t{1} << k;
    const double expected = total / static_cast<double>(arcs);
    for (std::size_t j = 0; j < arcs; ++j) {
      const double lo = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(arcs);
      const double hi = 2.0 * std::numbers::pi * static_cast<double>(j + 1) / static_cast<double>(arcs);
      const auto first = std::lower_bound(angles.begin(), angles.end(), lo);
      const auto last = std::lower_bound(angles.begin(), angles.end(), hi);
      const double count = static_cast<double>(last - first);
      st.discrepancy = std::max(st.discrepancy, std::abs(count - expected));
    }
  }
  return st;
}

double erdos_turan_bound(const Coefficients& p, double max_on_circle) {
  const double ends = std::sqrt(std::abs(p[0]) * std::abs(p.leading()));
  if (ends == 0.0) throw Error(ErrorKind::InvalidBound, "needs c_0 != 0 and c_n != 0");
  const double ratio = max_on_circle / ends;
  if (!(ratio >= 1.0)) throw Error(ErrorKind::InvalidBound, "max on circle below sqrt(|c_0 c_n|)");
  const double n = p.degree();
  return 2.0 / std::numbers::pi * std::sqrt(n) + 16.0 * std::sqrt(n * std::log(ratio));
}

}  // namespace kdl
