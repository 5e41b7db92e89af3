#include "singcov/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "singcov/parallel.hpp"

namespace singcov::quad {

namespace {

// Gauss-Legendre 15 with embedded Gauss-Legendre 7 estimate. Both rules are
// open, so endpoint singularities are never sampled.
constexpr int kN15 = 15;
constexpr double kX15[kN15] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272, -0.7244177313601700,
    -0.5709721726085388, -0.3941513470775634, -0.2011940939974345, 0.0,
    0.2011940939974345,  0.3941513470775634,  0.5709721726085388,  0.7244177313601700,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
constexpr double kW15[kN15] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719, 0.1395706779261543,
    0.1662692058169939, 0.1861610000155622, 0.1984314853271116, 0.2025782419255613,
    0.1984314853271116, 0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

constexpr int kN7 = 7;
constexpr double kX7[kN7] = {-0.9491079123427585, -0.7415311855993944, -0.4058451513773972,
                             0.0,                 0.4058451513773972,  0.7415311855993944,
                             0.9491079123427585};
constexpr double kW7[kN7] = {0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
                             0.4179591836734694, 0.3818300505051189, 0.2797053914892767,
                             0.1294849661688697};

struct Cell {
  double a, b;
  double value;
  double err;
};

Cell eval_cell(const std::function<double(double)>& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s15 = 0.0, s7 = 0.0;
  for (int i = 0; i < kN15; ++i) {
    const double y = f(mid + half * kX15[i]);
    if (!std::isfinite(y)) throw NonFinite("integrand not finite at interior node");
    s15 += kW15[i] * y;
  }
  for (int i = 0; i < kN7; ++i) {
    const double y = f(mid + half * kX7[i]);
    if (!std::isfinite(y)) throw NonFinite("integrand not finite at interior node");
    s7 += kW7[i] * y;
  }
  s15 *= half;
  s7 *= half;
  return {a, b, s15, std::abs(s15 - s7)};
}

// One geometric shell, positioned by its distance from the singular point.
struct Shell {
  double dist_inner;  // edge closest to the singularity
  double dist_outer;
  double value;
};

struct TailModel {
  double value = 0.0;
  double err = 0.0;
  bool divergent = false;
};

// Remainder below the innermost shell. Shells come ordered toward the
// singularity (last = innermost). Power-law integrands give geometric shell
// sums; log-damped ones have primitive ~ A/L + B/L^2 with L = log(1/dist),
// fitted on the known shell positions.
TailModel extrapolate_tail(const std::vector<Shell>& shells, bool log_corrected) {
  TailModel out;
  const std::size_t k = shells.size();
  if (k < 3) return out;
  const double s0 = shells[k - 3].value;
  const double s1 = shells[k - 2].value;
  const double s2 = shells[k - 1].value;
  const double a0 = std::abs(s0), a1 = std::abs(s1), a2 = std::abs(s2);
  if (a2 == 0.0 || a1 == 0.0 || a0 == 0.0) return out;
  const double rho1 = a1 / a0;
  const double rho2 = a2 / a1;
  if (rho1 >= 1.0 + 1e-9 && rho2 >= 1.0 + 1e-9) {
    out.divergent = true;
    return out;
  }
  if (log_corrected && shells[k - 1].dist_inner > 0.0 &&
      std::log(1.0 / shells[k - 1].dist_outer) > 1.5) {
    auto L = [](double d) { return std::log(1.0 / d); };
    const Shell& p = shells[k - 2];
    const Shell& q = shells[k - 1];
    const double d1a = 1.0 / L(p.dist_inner) - 1.0 / L(p.dist_outer);
    const double d1b = 1.0 / (L(p.dist_inner) * L(p.dist_inner)) -
                       1.0 / (L(p.dist_outer) * L(p.dist_outer));
    const double d2a = 1.0 / L(q.dist_inner) - 1.0 / L(q.dist_outer);
    const double d2b = 1.0 / (L(q.dist_inner) * L(q.dist_inner)) -
                       1.0 / (L(q.dist_outer) * L(q.dist_outer));
    const double det = d1a * d2b - d1b * d2a;
    if (std::abs(det) > 1e-300) {
      const double A = (s1 * d2b - s2 * d1b) / det;
      const double B = (s2 * d1a - s1 * d2a) / det;
      // fit orientation: S_j = Phi(d_outer) - Phi(d_inner) with
      // Phi(x) = -(A/L(x) + B/L(x)^2); the remainder below the innermost
      // shell is Phi(d_inner) - Phi(0) = -(A/L + B/L^2)
      const double Li = L(q.dist_inner);
      out.value = -(A / Li + B / (Li * Li));
      // backtest the fit on the third-from-last shell
      const Shell& r = shells[k - 3];
      const double pred =
          A * (1.0 / L(r.dist_inner) - 1.0 / L(r.dist_outer)) +
          B * (1.0 / (L(r.dist_inner) * L(r.dist_inner)) -
               1.0 / (L(r.dist_outer) * L(r.dist_outer)));
      out.err = 2.0 * std::abs(s0 - pred) + std::abs(out.value) / (Li * Li);
      return out;
    }
  }
  if (rho2 <= 0.85) {
    out.value = s2 * rho2 / (1.0 - rho2);
    out.err = std::abs(out.value) * std::min(1.0, 4.0 * std::abs(rho2 - rho1)) +
              std::abs(s2) * 1e-3;
  } else if (rho2 < 1.0) {
    // slowly varying: S_j ~ c/((j+m)(j+m+1)), m recovered from the ratio
    const double m = 2.0 * rho2 / (1.0 - rho2);
    out.value = s2 * m;
    out.err = 0.25 * std::abs(out.value);
  } else {
    out.divergent = true;
  }
  return out;
}

double sum_cell_values(const std::vector<Cell>& cells) {
  std::vector<double> vals(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) vals[i] = cells[i].value;
  return pairwise_sum(vals);
}

constexpr double kShellFloor = 1e-12;  // innermost shell edge at 1e-12 * span
constexpr int kMaxShells = 60;

}  // namespace

QuadResult integrate_1d(const std::function<double(double)>& f, double a, double b,
                        const Tolerances& tol, const Quad1dOptions& opts) {
  if (!(a < b)) throw std::invalid_argument("integrate_1d: requires a < b");
  const double span = b - a;

  std::vector<double> pts;
  pts.push_back(a);
  for (double x : opts.breakpoints)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  long cells_used = 0;
  auto charge = [&](long n) {
    cells_used += n;
    if (cells_used > tol.max_cells) throw NonConvergence("integrate_1d: cell budget exhausted");
  };

  std::vector<Cell> cells;
  double tail_value = 0.0, tail_err = 0.0;

  auto grade = [&](double lo, double hi, bool toward_left) {
    const double w = hi - lo;
    std::vector<Shell> shells;
    double frac = 1.0;
    for (int k = 0; k < kMaxShells && frac * w > kShellFloor * span; ++k) {
      const double next = frac * 0.5;
      double sa, sb;
      if (toward_left) {
        sa = lo + next * w;
        sb = lo + frac * w;
      } else {
        sa = hi - frac * w;
        sb = hi - next * w;
      }
      charge(1);
      Cell c = eval_cell(f, sa, sb);
      cells.push_back(c);
      shells.push_back({next * w, frac * w, c.value});
      frac = next;
    }
    TailModel t = extrapolate_tail(shells, opts.log_corrected);
    if (t.divergent) throw NonConvergence("integrate_1d: endpoint singularity not integrable");
    tail_value += t.value;
    tail_err += t.err;
  };

  // a single segment with singularities at both ends is split in half first
  if (pts.size() == 2 && opts.singular_left && opts.singular_right)
    pts.insert(pts.begin() + 1, 0.5 * (pts[0] + pts[1]));

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const bool first = (i == 0);
    const bool last = (i + 2 == pts.size());
    if (first && opts.singular_left) {
      grade(pts[i], pts[i + 1], true);
    } else if (last && opts.singular_right) {
      grade(pts[i], pts[i + 1], false);
    } else {
      charge(1);
      cells.push_back(eval_cell(f, pts[i], pts[i + 1]));
    }
  }

  auto worse = [](const Cell& x, const Cell& y) { return x.err < y.err; };
  std::make_heap(cells.begin(), cells.end(), worse);

  double run_value = sum_cell_values(cells) + tail_value;
  double run_err = tail_err;
  for (const auto& c : cells) run_err += c.err;

  for (;;) {
    if (run_err <= std::max(tol.abs, tol.rel * std::abs(run_value))) {
      // recompute the final sums in a fixed pairwise order
      double value = sum_cell_values(cells) + tail_value;
      double err = tail_err;
      for (const auto& c : cells) err += c.err;
      return {value, err, cells_used};
    }
    std::pop_heap(cells.begin(), cells.end(), worse);
    Cell worst = cells.back();
    cells.pop_back();
    charge(2);
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b)
      throw NonConvergence("integrate_1d: cell width underflow before tolerance met");
    Cell c1 = eval_cell(f, worst.a, mid);
    Cell c2 = eval_cell(f, mid, worst.b);
    run_value += c1.value + c2.value - worst.value;
    run_err += c1.err + c2.err - worst.err;
    cells.push_back(c1);
    std::push_heap(cells.begin(), cells.end(), worse);
    cells.push_back(c2);
    std::push_heap(cells.begin(), cells.end(), worse);
  }
}

namespace {

// Inner integral over v at fixed gap u, split exactly at the jump lines
// v = c and v = c - u so step integrands are sampled only where smooth.
struct InnerResult {
  double value;
  double err;
  long cells;
};

InnerResult inner_integral(const std::function<double(double, double)>& F, double u, double T,
                           const Quad2dOptions& opts, double rel_tol, double abs_tol,
                           long budget) {
  const double vmax = T - u;
  InnerResult out{0.0, 0.0, 0};
  if (vmax <= 0.0) return out;

  std::vector<double> vpts;
  vpts.push_back(0.0);
  vpts.push_back(vmax);
  for (double c : opts.v_breakpoints) {
    if (c > 0.0 && c < vmax) vpts.push_back(c);
    const double shifted = c - u;
    if (shifted > 0.0 && shifted < vmax) vpts.push_back(shifted);
  }
  std::sort(vpts.begin(), vpts.end());
  vpts.erase(std::unique(vpts.begin(), vpts.end()), vpts.end());

  auto g = [&](double v) {
    double y = F(v, v + u);
    if (!opts.symmetric) y += F(v + u, v);
    return y;
  };

  for (std::size_t i = 0; i + 1 < vpts.size(); ++i) {
    const double lo = vpts[i], hi = vpts[i + 1];
    double prev = 0.0;
    int panels = (opts.v_singular_left && i == 0) ? 4 : 1;
    for (int round = 0;; ++round) {
      double s = 0.0;
      const double w = (hi - lo) / panels;
      for (int p = 0; p < panels; ++p) {
        const double pa = lo + p * w, pb = pa + w;
        const double half = 0.5 * (pb - pa), mid = 0.5 * (pa + pb);
        double acc = 0.0;
        for (int q = 0; q < kN15; ++q) {
          const double y = g(mid + half * kX15[q]);
          if (!std::isfinite(y)) throw NonFinite("2-d integrand not finite off the diagonal");
          acc += kW15[q] * y;
        }
        s += acc * half;
      }
      out.cells += panels;
      if (out.cells > budget) throw NonConvergence("integrate_2d: inner budget exhausted");
      if (round > 0 && std::abs(s - prev) <= std::max(abs_tol, rel_tol * std::abs(s))) {
        out.value += s;
        out.err += std::abs(s - prev);
        break;
      }
      if (round == 6) {
        out.value += s;
        out.err += std::abs(s - prev);
        break;
      }
      prev = s;
      panels *= 2;
    }
  }
  return out;
}

}  // namespace

QuadResult integrate_2d_offdiag(const std::function<double(double, double)>& F, double T,
                                double sing_exponent, const Tolerances& tol,
                                const Quad2dOptions& opts) {
  if (!(T > 0.0)) throw std::invalid_argument("integrate_2d_offdiag: requires T > 0");
  if (sing_exponent < -2.0 || (sing_exponent == -2.0 && !opts.diag_log_corrected))
    throw InadmissibleSingularity("integrate_2d_offdiag: diagonal singularity too strong");

  long cells_used = 0;
  double inner_err_acc = 0.0;
  const double inner_rel = 0.25 * tol.rel;
  const double inner_abs = 0.25 * tol.abs / T;

  auto I = [&](double u) {
    InnerResult r =
        inner_integral(F, u, T, opts, inner_rel, inner_abs, tol.max_cells - cells_used);
    cells_used += r.cells;
    inner_err_acc = std::max(inner_err_acc, r.err);
    return r.value;
  };

  std::vector<double> ubreaks;
  for (double u : opts.u_breakpoints)
    if (u > 0.0 && u < T) ubreaks.push_back(u);
  ubreaks.push_back(T);
  std::sort(ubreaks.begin(), ubreaks.end());
  ubreaks.erase(std::unique(ubreaks.begin(), ubreaks.end()), ubreaks.end());

  // geometric shells from the first u-breakpoint down to the diagonal
  const double u1 = ubreaks.front();
  std::vector<Shell> shells;
  std::vector<double> shell_values;
  double frac = 1.0;
  for (int k = 0; k < kMaxShells && frac * u1 > kShellFloor * T; ++k) {
    const double next = 0.5 * frac;
    const double lo = next * u1, hi = frac * u1;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (lo + hi);
    double acc = 0.0;
    for (int q = 0; q < kN15; ++q) acc += kW15[q] * I(mid + half * kX15[q]);
    shells.push_back({lo, hi, acc * half});
    shell_values.push_back(acc * half);
    frac = next;
  }
  TailModel tail = extrapolate_tail(shells, opts.diag_log_corrected);
  if (tail.divergent)
    throw NonConvergence("integrate_2d_offdiag: shell sums grow toward the diagonal");

  double value = pairwise_sum(shell_values) + tail.value;
  double err = tail.err;

  // the remaining u-segments are regular; reuse the adaptive 1-d engine
  for (std::size_t i = 0; i + 1 < ubreaks.size(); ++i) {
    Tolerances seg_tol = tol;
    seg_tol.max_cells = tol.max_cells - cells_used;
    QuadResult seg = integrate_1d(I, ubreaks[i], ubreaks[i + 1], seg_tol, {});
    cells_used += seg.cells;
    value += seg.value;
    err += seg.err_estimate;
  }

  err += inner_err_acc * T;
  const double factor = opts.symmetric ? 2.0 : 1.0;
  return {factor * value, factor * err, cells_used};
}

}  // namespace singcov::quad
