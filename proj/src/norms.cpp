#include "singcov/norms.hpp"

#include <algorithm>
#include <cmath>

namespace singcov::norms {

namespace {

void require_densities(const models::CovModel& model, const char* op) {
  if (!model.capabilities().has_r_inf_density || !model.capabilities().has_mu_density)
    throw std::invalid_argument(std::string(op) +
                                ": model family exposes no closed-form densities");
}

// log-damped singularities cap the attainable accuracy: the below-shell tail
// is a fitted model with error ~ tail/log^2, so tighter targets would only
// exhaust the cell budget
quad::Tolerances effective_tol(const models::CovModel& model, const NormOptions& opts) {
  quad::Tolerances tol = opts.tol;
  if (model.mu_log_corrected()) {
    tol.rel = std::max(tol.rel, 2e-4);
    tol.abs = std::max(tol.abs, 1e-8);
  }
  return tol;
}

std::vector<double> merged_breakpoints(const PiecewiseFn& f, const PiecewiseFn& g, double T) {
  std::vector<double> b;
  for (double x : f.breakpoints())
    if (x > 0.0 && x < T) b.push_back(x);
  for (double x : g.breakpoints())
    if (x > 0.0 && x < T) b.push_back(x);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

// pairwise gaps between jump/kink locations: the (u,v)-topology of the strip
// integrand changes exactly there
std::vector<double> gap_breakpoints(const std::vector<double>& vbreaks, double T,
                                    const models::CovModel& model) {
  std::vector<double> pts = vbreaks;
  pts.push_back(0.0);
  pts.push_back(T);
  std::vector<double> gaps;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = std::abs(pts[i] - pts[j]);
      if (d > 0.0 && d < T) gaps.push_back(d);
    }
  for (double d : model.density_breakpoints())
    if (d > 0.0 && d < T) gaps.push_back(d);
  std::sort(gaps.begin(), gaps.end());
  gaps.erase(std::unique(gaps.begin(), gaps.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             gaps.end());
  return gaps;
}

double boundary_term(const PiecewiseFn& f, const PiecewiseFn& g, const models::CovModel& model,
                     const NormOptions& opts, bool absolute) {
  const double T = model.horizon();
  quad::Quad1dOptions qopts;
  qopts.breakpoints = merged_breakpoints(f, g, T);
  for (double d : model.density_breakpoints()) {
    if (d > 0.0 && d < T) qopts.breakpoints.push_back(d);
    const double mirrored = T - d;
    if (mirrored > 0.0 && mirrored < T) qopts.breakpoints.push_back(mirrored);
  }
  qopts.singular_left = qopts.singular_right = model.r_inf_singular_edges();
  qopts.log_corrected = model.mu_log_corrected();
  auto integrand = [&](double s) {
    const double w = model.r_inf_density(s);
    return f(s) * g(s) * (absolute ? std::abs(w) : w);
  };
  return quad::integrate_1d(integrand, 0.0, T, effective_tol(model, opts), qopts).value;
}

// int int over the off-diagonal square of (f(s1)-f(s2))(g(s1)-g(s2)) dmu
double double_term(const PiecewiseFn& f, const PiecewiseFn& g, const models::CovModel& model,
                   const NormOptions& opts, bool absolute) {
  const double T = model.horizon();
  const auto vbreaks = merged_breakpoints(f, g, T);

  quad::Quad2dOptions qopts;
  qopts.symmetric = true;
  qopts.v_breakpoints = vbreaks;
  qopts.u_breakpoints = gap_breakpoints(vbreaks, T, model);
  qopts.diag_log_corrected = model.mu_log_corrected();
  qopts.v_singular_left =
      model.family() == models::Family::BifBm && model.hurst() < 0.5;

  const bool smooth_pair = !f.has_jumps() && !g.has_jumps();
  const double sing = model.mu_gap_exponent() + (smooth_pair ? 2.0 : 0.0);

  auto F = [&](double s1, double s2) {
    const double d = (f(s1) - f(s2)) * (g(s1) - g(s2));
    const double w = model.mu_offdiag_density(s1, s2);
    return d * (absolute ? std::abs(w) : w);
  };
  double acc =
      quad::integrate_2d_offdiag(F, T, sing, effective_tol(model, opts), qopts).value;

  // atomic lines |s1-s2| = gap of mu (jumps of Q' in the gap profile)
  for (auto [gap, mass] : model.mu_gap_atoms()) {
    if (!(gap > 0.0 && gap < T)) continue;
    const double m = absolute ? std::abs(mass) : mass;
    quad::Quad1dOptions lopts;
    for (double c : vbreaks) {
      if (c > 0.0 && c < T - gap) lopts.breakpoints.push_back(c);
      const double shifted = c - gap;
      if (shifted > 0.0 && shifted < T - gap) lopts.breakpoints.push_back(shifted);
    }
    auto line = [&](double v) { return (f(v) - f(v + gap)) * (g(v) - g(v + gap)); };
    acc += 2.0 * m * quad::integrate_1d(line, 0.0, T - gap, opts.tol, lopts).value;
  }
  return acc;
}

}  // namespace

double inner_H(const PiecewiseFn& f, const PiecewiseFn& g, const models::CovModel& model,
               const NormOptions& opts) {
  require_densities(model, "inner_H");
  return boundary_term(f, g, model, opts, false) - 0.5 * double_term(f, g, model, opts, false);
}

double inner_R(const PiecewiseFn& f, const PiecewiseFn& g, const models::CovModel& model,
               const NormOptions& opts) {
  require_densities(model, "inner_R");
  return boundary_term(f, g, model, opts, true) + 0.5 * double_term(f, g, model, opts, true);
}

double norm_H_sq(const PiecewiseFn& f, const models::CovModel& model, const NormOptions& opts) {
  return inner_H(f, f, model, opts);
}

double norm_R_sq(const PiecewiseFn& f, const models::CovModel& model, const NormOptions& opts) {
  return inner_R(f, f, model, opts);
}

double norm_2R_sq_tensor(const PiecewiseFn& f1, const PiecewiseFn& f2, const PiecewiseFn& g1,
                         const PiecewiseFn& g2, const models::CovModel& model,
                         const NormOptions& opts) {
  return inner_R(f1, g1, model, opts) * inner_R(f2, g2, model, opts);
}

double norm_2R_sq_planar(const PlanarStepFn& h, const models::CovModel& model) {
  const auto& atoms = h.atoms();
  double acc = 0.0;
  for (const auto& a : atoms)
    for (const auto& b : atoms)
      acc += a.mass * b.mass * model.cov(a.t1, b.t1) * model.cov(a.t2, b.t2);
  return acc;
}

bool norms_formal(const models::CovModel& model) {
  const auto d = model.expected_assumption_d();
  return !(d.has_value() && *d);
}

}  // namespace singcov::norms
