#include "singcov/integrals.hpp"

#include <cmath>
#include <stdexcept>

#include "singcov/quadrature.hpp"

namespace singcov::integrals {

namespace {

double path_at(std::span<const double> path, const sim::SimGrid& grid, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= grid.T) return path[grid.n];
  const double x = t / grid.dt();
  const int i = static_cast<int>(x);
  const double w = x - i;
  return path[i] * (1.0 - w) + path[i + 1] * w;
}

int grid_index(const sim::SimGrid& grid, double t, const char* what) {
  const double x = t / grid.dt();
  const int i = static_cast<int>(std::lround(x));
  if (std::abs(x - i) > 1e-9 || i < 0 || i > grid.n)
    throw std::invalid_argument(std::string(what) + ": time must be a grid point");
  return i;
}

int eps_steps(const sim::SimGrid& grid, double eps) {
  const double q = eps / grid.dt();
  const int qi = static_cast<int>(std::lround(q));
  if (qi < 1 || std::abs(q - qi) > 1e-9)
    throw std::invalid_argument("eps must be a positive grid multiple of the spacing");
  return qi;
}

// clamped path value by index: 0 below the grid, X_T above
double at(std::span<const double> path, int n, int j) {
  if (j < 0) return 0.0;
  if (j > n) return path[n];
  return path[j];
}

}  // namespace

double paley_wiener(std::span<const double> path, const sim::SimGrid& grid,
                    const norms::PiecewiseFn& f) {
  double acc = f.tail_value() * path[grid.n];
  for (const auto& atom : f.jump_atoms()) acc -= path_at(path, grid, atom.t) * atom.mass;
  if (f.kind() == norms::PiecewiseFn::Kind::Linear) {
    const double h = grid.dt();
    for (int i = 0; i < grid.n; ++i) {
      const double s = f.slope(grid.time(i) + 0.5 * h);
      if (s != 0.0) acc -= 0.5 * (path[i] + path[i + 1]) * s * h;
    }
  }
  return acc;
}

double reg_integral(std::span<const double> Y, std::span<const double> X,
                    const sim::SimGrid& grid, double eps, RegKind kind, double t) {
  if (Y.size() != X.size() || X.size() != static_cast<std::size_t>(grid.n) + 1)
    throw std::invalid_argument("reg_integral: paths must live on the grid");
  const int q = eps_steps(grid, eps);
  const int it = grid_index(grid, t, "reg_integral");
  const double h = grid.dt();
  const int n = grid.n;

  double acc = 0.0;
  switch (kind) {
    case RegKind::Forward:
      for (int i = 0; i < it; ++i) acc += Y[i] * (at(X, n, i + q) - at(X, n, i));
      return acc * h / eps;
    case RegKind::Backward:
      for (int i = 0; i < it; ++i) acc += Y[i] * (at(X, n, i) - at(X, n, i - q));
      return acc * h / eps;
    case RegKind::Symmetric:
      for (int i = 0; i < it; ++i) acc += Y[i] * (at(X, n, i + q) - at(X, n, i - q));
      return acc * h / (2.0 * eps);
  }
  return 0.0;
}

double skorohod_estimate(std::span<const double> path, const sim::SimGrid& grid,
                         const std::function<double(double)>& g,
                         const std::function<double(double)>& gprime,
                         const models::CovModel& model, double eps, double t) {
  std::vector<double> Y(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) Y[i] = g(path[i]);
  const double sym = reg_integral(Y, path, grid, eps, RegKind::Symmetric, t);

  const int it = grid_index(grid, t, "skorohod_estimate");
  double trace = 0.0;
  double gamma_prev = model.gamma(0.0);
  for (int i = 0; i < it; ++i) {
    const double gamma_next = model.gamma(grid.time(i + 1));
    trace += gprime(path[i]) * (gamma_next - gamma_prev);
    gamma_prev = gamma_next;
  }
  return sym - 0.5 * trace;
}

double quadratic_variation_eps(std::span<const double> path, const sim::SimGrid& grid,
                               double eps, double t) {
  const int q = eps_steps(grid, eps);
  const int it = grid_index(grid, t, "quadratic_variation_eps");
  const int n = grid.n;
  double acc = 0.0;
  for (int i = 0; i < it; ++i) {
    const double d = at(path, n, i + q) - path[i];
    acc += d * d;
  }
  return acc * grid.dt() / eps;
}

double ll1_statistic(std::span<const double> path, const sim::SimGrid& grid, double eps,
                     double q_eps) {
  const int q = eps_steps(grid, eps);
  if (q_eps <= 0.0) throw std::invalid_argument("ll1_statistic: Q(eps) must be positive");
  double acc = 0.0;
  for (int i = q; i < grid.n; ++i) {
    const double d = path[i] - path[i - q];
    acc += d * d;
  }
  return acc * grid.dt() / q_eps;
}

double stratonovich_midpoint(std::span<const double> path, const sim::SimGrid& grid,
                             const std::function<double(double)>& fprime, double eps, double t) {
  const int q = eps_steps(grid, eps);
  const int it = grid_index(grid, t, "stratonovich_midpoint");
  double acc = 0.0;
  for (int i = 0; i < it; i += q) {
    const int j = std::min(i + q, it);
    acc += fprime(0.5 * (path[i] + path[j])) * (path[j] - path[i]);
  }
  return acc;
}

double hermite(int n, double x) {
  if (n < 0) throw std::invalid_argument("hermite: order must be nonnegative");
  double hm1 = 0.0;  // H_{-1}
  double h0 = 1.0;   // H_0
  for (int k = 1; k <= n; ++k) {
    const double hk = (x * h0 - hm1) / k;
    hm1 = h0;
    h0 = hk;
  }
  return h0;
}

double trace_F_eps(const models::CovModel& model, double eps, double tau) {
  if (tau == 0.0) return 0.0;
  if (!(eps > 0.0 && eps < tau)) throw std::invalid_argument("trace_F_eps: requires 0 < eps < tau");
  quad::Quad1dOptions opts;
  const double T = model.horizon();
  for (double b : {eps, T - eps, T})
    if (b > 0.0 && b < tau) opts.breakpoints.push_back(b);
  auto f = [&](double t) {
    const double lo = std::max(t - eps, 0.0);
    return (model.cov(t, t + eps) - model.cov(t, lo)) / (2.0 * eps);
  };
  return quad::integrate_1d(f, 0.0, tau, {}, opts).value;
}

GaussHermite::GaussHermite(int n) {
  if (n < 1) throw std::invalid_argument("GaussHermite: order must be positive");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // Newton iteration on the physicists' polynomials, largest root first
  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(n, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * nodes[1];
    } else {
      z = 2.0 * z - nodes[i - 2];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // orthonormal recurrence keeps values in range
      double p1 = std::pow(std::acos(-1.0), -0.25);
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(j / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    nodes[i] = z;
    nodes[n - 1 - i] = -z;
    weights[i] = 2.0 / (pp * pp);
    weights[n - 1 - i] = weights[i];
  }
}

double GaussHermite::expect(const std::function<double(double)>& f) const {
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::acos(-1.0));
  const double s2 = std::sqrt(2.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(s2 * nodes[i]);
  return acc * inv_sqrt_pi;
}

double GaussHermite::expect2(const std::function<double(double, double)>& f) const {
  const double inv_pi = 1.0 / std::acos(-1.0);
  const double s2 = std::sqrt(2.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = 0; j < nodes.size(); ++j)
      acc += weights[i] * weights[j] * f(s2 * nodes[i], s2 * nodes[j]);
  return acc * inv_pi;
}

}  // namespace singcov::integrals
