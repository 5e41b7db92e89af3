#pragma once

#include <functional>
#include <span>
#include <vector>

#include "singcov/models.hpp"
#include "singcov/piecewise.hpp"
#include "singcov/simulation.hpp"

namespace singcov::integrals {

// f(inf) X_T - sum of X at the jump atoms - trapezoidal integral of X times
// the slope density; grid-exact for step functions with on-grid breakpoints
double paley_wiener(std::span<const double> path, const sim::SimGrid& grid,
                    const norms::PiecewiseFn& f);

enum class RegKind { Forward, Backward, Symmetric };

// Left-endpoint Riemann sum of the eps-regularized integral of Y against X
// on [0,t]. eps must be a grid multiple so the shifted path values land on
// grid nodes; X is extended by 0 below 0 and by X_T beyond T.
double reg_integral(std::span<const double> Y, std::span<const double> X,
                    const sim::SimGrid& grid, double eps, RegKind kind, double t);

// symmetric-integral estimate minus the trace correction
// 1/2 sum g'(X_{t_i}) (gamma(t_{i+1}) - gamma(t_i))
double skorohod_estimate(std::span<const double> path, const sim::SimGrid& grid,
                         const std::function<double(double)>& g,
                         const std::function<double(double)>& gprime,
                         const models::CovModel& model, double eps, double t);

// int_0^t (X_{s+eps} - X_s)^2 / eps ds, left-endpoint rule
double quadratic_variation_eps(std::span<const double> path, const sim::SimGrid& grid,
                               double eps, double t);

// Z_eps = (1/Q(eps)) int_eps^T (X_s - X_{s-eps})^2 ds
double ll1_statistic(std::span<const double> path, const sim::SimGrid& grid, double eps,
                     double q_eps);

// Stratonovich sum at block scale eps: sum over blocks [keps,(k+1)eps] of
// fprime evaluated at the midpoint value times the block increment. Exactly
// telescoping for fprime(x) = x.
double stratonovich_midpoint(std::span<const double> path, const sim::SimGrid& grid,
                             const std::function<double(double)>& fprime, double eps, double t);

// Hermite polynomials with n H_n = x H_{n-1} - H_{n-2}, H'_n = H_{n-1}
double hermite(int n, double x);

// F_eps(tau) = int_0^tau [cov(t,t+eps) - cov(t,(t-eps)+)] / (2 eps) dt
double trace_F_eps(const models::CovModel& model, double eps, double tau);

// Gauss-Hermite rule for the weight e^{-x^2}: E f(N) with N ~ N(0,1) equals
// sum w_i f(sqrt(2) x_i) / sqrt(pi)
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussHermite(int n);
  double expect(const std::function<double(double)>& f) const;
  double expect2(const std::function<double(double, double)>& f) const;  // iid pair
};

}  // namespace singcov::integrals
