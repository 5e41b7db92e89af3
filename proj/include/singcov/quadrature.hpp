#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace singcov::quad {

struct Tolerances {
  double rel = 1e-6;
  double abs = 1e-10;
  long max_cells = 200000;
};

struct QuadResult {
  double value = 0.0;
  double err_estimate = 0.0;  // absolute
  long cells = 0;             // rule applications
};

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonFinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InadmissibleSingularity : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Quad1dOptions {
  bool singular_left = false;   // integrable endpoint singularity at a
  bool singular_right = false;  // integrable endpoint singularity at b
  // singular tail decays like 1/log^k instead of a power; switches the
  // below-u_min extrapolation to the log model
  bool log_corrected = false;
  std::vector<double> breakpoints;  // known kinks/jumps inside ]a,b[
};

// Adaptive Gauss quadrature of f on [a,b]. Cells carry a 15-point rule with
// an embedded 7-point error estimate; the worst cell is bisected until the
// global estimate meets the tolerance. Flagged singular endpoints are graded
// geometrically down to 1e-12*(b-a) and the remainder is extrapolated from
// the innermost shells.
QuadResult integrate_1d(const std::function<double(double)>& f, double a, double b,
                        const Tolerances& tol = {}, const Quad1dOptions& opts = {});

struct Quad2dOptions {
  bool symmetric = true;           // F(s1,s2) == F(s2,s1); integrate one strip, double
  bool diag_log_corrected = false; // admits sing_exponent == -2 with log damping
  bool v_singular_left = false;    // grade the inner integral toward v = 0
  std::vector<double> u_breakpoints;  // gap values where the integrand kinks
  std::vector<double> v_breakpoints;  // jump lines s = const of the integrand
};

// Integral of F over [0,T]^2 minus the diagonal, in the rotated coordinates
// u = s2 - s1 in ]0,T], v = s1 in [0,T-u]. Requires |F| <= C*|s1-s2|^sing
// near the diagonal with sing > -2 (or == -2 under log damping).
QuadResult integrate_2d_offdiag(const std::function<double(double, double)>& F, double T,
                                double sing_exponent, const Tolerances& tol = {},
                                const Quad2dOptions& opts = {});

}  // namespace singcov::quad
