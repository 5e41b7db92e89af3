#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace singcov::norms {

// Bounded-variation test function: right-continuous step function or
// piecewise-linear interpolant on strictly increasing breakpoints. Zero
// before the first breakpoint (when it is positive), constant after the last.
// The derivative measure splits into jump atoms plus a slope density.
class PiecewiseFn {
public:
  enum class Kind { Step, Linear };

  static PiecewiseFn step(std::vector<double> breakpoints, std::vector<double> values);
  static PiecewiseFn linear(std::vector<double> breakpoints, std::vector<double> values);
  // c on ]a,b], zero elsewhere (right-continuous version of c*1_[a,b])
  static PiecewiseFn indicator(double a, double b, double c = 1.0);
  static PiecewiseFn constant(double c);
  static PiecewiseFn zero() { return constant(0.0); }

  static PiecewiseFn from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  double operator()(double t) const;

  Kind kind() const { return kind_; }
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }

  double tail_value() const { return values_.back(); }  // f(t) for large t

  struct Atom {
    double t;
    double mass;
  };
  // jump part of df, including the jump from 0 at the first breakpoint
  std::vector<Atom> jump_atoms() const;
  // density part of df (slopes); zero for step functions
  double slope(double t) const;
  bool has_jumps() const;
  double total_variation() const;

private:
  PiecewiseFn() = default;
  Kind kind_ = Kind::Step;
  std::vector<double> breaks_;
  std::vector<double> values_;
};

// Two-parameter step function sum c_ij on ]x_i,x_{i+1}] x ]y_j,y_{j+1}],
// zero outside; its planar derivative measure is purely atomic.
class PlanarStepFn {
public:
  PlanarStepFn(std::vector<double> x_breaks, std::vector<double> y_breaks,
               std::vector<std::vector<double>> coeffs);
  // 1_(0,a] x (0,b] scaled by c
  static PlanarStepFn rectangle(double a, double b, double c = 1.0);
  static PlanarStepFn zero();

  double operator()(double s1, double s2) const;

  struct Atom {
    double t1, t2;
    double mass;
  };
  const std::vector<Atom>& atoms() const { return atoms_; }
  double planar_variation() const;

private:
  std::vector<double> xs_, ys_;
  std::vector<std::vector<double>> c_;
  std::vector<Atom> atoms_;
};

}  // namespace singcov::norms
