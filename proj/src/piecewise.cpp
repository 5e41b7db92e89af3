#include "singcov/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace singcov::norms {

namespace {

void validate_breaks(const std::vector<double>& b) {
  if (b.empty()) throw std::invalid_argument("PiecewiseFn: needs at least one breakpoint");
  if (b.front() < 0.0) throw std::invalid_argument("PiecewiseFn: breakpoints must be >= 0");
  for (std::size_t i = 0; i + 1 < b.size(); ++i)
    if (!(b[i] < b[i + 1]))
      throw std::invalid_argument("PiecewiseFn: breakpoints must be strictly increasing");
}

}  // namespace

PiecewiseFn PiecewiseFn::step(std::vector<double> breakpoints, std::vector<double> values) {
  validate_breaks(breakpoints);
  if (values.size() != breakpoints.size())
    throw std::invalid_argument("PiecewiseFn::step: one value per breakpoint");
  PiecewiseFn f;
  f.kind_ = Kind::Step;
  f.breaks_ = std::move(breakpoints);
  f.values_ = std::move(values);
  return f;
}

PiecewiseFn PiecewiseFn::linear(std::vector<double> breakpoints, std::vector<double> values) {
  validate_breaks(breakpoints);
  if (values.size() != breakpoints.size())
    throw std::invalid_argument("PiecewiseFn::linear: one node value per breakpoint");
  PiecewiseFn f;
  f.kind_ = Kind::Linear;
  f.breaks_ = std::move(breakpoints);
  f.values_ = std::move(values);
  return f;
}

PiecewiseFn PiecewiseFn::indicator(double a, double b, double c) {
  if (!(a < b)) throw std::invalid_argument("PiecewiseFn::indicator: requires a < b");
  return step({a, b}, {c, 0.0});
}

PiecewiseFn PiecewiseFn::constant(double c) { return step({0.0}, {c}); }

double PiecewiseFn::operator()(double t) const {
  if (t < breaks_.front()) return 0.0;
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - breaks_.begin()) - 1;
  if (kind_ == Kind::Step || i + 1 >= breaks_.size()) return values_[i];
  const double w = (t - breaks_[i]) / (breaks_[i + 1] - breaks_[i]);
  return values_[i] + w * (values_[i + 1] - values_[i]);
}

std::vector<PiecewiseFn::Atom> PiecewiseFn::jump_atoms() const {
  std::vector<Atom> atoms;
  if (kind_ == Kind::Step) {
    double prev = 0.0;
    for (std::size_t i = 0; i < breaks_.size(); ++i) {
      const double jump = values_[i] - prev;
      if (jump != 0.0) atoms.push_back({breaks_[i], jump});
      prev = values_[i];
    }
  } else {
    if (breaks_.front() > 0.0 && values_.front() != 0.0)
      atoms.push_back({breaks_.front(), values_.front()});
  }
  return atoms;
}

double PiecewiseFn::slope(double t) const {
  if (kind_ == Kind::Step) return 0.0;
  if (t < breaks_.front() || t >= breaks_.back()) return 0.0;
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - breaks_.begin()) - 1;
  if (i + 1 >= breaks_.size()) return 0.0;
  return (values_[i + 1] - values_[i]) / (breaks_[i + 1] - breaks_[i]);
}

bool PiecewiseFn::has_jumps() const { return !jump_atoms().empty(); }

double PiecewiseFn::total_variation() const {
  double tv = 0.0;
  for (const auto& a : jump_atoms()) tv += std::abs(a.mass);
  if (kind_ == Kind::Linear) {
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
      tv += std::abs(values_[i + 1] - values_[i]);
  }
  return tv;
}

nlohmann::json PiecewiseFn::to_json() const {
  return {{"kind", kind_ == Kind::Step ? "step" : "linear"},
          {"breakpoints", breaks_},
          {"values", values_}};
}

PiecewiseFn PiecewiseFn::from_json(const nlohmann::json& j) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "kind" && it.key() != "breakpoints" && it.key() != "values")
      throw std::invalid_argument("unknown key '" + it.key() + "' in piecewise function");
  }
  const std::string kind = j.at("kind").get<std::string>();
  auto b = j.at("breakpoints").get<std::vector<double>>();
  auto v = j.at("values").get<std::vector<double>>();
  if (kind == "step") return step(std::move(b), std::move(v));
  if (kind == "linear") return linear(std::move(b), std::move(v));
  throw std::invalid_argument("piecewise kind must be 'step' or 'linear'");
}

// ------------------------------------------------------------ PlanarStepFn

PlanarStepFn::PlanarStepFn(std::vector<double> x_breaks, std::vector<double> y_breaks,
                           std::vector<std::vector<double>> coeffs)
    : xs_(std::move(x_breaks)), ys_(std::move(y_breaks)), c_(std::move(coeffs)) {
  validate_breaks(xs_);
  validate_breaks(ys_);
  if (xs_.size() < 2 || ys_.size() < 2)
    throw std::invalid_argument("PlanarStepFn: needs at least one rectangle per axis");
  if (c_.size() != xs_.size() - 1)
    throw std::invalid_argument("PlanarStepFn: coefficient rows must match x rectangles");
  for (const auto& row : c_)
    if (row.size() != ys_.size() - 1)
      throw std::invalid_argument("PlanarStepFn: coefficient columns must match y rectangles");

  // planar derivative: sum c_ij (delta_{x_i} - delta_{x_{i+1}}) x
  //                            (delta_{y_j} - delta_{y_{j+1}})
  std::vector<Atom> raw;
  for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ys_.size(); ++j) {
      const double cij = c_[i][j];
      if (cij == 0.0) continue;
      raw.push_back({xs_[i], ys_[j], cij});
      raw.push_back({xs_[i + 1], ys_[j], -cij});
      raw.push_back({xs_[i], ys_[j + 1], -cij});
      raw.push_back({xs_[i + 1], ys_[j + 1], cij});
    }
  }
  std::sort(raw.begin(), raw.end(), [](const Atom& a, const Atom& b) {
    return a.t1 != b.t1 ? a.t1 < b.t1 : a.t2 < b.t2;
  });
  for (const auto& a : raw) {
    if (!atoms_.empty() && atoms_.back().t1 == a.t1 && atoms_.back().t2 == a.t2) {
      atoms_.back().mass += a.mass;
    } else {
      atoms_.push_back(a);
    }
  }
  std::erase_if(atoms_, [](const Atom& a) { return a.mass == 0.0; });
}

PlanarStepFn PlanarStepFn::rectangle(double a, double b, double c) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("PlanarStepFn::rectangle: a,b > 0");
  return PlanarStepFn({0.0, a}, {0.0, b}, {{c}});
}

PlanarStepFn PlanarStepFn::zero() { return PlanarStepFn({0.0, 1.0}, {0.0, 1.0}, {{0.0}}); }

double PlanarStepFn::operator()(double s1, double s2) const {
  if (s1 <= xs_.front() || s1 > xs_.back() || s2 <= ys_.front() || s2 > ys_.back()) return 0.0;
  const std::size_t i =
      static_cast<std::size_t>(std::lower_bound(xs_.begin(), xs_.end(), s1) - xs_.begin()) - 1;
  const std::size_t j =
      static_cast<std::size_t>(std::lower_bound(ys_.begin(), ys_.end(), s2) - ys_.begin()) - 1;
  return c_[i][j];
}

double PlanarStepFn::planar_variation() const {
  double pv = 0.0;
  // planar increments over the refinement by all atom coordinates reduce to
  // the atom masses themselves
  for (const auto& a : atoms_) pv += std::abs(a.mass);
  return pv;
}

}  // namespace singcov::norms
