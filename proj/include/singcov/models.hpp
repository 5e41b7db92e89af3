#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "singcov/quadrature.hpp"

namespace singcov::models {

enum class Family { FBm, BifBm, StatInc, Kernel };

std::string family_name(Family f);

struct Capabilities {
  bool has_closed_R = false;
  bool has_r_inf_density = false;
  bool has_mu_density = false;
  bool has_Q = false;
};

// Variance function of a process with weak stationary increments.
// Q(0) = 0, Q continuous, Q(t) = Q(T) for t >= T.
class QKernel {
public:
  virtual ~QKernel() = default;
  virtual double Q(double t) const = 0;
  virtual double Qp(double t) const = 0;   // derivative on ]0,T[
  virtual double Qpp(double t) const = 0;  // density of Q''(dy) on ]0,T[
  // local behavior of Q'' at 0+: Q''(u) ~ u^gap_exponent (up to log factors)
  virtual double gap_exponent() const = 0;
  virtual bool log_corrected() const = 0;
  virtual std::string kind() const = 0;
  // interior points where Q' or Q'' kink or jump
  virtual std::vector<double> breakpoints() const { return {}; }
  // atoms of the measure Q''(dy): (location, mass) for each jump of Q'
  virtual std::vector<std::pair<double, double>> qpp_atoms() const { return {}; }
};

std::shared_ptr<const QKernel> make_power_q(double H, double T);
std::shared_ptr<const QKernel> make_log_q(double T);

struct Kappa {
  enum class Kind { Indicator, Power };
  Kind kind = Kind::Indicator;
  double exponent = 0.0;  // kappa(u) = u^exponent for Power

  double operator()(double u) const;
  std::string kind_name() const;
};

// One covariance model: closed-form R(s,t), variance gamma(t), boundary
// density of R(ds,infinity) and off-diagonal density of the second-derivative
// measure mu, with the stopped-process convention X_t = X_T for t >= T.
class CovModel {
public:
  static CovModel fbm(double H, double T);
  static CovModel bifbm(double H, double K, double T);
  static CovModel stat_inc(std::shared_ptr<const QKernel> q, double T);
  static CovModel stat_inc_power(double H, double T);  // Q(t) = min(t,T)^{2H}
  static CovModel stat_inc_log(double T);              // 1/log(1/t) kernel
  static CovModel kernel(Kappa kappa, double T);

  static CovModel from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::string describe() const;

  Family family() const { return family_; }
  double horizon() const { return T_; }
  const Capabilities& capabilities() const { return caps_; }
  double hurst() const { return H_; }
  double bifractional_k() const { return K_; }
  const QKernel& q_kernel() const;
  const Kappa& kappa() const;

  double cov(double s, double t) const;
  double gamma(double t) const;
  double r_inf_density(double s) const;
  double mu_offdiag_density(double s1, double s2) const;

  // local power of the mu density in the gap |s1-s2| near the diagonal
  double mu_gap_exponent() const;
  bool mu_log_corrected() const;
  // atomic lines of mu at |s1-s2| = gap with the given per-length mass
  std::vector<std::pair<double, double>> mu_gap_atoms() const;
  // interior kinks of the gap profile / boundary density
  std::vector<double> density_breakpoints() const;
  // r_inf density blows up at 0 / T (power < 0)
  bool r_inf_singular_edges() const;

  // sign metadata: expected verdict of Assumption (D) where known in closed
  // form; disengaged for the kernel family
  std::optional<bool> expected_assumption_d() const;

private:
  CovModel() = default;

  Family family_ = Family::FBm;
  double T_ = 1.0;
  double H_ = 0.5;
  double K_ = 1.0;
  Capabilities caps_;
  std::shared_ptr<const QKernel> q_;
  Kappa kappa_;
};

enum class Verdict { Verified, Violated, NotCheckable };

std::string verdict_name(Verdict v);

struct Witness {
  double s1 = 0.0;
  double s2 = 0.0;
  double value = 0.0;
};

struct AssumptionCheck {
  Verdict verdict = Verdict::NotCheckable;
  std::string evidence;
  std::vector<Witness> witnesses;  // at least one offending point when violated
};

struct AssumptionReport {
  AssumptionCheck a, b, c, d;
  nlohmann::json to_json() const;
};

AssumptionReport check_assumptions(const CovModel& model, int grid_n);

enum class TailVerdict { Convergent, Divergent };

struct MembershipResult {
  std::vector<double> cutoffs;
  std::vector<double> integrals;  // I_k = int_{c_k}^T Q |Q''| dy
  std::vector<double> ratios;     // I_{k+1} / I_k
  TailVerdict verdict = TailVerdict::Convergent;
  nlohmann::json to_json() const;
};

// Tail test for int_{0+} Q(y)|Q''|(dy) < infinity along a decreasing cutoff
// ladder. Divergent when the last three ratios I_{k+1}/I_k exceed 1.5.
MembershipResult membership_condition(const CovModel& model,
                                      const std::vector<double>& cutoffs);

// Default cutoff ladder for the membership test: c_k = 10^-k * T, k = 1..6.
std::vector<double> default_membership_cutoffs(double T);

}  // namespace singcov::models
