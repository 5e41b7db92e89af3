#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "singcov/integrals.hpp"
#include "singcov/models.hpp"
#include "singcov/norms.hpp"
#include "singcov/simulation.hpp"

namespace singcov::verify {

struct Estimate {
  std::string name;
  double value = 0.0;
  std::optional<double> std_error;
};

struct Reference {
  std::string name;
  double value = 0.0;
  std::string provenance;  // closed-form | quadrature | limit
};

struct VerdictRow {
  std::string criterion;
  std::string tolerance;  // the threshold this verdict was judged against
  bool pass = false;
};

struct ExperimentReport {
  std::string name;
  nlohmann::json model;
  nlohmann::json params;  // sufficient to re-run the experiment
  std::vector<Estimate> estimates;
  std::vector<Reference> references;
  std::vector<VerdictRow> verdicts;
  std::vector<std::string> notes;
  double wall_seconds = 0.0;

  bool passed() const;
  nlohmann::json to_json(bool with_timing = true) const;
  void append_csv(std::ostream& os) const;
  static void csv_header(std::ostream& os);
};

// smooth test functions addressable by name in parameter blocks
struct SmoothFn {
  std::string name;
  std::function<double(double)> f, d1, d2;
};
const SmoothFn& smooth_fn(const std::string& name);  // x | sin | cos | half_square | one

// sample variance of the Paley-Wiener integral against ||f||_H^2
ExperimentReport exp_isometry(const nlohmann::json& params);
// per-path residual of f(X_t) = f(0) + int f'(X) d0X along an eps ladder
ExperimentReport exp_ito_symmetric(const nlohmann::json& params);
// zero-mean checks: skorohod estimate of g, the Ito combination for cos, and
// the Gaussian closed form E cos(X_t) = exp(-gamma/2)
ExperimentReport exp_skorohod_mean_zero(const nlohmann::json& params);
// ensemble quadratic variation along an eps ladder with a classification
ExperimentReport exp_qv(const nlohmann::json& params);
// pathwise truncated ||X||-type integrals against the Q-kernel tail test
ExperimentReport exp_membership_probe(const nlohmann::json& params);
// Z_eps mean T-eps and shrinking variance
ExperimentReport exp_ll1_ratio(const nlohmann::json& params);
// F_eps(tau) -> gamma(tau)/2
ExperimentReport exp_trace_convergence(const nlohmann::json& params);
// E<DF,h>_H = E(F int h dX) for cylinder functionals
ExperimentReport exp_duality(const nlohmann::json& params);
// int G*phi dW = phi(T) X_T - int X dphi on a refining grid
ExperimentReport exp_kernel_identity(const nlohmann::json& params);
// E(I_2(h)^2) = ||h||_{2,R}^2 for planar-step h
ExperimentReport exp_double_integral(const nlohmann::json& params);

// dispatch by name; the params block of any report re-runs it bit-exactly
ExperimentReport run_experiment(const std::string& name, const nlohmann::json& params);

std::vector<std::string> experiment_names();

}  // namespace singcov::verify
