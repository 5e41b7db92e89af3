#include "singcov/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace singcov::models {

namespace {

constexpr double kLogCutoff = 0.13533528323661270231781372785917;  // e^-2

double clip_T(double t, double T) { return std::min(t, T); }

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::FBm: return "fbm";
    case Family::BifBm: return "bifbm";
    case Family::StatInc: return "statinc";
    case Family::Kernel: return "kernel";
  }
  return "?";
}

// ---------------------------------------------------------------- QKernel

namespace {

class PowerQ final : public QKernel {
public:
  PowerQ(double H, double T) : H_(H), T_(T) {}
  double Q(double t) const override {
    t = std::max(0.0, std::min(t, T_));
    return std::pow(t, 2.0 * H_);
  }
  double Qp(double t) const override {
    if (t <= 0.0 || t >= T_) return 0.0;
    return 2.0 * H_ * std::pow(t, 2.0 * H_ - 1.0);
  }
  double Qpp(double t) const override {
    if (t <= 0.0 || t >= T_) return 0.0;
    return 2.0 * H_ * (2.0 * H_ - 1.0) * std::pow(t, 2.0 * H_ - 2.0);
  }
  double gap_exponent() const override { return 2.0 * H_ - 2.0; }
  bool log_corrected() const override { return false; }
  std::string kind() const override { return "power"; }

private:
  double H_, T_;
};

// Example variance kernel more singular than every fractional scale:
// Q(t) = 1/log(1/t) for t < e^-2, constant 1/2 afterwards.
class LogQ final : public QKernel {
public:
  explicit LogQ(double T) : T_(T) {}
  double Q(double t) const override {
    t = std::max(0.0, std::min(t, T_));
    if (t <= 0.0) return 0.0;
    if (t >= kLogCutoff) return 0.5;
    return 1.0 / std::log(1.0 / t);
  }
  double Qp(double t) const override {
    if (t <= 0.0 || t >= kLogCutoff || t >= T_) return 0.0;
    const double L = std::log(1.0 / t);
    return 1.0 / (L * L * t);
  }
  double Qpp(double t) const override {
    if (t <= 0.0 || t >= kLogCutoff || t >= T_) return 0.0;
    const double L = std::log(1.0 / t);
    return -(1.0 - 2.0 / L) / (L * L * t * t);
  }
  double gap_exponent() const override { return -2.0; }
  bool log_corrected() const override { return true; }
  std::string kind() const override { return "log"; }
  std::vector<double> breakpoints() const override { return {kLogCutoff}; }
  std::vector<std::pair<double, double>> qpp_atoms() const override {
    // Q' drops from e^2/4 to 0 at e^-2
    return {{kLogCutoff, -std::exp(2.0) / 4.0}};
  }

private:
  double T_;
};

}  // namespace

std::shared_ptr<const QKernel> make_power_q(double H, double T) {
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("power Q kernel: H must be in ]0,1[");
  if (!(T > 0.0)) throw std::invalid_argument("power Q kernel: T must be positive");
  return std::make_shared<PowerQ>(H, T);
}

std::shared_ptr<const QKernel> make_log_q(double T) {
  if (!(T >= kLogCutoff))
    throw std::invalid_argument("log Q kernel: requires T >= e^-2 so Q is constant after T");
  return std::make_shared<LogQ>(T);
}

// ------------------------------------------------------------------ Kappa

double Kappa::operator()(double u) const {
  if (u < 0.0) return 0.0;
  switch (kind) {
    case Kind::Indicator: return 1.0;
    case Kind::Power: return std::pow(u, exponent);
  }
  return 0.0;
}

std::string Kappa::kind_name() const {
  return kind == Kind::Indicator ? "indicator" : "power";
}

// --------------------------------------------------------------- CovModel

CovModel CovModel::fbm(double H, double T) {
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("fbm: H must be in ]0,1[");
  if (!(T > 0.0)) throw std::invalid_argument("fbm: T must be positive");
  CovModel m;
  m.family_ = Family::FBm;
  m.H_ = H;
  m.T_ = T;
  m.caps_ = {true, true, true, true};
  m.q_ = make_power_q(H, T);
  return m;
}

CovModel CovModel::bifbm(double H, double K, double T) {
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("bifbm: H must be in ]0,1[");
  if (!(K > 0.0 && K <= 1.0)) throw std::invalid_argument("bifbm: K must be in ]0,1]");
  if (!(T > 0.0)) throw std::invalid_argument("bifbm: T must be positive");
  CovModel m;
  m.family_ = Family::BifBm;
  m.H_ = H;
  m.K_ = K;
  m.T_ = T;
  m.caps_ = {true, true, true, false};
  return m;
}

CovModel CovModel::stat_inc(std::shared_ptr<const QKernel> q, double T) {
  if (!q) throw std::invalid_argument("stat_inc: Q kernel required");
  if (!(T > 0.0)) throw std::invalid_argument("stat_inc: T must be positive");
  CovModel m;
  m.family_ = Family::StatInc;
  m.T_ = T;
  m.q_ = std::move(q);
  m.caps_ = {true, true, true, true};
  return m;
}

CovModel CovModel::stat_inc_power(double H, double T) {
  CovModel m = stat_inc(make_power_q(H, T), T);
  m.H_ = H;
  return m;
}

CovModel CovModel::stat_inc_log(double T) { return stat_inc(make_log_q(T), T); }

CovModel CovModel::kernel(Kappa kappa, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("kernel: T must be positive");
  if (kappa.kind == Kappa::Kind::Power && !(kappa.exponent > -0.5))
    throw std::invalid_argument("kernel: power exponent must exceed -1/2 (square integrability)");
  CovModel m;
  m.family_ = Family::Kernel;
  m.T_ = T;
  m.kappa_ = kappa;
  m.caps_ = {false, false, false, false};
  return m;
}

const QKernel& CovModel::q_kernel() const {
  if (!q_) throw std::logic_error("model has no Q kernel");
  return *q_;
}

const Kappa& CovModel::kappa() const {
  if (family_ != Family::Kernel) throw std::logic_error("model has no kappa kernel");
  return kappa_;
}

double CovModel::cov(double s, double t) const {
  if (s < 0.0 || t < 0.0) throw std::invalid_argument("cov: times must be nonnegative");
  const double a = clip_T(s, T_), b = clip_T(t, T_);
  if (a == 0.0 || b == 0.0) return 0.0;
  switch (family_) {
    case Family::FBm: {
      const double p = 2.0 * H_;
      return 0.5 * (std::pow(a, p) + std::pow(b, p) - std::pow(std::abs(a - b), p));
    }
    case Family::BifBm: {
      const double p = 2.0 * H_;
      return std::pow(2.0, -K_) * (std::pow(std::pow(a, p) + std::pow(b, p), K_) -
                                   std::pow(std::abs(a - b), 2.0 * H_ * K_));
    }
    case Family::StatInc:
      return 0.5 * (q_->Q(a) + q_->Q(b) - q_->Q(std::abs(a - b)));
    case Family::Kernel: {
      const double m = std::min(a, b);
      quad::Quad1dOptions opts;
      // kappa(min(a,b) - s) blows up as s -> min(a,b) for negative exponents
      opts.singular_right = kappa_.kind == Kappa::Kind::Power && kappa_.exponent < 0.0;
      auto f = [&](double u) { return kappa_(a - u) * kappa_(b - u); };
      return quad::integrate_1d(f, 0.0, m, {}, opts).value;
    }
  }
  return 0.0;
}

double CovModel::gamma(double t) const {
  if (t < 0.0) throw std::invalid_argument("gamma: time must be nonnegative");
  const double a = clip_T(t, T_);
  if (a == 0.0) return 0.0;
  switch (family_) {
    case Family::FBm: return std::pow(a, 2.0 * H_);
    case Family::BifBm: return std::pow(a, 2.0 * H_ * K_);
    case Family::StatInc: return q_->Q(a);
    case Family::Kernel: {
      if (kappa_.kind == Kappa::Kind::Indicator) return a;
      const double e = kappa_.exponent;
      // int_0^a u^(2e) du
      return std::pow(a, 2.0 * e + 1.0) / (2.0 * e + 1.0);
    }
  }
  return 0.0;
}

double CovModel::r_inf_density(double s) const {
  if (!caps_.has_r_inf_density)
    throw std::invalid_argument("r_inf_density: capability missing for family " +
                                family_name(family_));
  if (s > T_) return 0.0;
  if (!(s > 0.0 && s < T_))
    throw std::invalid_argument("r_inf_density: requires 0 < s < T");
  switch (family_) {
    case Family::FBm:
      return H_ * (std::pow(s, 2.0 * H_ - 1.0) + std::pow(T_ - s, 2.0 * H_ - 1.0));
    case Family::BifBm: {
      const double p = 2.0 * H_;
      return 2.0 * H_ * K_ * std::pow(2.0, -K_) *
             (std::pow(std::pow(s, p) + std::pow(T_, p), K_ - 1.0) * std::pow(s, p - 1.0) +
              std::pow(T_ - s, 2.0 * H_ * K_ - 1.0));
    }
    case Family::StatInc:
      return 0.5 * (q_->Qp(s) + q_->Qp(T_ - s));
    case Family::Kernel:
      break;
  }
  return 0.0;
}

double CovModel::mu_offdiag_density(double s1, double s2) const {
  if (!caps_.has_mu_density)
    throw std::invalid_argument("mu_offdiag_density: capability missing for family " +
                                family_name(family_));
  if (s1 == s2) throw std::invalid_argument("mu_offdiag_density: diagonal input");
  if (s1 > T_ || s2 > T_) return 0.0;
  if (!(s1 > 0.0 && s1 < T_ && s2 > 0.0 && s2 < T_))
    throw std::invalid_argument("mu_offdiag_density: requires points in ]0,T[");
  const double gap = std::abs(s1 - s2);
  switch (family_) {
    case Family::FBm:
      return H_ * (2.0 * H_ - 1.0) * std::pow(gap, 2.0 * H_ - 2.0);
    case Family::BifBm: {
      const double p = 2.0 * H_;
      const double mixed = 4.0 * H_ * H_ * K_ * (K_ - 1.0) *
                           std::pow(std::pow(s1, p) + std::pow(s2, p), K_ - 2.0) *
                           std::pow(s1 * s2, p - 1.0);
      const double diag = 2.0 * H_ * K_ * (2.0 * H_ * K_ - 1.0) *
                          std::pow(gap, 2.0 * H_ * K_ - 2.0);
      return std::pow(2.0, -K_) * (mixed + diag);
    }
    case Family::StatInc:
      // differentiating R = (Q(s1)+Q(s2)-Q(s1-s2))/2 puts a 1/2 on Q''
      return 0.5 * q_->Qpp(gap);
    case Family::Kernel:
      break;
  }
  return 0.0;
}

double CovModel::mu_gap_exponent() const {
  switch (family_) {
    case Family::FBm: return 2.0 * H_ - 2.0;
    case Family::BifBm: return 2.0 * H_ * K_ - 2.0;
    case Family::StatInc: return q_->gap_exponent();
    case Family::Kernel: break;
  }
  throw std::invalid_argument("mu_gap_exponent: no mu density for this family");
}

bool CovModel::mu_log_corrected() const {
  return family_ == Family::StatInc && q_->log_corrected();
}

std::vector<std::pair<double, double>> CovModel::mu_gap_atoms() const {
  std::vector<std::pair<double, double>> atoms;
  if (family_ == Family::StatInc && q_) {
    for (auto [gap, mass] : q_->qpp_atoms()) atoms.emplace_back(gap, 0.5 * mass);
  }
  return atoms;
}

std::vector<double> CovModel::density_breakpoints() const {
  if (family_ == Family::StatInc && q_) return q_->breakpoints();
  return {};
}

bool CovModel::r_inf_singular_edges() const {
  switch (family_) {
    case Family::FBm: return H_ < 0.5;
    case Family::BifBm: return H_ < 0.5 || 2.0 * H_ * K_ < 1.0;
    case Family::StatInc: return true;  // Q' may blow up at 0+
    case Family::Kernel: return false;
  }
  return false;
}

std::optional<bool> CovModel::expected_assumption_d() const {
  switch (family_) {
    case Family::FBm: return H_ <= 0.5;
    case Family::BifBm: return H_ * K_ <= 0.5;
    case Family::StatInc: {
      // Q increasing and concave on ]0,T[, probed on a fixed interior grid
      for (int i = 1; i < 64; ++i) {
        const double t = T_ * i / 64.0;
        if (q_->Qp(t) < 0.0 || q_->Qpp(t) > 0.0) return false;
      }
      return true;
    }
    case Family::Kernel: return std::nullopt;
  }
  return std::nullopt;
}

nlohmann::json CovModel::to_json() const {
  nlohmann::json j;
  j["family"] = family_name(family_);
  j["T"] = T_;
  switch (family_) {
    case Family::FBm: j["H"] = H_; break;
    case Family::BifBm:
      j["H"] = H_;
      j["K"] = K_;
      break;
    case Family::StatInc:
      j["q_kernel"] = {{"kind", q_->kind()}};
      if (q_->kind() == "power") j["H"] = H_;
      break;
    case Family::Kernel:
      j["kappa"] = {{"kind", kappa_.kind_name()}};
      if (kappa_.kind == Kappa::Kind::Power) j["kappa"]["exponent"] = kappa_.exponent;
      break;
  }
  return j;
}

std::string CovModel::describe() const { return to_json().dump(); }

namespace {

void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace

CovModel CovModel::from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"family", "T", "H", "K", "q_kernel", "kappa"}, "model");
  const std::string fam = j.at("family").get<std::string>();
  const double T = j.at("T").get<double>();
  if (fam == "fbm") {
    return fbm(j.at("H").get<double>(), T);
  } else if (fam == "bifbm") {
    return bifbm(j.at("H").get<double>(), j.at("K").get<double>(), T);
  } else if (fam == "statinc") {
    const auto& qk = j.at("q_kernel");
    reject_unknown_keys(qk, {"kind"}, "q_kernel");
    const std::string kind = qk.at("kind").get<std::string>();
    if (kind == "power") return stat_inc_power(j.at("H").get<double>(), T);
    if (kind == "log") return stat_inc_log(T);
    throw std::invalid_argument("q_kernel kind must be 'power' or 'log'");
  } else if (fam == "kernel") {
    const auto& kj = j.at("kappa");
    reject_unknown_keys(kj, {"kind", "exponent"}, "kappa");
    const std::string kind = kj.at("kind").get<std::string>();
    Kappa k;
    if (kind == "indicator") {
      k.kind = Kappa::Kind::Indicator;
    } else if (kind == "power") {
      k.kind = Kappa::Kind::Power;
      k.exponent = kj.at("exponent").get<double>();
    } else {
      throw std::invalid_argument("kappa kind must be 'indicator' or 'power'");
    }
    return kernel(k, T);
  }
  throw std::invalid_argument("family must be one of fbm|bifbm|statinc|kernel");
}

// ------------------------------------------------------------ assumptions

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Verified: return "verified";
    case Verdict::Violated: return "violated";
    case Verdict::NotCheckable: return "not-checkable";
  }
  return "?";
}

nlohmann::json AssumptionReport::to_json() const {
  auto enc = [](const AssumptionCheck& c) {
    nlohmann::json j;
    j["verdict"] = verdict_name(c.verdict);
    j["evidence"] = c.evidence;
    nlohmann::json w = nlohmann::json::array();
    for (const auto& x : c.witnesses) w.push_back({{"s1", x.s1}, {"s2", x.s2}, {"value", x.value}});
    j["witnesses"] = w;
    return j;
  };
  return {{"A", enc(a)}, {"B", enc(b)}, {"C", enc(c)}, {"D", enc(d)}};
}

AssumptionReport check_assumptions(const CovModel& model, int grid_n) {
  if (grid_n < 16) throw std::invalid_argument("check_assumptions: grid_n >= 16 required");
  AssumptionReport rep;
  const double T = model.horizon();
  std::ostringstream ev;

  // (A) total-variation proxy of s2 -> R(s, s2): grid TV must saturate as the
  // grid refines, so the refinement increments have to decay
  {
    auto grid_tv = [&](double s, int n) {
      double tv = 0.0;
      for (int j = 0; j < n; ++j)
        tv += std::abs(model.cov(s, T * (j + 1) / n) - model.cov(s, T * j / n));
      return tv;
    };
    // probe slices lie on every refinement grid so the peak at s2 = s is
    // always resolved exactly
    const int base = 16 * ((grid_n + 15) / 16);
    double worst_tv = 0.0;
    bool decaying = true;
    double worst_ratio = 0.0;
    for (int si = 1; si <= 15; si += 2) {
      const double s = T * si / 16.0;
      const double tv1 = grid_tv(s, base);
      const double tv2 = grid_tv(s, 2 * base);
      const double tv4 = grid_tv(s, 4 * base);
      worst_tv = std::max(worst_tv, tv4);
      const double g1 = tv2 - tv1, g2 = tv4 - tv2;
      if (g1 > 0.01 * std::max(tv4, 1e-12)) {
        const double ratio = g2 / g1;
        worst_ratio = std::max(worst_ratio, ratio);
        if (ratio > 0.9) decaying = false;
      }
    }
    ev.str("");
    ev << "max grid TV " << worst_tv << ", refinement increment ratio " << worst_ratio;
    rep.a.evidence = ev.str();
    rep.a.verdict = decaying ? Verdict::Verified : Verdict::Violated;
  }

  if (!model.capabilities().has_mu_density) {
    rep.b.verdict = rep.c.verdict = rep.d.verdict = Verdict::NotCheckable;
    rep.b.evidence = rep.c.evidence = rep.d.evidence = "no closed-form densities";
    return rep;
  }

  // (B)/(C) finiteness proxy: integral of |s1-s2| * |mu| over the square
  double mu_bar_mass = std::numeric_limits<double>::quiet_NaN();
  {
    quad::Quad2dOptions opts;
    opts.symmetric = true;
    opts.diag_log_corrected = model.mu_log_corrected();
    opts.u_breakpoints = model.density_breakpoints();
    quad::Tolerances tol;
    tol.rel = 1e-4;
    try {
      auto F = [&](double s1, double s2) {
        return std::abs(s1 - s2) * std::abs(model.mu_offdiag_density(s1, s2));
      };
      mu_bar_mass =
          quad::integrate_2d_offdiag(F, T, model.mu_gap_exponent() + 1.0, tol, opts).value;
      ev.str("");
      ev << "|mu_bar| mass " << mu_bar_mass;
      rep.b.evidence = ev.str();
      rep.b.verdict = Verdict::Verified;
    } catch (const quad::NonConvergence&) {
      rep.b.verdict = Verdict::Violated;
      rep.b.evidence = "|mu_bar| mass grows without bound near the diagonal";
    }
  }

  // (C): |mu_bar| finite and boundary density positive in the interior
  {
    double min_r = std::numeric_limits<double>::infinity();
    for (int i = 1; i < grid_n; ++i) {
      const double s = T * i / grid_n;
      min_r = std::min(min_r, model.r_inf_density(s));
    }
    ev.str("");
    ev << "min r_inf density " << min_r << ", |mu_bar| mass " << mu_bar_mass;
    rep.c.evidence = ev.str();
    rep.c.verdict = (rep.b.verdict == Verdict::Verified && min_r > 0.0) ? Verdict::Verified
                                                                        : Verdict::Violated;
  }

  // (D) i) boundary measure nonnegative, ii) mu nonpositive off the diagonal
  {
    double min_r = std::numeric_limits<double>::infinity();
    Witness bad_r{};
    bool r_ok = true;
    for (int i = 1; i < grid_n; ++i) {
      const double s = T * i / grid_n;
      const double v = model.r_inf_density(s);
      if (v < min_r) {
        min_r = v;
        bad_r = {s, 0.0, v};
      }
      if (v < 0.0) r_ok = false;
    }
    double max_mu = -std::numeric_limits<double>::infinity();
    Witness bad_mu{};
    bool mu_ok = true;
    for (int i = 1; i < grid_n; ++i) {
      const double s1 = T * i / grid_n;
      for (int k = 2; k <= 10; ++k) {
        const double s2 = s1 + T * std::pow(2.0, -k);
        if (s2 >= T) continue;
        const double v = model.mu_offdiag_density(s1, s2);
        if (v > max_mu) {
          max_mu = v;
          bad_mu = {s1, s2, v};
        }
        if (v > 0.0) mu_ok = false;
      }
    }
    ev.str("");
    ev << "min r_inf density " << min_r << ", max mu density " << max_mu;
    rep.d.evidence = ev.str();
    if (r_ok && mu_ok) {
      rep.d.verdict = Verdict::Verified;
    } else {
      rep.d.verdict = Verdict::Violated;
      if (!r_ok) rep.d.witnesses.push_back(bad_r);
      if (!mu_ok) rep.d.witnesses.push_back(bad_mu);
    }
  }
  return rep;
}

// ------------------------------------------------------------- membership

nlohmann::json MembershipResult::to_json() const {
  return {{"cutoffs", cutoffs},
          {"integrals", integrals},
          {"ratios", ratios},
          {"verdict", verdict == TailVerdict::Convergent ? "convergent" : "divergent"}};
}

std::vector<double> default_membership_cutoffs(double T) {
  std::vector<double> cs;
  for (int k = 1; k <= 6; ++k) cs.push_back(T * std::pow(10.0, -k));
  return cs;
}

MembershipResult membership_condition(const CovModel& model,
                                      const std::vector<double>& cutoffs) {
  if (!model.capabilities().has_Q)
    throw std::invalid_argument("membership_condition: model has no Q kernel");
  if (cutoffs.size() < 4)
    throw std::invalid_argument("membership_condition: need at least 4 cutoffs");
  if (!(cutoffs.back() > 0.0))
    throw std::invalid_argument("membership_condition: cutoffs must stay positive");
  for (std::size_t i = 0; i + 1 < cutoffs.size(); ++i) {
    if (!(cutoffs[i] > cutoffs[i + 1]))
      throw std::invalid_argument("membership_condition: cutoffs must decrease toward 0");
  }
  const QKernel& q = model.q_kernel();
  const double T = model.horizon();

  MembershipResult out;
  out.cutoffs = cutoffs;
  quad::Quad1dOptions opts;
  opts.breakpoints = q.breakpoints();
  quad::Tolerances tol;
  tol.rel = 1e-8;
  for (double c : cutoffs) {
    auto f = [&](double y) { return q.Q(y) * std::abs(q.Qpp(y)); };
    out.integrals.push_back(quad::integrate_1d(f, c, T, tol, opts).value);
  }
  for (std::size_t k = 0; k + 1 < out.integrals.size(); ++k) {
    const double denom = out.integrals[k];
    out.ratios.push_back(denom > 0.0 ? out.integrals[k + 1] / denom
                                     : std::numeric_limits<double>::infinity());
  }
  bool divergent = out.ratios.size() >= 3;
  for (std::size_t k = out.ratios.size() - 3; k < out.ratios.size() && divergent; ++k) {
    if (!(out.ratios[k] > 1.5)) divergent = false;
  }
  out.verdict = divergent ? TailVerdict::Divergent : TailVerdict::Convergent;
  return out;
}

}  // namespace singcov::models
