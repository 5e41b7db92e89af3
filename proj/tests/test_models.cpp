#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "singcov/models.hpp"

using namespace singcov::models;

namespace {

// independent tail-integral oracle: plain midpoint Riemann sum on a log grid
double brute_tail_integral(const QKernel& q, double c, double T, int n = 40000) {
  double acc = 0.0;
  const double lr = std::log(T / c) / n;
  for (int i = 0; i < n; ++i) {
    const double lo = c * std::exp(i * lr), hi = c * std::exp((i + 1) * lr);
    const double mid = 0.5 * (lo + hi);
    acc += q.Q(mid) * std::abs(q.Qpp(mid)) * (hi - lo);
  }
  return acc;
}

}  // namespace

TEST_CASE("fbm covariance closed forms") {
  auto bm = CovModel::fbm(0.5, 1.0);
  CHECK(bm.cov(0.3, 0.7) == doctest::Approx(0.3).epsilon(1e-14));

  auto m = CovModel::fbm(0.3, 1.0);
  const double expected =
      0.5 * (std::pow(0.3, 0.6) + std::pow(0.7, 0.6) - std::pow(0.4, 0.6));
  CHECK(m.cov(0.3, 0.7) == doctest::Approx(expected).epsilon(1e-14));

  // stopped convention
  CHECK(m.cov(2.0, 0.4) == doctest::Approx(m.cov(1.0, 0.4)).epsilon(1e-14));
}

TEST_CASE("bifbm diagonal is t^(2HK)") {
  auto m = CovModel::bifbm(0.6, 5.0 / 6.0, 1.0);
  for (double t : {0.1, 0.25, 0.5, 0.9}) {
    CHECK(m.cov(t, t) == doctest::Approx(t).epsilon(1e-12));  // 2HK = 1
    CHECK(m.gamma(t) == doctest::Approx(t).epsilon(1e-12));
  }
}

TEST_CASE("gamma") {
  auto m = CovModel::fbm(0.3, 1.0);
  CHECK(m.gamma(0.5) == doctest::Approx(std::pow(0.5, 0.6)).epsilon(1e-14));
  CHECK(m.gamma(0.0) == 0.0);
  auto lg = CovModel::stat_inc_log(1.0);
  CHECK(lg.gamma(std::exp(-2.0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lg.gamma(0.5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("invalid parameters rejected at construction") {
  CHECK_THROWS_AS(CovModel::fbm(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CovModel::fbm(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CovModel::bifbm(0.5, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CovModel::bifbm(0.5, 1.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CovModel::kernel({Kappa::Kind::Power, -0.6}, 1.0), std::invalid_argument);
}

TEST_CASE("boundary density of R(ds,infinity)") {
  auto bm = CovModel::fbm(0.5, 1.0);
  CHECK(bm.r_inf_density(0.25) == doctest::Approx(1.0).epsilon(1e-14));

  auto m = CovModel::fbm(0.3, 1.0);
  CHECK(m.r_inf_density(0.5) ==
        doctest::Approx(0.3 * 2.0 * std::pow(0.5, -0.4)).epsilon(1e-14));
  CHECK(m.r_inf_density(1.5) == 0.0);

  auto ker = CovModel::kernel({Kappa::Kind::Indicator, 0.0}, 1.0);
  CHECK_THROWS_AS(ker.r_inf_density(0.5), std::invalid_argument);
}

TEST_CASE("off-diagonal density of the second-derivative measure") {
  auto m = CovModel::fbm(0.3, 1.0);
  const double expected = 0.3 * (-0.4) * std::pow(0.4, -1.4);
  CHECK(m.mu_offdiag_density(0.2, 0.6) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(m.mu_offdiag_density(0.2, 0.6) < 0.0);

  auto bm = CovModel::fbm(0.5, 1.0);
  CHECK(bm.mu_offdiag_density(0.2, 0.6) == 0.0);

  CHECK_THROWS_AS(m.mu_offdiag_density(0.4, 0.4), std::invalid_argument);

  // fbm closed-form agreement: density / (H(2H-1)) = gap^(2H-2)
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> U(0.01, 0.99);
  for (double H : {0.3, 0.7}) {
    auto f = CovModel::fbm(H, 1.0);
    for (int i = 0; i < 50; ++i) {
      double s1 = U(gen), s2 = U(gen);
      if (s1 == s2) continue;
      const double lhs = f.mu_offdiag_density(s1, s2) / (H * (2 * H - 1));
      const double rhs = std::pow(std::abs(s1 - s2), 2 * H - 2);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("covariance symmetry and axis values on random points") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<CovModel> ms;
  ms.push_back(CovModel::fbm(0.3, 1.0));
  ms.push_back(CovModel::fbm(0.7, 1.0));
  ms.push_back(CovModel::bifbm(0.6, 5.0 / 6.0, 1.0));
  ms.push_back(CovModel::stat_inc_log(1.0));
  for (const auto& m : ms) {
    for (int i = 0; i < 40; ++i) {
      const double s = U(gen), t = U(gen);
      CHECK(m.cov(s, t) == m.cov(t, s));
    }
    CHECK(m.cov(U(gen), 0.0) == 0.0);
    CHECK(m.gamma(0.0) == 0.0);
  }
}

TEST_CASE("stat-inc power kernel agrees with fbm across the whole surface") {
  const double H = 0.3, T = 1.0;
  auto f = CovModel::fbm(H, T);
  auto s = CovModel::stat_inc_power(H, T);
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> U(0.001, 0.999);
  for (int i = 0; i < 100; ++i) {
    const double a = U(gen), b = U(gen);
    CHECK(s.cov(a, b) == doctest::Approx(f.cov(a, b)).epsilon(1e-9));
    CHECK(s.gamma(a) == doctest::Approx(f.gamma(a)).epsilon(1e-9));
    CHECK(s.r_inf_density(a) == doctest::Approx(f.r_inf_density(a)).epsilon(1e-9));
    if (a != b) {
      CHECK(s.mu_offdiag_density(a, b) ==
            doctest::Approx(f.mu_offdiag_density(a, b)).epsilon(1e-9));
    }
  }
  // the factor 1/2 on Q'' cross-checked against the fbm display
  CHECK(s.mu_offdiag_density(0.2, 0.6) ==
        doctest::Approx(0.3 * (-0.4) * std::pow(0.4, -1.4)).epsilon(1e-12));
}

TEST_CASE("kernel family with kappa = indicator reproduces stopped Brownian motion") {
  auto m = CovModel::kernel({Kappa::Kind::Indicator, 0.0}, 1.0);
  CHECK(m.cov(0.3, 0.7) == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(m.cov(0.9, 2.0) == doctest::Approx(0.9).epsilon(1e-8));
  CHECK(m.cov(1.7, 2.4) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(m.gamma(0.6) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("kernel family with power kappa has gamma(t) = t^2H / 2H") {
  const double H = 0.3;
  auto m = CovModel::kernel({Kappa::Kind::Power, H - 0.5}, 1.0);
  CHECK(m.gamma(1.0) == doctest::Approx(1.0 / (2 * H)).epsilon(1e-12));
  // cov(t,t) via quadrature must agree with the closed form
  CHECK(m.cov(0.7, 0.7) == doctest::Approx(std::pow(0.7, 2 * H) / (2 * H)).epsilon(1e-6));
}

TEST_CASE("assumption checker verdicts") {
  auto r1 = check_assumptions(CovModel::fbm(0.3, 1.0), 32);
  CHECK(r1.d.verdict == Verdict::Verified);
  CHECK(r1.a.verdict == Verdict::Verified);
  CHECK(r1.b.verdict == Verdict::Verified);
  CHECK(r1.c.verdict == Verdict::Verified);

  auto r2 = check_assumptions(CovModel::fbm(0.7, 1.0), 32);
  CHECK(r2.d.verdict == Verdict::Violated);
  REQUIRE(!r2.d.witnesses.empty());
  CHECK(r2.d.witnesses.back().value > 0.0);  // offending positive mu density

  auto r3 = check_assumptions(CovModel::bifbm(0.6, 5.0 / 6.0, 1.0), 32);
  CHECK(r3.d.verdict == Verdict::Verified);

  auto r4 = check_assumptions(CovModel::stat_inc_log(1.0), 32);
  CHECK(r4.d.verdict == Verdict::Verified);

  auto r5 = check_assumptions(CovModel::kernel({Kappa::Kind::Indicator, 0.0}, 1.0), 32);
  CHECK(r5.d.verdict == Verdict::NotCheckable);

  CHECK_THROWS_AS(check_assumptions(CovModel::fbm(0.3, 1.0), 8), std::invalid_argument);
}

TEST_CASE("membership condition: power kernels") {
  auto conv = membership_condition(CovModel::stat_inc_power(0.4, 1.0),
                                   default_membership_cutoffs(1.0));
  CHECK(conv.verdict == TailVerdict::Convergent);

  auto div = membership_condition(CovModel::stat_inc_power(0.2, 1.0),
                                  default_membership_cutoffs(1.0));
  CHECK(div.verdict == TailVerdict::Divergent);

  // brute-force oracle: the H=0.2 tail integrals grow without bound, the
  // H=0.4 ones stabilize
  auto q2 = make_power_q(0.2, 1.0);
  auto q4 = make_power_q(0.4, 1.0);
  double prev2 = 0.0, prev4 = 0.0;
  double last_growth2 = 0.0, last_growth4 = 0.0;
  for (double c : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const double i2 = brute_tail_integral(*q2, c, 1.0);
    const double i4 = brute_tail_integral(*q4, c, 1.0);
    last_growth2 = i2 - prev2;
    last_growth4 = i4 - prev4;
    prev2 = i2;
    prev4 = i4;
  }
  CHECK(last_growth2 > 10.0);    // still climbing hard
  CHECK(last_growth4 < 1e-3);    // settled
  // quadrature values agree with the brute-force oracle at matching cutoffs
  auto r = membership_condition(CovModel::stat_inc_power(0.2, 1.0),
                                {1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
  CHECK(r.integrals[2] == doctest::Approx(brute_tail_integral(*q2, 1e-4, 1.0)).epsilon(1e-3));
}

TEST_CASE("membership condition: log kernel diverges") {
  auto r = membership_condition(CovModel::stat_inc_log(1.0), default_membership_cutoffs(1.0));
  CHECK(r.verdict == TailVerdict::Divergent);
  // oracle: I(c) ~ 1/(c log^3(1/c)) near 0 grows without bound
  auto q = make_log_q(1.0);
  CHECK(brute_tail_integral(*q, 1e-6, 1.0) > 10.0 * brute_tail_integral(*q, 1e-4, 1.0));
}

TEST_CASE("membership condition input validation") {
  auto m = CovModel::stat_inc_power(0.4, 1.0);
  CHECK_THROWS_AS(membership_condition(m, {0.1, 0.2, 0.05, 0.01}), std::invalid_argument);
  CHECK_THROWS_AS(membership_condition(m, {0.1, 0.05}), std::invalid_argument);
  CHECK_THROWS_AS(
      membership_condition(CovModel::kernel({Kappa::Kind::Indicator, 0.0}, 1.0),
                           default_membership_cutoffs(1.0)),
      std::invalid_argument);
}

TEST_CASE("model json round trip and strict parsing") {
  auto m = CovModel::from_json(nlohmann::json::parse(R"({"family":"fbm","T":1.0,"H":0.3})"));
  CHECK(m.family() == Family::FBm);
  CHECK(m.hurst() == 0.3);
  auto j = m.to_json();
  CHECK(j["family"] == "fbm");
  CHECK(CovModel::from_json(j).cov(0.3, 0.7) == m.cov(0.3, 0.7));

  auto s = CovModel::from_json(
      nlohmann::json::parse(R"({"family":"statinc","T":1.0,"q_kernel":{"kind":"log"}})"));
  CHECK(s.gamma(0.5) == doctest::Approx(0.5));

  CHECK_THROWS_AS(
      CovModel::from_json(nlohmann::json::parse(R"({"family":"fbm","T":1.0,"H":0.3,"x":1})")),
      std::invalid_argument);
  CHECK_THROWS_AS(
      CovModel::from_json(nlohmann::json::parse(R"({"family":"weird","T":1.0})")),
      std::invalid_argument);
}

TEST_CASE("expected assumption D metadata") {
  CHECK(CovModel::fbm(0.3, 1.0).expected_assumption_d() == true);
  CHECK(CovModel::fbm(0.7, 1.0).expected_assumption_d() == false);
  CHECK(CovModel::bifbm(0.6, 5.0 / 6.0, 1.0).expected_assumption_d() == true);
  CHECK(CovModel::stat_inc_log(1.0).expected_assumption_d() == true);
  CHECK(!CovModel::kernel({Kappa::Kind::Indicator, 0.0}, 1.0)
             .expected_assumption_d()
             .has_value());
}

TEST_CASE("densities agree with finite differences of the covariance itself") {
  // r_inf = d/ds R(s, T); mu = d^2/ds1 ds2 R off the diagonal
  std::vector<CovModel> ms;
  ms.push_back(CovModel::fbm(0.3, 1.0));
  ms.push_back(CovModel::fbm(0.7, 1.0));
  ms.push_back(CovModel::bifbm(0.6, 5.0 / 6.0, 1.0));
  ms.push_back(CovModel::stat_inc_power(0.4, 1.0));
  const double h = 1e-5;
  for (const auto& m : ms) {
    for (double s : {0.21, 0.5, 0.83}) {
      const double fd = (m.cov(s + h, 1.0) - m.cov(s - h, 1.0)) / (2 * h);
      CHECK(m.r_inf_density(s) == doctest::Approx(fd).epsilon(1e-5));
    }
    for (auto [s1, s2] : std::vector<std::pair<double, double>>{
             {0.2, 0.6}, {0.35, 0.4}, {0.7, 0.9}}) {
      const double fd = (m.cov(s1 + h, s2 + h) - m.cov(s1 + h, s2 - h) -
                         m.cov(s1 - h, s2 + h) + m.cov(s1 - h, s2 - h)) /
                        (4 * h * h);
      CHECK(m.mu_offdiag_density(s1, s2) == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}
