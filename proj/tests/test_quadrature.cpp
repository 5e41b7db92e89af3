#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "singcov/quadrature.hpp"

using namespace singcov::quad;

TEST_CASE("constant on [0,1]") {
  auto r = integrate_1d([](double) { return 1.0; }, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.err_estimate >= 0.0);
  CHECK(r.cells >= 1);
}

TEST_CASE("x^2 on [0,1] is exact on a single cell") {
  auto r = integrate_1d([](double x) { return x * x; }, 0.0, 1.0);
  CHECK(std::abs(r.value - 1.0 / 3.0) <= 1e-15);
}

TEST_CASE("degree <= 5 polynomials integrate to machine precision on one cell") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    double c[6];
    for (double& x : c) x = U(gen);
    auto f = [&](double x) {
      double y = 0.0;
      for (int k = 5; k >= 0; --k) y = y * x + c[k];
      return y;
    };
    double exact = 0.0;
    for (int k = 0; k <= 5; ++k) exact += c[k] / (k + 1);
    auto r = integrate_1d(f, 0.0, 1.0);
    CHECK(std::abs(r.value - exact) <= 1e-13 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("x^-1/2 with singular-left flag") {
  Quad1dOptions opts;
  opts.singular_left = true;
  auto r = integrate_1d([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, {}, opts);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(r.err_estimate <= std::max(1e-10, 1e-6 * 2.0) * 1.0001);
}

TEST_CASE("(1-x)^-0.3 with singular-right flag") {
  Quad1dOptions opts;
  opts.singular_right = true;
  auto r = integrate_1d([](double x) { return std::pow(1.0 - x, -0.3); }, 0.0, 1.0, {}, opts);
  CHECK(r.value == doctest::Approx(1.0 / 0.7).epsilon(1e-6));
}

TEST_CASE("non-integrable endpoint is reported, not silently summed") {
  Quad1dOptions opts;
  opts.singular_left = true;
  CHECK_THROWS_AS(integrate_1d([](double x) { return 1.0 / x; }, 0.0, 1.0, {}, opts),
                  NonConvergence);
}

TEST_CASE("NaN inside the domain raises NonFinite") {
  CHECK_THROWS_AS(
      integrate_1d([](double x) { return x < 0.5 ? 1.0 : std::nan(""); }, 0.0, 1.0),
      NonFinite);
}

TEST_CASE("linearity on random polynomial pairs") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Tolerances tol;
  for (int rep = 0; rep < 10; ++rep) {
    double a0 = U(gen), a1 = U(gen), a2 = U(gen);
    double b0 = U(gen), b1 = U(gen), b2 = U(gen);
    double alpha = U(gen), beta = U(gen);
    auto f = [&](double x) { return a0 + a1 * x + a2 * x * x * x; };
    auto g = [&](double x) { return b0 + b1 * x * x + b2 * x * x * x * x; };
    auto fg = [&](double x) { return alpha * f(x) + beta * g(x); };
    double lhs = integrate_1d(fg, 0.0, 2.0, tol).value;
    double rhs = alpha * integrate_1d(f, 0.0, 2.0, tol).value +
                 beta * integrate_1d(g, 0.0, 2.0, tol).value;
    double budget = 2.0 * std::max(tol.abs, tol.rel * std::abs(lhs));
    CHECK(std::abs(lhs - rhs) <= budget + 1e-13);
  }
}

TEST_CASE("refinement monotonicity on the closed-form set") {
  struct Case {
    std::function<double(double)> f;
    double a, b, exact;
    Quad1dOptions opts;
  };
  Quad1dOptions sing_left;
  sing_left.singular_left = true;
  std::vector<Case> cases = {
      {[](double x) { return std::exp(x) * std::sin(3 * x); }, 0.0, 3.0,
       (std::exp(3.0) * (std::sin(9.0) - 3 * std::cos(9.0)) + 3.0) / 10.0, {}},
      {[](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 2.0, sing_left},
      {[](double x) { return std::pow(x, -0.25); }, 0.0, 1.0, 1.0 / 0.75, sing_left},
  };
  for (const auto& c : cases) {
    double prev_err = std::numeric_limits<double>::infinity();
    for (double rel : {1e-4, 5e-5, 2.5e-5, 1.25e-5}) {
      Tolerances tol;
      tol.rel = rel;
      tol.abs = 1e-14;
      auto r = integrate_1d(c.f, c.a, c.b, tol, c.opts);
      double err = std::abs(r.value - c.exact);
      CHECK(err <= prev_err + 1e-15);
      prev_err = err;
    }
  }
}

TEST_CASE("2-d: constant over the unit square") {
  auto r = integrate_2d_offdiag([](double, double) { return 1.0; }, 1.0, 0.0);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("2-d: |s1-s2|^-1/2 over the unit square") {
  auto F = [](double s1, double s2) { return 1.0 / std::sqrt(std::abs(s1 - s2)); };
  auto r = integrate_2d_offdiag(F, 1.0, -0.5);
  CHECK(r.value == doctest::Approx(8.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("2-d: fBm-type gap density integrates to gamma(T)/(H(2H-1)) when summable") {
  // 2H-2 > -1 needed for the bare density over the square; H = 0.75 gives
  // int int |s1-s2|^(2H-2) = T^(2H)/(H(2H-1))
  const double H = 0.75;
  auto F = [&](double s1, double s2) { return std::pow(std::abs(s1 - s2), 2 * H - 2); };
  auto r = integrate_2d_offdiag(F, 1.0, 2 * H - 2);
  CHECK(r.value == doctest::Approx(1.0 / (H * (2 * H - 1))).epsilon(1e-6));
}

TEST_CASE("2-d: gap exponent -1.4 alone is not summable over the square") {
  const double H = 0.3;
  auto F = [&](double s1, double s2) { return std::pow(std::abs(s1 - s2), 2 * H - 2); };
  CHECK_THROWS_AS(integrate_2d_offdiag(F, 1.0, 2 * H - 2), NonConvergence);
}

TEST_CASE("2-d: sing_exponent at or below -2 is inadmissible") {
  auto F = [](double s1, double s2) { return std::pow(std::abs(s1 - s2), -2.0); };
  CHECK_THROWS_AS(integrate_2d_offdiag(F, 1.0, -2.0), InadmissibleSingularity);
  CHECK_THROWS_AS(integrate_2d_offdiag(F, 1.0, -2.5), InadmissibleSingularity);
}

TEST_CASE("2-d: step-jump times singular gap density, split at the jump lines") {
  // (f(s1)-f(s2))^2 * H(2H-1)|s1-s2|^(2H-2) with f = 1_[0,c]; closed form
  // from the indicator-norm algebra: sum = 2(1/2 - c^(2H)) * H(2H-1)/(H(2H-1))
  const double H = 0.3, c = 0.5, T = 1.0;
  auto step = [&](double x) { return x <= c ? 1.0 : 0.0; };
  auto F = [&](double s1, double s2) {
    const double d = step(s1) - step(s2);
    return d * d * std::pow(std::abs(s1 - s2), 2 * H - 2);
  };
  Quad2dOptions opts;
  opts.v_breakpoints = {c};
  opts.u_breakpoints = {c, T - c};
  auto r = integrate_2d_offdiag(F, T, 2 * H - 2, {}, opts);
  // direct antiderivative: 2 * int_0^c ds1 int_c^1 ds2 (s2-s1)^(2H-2)
  const double p = 2 * H;
  const double exact = 2.0 * (1.0 - std::pow(c, p) - std::pow(T - c, p)) / (p * (p - 1));
  CHECK(r.value == doctest::Approx(exact).epsilon(1e-5));
}
