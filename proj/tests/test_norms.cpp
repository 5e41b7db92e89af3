#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "singcov/norms.hpp"

using namespace singcov;
using namespace singcov::norms;
using models::CovModel;

namespace {

PiecewiseFn random_step(std::mt19937_64& gen, double T) {
  std::uniform_real_distribution<double> U(0.05, 0.95);
  std::uniform_real_distribution<double> V(-2.0, 2.0);
  std::vector<double> b = {U(gen) * T, U(gen) * T, U(gen) * T};
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  std::vector<double> v;
  for (std::size_t i = 0; i < b.size(); ++i) v.push_back(V(gen));
  v.back() = 0.0;  // compact support
  return PiecewiseFn::step(b, v);
}

}  // namespace

TEST_CASE("indicator norm reproduces the variance, Brownian case") {
  auto m = CovModel::fbm(0.5, 1.0);
  auto f = PiecewiseFn::indicator(0.0, 0.5);
  CHECK(norm_H_sq(f, m) == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("indicator norm reproduces gamma for fbm H=0.3") {
  auto m = CovModel::fbm(0.3, 1.0);
  auto f = PiecewiseFn::indicator(0.0, 0.5);
  CHECK(norm_H_sq(f, m) == doctest::Approx(std::pow(0.5, 0.6)).epsilon(1e-3));
}

TEST_CASE("the constant function has norm gamma(T)") {
  for (double H : {0.3, 0.5, 0.7}) {
    auto m = CovModel::fbm(H, 1.0);
    auto one = PiecewiseFn::constant(1.0);
    CHECK(norm_H_sq(one, m) == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("norm_R equals norm_H under Assumption D") {
  std::mt19937_64 gen(5);
  auto m = CovModel::fbm(0.3, 1.0);
  for (int rep = 0; rep < 6; ++rep) {
    auto f = random_step(gen, 1.0);
    const double h = norm_H_sq(f, m);
    const double r = norm_R_sq(f, m);
    CHECK(r == doctest::Approx(h).epsilon(1e-9));
  }
}

TEST_CASE("positive mu splits the two norms for H > 1/2") {
  auto m = CovModel::fbm(0.7, 1.0);
  auto f = PiecewiseFn::indicator(0.0, 0.5);
  const double h = norm_H_sq(f, m);
  const double r = norm_R_sq(f, m);
  CHECK(r > h);
  // both sides have closed forms here
  CHECK(h == doctest::Approx(std::pow(0.5, 1.4)).epsilon(1e-4));
  CHECK(r == doctest::Approx(0.5 + (0.5 - std::pow(0.5, 1.4))).epsilon(1e-4));
}

TEST_CASE("zero function") {
  auto m = CovModel::fbm(0.3, 1.0);
  CHECK(norm_R_sq(PiecewiseFn::zero(), m) == doctest::Approx(0.0));
  CHECK(norm_H_sq(PiecewiseFn::zero(), m) == doctest::Approx(0.0));
}

TEST_CASE("norm_H <= norm_R on random step functions, all families") {
  std::mt19937_64 gen(9);
  std::vector<CovModel> ms;
  ms.push_back(CovModel::fbm(0.3, 1.0));
  ms.push_back(CovModel::fbm(0.7, 1.0));
  ms.push_back(CovModel::bifbm(0.6, 5.0 / 6.0, 1.0));
  ms.push_back(CovModel::stat_inc_log(1.0));
  for (const auto& m : ms) {
    for (int rep = 0; rep < 50; ++rep) {
      auto f = random_step(gen, 1.0);
      CHECK(norm_H_sq(f, m) <= norm_R_sq(f, m) * (1.0 + 1e-9) + 1e-9);
    }
  }
}

TEST_CASE("polarization: inner_H(f,f) equals norm_H_sq(f)") {
  std::mt19937_64 gen(13);
  auto m = CovModel::fbm(0.3, 1.0);
  for (int rep = 0; rep < 4; ++rep) {
    auto f = random_step(gen, 1.0);
    CHECK(inner_H(f, f, m) == doctest::Approx(norm_H_sq(f, m)).epsilon(1e-12));
  }
}

TEST_CASE("indicator inner products reproduce the covariance") {
  auto bm = CovModel::fbm(0.5, 1.0);
  CHECK(inner_H(PiecewiseFn::indicator(0, 0.3), PiecewiseFn::indicator(0, 0.7), bm) ==
        doctest::Approx(0.3).epsilon(1e-4));

  auto m = CovModel::fbm(0.3, 1.0);
  CHECK(inner_H(PiecewiseFn::indicator(0, 0.3), PiecewiseFn::indicator(0, 0.7), m) ==
        doctest::Approx(m.cov(0.3, 0.7)).epsilon(1e-3));
}

TEST_CASE("indicator reproduction grid across models") {
  std::vector<CovModel> ms;
  ms.push_back(CovModel::fbm(0.3, 1.0));
  ms.push_back(CovModel::fbm(0.7, 1.0));
  ms.push_back(CovModel::bifbm(0.6, 5.0 / 6.0, 1.0));
  ms.push_back(CovModel::stat_inc_log(1.0));
  for (const auto& m : ms) {
    for (double s : {0.2, 0.5, 0.9}) {
      for (double t : {0.2, 0.7}) {
        const double lhs =
            inner_H(PiecewiseFn::indicator(0, s), PiecewiseFn::indicator(0, t), m);
        const double rhs = m.cov(s, t);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-3));
      }
    }
  }
}

TEST_CASE("Cauchy-Schwarz and bilinearity of inner_H") {
  std::mt19937_64 gen(31);
  auto m = CovModel::fbm(0.3, 1.0);
  for (int rep = 0; rep < 6; ++rep) {
    auto f = random_step(gen, 1.0);
    auto g = random_step(gen, 1.0);
    const double fg = inner_H(f, g, m);
    const double nf = std::sqrt(std::max(0.0, norm_H_sq(f, m)));
    const double ng = std::sqrt(std::max(0.0, norm_H_sq(g, m)));
    CHECK(std::abs(fg) <= nf * ng + 2e-6 * (1 + nf * ng));

    // bilinearity against a scaled copy: <2f, g> = 2 <f, g>
    std::vector<double> doubled = f.values();
    for (double& x : doubled) x *= 2.0;
    auto f2 = PiecewiseFn::step(f.breakpoints(), doubled);
    CHECK(inner_H(f2, g, m) == doctest::Approx(2.0 * fg).epsilon(2e-6));
  }
}

TEST_CASE("piecewise-linear integrands take the smooth singular exponent") {
  // hat function on [0, 0.8]; continuous, so (f(s1)-f(s2))^2 ~ gap^2 near D
  auto m = CovModel::fbm(0.3, 1.0);
  auto hat = PiecewiseFn::linear({0.0, 0.4, 0.8}, {0.0, 1.0, 0.0});
  const double h = norm_H_sq(hat, m);
  const double r = norm_R_sq(hat, m);
  CHECK(h == doctest::Approx(r).epsilon(1e-7));
  CHECK(h > 0.0);
}

TEST_CASE("tensor norm factorizes") {
  auto m = CovModel::fbm(0.3, 1.0);
  auto f = PiecewiseFn::indicator(0, 0.5);
  const double g05 = std::pow(0.5, 0.6);
  CHECK(norm_2R_sq_tensor(f, f, f, f, m) == doctest::Approx(g05 * g05).epsilon(1e-3));
  CHECK(norm_2R_sq_tensor(f, f, PiecewiseFn::zero(), f, m) == doctest::Approx(0.0));
  auto g = PiecewiseFn::indicator(0, 0.25);
  CHECK(norm_2R_sq_tensor(f, g, f, g, m) ==
        doctest::Approx(norm_R_sq(f, m) * norm_R_sq(g, m)).epsilon(1e-6));
}

TEST_CASE("planar norm: single rectangle") {
  auto bm = CovModel::fbm(0.5, 1.0);
  auto h = PlanarStepFn::rectangle(0.5, 0.5);
  CHECK(norm_2R_sq_planar(h, bm) == doctest::Approx(0.25).epsilon(1e-12));

  auto m = CovModel::fbm(0.3, 1.0);
  auto h2 = PlanarStepFn::rectangle(0.4, 0.7);
  CHECK(norm_2R_sq_planar(h2, m) ==
        doctest::Approx(m.gamma(0.4) * m.gamma(0.7)).epsilon(1e-12));
  CHECK(norm_2R_sq_planar(PlanarStepFn::zero(), m) == 0.0);
}

TEST_CASE("planar norm: two overlapping rectangles against a direct expansion") {
  auto m = CovModel::fbm(0.3, 1.0);
  // h = 1_(0,a]x(0,b] + 2 * 1_(a1,a2]x(b1,b2]
  PlanarStepFn h({0.0, 0.2, 0.4, 0.6}, {0.0, 0.3, 0.5, 0.8},
                 {{1.0, 1.0, 0.0}, {1.0, 3.0, 2.0}, {0.0, 2.0, 2.0}});
  // oracle: expand E(I2(h)^2) = sum over atoms of R R (independent copies)
  double expect = 0.0;
  for (const auto& a : h.atoms())
    for (const auto& b : h.atoms())
      expect += a.mass * b.mass * m.cov(a.t1, b.t1) * m.cov(a.t2, b.t2);
  CHECK(norm_2R_sq_planar(h, m) == doctest::Approx(expect));
  CHECK(h.planar_variation() > 0.0);
}

TEST_CASE("kernel family is refused by the norm operations") {
  auto ker = CovModel::kernel({models::Kappa::Kind::Indicator, 0.0}, 1.0);
  auto f = PiecewiseFn::indicator(0, 0.5);
  CHECK_THROWS_AS(norm_H_sq(f, ker), std::invalid_argument);
  CHECK_THROWS_AS(inner_H(f, f, ker), std::invalid_argument);
}

TEST_CASE("formal label for non-D models") {
  CHECK(!norms_formal(CovModel::fbm(0.3, 1.0)));
  CHECK(norms_formal(CovModel::fbm(0.7, 1.0)));
  CHECK(norms_formal(CovModel::kernel({models::Kappa::Kind::Indicator, 0.0}, 1.0)));
}

TEST_CASE("piecewise function JSON round trip") {
  auto f = PiecewiseFn::step({0.0, 0.25, 0.5}, {1.0, -2.0, 0.0});
  auto j = f.to_json();
  auto g = PiecewiseFn::from_json(j);
  CHECK(g(0.1) == f(0.1));
  CHECK(g(0.3) == f(0.3));
  CHECK_THROWS_AS(PiecewiseFn::from_json(nlohmann::json::parse(
                      R"({"kind":"step","breakpoints":[0],"values":[1],"zzz":0})")),
                  std::invalid_argument);
}

TEST_CASE("indicator norms for the log kernel match Q at 1e-3") {
  auto m = CovModel::stat_inc_log(1.0);
  for (double t : {0.1, 0.3, 0.6, 0.9}) {
    auto f = PiecewiseFn::indicator(0.0, t);
    CHECK(norm_H_sq(f, m) == doctest::Approx(m.gamma(t)).epsilon(1e-3));
  }
}

TEST_CASE("norm display equals the double Stieltjes integral of R for smooth f") {
  // for piecewise-linear f: int int R(s1,s2) df(s1) df(s2)
  //                       = int int R(s1,s2) f'(s1) f'(s2) ds1 ds2,
  // computed by nested plain quadrature (R is continuous), must match the
  // boundary-minus-double display
  std::vector<CovModel> ms;
  ms.push_back(CovModel::fbm(0.3, 1.0));
  ms.push_back(CovModel::fbm(0.7, 1.0));
  ms.push_back(CovModel::bifbm(0.6, 5.0 / 6.0, 1.0));
  auto hat = PiecewiseFn::linear({0.0, 0.4, 0.8}, {0.0, 1.0, 0.0});
  auto ramp = PiecewiseFn::linear({0.1, 0.5, 0.9}, {0.5, -0.25, 0.0});
  quad::Tolerances tol;
  tol.rel = 1e-8;
  for (const auto& m : ms) {
    for (const auto* fp : {&hat, &ramp}) {
      const auto& f = *fp;
      quad::Quad1dOptions ob;
      ob.breakpoints = f.breakpoints();
      auto outer = [&](double s1) {
        auto inner = [&](double s2) { return m.cov(s1, s2) * f.slope(s2); };
        return f.slope(s1) * quad::integrate_1d(inner, 0.0, 1.0, tol, ob).value;
      };
      double lhs = quad::integrate_1d(outer, 0.0, 1.0, tol, ob).value;
      // jump atom of the ramp at t0 = 0.1 enters the Stieltjes measure
      for (const auto& atom : f.jump_atoms()) {
        auto inner = [&](double s2) { return m.cov(atom.t, s2) * f.slope(s2); };
        lhs += 2.0 * atom.mass * quad::integrate_1d(inner, 0.0, 1.0, tol, ob).value;
        for (const auto& b : f.jump_atoms())
          lhs += atom.mass * b.mass * m.cov(atom.t, b.t);
      }
      CHECK(norm_H_sq(f, m) == doctest::Approx(lhs).epsilon(2e-5));
    }
  }
}
