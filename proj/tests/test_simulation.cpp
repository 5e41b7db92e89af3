#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "singcov/simulation.hpp"

using namespace singcov;
using namespace singcov::sim;
using models::CovModel;

namespace {

double sample_mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / x.size();
}

double sample_var(const std::vector<double>& x) {
  const double mu = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return s / (x.size() - 1);
}

std::vector<double> column(const PathEnsemble& e, int i) {
  std::vector<double> out(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) out[k] = e.paths[k][i];
  return out;
}

}  // namespace

TEST_CASE("cov matrix for Brownian motion on a 2-step grid") {
  auto m = CovModel::fbm(0.5, 1.0);
  SimGrid g(1.0, 2);
  auto C = cov_matrix(m, g);
  CHECK(C[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(C[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(C[2] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(C[3] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("cov matrix: diagonal equals gamma, symmetry exact") {
  auto m = CovModel::fbm(0.3, 1.0);
  SimGrid g(1.0, 16);
  auto C = cov_matrix(m, g);
  for (int i = 0; i < g.n; ++i) {
    CHECK(C[i * g.n + i] == m.gamma(g.time(i + 1)));
    for (int j = 0; j < g.n; ++j) CHECK(C[i * g.n + j] == C[j * g.n + i]);
  }
}

TEST_CASE("cholesky: identity and hand-factored Brownian 2x2") {
  auto id = cholesky_psd({1, 0, 0, 1}, 2);
  CHECK(id.jitter == 0.0);
  CHECK(id.L[0] == doctest::Approx(1.0));
  CHECK(id.L[3] == doctest::Approx(1.0));

  auto bm = cholesky_psd({0.5, 0.5, 0.5, 1.0}, 2);
  const double r = std::sqrt(0.5);
  CHECK(bm.jitter == 0.0);
  CHECK(bm.L[0] == doctest::Approx(r).epsilon(1e-14));
  CHECK(bm.L[1] == 0.0);
  CHECK(bm.L[2] == doctest::Approx(r).epsilon(1e-14));
  CHECK(bm.L[3] == doctest::Approx(r).epsilon(1e-14));
}

TEST_CASE("cholesky: zero matrix factors as L = 0 with zero jitter") {
  auto z = cholesky_psd(std::vector<double>(9, 0.0), 3);
  CHECK(z.jitter == 0.0);
  for (double v : z.L) CHECK(v == 0.0);
}

TEST_CASE("cholesky: indefinite matrix raises NotPSD") {
  CHECK_THROWS_AS(cholesky_psd({1.0, 2.0, 2.0, 1.0}, 2), NotPSD);
}

TEST_CASE("jitter stays at zero for in-scope models up to n = 512") {
  for (auto m : {CovModel::fbm(0.3, 1.0), CovModel::fbm(0.7, 1.0),
                 CovModel::bifbm(0.6, 5.0 / 6.0, 1.0), CovModel::stat_inc_log(1.0)}) {
    SimGrid g(1.0, 512);
    auto C = cov_matrix(m, g);
    double mean_diag = 0.0;
    for (int i = 0; i < g.n; ++i) mean_diag += C[i * g.n + i];
    mean_diag /= g.n;
    auto chol = cholesky_psd(C, g.n);
    CHECK(chol.jitter <= 1e-8 * mean_diag);
  }
}

TEST_CASE("same seed reproduces the ensemble bit-exactly, any thread count") {
  auto m = CovModel::fbm(0.3, 1.0);
  SimGrid g(1.0, 32);
  auto a = sample_paths(m, g, 9, 42, {false, 1});
  auto b = sample_paths(m, g, 9, 42, {false, 4});
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    for (int i = 0; i <= g.n; ++i) CHECK(a.paths[k][i] == b.paths[k][i]);
  auto c = sample_paths(m, g, 9, 43, {false, 1});
  CHECK(a.paths[0][g.n] != c.paths[0][g.n]);
}

TEST_CASE("paths start at zero, mean and variance match the model") {
  auto m = CovModel::fbm(0.3, 1.0);
  SimGrid g(1.0, 64);
  const int mpaths = 50000;
  auto e = sample_paths(m, g, mpaths, 7, {false, 4});
  for (std::size_t k = 0; k < e.size(); k += 999) CHECK(e.paths[k][0] == 0.0);

  for (int i : {16, 32, 64}) {
    auto xs = column(e, i);
    const double g_t = m.gamma(g.time(i));
    CHECK(std::abs(sample_mean(xs)) <= 3.0 * std::sqrt(g_t / mpaths));
    const double v = sample_var(xs);
    CHECK(std::abs(v - g_t) <= 3.0 * g_t * std::sqrt(2.0 / (mpaths - 1)));
  }
}

TEST_CASE("empirical covariance matches cov at random grid pairs within 4 SE") {
  auto m = CovModel::bifbm(0.6, 5.0 / 6.0, 1.0);
  SimGrid g(1.0, 64);
  const int mpaths = 20000;
  auto e = sample_paths(m, g, mpaths, 11, {false, 4});
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<int> pick(1, g.n);
  for (int rep = 0; rep < 5; ++rep) {
    const int i = pick(gen), j = pick(gen);
    auto xi = column(e, i);
    auto xj = column(e, j);
    const double mi = sample_mean(xi), mj = sample_mean(xj);
    double cij = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) cij += (xi[k] - mi) * (xj[k] - mj);
    cij /= (mpaths - 1);
    const double truth = m.cov(g.time(i), g.time(j));
    // Gaussian: Var(cov_hat) ~ (var_i var_j + cov^2)/m
    const double se =
        std::sqrt((m.gamma(g.time(i)) * m.gamma(g.time(j)) + truth * truth) / mpaths);
    CHECK(std::abs(cij - truth) <= 4.0 * se);
  }
}

TEST_CASE("weak stationary increments: Var(X_{t+h} - X_t) = Q(h)") {
  auto m = CovModel::stat_inc_log(1.0);
  SimGrid g(1.0, 64);
  const int mpaths = 20000;
  auto e = sample_paths(m, g, mpaths, 13, {false, 4});
  const auto& q = m.q_kernel();
  for (int i : {8, 24}) {
    for (int h : {4, 16}) {
      std::vector<double> inc(e.size());
      for (std::size_t k = 0; k < e.size(); ++k)
        inc[k] = e.paths[k][i + h] - e.paths[k][i];
      const double v = sample_var(inc);
      const double ref = q.Q(g.time(h));
      CHECK(std::abs(v - ref) <= 4.0 * ref * std::sqrt(2.0 / (mpaths - 1)));
    }
  }
}

TEST_CASE("antithetic pairing negates the driving normals") {
  auto m = CovModel::fbm(0.5, 1.0);
  SimGrid g(1.0, 16);
  auto e = sample_paths(m, g, 8, 5, {true, 1});
  for (std::size_t k = 0; k + 1 < e.size(); k += 2)
    for (int i = 0; i <= g.n; ++i)
      CHECK(e.paths[k][i] == doctest::Approx(-e.paths[k + 1][i]).epsilon(1e-12));
}

TEST_CASE("kernel paths: kappa = 1 gives Brownian motion") {
  SimGrid g(1.0, 128);
  const int mpaths = 20000;
  auto e = sample_kernel_path([](double) { return 1.0; }, g, mpaths, 21, {false, 4});
  auto xT = column(e, g.n);
  const double v = sample_var(xT);
  CHECK(std::abs(v - 1.0) <= 3.0 * std::sqrt(2.0 / (mpaths - 1)));
  // the path is the running sum of its own increments
  for (int i = 1; i <= g.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < i; ++j) s += e.increments[0][j];
    CHECK(e.paths[0][i] == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("kernel paths: power kappa variance approaches t^2H/(2H)") {
  const double H = 0.3;
  SimGrid g(1.0, 256);
  const int mpaths = 20000;
  auto e = sample_kernel_path([&](double u) { return std::pow(u, H - 0.5); }, g, mpaths, 33,
                              {false, 4});
  const double v = sample_var(column(e, g.n));
  const double ref = 1.0 / (2.0 * H);
  CHECK(std::abs(v - ref) <= 0.05 * ref);
}

TEST_CASE("kernel path reproducibility") {
  SimGrid g(1.0, 32);
  auto a = sample_kernel_path([](double u) { return 1.0 - u; }, g, 1, 3, {});
  auto b = sample_kernel_path([](double u) { return 1.0 - u; }, g, 1, 3, {});
  for (int i = 0; i <= g.n; ++i) CHECK(a.paths[0][i] == b.paths[0][i]);
}

TEST_CASE("csv export carries one header row and one path per line") {
  auto m = CovModel::fbm(0.5, 1.0);
  SimGrid g(1.0, 4);
  auto e = sample_paths(m, g, 3, 1, {});
  std::ostringstream os;
  e.write_csv(os);
  const std::string s = os.str();
  CHECK(s.rfind("t_0,t_1,t_2,t_3,t_4\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 4);
  auto meta = e.metadata();
  CHECK(meta["n"] == 4);
  CHECK(meta["m"] == 3);
  CHECK(meta["seed"] == 1);
}
