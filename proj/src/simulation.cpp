#include "singcov/simulation.hpp"

#include <cmath>
#include <ostream>

#include "singcov/parallel.hpp"
#include "singcov/rng.hpp"

namespace singcov::sim {

SimGrid::SimGrid(double horizon, int steps) : T(horizon), n(steps) {
  if (!(T > 0.0)) throw std::invalid_argument("SimGrid: horizon must be positive");
  if (n < 2) throw std::invalid_argument("SimGrid: need at least 2 steps");
}

void PathEnsemble::write_csv(std::ostream& os) const {
  for (int i = 0; i <= grid.n; ++i) os << (i ? "," : "") << "t_" << i;
  os << "\n";
  os.precision(17);
  for (const auto& p : paths) {
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
    os << "\n";
  }
}

nlohmann::json PathEnsemble::metadata() const {
  return {{"model", model_descriptor},
          {"seed", master_seed},
          {"n", grid.n},
          {"T", grid.T},
          {"m", paths.size()},
          {"jitter", jitter}};
}

std::vector<double> cov_matrix(const models::CovModel& model, const SimGrid& grid) {
  const int n = grid.n;
  std::vector<double> C(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = model.cov(grid.time(i + 1), grid.time(j + 1));
      C[static_cast<std::size_t>(i) * n + j] = v;
      C[static_cast<std::size_t>(j) * n + i] = v;
    }
  }
  return C;
}

namespace {

bool try_cholesky(std::vector<double>& A, int n, double zero_tol) {
  for (int j = 0; j < n; ++j) {
    double d = A[static_cast<std::size_t>(j) * n + j];
    for (int k = 0; k < j; ++k) {
      const double l = A[static_cast<std::size_t>(j) * n + k];
      d -= l * l;
    }
    if (d < -zero_tol) return false;
    if (d <= zero_tol) {
      // zero pivot: null direction, zero the column
      A[static_cast<std::size_t>(j) * n + j] = 0.0;
      for (int i = j + 1; i < n; ++i) A[static_cast<std::size_t>(i) * n + j] = 0.0;
      continue;
    }
    const double ljj = std::sqrt(d);
    A[static_cast<std::size_t>(j) * n + j] = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = A[static_cast<std::size_t>(i) * n + j];
      for (int k = 0; k < j; ++k) {
        s -= A[static_cast<std::size_t>(i) * n + k] * A[static_cast<std::size_t>(j) * n + k];
      }
      A[static_cast<std::size_t>(i) * n + j] = s / ljj;
    }
  }
  // wipe the upper triangle
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) A[static_cast<std::size_t>(i) * n + j] = 0.0;
  return true;
}

}  // namespace

CholeskyResult cholesky_psd(const std::vector<double>& C, int n) {
  if (C.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("cholesky_psd: matrix size mismatch");
  double mean_diag = 0.0;
  for (int i = 0; i < n; ++i) mean_diag += C[static_cast<std::size_t>(i) * n + i];
  mean_diag /= std::max(1, n);
  const double scale = std::max(mean_diag, 0.0);
  const double zero_tol = 1e-12 * std::max(scale, 1e-300);

  for (double ladder : {0.0, 1e-14, 1e-12, 1e-10, 1e-8, 1e-6}) {
    const double delta = ladder * scale;
    std::vector<double> A = C;
    for (int i = 0; i < n; ++i) A[static_cast<std::size_t>(i) * n + i] += delta;
    if (try_cholesky(A, n, zero_tol)) return {std::move(A), delta};
  }
  throw NotPSD("cholesky_psd: jitter ladder exhausted");
}

PathEnsemble sample_paths(const models::CovModel& model, const SimGrid& grid, int m,
                          std::uint64_t seed, const SampleOptions& opts) {
  if (m < 1) throw std::invalid_argument("sample_paths: m >= 1 required");
  const int n = grid.n;
  auto C = cov_matrix(model, grid);
  auto chol = cholesky_psd(C, n);

  PathEnsemble ens;
  ens.grid = grid;
  ens.master_seed = seed;
  ens.model_descriptor = model.to_json();
  ens.jitter = chol.jitter;
  ens.paths.assign(m, std::vector<double>(n + 1, 0.0));

  const auto& L = chol.L;
  parallel_for(
      static_cast<std::size_t>(m),
      [&](std::size_t k) {
        const std::uint64_t stream = opts.antithetic ? k / 2 : k;
        CounterRng rng = CounterRng::substream(seed, stream);
        std::vector<double> z(n);
        for (int j = 0; j < n; ++j) z[j] = rng.next_normal();
        if (opts.antithetic && (k % 2 == 1)) {
          for (double& x : z) x = -x;
        }
        auto& path = ens.paths[k];
        for (int i = 0; i < n; ++i) {
          double acc = 0.0;
          const double* row = &L[static_cast<std::size_t>(i) * n];
          for (int j = 0; j <= i; ++j) acc += row[j] * z[j];
          path[i + 1] = acc;
        }
      },
      opts.threads);
  return ens;
}

PathEnsemble sample_kernel_path(const std::function<double(double)>& kappa, const SimGrid& grid,
                                int m, std::uint64_t seed, const SampleOptions& opts) {
  if (m < 1) throw std::invalid_argument("sample_kernel_path: m >= 1 required");
  const int n = grid.n;
  const double dt = grid.dt();
  const double sq_dt = std::sqrt(dt);

  // kappa evaluated at the cell midpoints, shared across paths
  std::vector<double> kmid(n);
  for (int d = 0; d < n; ++d) kmid[d] = kappa((d + 0.5) * dt);

  PathEnsemble ens;
  ens.grid = grid;
  ens.master_seed = seed;
  ens.model_descriptor = {{"family", "kernel"}, {"T", grid.T}};
  ens.paths.assign(m, std::vector<double>(n + 1, 0.0));
  ens.increments.assign(m, std::vector<double>(n, 0.0));

  parallel_for(
      static_cast<std::size_t>(m),
      [&](std::size_t k) {
        const std::uint64_t stream = opts.antithetic ? k / 2 : k;
        CounterRng rng = CounterRng::substream(seed, stream);
        auto& dW = ens.increments[k];
        for (int j = 0; j < n; ++j) dW[j] = sq_dt * rng.next_normal();
        if (opts.antithetic && (k % 2 == 1)) {
          for (double& x : dW) x = -x;
        }
        auto& path = ens.paths[k];
        for (int i = 1; i <= n; ++i) {
          double acc = 0.0;
          // X_{t_i} = sum_{j<i} kappa(t_i - t_{j+1/2}) dW_j
          for (int j = 0; j < i; ++j) acc += kmid[i - 1 - j] * dW[j];
          path[i] = acc;
        }
      },
      opts.threads);
  return ens;
}

}  // namespace singcov::sim
