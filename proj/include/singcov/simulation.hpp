#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "singcov/models.hpp"

namespace singcov::sim {

struct SimGrid {
  double T = 1.0;
  int n = 256;

  SimGrid() = default;
  SimGrid(double horizon, int steps);
  double dt() const { return T / n; }
  double time(int i) const { return T * i / n; }
};

// Simulated paths on a uniform grid: m rows of n+1 values, every path starts
// at zero. Regenerating with the same master seed reproduces the ensemble
// bit-exactly, independently of the worker count.
struct PathEnsemble {
  SimGrid grid;
  std::vector<std::vector<double>> paths;       // m x (n+1)
  std::vector<std::vector<double>> increments;  // driving dW per path (kernel simulation only)
  std::uint64_t master_seed = 0;
  nlohmann::json model_descriptor;
  double jitter = 0.0;

  std::size_t size() const { return paths.size(); }
  void write_csv(std::ostream& os) const;
  nlohmann::json metadata() const;
};

// C[i][j] = cov(t_{i+1}, t_{j+1}); index 0 of the grid is omitted (X_0 = 0)
std::vector<double> cov_matrix(const models::CovModel& model, const SimGrid& grid);

struct CholeskyResult {
  std::vector<double> L;  // row-major lower factor, n x n
  double jitter = 0.0;    // delta with L L^T = C + delta I
};

struct NotPSD : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// PSD Cholesky with a jitter ladder delta in {0, 1e-14, ..., 1e-6} * mean
// diagonal; zero pivots produce zero columns.
CholeskyResult cholesky_psd(const std::vector<double>& C, int n);

struct SampleOptions {
  bool antithetic = false;  // path 2j+1 reuses the normals of path 2j negated
  unsigned threads = 1;
};

PathEnsemble sample_paths(const models::CovModel& model, const SimGrid& grid, int m,
                          std::uint64_t seed, const SampleOptions& opts = {});

// Moving-average discretization of X_t = int_0^t kappa(t-s) dW_s with
// midpoint kernel evaluation; the driving increments are retained per path.
PathEnsemble sample_kernel_path(const std::function<double(double)>& kappa, const SimGrid& grid,
                                int m, std::uint64_t seed, const SampleOptions& opts = {});

}  // namespace singcov::sim
