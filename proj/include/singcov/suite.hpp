#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "singcov/verification.hpp"

namespace singcov::verify {

struct SuiteItem {
  int criterion = 0;  // acceptance criterion number this item belongs to
  std::string label;
  ExperimentReport report;
};

struct SuiteResult {
  std::vector<SuiteItem> items;

  bool criterion_pass(int c) const;
  bool all_pass() const;
  std::vector<int> criteria() const;  // sorted distinct criterion numbers
  nlohmann::json to_json(bool with_timing = true) const;
  void write_csv(std::ostream& os) const;
};

// The full verification bundle run by `suite --preset paper`: every
// quantitative acceptance check with its pinned tolerances.
SuiteResult run_paper_suite(std::uint64_t seed, unsigned threads);

// suite blocks that are not plain dispatcher experiments
ExperimentReport indicator_reproduction_report(const models::CovModel& model, int grid_points);
ExperimentReport hermite_wick_report();
ExperimentReport assumption_checker_report();
ExperimentReport membership_condition_report();

}  // namespace singcov::verify
