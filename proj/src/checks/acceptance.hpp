#pragma once

#include <functional>
#include <string>
#include <vector>

namespace icp::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Criterion {
  int id;
  std::string name;
  std::function<CriterionResult()> run;
};

// The ten exit criteria, in order. Tolerances and thresholds are fixed in
// the implementations.
std::vector<Criterion> criteria();

CriterionResult coverage_exchangeable();      // 1
CriterionResult full_conformal_oracle();      // 2
CriterionResult jackknife_oracle();           // 3
CriterionResult lasso_correctness();          // 4
CriterionResult adaptivity_heteroskedastic(); // 5
CriterionResult containment_monotonicity();   // 6
CriterionResult degenerate_collapse();        // 7
CriterionResult structural_golden();          // 8
CriterionResult cost_ordering();              // 9
CriterionResult metric_arithmetic();          // 10

// Runs the criteria whose ids are listed (all when empty), printing one
// PASS/FAIL line each. Returns the number of failures.
int run_and_report(const std::vector<int>& ids = {});

}  // namespace icp::acceptance
