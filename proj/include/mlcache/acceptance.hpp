#pragma once

#include <ostream>
#include <string>
#include <vector>

// The end-to-end acceptance suite, shared by `selftest` and the test binary.
namespace mlcache::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

inline constexpr int kNumCriteria = 12;

/// Runs one criterion (1..12). Exceptions are caught and reported as FAIL.
CriterionResult run_criterion(int id);

/// Runs every criterion, writing one "PASS|FAIL <id> <name>: <detail>" line
/// per criterion to `report` as it completes.
std::vector<CriterionResult> run_all(std::ostream& report);

std::string format(const CriterionResult& r);

}  // namespace mlcache::acceptance
