// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Usage: mlcache_acceptance [id...]
#include <cstdlib>
#include <iostream>
#include <vector>

#include "mlcache/acceptance.hpp"

int main(int argc, char** argv) {
  using namespace mlcache::acceptance;
  std::vector<CriterionResult> results;
  if (argc > 1) {
    for (int k = 1; k < argc; ++k) {
      results.push_back(run_criterion(std::atoi(argv[k])));
      std::cout << format(results.back()) << std::endl;
    }
  } else {
    results = run_all(std::cout);
  }
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
