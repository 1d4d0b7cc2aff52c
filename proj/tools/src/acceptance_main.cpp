#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "ascsense/acceptance.hpp"

// Usage: ascsense_acceptance [criterion ids...]; prints one line per criterion.
int main(int argc, char** argv) {
  ascsense::AcceptanceOptions opts;
  if (const char* env = std::getenv("ASCSENSE_WORKERS")) opts.workers = std::max(1, std::atoi(env));
  if (const char* env = std::getenv("ASCSENSE_TRIAL_SCALE")) opts.trial_scale = std::atof(env);
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > ascsense::kCriterionCount) {
      std::cerr << "unknown criterion '" << argv[i] << "'\n";
      return 2;
    }
    ids.push_back(id);
  }
  if (ids.empty())
    for (int i = 1; i <= ascsense::kCriterionCount; ++i) ids.push_back(i);
  bool ok = true;
  for (int id : ids) {
    const auto r = ascsense::run_criterion(id, opts);
    std::cout << ascsense::format_result(r) << std::endl;
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}
