#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ascsense {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240601;
  int workers = 1;
  /// Multiplies every Monte Carlo trial count (rounded, at least 1). 1.0 is the full suite.
  double trial_scale = 1.0;
};

inline constexpr int kCriterionCount = 8;

/// Runs one criterion (1..8). Never throws for a failing check; library errors are reported
/// as failures with the message in `detail`.
CriterionResult run_criterion(int id, const AcceptanceOptions& opts);

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids,
                                            const AcceptanceOptions& opts);

/// "criterion N [name]: PASS|FAIL (detail) t=..s"
std::string format_result(const CriterionResult& r);

}  // namespace ascsense
