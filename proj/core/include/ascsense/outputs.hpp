#pragma once

#include <string>
#include <vector>

#include "ascsense/harness.hpp"

namespace ascsense {

/// Per (point, method) summary: medians and type-7 quartiles of the trial metrics.
struct AggregateRow {
  int point = 0;
  Method method = Method::prop_sub;
  double snr_db = 0.0;
  double dyn_prop = 0.0;
  double tau_sep = 0.0;
  int trials = 0;
  int failed = 0;  // rows with an error flag
  double rel_to_q1 = 0.0, rel_to_median = 0.0, rel_to_q3 = 0.0;
  double abs_to_q1 = 0.0, abs_to_median = 0.0, abs_to_q3 = 0.0;
  double delay_q1 = 0.0, delay_median = 0.0, delay_q3 = 0.0;  // absolute delay error, m
  double delay_rel_median = 0.0;
  double gamma_q1 = 0.0, gamma_median = 0.0, gamma_q3 = 0.0;  // over target rows
  double gamma_ideal_median = 0.0;
  double resolution = 0.0;
};

std::vector<AggregateRow> aggregate(const SweepTable& table);

/// Writes trials.csv, targets.csv, aggregates.csv and timings.csv into `dir` (created if
/// missing). Timings are kept apart so the other files are reproducible byte for byte.
void emit_outputs(const SweepTable& table, const std::string& dir);

/// Parses trials.csv back into records (runtime is not stored there and reads as 0).
std::vector<MetricRecord> read_trials_csv(const std::string& path);

}  // namespace ascsense
