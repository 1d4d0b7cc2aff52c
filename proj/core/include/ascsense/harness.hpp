#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ascsense/baselines.hpp"
#include "ascsense/param_estimation.hpp"
#include "ascsense/residual_compensation.hpp"

namespace ascsense {

enum class Method { prop_sub, prop_cov, simil, evlp, ifft, synchronized };

const char* to_string(Method m);
Method parse_method(const std::string& name);
std::vector<Method> all_methods();

struct CalibrationSpec {
  int T_s = 100;
  double timestamp_noise_std = 2.5e-9;  // s
  double clock_error_span = 50e-9;      // s; the per-trial clock error is uniform in +-span
  double clock_jitter = 0.0;            // s
  double search_range = 100e-9;         // s
};

struct ExperimentConfig {
  SystemConfig system;
  double array_spacing = 0.5;  // wavelengths
  ScenarioSpec scenario;

  std::vector<double> snr_db{25.0};
  std::vector<double> dyn_prop{0.3};
  std::vector<double> tau_sep;  // m; empty: no two-target layout

  int trials = 200;
  std::vector<Method> methods = all_methods();
  std::uint64_t seed = 1;
  int workers = 1;

  AlignmentOptions align;
  CalibrationSpec calibration;

  double aoa_min_deg = -90.0;
  double aoa_max_deg = 90.0;
  double aoa_step_deg = 1.0;
  int peak_separation = 5;             // bins
  bool mdl_target_count = false;       // L_d = d_hat - 1 instead of the true count
  double delay_tolerance = 0.5;        // m, success rule when tau_sep is not set

  void validate() const;
};

ArrayGeometry make_geometry(const ExperimentConfig& cfg);

struct SweepPoint {
  int index = 0;
  double snr_db = 0.0;
  double dyn_prop = 0.0;
  std::optional<double> tau_sep;  // m
};

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg);

struct MetricRecord {
  int point = 0;
  int trial = 0;
  Method method = Method::prop_sub;
  double snr_db = 0.0;
  double dyn_prop = 0.0;
  double tau_sep = 0.0;       // m, NaN when unset
  double rel_to_error = 0.0;  // m, median over snapshots
  double abs_to_error = 0.0;  // m
  double delay_rel_error = 0.0;  // m, median over targets
  double delay_abs_error = 0.0;  // m
  bool resolved = false;
  double gamma_db = 0.0;         // median over targets
  double gamma_ideal_db = 0.0;
  int n_peaks = 0;
  std::string flags;
  double runtime = 0.0;  // s; reported separately, not part of the tidy table
};

struct TargetRecord {
  int point = 0;
  int trial = 0;
  Method method = Method::prop_sub;
  int target = 0;
  double true_range = 0.0;  // m
  double est_range = 0.0;   // m, NaN if unmatched
  double delay_rel_error = 0.0;
  double delay_abs_error = 0.0;
  double true_aoa_deg = 0.0;
  double est_aoa_deg = 0.0;
  double aoa_error_deg = 0.0;
  double gamma_db = 0.0;
  double gamma_ideal_db = 0.0;
};

struct SweepTable {
  std::vector<SweepPoint> points;
  std::vector<MetricRecord> trials;   // canonical (point, trial, method) order
  std::vector<TargetRecord> targets;
};

struct PipelineOptions {
  AlignmentOptions align;
  RVec angles;  // empty: 1-D delay spectrum
  int n_targets = 1;
  bool mdl_target_count = false;
  int peak_separation = 5;
};

struct PipelineOutput {
  AlignmentResult alignment;
  double residual = 0.0;  // s
  int subspace_dimension = 0;
  PeakList peaks;
  TargetEstimates targets;
};

/// One CPI through alignment, residual compensation, modified MUSIC and CGS recovery.
/// `synchronized` skips alignment and compensation and expects an offset-free CPI and the
/// true static response as `ref`.
PipelineOutput run_pipeline(Method method, const CsiMatrix& raw, const ReferenceStaticResponse& ref,
                            const SystemConfig& cfg, const ArrayGeometry& geom,
                            const PipelineOptions& opts);

PipelineOptions pipeline_options(const ExperimentConfig& cfg);

/// Everything one (point, trial) draws: scenario, raw CPI and the calibrated reference.
struct TrialInputs {
  SystemConfig system;  // noise_power set from the point's SNR
  ArrayGeometry geometry;
  Scenario scenario;
  CsiMatrix raw;
  ReferenceStaticResponse reference;  // empty if not requested or if calibration failed
  std::string reference_error;
};

TrialInputs synthesize_trial(const ExperimentConfig& cfg, const SweepPoint& pt, int trial,
                             bool with_reference = true);

/// Offset-free CPI with the same noise realization as `in.raw`.
CsiMatrix synchronized_cpi(const ExperimentConfig& cfg, const SweepPoint& pt, int trial,
                           const TrialInputs& in);

/// Full Monte Carlo sweep. Per-trial failures become flagged rows.
SweepTable run_sweep(const ExperimentConfig& cfg);

/// Fraction of successful rows for one (point, method).
double resolution_probability(const SweepTable& table, int point, Method method);

}  // namespace ascsense
