#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ascsense/common.hpp"

namespace ascsense {

struct SystemConfig {
  int K = 32;                 // subcarriers
  double delta_f = 2.5e6;     // Hz
  int T = 100;                // snapshots per CPI
  double delta_t = 4e-3;      // s
  int M = 1;                  // receive antennas
  double carrier_freq = 5.5e9;
  double noise_power = 0.0;   // per complex sample
  double cpi_limit = 0.5;     // s, upper bound on T * delta_t

  double alias_period() const { return 1.0 / delta_f; }
  int rows() const { return M * K; }
  double wavelength() const { return kSpeedOfLight / carrier_freq; }
  void validate() const;
};

class ArrayGeometry {
 public:
  enum class Kind { single, uniform_linear };

  static ArrayGeometry single();
  /// `spacing` and `wavelength` in meters.
  static ArrayGeometry uniform_linear(int M, double spacing, double wavelength);
  static ArrayGeometry half_wavelength_ula(int M, double carrier_freq);

  Kind kind() const { return kind_; }
  int size() const { return M_; }
  double spacing() const { return spacing_; }
  double wavelength() const { return wavelength_; }

  /// Per-antenna phase p(theta) in radians.
  RVec phases(double theta) const;
  /// exp(j p(theta)).
  CVec response(double theta) const;

 private:
  Kind kind_ = Kind::single;
  int M_ = 1;
  double spacing_ = 0.0;
  double wavelength_ = 1.0;
};

struct StaticPathSet {
  RVec delays;   // s
  CVec gains;
  RVec aoas;     // rad; empty means broadside

  int size() const { return static_cast<int>(delays.size()); }
  /// Merged response h_s = sum_l beta_l a^M(theta_l, tau_l).
  CVec merged(const SystemConfig& cfg, const ArrayGeometry& geom) const;
};

struct DynamicPath {
  double delay = 0.0;       // s, value at the start of CPI 0
  double delay_rate = 0.0;  // s per s
  double aoa = 0.0;         // rad
  CVec cgs;                 // [T]

  double delay_at(int cpi, const SystemConfig& cfg) const {
    return delay + delay_rate * cpi * cfg.T * cfg.delta_t;
  }
};

using DynamicPathSet = std::vector<DynamicPath>;

struct OffsetSequence {
  RVec to;  // s, in [0, 1/delta_f)
  RVec po;  // rad, in [-pi, pi)

  static OffsetSequence zeros(int T);
};

enum class Stage { raw, aligned, compensated };
const char* to_string(Stage s);

struct CsiMatrix {
  CMat data;  // [MK x T]
  Stage stage = Stage::raw;
  int cpi_index = 0;

  int rows() const { return static_cast<int>(data.rows()); }
  int cols() const { return static_cast<int>(data.cols()); }
  /// Advances the stage tag; only raw -> aligned -> compensated is allowed.
  void advance(Stage next);
};

CVec steering_vector(const SystemConfig& cfg, double tau);
CVec steering_vector_mimo(const SystemConfig& cfg, const ArrayGeometry& geom, double theta,
                          double tau);

/// Column t = (h_s + sum_l beta_{l,t} a^M(theta_l, tau_l)) .* (e^{j phi_t} a^M(0, tau_o,t)) + z.
/// Noise is drawn from a CounterRng keyed by `seed`.
CsiMatrix synthesize_cpi(const SystemConfig& cfg, const ArrayGeometry& geom,
                         const StaticPathSet& statics, const DynamicPathSet& dynamics,
                         const OffsetSequence& offsets, std::uint64_t seed, int cpi = 0);

enum class OffsetLaw { iid_uniform, slow_drift };

struct ScenarioSpec {
  int n_static = 7;
  int n_dynamic = 3;
  double snr_db = 25.0;
  double dyn_proportion = 0.3;
  OffsetLaw offset_law = OffsetLaw::iid_uniform;
  double drift_to_std = 1e-9;     // s per snapshot, slow_drift only
  double drift_po_std = 0.05;     // rad per snapshot, slow_drift only

  double static_mean_range = 12.0;  // m
  double dynamic_range_min = 8.0;   // m
  double dynamic_range_max = 20.0;  // m
  double max_speed = 2.0;           // m/s
  double static_aoa_span = kPi / 2;     // |theta| bound
  double dynamic_aoa_span = kPi / 3;
  double min_power_range = 1.0;     // m, clamp for the 1/r^2 power law

  std::optional<double> target_separation;      // m; two-target layout
  std::vector<double> fixed_dynamic_ranges;     // m
  std::vector<double> fixed_dynamic_aoas;       // rad
};

struct Scenario {
  StaticPathSet statics;
  DynamicPathSet dynamics;
  OffsetSequence offsets;
  double noise_power = 0.0;
};

Scenario random_scenario(const SystemConfig& cfg, const ArrayGeometry& geom,
                         const ScenarioSpec& spec, std::uint64_t seed);

struct ClockErrorLaw {
  double mean = 0.0;    // s
  double jitter = 0.0;  // s, per-exchange std
};

struct BidirectionalTrace {
  RVec bs_tx, bs_rx, ue_tx, ue_rx;  // measured timestamps, s
  CMat h_bs;                        // [MK x T_s]
  CMat h_ue;                        // [MK x T_s]
  RVec clock_error;                 // ground truth per exchange, s
  RVec to_bs, to_ue;                // ground-truth TOs, s
  double timestamp_noise_std = 0.0;

  int size() const { return static_cast<int>(clock_error.size()); }
};

BidirectionalTrace synthesize_bidirectional(const SystemConfig& cfg, const ArrayGeometry& geom,
                                            const StaticPathSet& statics, int T_s,
                                            double timestamp_noise_std,
                                            const ClockErrorLaw& clock, std::uint64_t seed);

}  // namespace ascsense
