#pragma once

#include <vector>

#include "ascsense/residual_compensation.hpp"

namespace ascsense {

/// Uniform AoA grid in radians, endpoints inclusive.
RVec angle_grid(double lo_deg, double hi_deg, double step_deg);

struct Spectrum {
  RMat values;      // [n_theta x N_g]
  SearchGrid grid;  // delay axis
  RVec angles;      // rad; a single 0 for the 1-D spectrum

  bool two_dimensional() const { return values.rows() > 1; }
};

/// S = a^H P_{n,h} a / (a^H P_n a + eps), eps = 1e-12 * MK, a = a^M(theta, tau).
/// An empty `angles` gives the 1-D delay spectrum (theta = 0).
Spectrum modified_music_spectrum(const SubspaceEstimate& est, const ReferenceStaticResponse& ref,
                                 const SystemConfig& cfg, const ArrayGeometry& geom,
                                 const SearchGrid& grid, const RVec& angles = {});
Spectrum modified_music_spectrum(const CompensatedCpi& cpi, const ReferenceStaticResponse& ref,
                                 const SystemConfig& cfg, const ArrayGeometry& geom,
                                 const SearchGrid& grid, const RVec& angles = {});

/// Plain MUSIC on the same scale: MK / (a^H P_n a + eps).
Spectrum music_spectrum(const SubspaceEstimate& est, const SystemConfig& cfg,
                        const ArrayGeometry& geom, const SearchGrid& grid,
                        const RVec& angles = {});

struct Peak {
  int angle_index = 0;
  int delay_index = 0;
  double delay = 0.0;  // s, refined
  double aoa = 0.0;    // rad, refined
  double height = 0.0;
};

struct PeakList {
  std::vector<Peak> peaks;  // descending height
  bool shortfall = false;
};

/// Greedy selection of the L_d highest local maxima. Two maxima conflict when they are closer
/// than `min_separation` bins on every axis (delay distance is circular).
PeakList pick_peaks(const Spectrum& spec, int L_d, int min_separation = 5);

struct TargetEstimates {
  std::vector<double> delays;  // s
  std::vector<double> aoas;    // rad
  CMat cgs;                    // [L_d x T]
  RVec po;                     // [T], po(0) = 0
  double condition = 0.0;
  bool ill_conditioned = false;
  bool rank_deficient = false;
  bool no_static_energy = false;
};

TargetEstimates estimate_cgs(const CsiMatrix& H_C, const PeakList& peaks,
                             const SystemConfig& cfg, const ArrayGeometry& geom);

/// Velocity (m/s) at the peak of the zero-padded CGS periodogram.
double doppler_readout(const CVec& cgs, const SystemConfig& cfg);

struct RotationTranslation {
  cd rotation{1.0, 0.0};
  cd translation{0.0, 0.0};
  CVec aligned;  // rotation * estimate + translation
};

/// Least-squares fit of rotation * estimate + translation to truth (closed form).
RotationTranslation align_rotation_translation(const CVec& estimate, const CVec& truth);

}  // namespace ascsense
