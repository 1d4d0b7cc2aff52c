#pragma once

#include <string>

#include "ascsense/to_alignment.hpp"

namespace ascsense {

struct ReferenceStaticResponse {
  CVec h;                          // unit norm, [MK]
  int T_s = 0;
  double timestamp_noise_std = 0.0;
  double clock_error_estimate = 0.0;  // s
  bool unknown_initial_to = false;    // alternative reference: delays are relative

  bool empty() const { return h.size() == 0; }
};

struct CalibrationOptions {
  AlignmentOptions align;
  double clock_search_range = 100e-9;  // s, symmetric
};

/// Aligns both directions of a static-only exchange and resolves the clock error via
/// reciprocity; returns the clock-error-compensated BS-side response.
ReferenceStaticResponse acquire_reference(const BidirectionalTrace& trace, const SystemConfig& cfg,
                                          const CalibrationOptions& opts = {});

/// Top eigenvector of a dynamic-free aligned CPI; rejects a CPI whose second eigenvalue
/// exceeds `max_ratio` of the first.
ReferenceStaticResponse alternative_reference(const CsiMatrix& aligned, double max_ratio = 0.1);

struct CompensatedCpi {
  CsiMatrix H;                 // stage compensated
  double residual = 0.0;       // estimated TO residual, s
  SubspaceEstimate subspace;   // of H (rotated with the compensation)
};

CompensatedCpi estimate_to_residual(const CsiMatrix& aligned, const ReferenceStaticResponse& ref,
                                    const SystemConfig& cfg, const SearchGrid& grid);

void save_reference(const std::string& path, const ReferenceStaticResponse& ref,
                    const SystemConfig& cfg);
ReferenceStaticResponse load_reference(const std::string& path, const SystemConfig& cfg);

/// Circular mean of delays on [0, period).
double circular_mean(const RVec& delays, double period);

}  // namespace ascsense
