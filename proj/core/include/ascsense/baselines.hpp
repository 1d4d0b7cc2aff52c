#pragma once

#include <string>

#include "ascsense/to_alignment.hpp"

namespace ascsense {

enum class BaselineKind { similarity, envelope, ifft_peak };

const char* to_string(BaselineKind k);

/// Recursive alignment maximizing |<compensated snapshot, previous aligned snapshot>| over the
/// delay grid; the PO is the phase of the inner product at the optimum.
AlignmentResult align_similarity(const CsiMatrix& raw, const SystemConfig& cfg, int grid_size = 4096);

/// Delay-domain envelope alignment: circular cross-correlation of each zero-padded IDFT
/// magnitude against the running mean of the aligned envelopes. TO only.
AlignmentResult align_envelope(const CsiMatrix& raw, const SystemConfig& cfg, int grid_size = 4096);

/// Shifts the dominant IDFT peak of every snapshot onto the first snapshot's peak and removes
/// the phase difference at that bin.
AlignmentResult align_ifft_peak(const CsiMatrix& raw, const SystemConfig& cfg, int grid_size = 4096);

AlignmentResult align_baseline(BaselineKind kind, const CsiMatrix& raw, const SystemConfig& cfg,
                               int grid_size = 4096);

}  // namespace ascsense
