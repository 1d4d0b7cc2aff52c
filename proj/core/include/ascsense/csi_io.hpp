#pragma once

#include <cstdint>
#include <string>

#include "ascsense/common.hpp"

namespace ascsense {

/// Binary CSI dump: 32-byte little-endian header followed by T columns of MK (re, im) f64.
struct CsiDump {
  int M = 1;
  int K = 0;
  int T = 0;
  double delta_f = 0.0;
  double delta_t = 0.0;
  CMat data;  // [MK x T]
};

inline constexpr std::uint16_t kCsiDumpVersion = 1;
inline constexpr std::uint16_t kReferenceBlobVersion = 1;

void write_csi_dump(const std::string& path, const CsiDump& dump);
CsiDump read_csi_dump(const std::string& path);

/// Reference static response blob; same numeric conventions as the CSI dump.
struct ReferenceBlob {
  int M = 1;
  int K = 0;
  int T_s = 0;
  double delta_f = 0.0;
  double timestamp_noise_std = 0.0;
  double clock_error_estimate = 0.0;
  std::uint32_t flags = 0;
  CVec h;  // [MK]
};

void write_reference_blob(const std::string& path, const ReferenceBlob& blob);
ReferenceBlob read_reference_blob(const std::string& path);

}  // namespace ascsense
