#include "ascsense/csi_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace ascsense {

static_assert(std::endian::native == std::endian::little,
              "CSI dump I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw Error(Errc::format, path + ": truncated header");
  return v;
}

void put_complex(std::ostream& os, cd z) {
  put(os, z.real());
  put(os, z.imag());
}

cd get_complex(std::istream& is, const std::string& path) {
  double re = 0, im = 0;
  if (!is.read(reinterpret_cast<char*>(&re), 8) || !is.read(reinterpret_cast<char*>(&im), 8))
    throw Error(Errc::format, path + ": truncated body");
  return {re, im};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::io, path + ": cannot open for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::io, path + ": cannot open for reading");
  return is;
}

void check_magic(std::istream& is, const char* magic, const std::string& path) {
  char m[4];
  if (!is.read(m, 4)) throw Error(Errc::format, path + ": truncated header");
  if (std::memcmp(m, magic, 4) != 0) throw Error(Errc::format, path + ": bad magic");
}

}  // namespace

void write_csi_dump(const std::string& path, const CsiDump& d) {
  if (d.data.rows() != static_cast<Eigen::Index>(d.M) * d.K || d.data.cols() != d.T)
    throw Error(Errc::dimension_mismatch, "CSI dump shape does not match header fields");
  auto os = open_out(path);
  os.write("ASCS", 4);
  put<std::uint16_t>(os, kCsiDumpVersion);
  put<std::uint16_t>(os, static_cast<std::uint16_t>(d.M));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(d.K));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(d.T));
  put<double>(os, d.delta_f);
  put<double>(os, d.delta_t);
  for (int t = 0; t < d.T; ++t)
    for (Eigen::Index r = 0; r < d.data.rows(); ++r) put_complex(os, d.data(r, t));
  if (!os) throw Error(Errc::io, path + ": write failed");
}

CsiDump read_csi_dump(const std::string& path) {
  auto is = open_in(path);
  check_magic(is, "ASCS", path);
  const auto version = get<std::uint16_t>(is, path);
  if (version != kCsiDumpVersion) throw Error(Errc::format, path + ": unsupported version");
  CsiDump d;
  d.M = get<std::uint16_t>(is, path);
  d.K = static_cast<int>(get<std::uint32_t>(is, path));
  d.T = static_cast<int>(get<std::uint32_t>(is, path));
  d.delta_f = get<double>(is, path);
  d.delta_t = get<double>(is, path);
  if (d.M < 1 || d.K < 2 || d.T < 1 || !(d.delta_f > 0))
    throw Error(Errc::format, path + ": invalid header fields");
  d.data.resize(static_cast<Eigen::Index>(d.M) * d.K, d.T);
  for (int t = 0; t < d.T; ++t)
    for (Eigen::Index r = 0; r < d.data.rows(); ++r) d.data(r, t) = get_complex(is, path);
  return d;
}

void write_reference_blob(const std::string& path, const ReferenceBlob& b) {
  if (b.h.size() != static_cast<Eigen::Index>(b.M) * b.K)
    throw Error(Errc::dimension_mismatch, "reference length does not match M*K");
  auto os = open_out(path);
  os.write("ASRF", 4);
  put<std::uint16_t>(os, kReferenceBlobVersion);
  put<std::uint16_t>(os, static_cast<std::uint16_t>(b.M));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(b.K));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(b.T_s));
  put<double>(os, b.delta_f);
  put<double>(os, b.timestamp_noise_std);
  put<double>(os, b.clock_error_estimate);
  put<std::uint32_t>(os, b.flags);
  put<std::uint32_t>(os, 0);
  for (Eigen::Index r = 0; r < b.h.size(); ++r) put_complex(os, b.h(r));
  if (!os) throw Error(Errc::io, path + ": write failed");
}

ReferenceBlob read_reference_blob(const std::string& path) {
  auto is = open_in(path);
  check_magic(is, "ASRF", path);
  if (get<std::uint16_t>(is, path) != kReferenceBlobVersion)
    throw Error(Errc::format, path + ": unsupported version");
  ReferenceBlob b;
  b.M = get<std::uint16_t>(is, path);
  b.K = static_cast<int>(get<std::uint32_t>(is, path));
  b.T_s = static_cast<int>(get<std::uint32_t>(is, path));
  b.delta_f = get<double>(is, path);
  b.timestamp_noise_std = get<double>(is, path);
  b.clock_error_estimate = get<double>(is, path);
  b.flags = get<std::uint32_t>(is, path);
  (void)get<std::uint32_t>(is, path);
  if (b.M < 1 || b.K < 2) throw Error(Errc::format, path + ": invalid header fields");
  b.h.resize(static_cast<Eigen::Index>(b.M) * b.K);
  for (Eigen::Index r = 0; r < b.h.size(); ++r) b.h(r) = get_complex(is, path);
  return b;
}

}  // namespace ascsense
