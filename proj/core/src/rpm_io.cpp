// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#include "gaitradar/rpm_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

namespace gaitradar {

FormatError::FormatError(const std::string& what, std::uint64_t offset)
    : Error([&] {
        std::ostringstream os;
        os << what << " (at byte offset " << offset << ")";
        return os.str();
      }()),
      offset_(offset) {}

namespace {

template <typename U>
void put_le(std::vector<char>& buf, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <typename U>
U get_le(const unsigned char* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void write_rpm(std::ostream& out, const RangeProfileMatrix& profiles) {
  const auto& cfg = profiles.config();
  if (profiles.slow_samples() > std::numeric_limits<std::uint32_t>::max() ||
      profiles.range_bins() > std::numeric_limits<std::uint32_t>::max())
    throw InvalidArgument("write_rpm: matrix too large for u32 dimensions");

  std::vector<char> header;
  header.reserve(kRpmHeaderBytes);
  header.insert(header.end(), {'R', 'P', 'M', '1'});
  header.push_back(static_cast<char>(cfg.modality));
  put_le<std::uint32_t>(header, static_cast<std::uint32_t>(profiles.slow_samples()));
  put_le<std::uint32_t>(header, static_cast<std::uint32_t>(profiles.range_bins()));
  put_le<std::uint64_t>(header, std::bit_cast<std::uint64_t>(cfg.slow_time_rate));
  put_le<std::uint64_t>(header, std::bit_cast<std::uint64_t>(cfg.range_resolution));
  put_le<std::uint64_t>(header, std::bit_cast<std::uint64_t>(cfg.wavelength));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  std::vector<char> row;
  row.reserve(profiles.range_bins() * 8);
  for (std::size_t n = 0; n < profiles.slow_samples(); ++n) {
    row.clear();
    for (const cplx& z : profiles.row(n)) {
      put_le<std::uint32_t>(row, std::bit_cast<std::uint32_t>(static_cast<float>(z.real())));
      put_le<std::uint32_t>(row, std::bit_cast<std::uint32_t>(static_cast<float>(z.imag())));
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw Error("write_rpm: stream write failed");
}

void write_rpm(const std::filesystem::path& path, const RangeProfileMatrix& profiles) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("write_rpm: cannot open " + path.string());
  write_rpm(out, profiles);
}

RangeProfileMatrix read_rpm(std::istream& in, const RadarConfig& defaults) {
  std::array<unsigned char, kRpmHeaderBytes> h{};
  in.read(reinterpret_cast<char*>(h.data()), static_cast<std::streamsize>(h.size()));
  const auto got = static_cast<std::uint64_t>(in.gcount());
  if (got < 4) throw FormatError("truncated header: missing magic", got);
  if (std::memcmp(h.data(), "RPM1", 4) != 0) throw FormatError("bad magic, expected RPM1", 0);
  if (got < kRpmHeaderBytes) throw FormatError("truncated header", got);

  if (h[4] > 1) throw FormatError("unknown modality code " + std::to_string(h[4]), 4);
  RadarConfig cfg = defaults;
  cfg.modality = static_cast<Modality>(h[4]);
  const auto n_slow = get_le<std::uint32_t>(h.data() + 5);
  const auto n_range = get_le<std::uint32_t>(h.data() + 9);
  cfg.slow_time_rate = std::bit_cast<double>(get_le<std::uint64_t>(h.data() + 13));
  cfg.range_resolution = std::bit_cast<double>(get_le<std::uint64_t>(h.data() + 21));
  cfg.wavelength = std::bit_cast<double>(get_le<std::uint64_t>(h.data() + 29));
  if (n_range == 0) throw FormatError("zero range bins", 9);
  if (!(cfg.slow_time_rate > 0.0) || !std::isfinite(cfg.slow_time_rate))
    throw FormatError("invalid slow_time_rate", 13);
  if (!(cfg.range_resolution > 0.0) || !std::isfinite(cfg.range_resolution))
    throw FormatError("invalid range_resolution", 21);
  if (!(cfg.wavelength > 0.0) || !std::isfinite(cfg.wavelength)) throw FormatError("invalid wavelength", 29);
  cfg.max_range = static_cast<double>(n_range) * cfg.range_resolution;
  if (cfg.range_bins() != n_range) throw FormatError("range bin count inconsistent with resolution", 9);

  std::vector<cplx> samples(static_cast<std::size_t>(n_slow) * n_range);
  std::vector<unsigned char> row(static_cast<std::size_t>(n_range) * 8);
  std::uint64_t offset = kRpmHeaderBytes;
  for (std::size_t n = 0; n < n_slow; ++n) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    const auto read = static_cast<std::uint64_t>(in.gcount());
    if (read < row.size()) throw FormatError("truncated payload", offset + read);
    for (std::size_t m = 0; m < n_range; ++m) {
      const float re = std::bit_cast<float>(get_le<std::uint32_t>(row.data() + 8 * m));
      const float im = std::bit_cast<float>(get_le<std::uint32_t>(row.data() + 8 * m + 4));
      samples[n * n_range + m] = cplx(re, im);
    }
    offset += row.size();
  }
  return RangeProfileMatrix(cfg, n_slow, std::move(samples));
}

RangeProfileMatrix read_rpm(const std::filesystem::path& path, const RadarConfig& defaults) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_rpm: cannot open " + path.string());
  return read_rpm(in, defaults);
}

RangeProfileMatrix read_rpm(const std::filesystem::path& path) {
  return read_rpm(path, RadarConfig{});
}

void quantize_to_storage(RangeProfileMatrix& profiles) {
  for (cplx& z : profiles.samples())
    z = cplx(static_cast<float>(z.real()), static_cast<float>(z.imag()));
}

}  // namespace gaitradar
