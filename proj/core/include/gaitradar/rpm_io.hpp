// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "gaitradar/signal_core.hpp"

namespace gaitradar {

/// Malformed or truncated recording. offset() is the byte position at which
/// decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset);
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

// Binary recording layout, all little-endian, no padding:
//   "RPM1" | modality u8 | n_slow u32 | n_range u32 |
//   slow_time_rate f64 | range_resolution f64 | wavelength f64 |
//   n_slow * n_range * (re f32, im f32), row-major.
inline constexpr std::size_t kRpmHeaderBytes = 4 + 1 + 4 + 4 + 8 + 8 + 8;

void write_rpm(std::ostream& out, const RangeProfileMatrix& profiles);
void write_rpm(const std::filesystem::path& path, const RangeProfileMatrix& profiles);

/// Fields the header does not carry (pulse width, window scale, position) are
/// taken from `defaults`; max_range becomes n_range * range_resolution.
RangeProfileMatrix read_rpm(std::istream& in, const RadarConfig& defaults);
RangeProfileMatrix read_rpm(const std::filesystem::path& path);
RangeProfileMatrix read_rpm(const std::filesystem::path& path, const RadarConfig& defaults);

/// Rounds every sample to the f32 precision used on disk, so in-memory
/// processing matches a later replay of the written file.
void quantize_to_storage(RangeProfileMatrix& profiles);

}  // namespace gaitradar
