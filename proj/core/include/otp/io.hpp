#pragma once

#include <string>

#include "otp/spectrum.hpp"
#include "otp/tensor.hpp"

namespace otp {

/// Binary tensor container, format "OTP1":
///   bytes 0..7   magic "OTPTNSR1"
///   bytes 8..11  u32 little-endian order p
///   bytes 12..15 u32 little-endian dim n
///   byte  16     u8 symmetric flag
///   bytes 17..19 zero padding
///   then n^p little-endian float64 values, row-major.
void write_tensor_binary(const std::string& path, const DenseTensor& A);
DenseTensor read_tensor_binary(const std::string& path,
                               std::int64_t budget = kDefaultElementBudget);

/// Text tensor format: first line "p n", then one value per line.
void write_tensor_text(const std::string& path, const DenseTensor& A);
DenseTensor read_tensor_text(const std::string& path,
                             std::int64_t budget = kDefaultElementBudget);

/// Ground-truth sidecar: line 1 "k n", then k eigenvalue lines, then k vector
/// lines of n whitespace-separated values each.
void write_spectrum_text(const std::string& path, const Spectrum& spec);
Spectrum read_spectrum_text(const std::string& path);

}  // namespace otp
