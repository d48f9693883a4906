#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace fdirw {

/// Arithmetic contract of one superposition step.
///   Full  - binary64 throughout
///   B32   - binary32 operands, products and running sum
///   Mixed - binary16 operands and products, binary32 running sum
///   B16   - binary16 everywhere, including the running sum
enum class PrecisionMode : std::uint8_t { Full, B32, Mixed, B16 };

inline constexpr PrecisionMode kAllModes[] = {PrecisionMode::Full, PrecisionMode::B32,
                                              PrecisionMode::Mixed, PrecisionMode::B16};

/// CLI / file-header names: full | fp32 | mixed | fp16.
std::string_view to_string(PrecisionMode mode);
PrecisionMode parse_precision_mode(std::string_view name);

// Round-to-nearest-even into IEEE-754 binary16 / binary32, widened back to
// binary64. Subnormals are kept, overflow gives a signed infinity and NaN
// passes through.
double round_b16(double x);
double round_b32(double x);

std::uint16_t to_b16_bits(double x);
double from_b16_bits(std::uint16_t bits);
std::uint32_t to_b32_bits(double x);
double from_b32_bits(std::uint32_t bits);

/// Rounding applied to a stored operand (matrix entry or concentration) under
/// `mode`: identity for Full, binary32 for B32, binary16 for Mixed and B16.
double round_operand(double x, PrecisionMode mode);

/// What the Mixed contract does with a product of two binary16 operands.
enum class MixedProduct : std::uint8_t {
  RoundToHalf,  // round each product to binary16 before accumulating
  KeepSingle,   // keep the product at binary32 width
};

struct DotOptions {
  MixedProduct mixed_product = MixedProduct::RoundToHalf;
};

/// sum_j p_row[j] * c[j] + p_bc * c_far, accumulated in ascending j with the
/// boundary term last, every elementary operation rounded per `mode`.
double dot_with_boundary(std::span<const double> p_row, std::span<const double> c,
                         double p_bc, double c_far, PrecisionMode mode,
                         DotOptions options = {});

}  // namespace fdirw
