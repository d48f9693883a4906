#include "fdirw/precision.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fdirw {

namespace {

// Round a binary64 value to the nearest value of a binary format with
// `ExpBits` exponent bits and `MantBits` stored mantissa bits, ties to even.
// Works on the integer significand so no floating-point rounding happens
// anywhere except in the final (exact) ldexp.
template <int ExpBits, int MantBits>
double round_to_format(double x) {
  constexpr int bias = (1 << (ExpBits - 1)) - 1;
  constexpr int emin = 1 - bias;
  constexpr int emax = bias;
  static_assert(MantBits < 52);

  if (std::isnan(x) || std::isinf(x) || x == 0.0) {
    return x;
  }
  const auto bits = std::bit_cast<std::uint64_t>(x);
  const bool negative = (bits >> 63) != 0;
  const int biased = static_cast<int>((bits >> 52) & 0x7ff);
  std::uint64_t significand = bits & ((std::uint64_t{1} << 52) - 1);
  int exponent;  // value = significand * 2^(exponent - 52)
  if (biased == 0) {
    exponent = -1022;  // binary64 subnormal, far below any target quantum
  } else {
    significand |= std::uint64_t{1} << 52;
    exponent = biased - 1023;
  }

  const int quantum_exp = std::max(exponent, emin) - MantBits;
  const int shift = quantum_exp - (exponent - 52);
  std::uint64_t kept;
  if (shift > 54) {
    kept = 0;  // below half the smallest subnormal
  } else {
    kept = significand >> shift;
    const std::uint64_t rem = significand & ((std::uint64_t{1} << shift) - 1);
    const std::uint64_t half = std::uint64_t{1} << (shift - 1);
    if (rem > half || (rem == half && (kept & 1u) != 0)) {
      ++kept;
    }
  }

  double magnitude = std::ldexp(static_cast<double>(kept), quantum_exp);
  const double max_finite =
      std::ldexp(2.0 - std::ldexp(1.0, -MantBits), emax);
  if (magnitude > max_finite) {
    magnitude = std::numeric_limits<double>::infinity();
  }
  return negative ? -magnitude : magnitude;
}

}  // namespace

std::string_view to_string(PrecisionMode mode) {
  switch (mode) {
    case PrecisionMode::Full:
      return "full";
    case PrecisionMode::B32:
      return "fp32";
    case PrecisionMode::Mixed:
      return "mixed";
    case PrecisionMode::B16:
      return "fp16";
  }
  return "?";
}

PrecisionMode parse_precision_mode(std::string_view name) {
  for (auto mode : kAllModes) {
    if (to_string(mode) == name) return mode;
  }
  throw std::invalid_argument("unknown precision mode '" + std::string(name) +
                              "' (expected full|fp32|mixed|fp16)");
}

double round_b16(double x) { return round_to_format<5, 10>(x); }
double round_b32(double x) { return round_to_format<8, 23>(x); }

std::uint16_t to_b16_bits(double x) {
  const double r = round_b16(x);
  const std::uint16_t sign = std::signbit(r) ? 0x8000 : 0;
  if (std::isnan(r)) return 0x7e00;
  if (std::isinf(r)) return sign | 0x7c00;
  const double a = std::fabs(r);
  if (a == 0.0) return sign;
  int e;
  std::frexp(a, &e);  // a = m * 2^e, m in [0.5, 1)
  const int unbiased = e - 1;
  if (unbiased < -14) {
    return sign | static_cast<std::uint16_t>(std::ldexp(a, 24));
  }
  const auto frac = static_cast<std::uint16_t>(std::ldexp(a, 10 - unbiased) - 1024.0);
  return sign | static_cast<std::uint16_t>((unbiased + 15) << 10) | frac;
}

double from_b16_bits(std::uint16_t bits) {
  const bool negative = (bits & 0x8000) != 0;
  const int exp_field = (bits >> 10) & 0x1f;
  const int frac = bits & 0x3ff;
  double v;
  if (exp_field == 0x1f) {
    v = frac != 0 ? std::numeric_limits<double>::quiet_NaN()
                  : std::numeric_limits<double>::infinity();
  } else if (exp_field == 0) {
    v = std::ldexp(static_cast<double>(frac), -24);
  } else {
    v = std::ldexp(static_cast<double>(frac + 1024), exp_field - 25);
  }
  return negative ? -v : v;
}

std::uint32_t to_b32_bits(double x) {
  return std::bit_cast<std::uint32_t>(static_cast<float>(round_b32(x)));
}

double from_b32_bits(std::uint32_t bits) {
  return static_cast<double>(std::bit_cast<float>(bits));
}

double round_operand(double x, PrecisionMode mode) {
  switch (mode) {
    case PrecisionMode::Full:
      return x;
    case PrecisionMode::B32:
      return round_b32(x);
    case PrecisionMode::Mixed:
    case PrecisionMode::B16:
      return round_b16(x);
  }
  return x;
}

double dot_with_boundary(std::span<const double> p_row, std::span<const double> c,
                         double p_bc, double c_far, PrecisionMode mode,
                         DotOptions options) {
  if (p_row.size() != c.size()) {
    throw std::invalid_argument("dot_with_boundary: length mismatch");
  }
  const std::size_t n = p_row.size();
  switch (mode) {
    case PrecisionMode::Full: {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += p_row[j] * c[j];
      return sum + p_bc * c_far;
    }
    case PrecisionMode::B32: {
      double sum = 0.0;
      auto term = [](double p, double v) { return round_b32(round_b32(p) * round_b32(v)); };
      for (std::size_t j = 0; j < n; ++j) sum = round_b32(sum + term(p_row[j], c[j]));
      return round_b32(sum + term(p_bc, c_far));
    }
    case PrecisionMode::Mixed: {
      const bool half_products = options.mixed_product == MixedProduct::RoundToHalf;
      auto term = [half_products](double p, double v) {
        // Two binary16 operands multiply exactly in binary64.
        const double product = round_b16(p) * round_b16(v);
        return half_products ? round_b16(product) : round_b32(product);
      };
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum = round_b32(sum + term(p_row[j], c[j]));
      return round_b32(sum + term(p_bc, c_far));
    }
    case PrecisionMode::B16: {
      double sum = 0.0;
      auto term = [](double p, double v) { return round_b16(round_b16(p) * round_b16(v)); };
      for (std::size_t j = 0; j < n; ++j) sum = round_b16(sum + term(p_row[j], c[j]));
      return round_b16(sum + term(p_bc, c_far));
    }
  }
  return 0.0;
}

}  // namespace fdirw
