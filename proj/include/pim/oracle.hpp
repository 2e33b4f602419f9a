#pragma once

#include <cstdint>
#include <string>

#include "pim/serial_float.hpp"

namespace pim {

enum class Domain : std::uint8_t { IN_DOMAIN, EXCLUDED };

struct OracleResult {
  Domain domain = Domain::EXCLUDED;
  std::uint64_t value = 0;
  // Second result where an op has one (division remainder, shift sticky bit).
  std::uint64_t aux = 0;

  bool in_domain() const { return domain == Domain::IN_DOMAIN; }
  static OracleResult excluded() { return {}; }
  static OracleResult of(std::uint64_t value, std::uint64_t aux = 0) {
    return {Domain::IN_DOMAIN, value, aux};
  }
};

enum class FixedOp : std::uint8_t { ADD, SUB, MUL, DIV };
enum class FloatOp : std::uint8_t { ADD, SUB, MUL, DIV, ADD_SAME_SIGN };

const char* to_string(FixedOp op);
const char* to_string(FloatOp op);

// add/sub: (n+1)-bit result, sub modulo 2^(n+1). mul: 2n-bit product.
// div: a is the 2n-bit dividend, b the divisor; value = quotient, aux = remainder.
OracleResult oracle_fixed(FixedOp op, std::size_t n, std::uint64_t a, std::uint64_t b);

// Exact rational result rounded to nearest, ties to even. EXCLUDED unless both
// operands are normal and the rounded result is normal; an exact zero from
// add/sub is IN_DOMAIN with the all-zero encoding.
OracleResult oracle_float(const FloatFormat& fmt, FloatOp op, std::uint64_t x, std::uint64_t y);

// Host single precision, for cross-checking the (8,23) oracle.
std::uint64_t host_float32(FloatOp op, std::uint64_t x, std::uint64_t y);

}  // namespace pim
