#pragma once

#include <cstddef>
#include <cstdint>

#include "pim/core.hpp"
#include "pim/microcode.hpp"
#include "pim/toolbox.hpp"

namespace pim {

enum class MultTail : std::uint8_t { PREFIX_ADDER, LEGACY_N_ITER };

const char* to_string(MultTail tail);

// Strided operands, one bit per partition, k = n partitions (n a power of two).
// add/sub: x, y -> z (n bits) and zn (bit n, in partition n-1); sub is modulo 2^(n+1).
MicroProgram emit_add_parallel(std::size_t n);
MicroProgram emit_sub_parallel(std::size_t n);
// x, y -> z (low n bits), w (high n bits).
MicroProgram emit_mult_parallel(std::size_t n, MultTail tail = MultTail::PREFIX_ADDER);
// Dividend z (low), w (high) and divisor d -> q, r; k = next power of two above n.
MicroProgram emit_div_parallel(std::size_t n);

namespace par {

struct CarryIn {
  enum Kind : std::uint8_t { ZERO, ONE, BIT };
  Kind kind = ZERO;
  Col off = 0;  // BIT: the carry sits in partition r.lo at this offset

  static CarryIn zero() { return {}; }
  static CarryIn one() { return {ONE, 0}; }
  static CarryIn bit(Col off) { return {BIT, off}; }
};

// z = x + y + cin over r (z distinct from x and y). With `subtract`, y is
// inverted first. The carry out of the top bit goes to `cout` in partition
// r.hi() - 1 when `want_cout` is set. Needs r.lo + next_pow2(r.n) partitions.
void add(Builder& b, Range r, Col x, Col y, Col z, CarryIn cin, bool subtract = false,
         bool want_cout = false, Col cout = 0);

// z = m + cin over r; cin in partition r.lo. Carry out lands in partition
// r.hi() at `cout` when requested. Needs r.lo + next_pow2(r.n + 1) partitions.
void increment(Builder& b, Range r, Col m, Col cin, Col z, bool want_cout = false, Col cout = 0);

// (w | z) = x * y over r: carry-save steps, then the chosen tail.
// Needs r.lo + next_pow2(r.n) partitions.
void multiply(Builder& b, Range r, Col x, Col y, Col z, Col w, MultTail tail);

// q, rem from the 2n-bit dividend (w | z) and divisor d, all over [0, n).
// Needs next_pow2(n + 1) partitions; w < d is assumed.
void divide(Builder& b, std::size_t n, Col z, Col w, Col d, Col q, Col rem);

}  // namespace par

}  // namespace pim
