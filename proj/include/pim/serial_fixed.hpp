#pragma once

#include <cstddef>
#include <vector>

#include "pim/core.hpp"
#include "pim/microcode.hpp"

namespace pim {

inline constexpr std::size_t kDefaultKaratsubaThreshold = 20;

struct SerialFixedParams {
  std::size_t n = 8;
  std::size_t karatsuba_threshold = kDefaultKaratsubaThreshold;
  bool is_signed = false;
};

// Operands: x, y (n bits) -> z (n+1 bits). Signed programs sign-extend into z.
MicroProgram emit_add_serial(std::size_t n, bool is_signed = false);
MicroProgram emit_sub_serial(std::size_t n, bool is_signed = false);
// x, y (n bits) -> z (2n bits). Widths up to the threshold use shift-and-add.
MicroProgram emit_mult_serial(std::size_t n,
                              std::size_t threshold = kDefaultKaratsubaThreshold);
// z (2n bits), d (n bits) -> q, r (n bits). Requires d != 0 and z < d * 2^n.
MicroProgram emit_div_serial(std::size_t n);

// Word-level building blocks on columns relative to `l`, LSB first.
// kZero stands for a constant 0 bit that occupies no column.
namespace serial {

using Bits = std::vector<Col>;
inline constexpr Col kZero = ~Col{0};

Bits slice(const Bits& v, std::size_t from, std::size_t count);
Bits zeros(std::size_t n);

// out = a + b (+ carry_in), truncated to out.size() bits. out may alias a or b.
void add(Builder& b, const Lanes& l, const Bits& a, const Bits& addend, const Bits& out,
         Col carry_in = kZero);
// out = a - subtrahend mod 2^out.size().
void sub(Builder& b, const Lanes& l, const Bits& a, const Bits& subtrahend, const Bits& out);
// out (2n bits) = x * y for n-bit x and y.
void shift_add_multiply(Builder& b, const Lanes& l, const Bits& x, const Bits& y,
                        const Bits& out);
void multiply(Builder& b, const Lanes& l, const Bits& x, const Bits& y, const Bits& out,
              std::size_t threshold = kDefaultKaratsubaThreshold);
// Non-restoring division of a 2n-bit dividend by an n-bit divisor.
void divide(Builder& b, const Lanes& l, const Bits& dividend, const Bits& divisor,
            const Bits& quotient, const Bits& remainder);
// out = OR of all bits (0 for an empty or all-kZero input); nor_reduce writes its complement.
void or_reduce(Builder& b, const Lanes& l, const Bits& v, Col out);
void nor_reduce(Builder& b, const Lanes& l, const Bits& v, Col out);
// out = s ? a : c, with ns the complement of s; a and c may be kZero.
void select(Builder& b, const Lanes& l, Col s, Col ns, Col a, Col c, Col out);

}  // namespace serial

}  // namespace pim
