#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "pim/core.hpp"
#include "pim/microcode.hpp"
#include "pim/serial_fixed.hpp"

namespace pim {

// value = (-1)^s * 2^(e - bias) * 1.m ; packed as s | e | m from MSB to LSB.
struct FloatFormat {
  std::size_t ne = 8;
  std::size_t nm = 23;
  std::uint64_t bias = 127;

  static FloatFormat make(std::size_t ne, std::size_t nm);
  std::size_t width() const { return 1 + ne + nm; }
  std::string tag() const;
  void check() const;

  std::uint64_t pack(bool s, std::uint64_t e, std::uint64_t m) const;
  bool sign_of(std::uint64_t bits) const { return (bits >> (ne + nm)) & 1; }
  std::uint64_t exp_of(std::uint64_t bits) const { return (bits >> nm) & ((std::uint64_t{1} << ne) - 1); }
  std::uint64_t man_of(std::uint64_t bits) const { return bits & ((std::uint64_t{1} << nm) - 1); }
  bool is_normal(std::uint64_t bits) const;
};

enum class ShiftDir : std::uint8_t { LEFT, RIGHT };

// x (nx bits), t (nt bits) -> z (nx bits); right shifts also produce a
// `sticky` bit that is the OR of every bit shifted out.
MicroProgram emit_varshift_serial(std::size_t nx, std::size_t nt, ShiftDir dir);
// x (nx bits) -> z = x << t with the MSB set, t = leading zero count.
MicroProgram emit_normalize_serial(std::size_t nx);
std::size_t normalize_count_bits(std::size_t nx);

// Operands x.s x.e x.m y.s y.e y.m -> z.s z.e z.m.
MicroProgram emit_fadd_unsigned_serial(const FloatFormat& fmt);
MicroProgram emit_fadd_signed_serial(const FloatFormat& fmt);
MicroProgram emit_fsub_signed_serial(const FloatFormat& fmt);
MicroProgram emit_fmul_serial(const FloatFormat& fmt);
MicroProgram emit_fdiv_serial(const FloatFormat& fmt);

namespace serial {

void var_shift(Builder& b, const Lanes& l, const Bits& src, const Bits& amount, const Bits& out,
               ShiftDir dir, Col sticky = kZero);
void normalize(Builder& b, const Lanes& l, const Bits& src, const Bits& out, const Bits& count);
// Round-to-nearest-even of `mantissa` given the guard bit and all lower bits.
// Writes the rounded mantissa to `out` and the carry out of it to `carry`.
void round_nearest_even(Builder& b, const Lanes& l, const Bits& mantissa, Col guard,
                        const Bits& lower, const Bits& out, Col carry);
Bits constant_bits(Builder& b, const Lanes& l, std::uint64_t value, std::size_t width);

}  // namespace serial

}  // namespace pim
