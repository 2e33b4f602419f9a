#pragma once

#include <cstddef>

#include "pim/parallel_fixed.hpp"
#include "pim/serial_float.hpp"

namespace pim {

// Strided x (nx partitions), t (nt partitions) -> z; right shifts also give
// `sticky` (OR of the bits shifted out) in partition varshift_sticky_partition.
MicroProgram emit_varshift_parallel(std::size_t nx, std::size_t nt, ShiftDir dir);
std::size_t varshift_partitions(std::size_t nx, std::size_t nt);
std::size_t varshift_sticky_partition(std::size_t nx, std::size_t nt);
// x -> z = x << t with the MSB set, t = leading zero count.
MicroProgram emit_normalize_parallel(std::size_t nx);

// Operands x.s x.e x.m y.s y.e y.m -> z.s z.e z.m, strided. Signs sit in
// partition 0 and exponents start there; mantissas start where each
// operation's datapath wants them (see the operand layouts).
std::size_t float_partitions(const FloatFormat& fmt);
MicroProgram emit_fadd_unsigned_parallel(const FloatFormat& fmt);
MicroProgram emit_fadd_parallel(const FloatFormat& fmt);
MicroProgram emit_fsub_parallel(const FloatFormat& fmt);
MicroProgram emit_fmul_parallel(const FloatFormat& fmt);
MicroProgram emit_fdiv_parallel(const FloatFormat& fmt);

namespace par {

// out = src shifted by the nt-bit amount held in partitions [0, nt); both n
// bits over [0, n), out != src. With want_sticky the OR of every bit shifted
// out gathers in `sticky`; the returned partition holds it.
std::size_t var_shift(Builder& b, std::size_t n, Col src, std::size_t nt, Col amount, Col out,
                      ShiftDir dir, bool want_sticky = false, Col sticky = 0);
// Count bits land in partitions [0, normalize_count_bits(n)).
void normalize(Builder& b, std::size_t n, Col src, Col out, Col count);

}  // namespace par

}  // namespace pim
