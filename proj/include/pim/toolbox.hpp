#pragma once

#include <cstddef>
#include <cstdint>

#include "pim/core.hpp"
#include "pim/microcode.hpp"

namespace pim {

// CARRY combines (g, a) pairs: (g, a) o (g', a') = (g + a g', a a').
enum class AssocOp : std::uint8_t { AND, OR, XOR, CARRY };

const char* to_string(AssocOp op);

struct Elem {
  bool g = false;
  bool a = false;  // CARRY only
  friend bool operator==(const Elem&, const Elem&) = default;
};

// `hi` comes from the higher partition: folds run x_i o x_(i-1) o ... o x_0.
Elem combine(AssocOp op, Elem hi, Elem lo);
Elem identity(AssocOp op);

struct ToolboxProgram {
  MicroProgram program;
  std::size_t rounds = 0;
};

// Runs of consecutive steps that share one switch setting with at least one
// closed switch. Copies and local combines inside a run do not add rounds.
std::size_t communication_rounds(const MicroProgram& prog);

// Strided x over k partitions -> strided z.
ToolboxProgram emit_shift(std::size_t k, std::size_t j);           // z_(i+j) = x_i, z_i = 0 for i < j
ToolboxProgram emit_broadcast(std::size_t k, std::size_t src);     // z_i = x_src
// 1-bit ops read x; CARRY reads g and a. Results: z (or gg, aa) in partition k-1.
ToolboxProgram emit_reduce(std::size_t k, AssocOp op);
// z_i (or gg_i, aa_i) = x_i o ... o x_0.
ToolboxProgram emit_prefix(std::size_t k, AssocOp op);

namespace par {

// Partitions [lo, lo + n).
struct Range {
  std::size_t lo = 0;
  std::size_t n = 0;
  std::size_t hi() const { return lo + n; }
};

Lanes local(const Builder& b, Range r);

// dst_(p+j) = src_p for every p with both ends in r; partitions left without a
// source get `fill`. Negative j shifts toward lower partitions. src != dst.
std::size_t shift(Builder& b, Range r, Col src, Col dst, long j, bool fill = false);

// Every partition of r gets from@src in `to` and its complement in `nto`.
// r.n must be a power of two. `to` may equal `from`.
std::size_t broadcast(Builder& b, Range r, std::size_t src, Col from, Col to, Col nto);

// In place over r (power of two). The fold lands in partition r.hi() - 1.
// CARRY keeps g in `x` and the complement of a in `na`.
std::size_t reduce(Builder& b, Range r, AssocOp op, Col x, Col na = 0);
std::size_t prefix(Builder& b, Range r, AssocOp op, Col x, Col na = 0);

// Two NOTs from (from_p, from) to (to_p, to); one round when the partitions differ.
void copy_bit(Builder& b, std::size_t from_p, Col from, std::size_t to_p, Col to);
// Single NOT across partitions.
void not_bit(Builder& b, std::size_t from_p, Col from, std::size_t to_p, Col to);

std::size_t next_pow2(std::size_t n);

}  // namespace par

}  // namespace pim
