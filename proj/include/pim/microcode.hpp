#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pim/core.hpp"

namespace pim {

class CapacityError : public std::runtime_error {
 public:
  CapacityError(std::size_t partition, const std::string& what)
      : std::runtime_error(what), partition_(partition) {}
  std::size_t partition() const { return partition_; }

 private:
  std::size_t partition_;
};

// Per-partition column bookkeeping. Reserved columns hold operands; scratch
// columns count toward the peak.
class Allocator {
 public:
  explicit Allocator(PartitionConfig cfg);

  const PartitionConfig& config() const { return cfg_; }
  void reserve(const std::vector<Col>& cols);
  std::vector<Col> alloc(std::size_t n, std::optional<std::size_t> partition = std::nullopt);
  std::vector<Col> alloc_run(std::size_t n, std::size_t partition, bool reserved = false);
  // Offsets that are free in every partition; each one is marked in all of them.
  std::vector<Col> alloc_slots(std::size_t n, bool reserved = false);
  void free(const std::vector<Col>& cols);
  void free_slots(const std::vector<Col>& offsets);

  bool live(Col c) const;
  std::size_t live_scratch() const { return live_scratch_; }
  std::size_t peak() const { return peak_; }

 private:
  enum : std::uint8_t { FREE = 0, SCRATCH = 1, RESERVED = 2 };
  std::uint8_t state(std::size_t p, std::size_t off) const;
  void mark(std::size_t p, std::size_t off, std::uint8_t s);
  void bump_peak();

  PartitionConfig cfg_;
  std::vector<std::vector<std::uint8_t>> used_;
  std::vector<std::uint32_t> offset_use_;
  std::vector<std::size_t> hint_;
  std::size_t slot_hint_ = 0;
  std::size_t live_scratch_ = 0;
  std::size_t peak_ = 0;
};

// Where a gate sequence runs: one base column per active group plus the
// switch setting shared by every step. Gate columns handed to the builder are
// relative to each base. With `slotted` set, scratch is a partition offset
// reserved in every partition; otherwise it is an arbitrary column.
struct Lanes {
  SwitchConfig switches;
  std::vector<Col> bases;
  bool slotted = false;
};

enum class MacroKind : std::uint8_t { AND2, OR2, XOR2, XNOR2, XOR3, MUX, HA, FA };

// NOT/NOR gates per macro:
//   AND2 3, OR2 2, XOR2 5, XNOR2 4, XOR3 8, MUX 4, HA 5, FA 9.
std::size_t macro_gate_count(MacroKind kind);
const char* to_string(MacroKind kind);

class Builder {
 public:
  static constexpr Col kSpan = Col{1} << 20;

  explicit Builder(std::size_t partitions = 1);

  std::size_t partitions() const { return k_; }
  Col at(std::size_t partition, Col offset) const {
    return static_cast<Col>(partition) * kSpan + offset;
  }

  Lanes whole() const;
  Lanes each(std::size_t lo, std::size_t hi) const;
  Lanes single(std::size_t partition) const { return each(partition, partition + 1); }
  // Groups given as inclusive [first, last] partition spans.
  Lanes spans(const std::vector<std::pair<std::size_t, std::size_t>>& groups) const;

  std::vector<Col> input(const std::string& name, std::size_t width, const std::string& tag = "u");
  std::vector<Col> output(const std::string& name, std::size_t width,
                          const std::string& tag = "u");
  Col input_strided(const std::string& name, std::size_t width, const std::string& tag = "u",
                    std::size_t first_partition = 0);
  Col output_strided(const std::string& name, std::size_t width, const std::string& tag = "u",
                     std::size_t first_partition = 0);

  void gate(const Lanes& lanes, GateKind kind, Col out, Col a = 0, Col b = 0);
  void init(const Lanes& lanes, bool value, Col out) {
    gate(lanes, value ? GateKind::INIT1 : GateKind::INIT0, out);
  }
  void not_(const Lanes& lanes, Col a, Col out) { gate(lanes, GateKind::NOT, out, a); }
  void nor(const Lanes& lanes, Col a, Col b, Col out) { gate(lanes, GateKind::NOR2, out, a, b); }

  // Raw step with explicit absolute gates.
  void step(SwitchConfig switches, std::vector<GateInstance> gates);

  Col tmp(const Lanes& lanes);
  std::vector<Col> tmps(const Lanes& lanes, std::size_t n);
  void release(const Lanes& lanes, Col c);
  void release(const Lanes& lanes, const std::vector<Col>& cs);
  Col slot();
  void release_slot(Col offset);

  // Persistent constant cells, initialized on first use.
  Col constant(const Lanes& lanes, bool value);

  Allocator& allocator() { return alloc_; }
  std::size_t step_count() const { return steps_.size(); }

  MicroProgram finish() const;

 private:
  std::size_t k_;
  Allocator alloc_;
  std::vector<CycleStep> steps_;
  std::vector<OperandLayout> operands_;
  std::optional<Col> row_const_[2];
  std::optional<Col> slot_const_[2];
};

void lower_macro(Builder& b, const Lanes& lanes, MacroKind kind, std::span<const Col> inputs,
                 std::span<const Col> outputs);

namespace mc {
// Relative columns; outputs may alias inputs.
void copy(Builder& b, const Lanes& l, Col a, Col out);
void and2(Builder& b, const Lanes& l, Col a, Col c, Col out);
void or2(Builder& b, const Lanes& l, Col a, Col c, Col out);
void xor2(Builder& b, const Lanes& l, Col a, Col c, Col out);
void xnor2(Builder& b, const Lanes& l, Col a, Col c, Col out);
void xor3(Builder& b, const Lanes& l, Col a, Col c, Col d, Col out);
// out = s ? a : c
void mux(Builder& b, const Lanes& l, Col s, Col a, Col c, Col out);
// Same with the complement of s supplied.
void mux_ns(Builder& b, const Lanes& l, Col s, Col ns, Col a, Col c, Col out);
void ha(Builder& b, const Lanes& l, Col a, Col c, Col sum, Col carry);
void fa(Builder& b, const Lanes& l, Col a, Col c, Col d, Col sum, Col carry);
}  // namespace mc

RowState write_operand(const RowState& state, const OperandLayout& layout,
                       const PartitionConfig& cfg, std::uint64_t value);
std::uint64_t read_operand(const RowState& state, const OperandLayout& layout,
                           const PartitionConfig& cfg);

void write_lane(BatchState& state, const OperandLayout& layout, const PartitionConfig& cfg,
                unsigned lane, std::uint64_t value);
std::uint64_t read_lane(const BatchState& state, const OperandLayout& layout,
                        const PartitionConfig& cfg, unsigned lane);

}  // namespace pim
