#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pim {

using Col = std::uint32_t;

enum class GateKind : std::uint8_t { INIT0, INIT1, NOT, NOR2 };

const char* to_string(GateKind kind);
std::size_t arity(GateKind kind);
bool is_init(GateKind kind);

struct GateInstance {
  GateKind kind = GateKind::INIT0;
  std::array<Col, 2> in{};
  Col out = 0;

  static GateInstance init(bool value, Col out);
  static GateInstance not_(Col a, Col out);
  static GateInstance nor(Col a, Col b, Col out);

  friend bool operator==(const GateInstance&, const GateInstance&) = default;
};

// Element i is the switch between partition i and i+1; true means connected.
using SwitchConfig = std::vector<bool>;

struct CycleStep {
  SwitchConfig switches;
  std::vector<GateInstance> gates;
};

struct PartitionConfig {
  std::size_t k = 1;
  std::size_t partition_width = 0;

  std::size_t row_width() const { return k * partition_width; }
  std::size_t partition_of(Col c) const { return c / partition_width; }
};

enum class LayoutFormat : std::uint8_t { CONTIGUOUS, STRIDED };
enum class OperandRole : std::uint8_t { INPUT, OUTPUT };

// CONTIGUOUS: bit i at column base+i.
// STRIDED: bit i at column (first_partition+i)*partition_width + base.
struct OperandLayout {
  std::string name;
  LayoutFormat format = LayoutFormat::CONTIGUOUS;
  OperandRole role = OperandRole::INPUT;
  Col base = 0;
  std::size_t first_partition = 0;
  std::size_t width = 0;
  std::string tag = "u";

  Col column(std::size_t bit, const PartitionConfig& cfg) const;
  std::vector<Col> columns(const PartitionConfig& cfg) const;
};

struct MicroProgram {
  PartitionConfig config;
  std::vector<CycleStep> steps;
  std::vector<OperandLayout> operands;

  std::size_t row_width() const { return config.row_width(); }
  std::size_t gate_count() const;
  const OperandLayout& operand(const std::string& name) const;
  const OperandLayout* find_operand(const std::string& name) const;
  std::vector<Col> scratch_columns() const;
};

class RowState {
 public:
  explicit RowState(std::size_t width, bool fill = false);

  std::size_t width() const { return cells_.size(); }
  bool get(std::size_t i) const { return cells_.at(i) != 0; }
  void set(std::size_t i, bool v) { cells_.at(i) = v ? 1 : 0; }
  const std::vector<std::uint8_t>& cells() const { return cells_; }

  friend bool operator==(const RowState&, const RowState&) = default;

 private:
  std::vector<std::uint8_t> cells_;
};

RowState init_row(std::size_t width, bool fill);

struct Violation {
  std::size_t step = 0;
  std::optional<std::size_t> gate;
  std::string rule;
  std::string detail;
};

std::string describe(const Violation& v);

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(const std::string& rule) const;
};

class ConstraintError : public std::runtime_error {
 public:
  explicit ConstraintError(Violation v);
  const Violation& violation() const { return violation_; }

 private:
  Violation violation_;
};

// Structural rules of a single step (bounds, grouping, conflicts, uniform pattern).
std::vector<Violation> check_step(const CycleStep& step, const PartitionConfig& cfg,
                                  std::size_t step_index = 0);

RowState apply_step(const RowState& state, const CycleStep& step, const PartitionConfig& cfg);

struct RunResult {
  RowState state;
  std::vector<RowState> trace;
};

RunResult run_program(const RowState& state, const MicroProgram& prog, bool trace = false);

ValidationReport validate_program(const MicroProgram& prog);

enum class Accounting : std::uint8_t { LOGICAL, MEMRISTIVE };

struct CostReport {
  std::size_t cycles = 0;
  std::size_t gate_count = 0;
  std::size_t init_gates = 0;
  std::size_t implicit_inits = 0;
  std::size_t scratch_peak = 0;
};

CostReport cost(const MicroProgram& prog, Accounting accounting = Accounting::LOGICAL);

// Flat gate list; executing it in order equals executing the steps, since
// gates inside a step never read what another gate of that step writes.
struct CompiledProgram {
  struct Op {
    GateKind kind;
    Col a;
    Col b;
    Col out;
  };
  std::size_t row_width = 0;
  std::vector<Op> ops;
};

CompiledProgram compile(const MicroProgram& prog);

// 64 independent rows simulated at once, one per bit of each word.
class BatchState {
 public:
  explicit BatchState(std::size_t width) : cells_(width, 0) {}
  std::size_t width() const { return cells_.size(); }
  std::uint64_t& operator[](std::size_t i) { return cells_[i]; }
  std::uint64_t operator[](std::size_t i) const { return cells_[i]; }

 private:
  std::vector<std::uint64_t> cells_;
};

void run_batch(BatchState& state, const CompiledProgram& prog);

}  // namespace pim
