#include "pim/core.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace pim {

const char* to_string(GateKind kind) {
  switch (kind) {
    case GateKind::INIT0: return "INIT0";
    case GateKind::INIT1: return "INIT1";
    case GateKind::NOT: return "NOT";
    case GateKind::NOR2: return "NOR2";
  }
  return "?";
}

std::size_t arity(GateKind kind) {
  switch (kind) {
    case GateKind::INIT0:
    case GateKind::INIT1: return 0;
    case GateKind::NOT: return 1;
    case GateKind::NOR2: return 2;
  }
  return 0;
}

bool is_init(GateKind kind) { return kind == GateKind::INIT0 || kind == GateKind::INIT1; }

GateInstance GateInstance::init(bool value, Col out) {
  return {value ? GateKind::INIT1 : GateKind::INIT0, {0, 0}, out};
}
GateInstance GateInstance::not_(Col a, Col out) { return {GateKind::NOT, {a, 0}, out}; }
GateInstance GateInstance::nor(Col a, Col b, Col out) { return {GateKind::NOR2, {a, b}, out}; }

Col OperandLayout::column(std::size_t bit, const PartitionConfig& cfg) const {
  if (format == LayoutFormat::CONTIGUOUS) return base + static_cast<Col>(bit);
  return static_cast<Col>((first_partition + bit) * cfg.partition_width + base);
}

std::vector<Col> OperandLayout::columns(const PartitionConfig& cfg) const {
  std::vector<Col> out;
  out.reserve(width);
  for (std::size_t i = 0; i < width; ++i) out.push_back(column(i, cfg));
  return out;
}

std::size_t MicroProgram::gate_count() const {
  std::size_t n = 0;
  for (const auto& s : steps) n += s.gates.size();
  return n;
}

const OperandLayout* MicroProgram::find_operand(const std::string& name) const {
  for (const auto& op : operands)
    if (op.name == name) return &op;
  return nullptr;
}

const OperandLayout& MicroProgram::operand(const std::string& name) const {
  if (const auto* op = find_operand(name)) return *op;
  throw std::out_of_range("no operand named '" + name + "'");
}

std::vector<Col> MicroProgram::scratch_columns() const {
  std::unordered_set<Col> named;
  for (const auto& op : operands)
    for (Col c : op.columns(config)) named.insert(c);
  std::vector<Col> out;
  std::unordered_set<Col> seen;
  for (const auto& s : steps)
    for (const auto& g : s.gates)
      if (!named.count(g.out) && seen.insert(g.out).second) out.push_back(g.out);
  std::sort(out.begin(), out.end());
  return out;
}

RowState::RowState(std::size_t width, bool fill) : cells_(width, fill ? 1 : 0) {
  if (width == 0) throw std::invalid_argument("row width must be positive");
}

RowState init_row(std::size_t width, bool fill) { return RowState(width, fill); }

std::string describe(const Violation& v) {
  std::ostringstream os;
  os << "step " << v.step;
  if (v.gate) os << " gate " << *v.gate;
  os << ": " << v.rule;
  if (!v.detail.empty()) os << " (" << v.detail << ")";
  return os.str();
}

bool ValidationReport::has(const std::string& rule) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.rule == rule; });
}

ConstraintError::ConstraintError(Violation v)
    : std::runtime_error(describe(v)), violation_(std::move(v)) {}

namespace {

bool config_sane(const PartitionConfig& cfg) {
  return cfg.k >= 1 && cfg.partition_width >= 1;
}

// Group index of every partition and the first partition of every group.
void partition_groups(const SwitchConfig& sw, std::size_t k, std::vector<std::size_t>& group_of,
                      std::vector<std::size_t>& group_first) {
  group_of.assign(k, 0);
  group_first.assign(1, 0);
  for (std::size_t p = 1; p < k; ++p) {
    if (sw[p - 1]) {
      group_of[p] = group_of[p - 1];
    } else {
      group_of[p] = group_of[p - 1] + 1;
      group_first.push_back(p);
    }
  }
}

}  // namespace

std::vector<Violation> check_step(const CycleStep& step, const PartitionConfig& cfg,
                                  std::size_t idx) {
  std::vector<Violation> out;
  auto add = [&](std::optional<std::size_t> gate, std::string rule, std::string detail) {
    out.push_back({idx, gate, std::move(rule), std::move(detail)});
  };
  if (!config_sane(cfg)) {
    add(std::nullopt, "partition config", "k and partition width must be positive");
    return out;
  }
  if (step.switches.size() != cfg.k - 1) {
    add(std::nullopt, "switch length",
        "expected " + std::to_string(cfg.k - 1) + ", got " + std::to_string(step.switches.size()));
    return out;
  }
  if (step.gates.empty()) add(std::nullopt, "empty step", "");

  const std::size_t width = cfg.row_width();
  std::vector<std::size_t> group_of, group_first;
  partition_groups(step.switches, cfg.k, group_of, group_first);

  std::unordered_map<std::size_t, std::size_t> gate_in_group;
  std::unordered_map<Col, std::size_t> writer;
  std::unordered_map<Col, std::vector<std::size_t>> reader;
  bool have_ref = false;
  GateKind ref_kind{};
  std::array<std::int64_t, 3> ref_rel{};

  for (std::size_t gi = 0; gi < step.gates.size(); ++gi) {
    const auto& g = step.gates[gi];
    const std::size_t n_in = arity(g.kind);
    bool in_bounds = g.out < width;
    for (std::size_t j = 0; j < n_in; ++j) in_bounds = in_bounds && g.in[j] < width;
    if (!in_bounds) {
      add(gi, "column bound", "row width " + std::to_string(width));
      continue;
    }
    for (std::size_t j = 0; j < n_in; ++j)
      if (g.in[j] == g.out) add(gi, "self overlap", "column " + std::to_string(g.out));

    const std::size_t grp = group_of[cfg.partition_of(g.out)];
    bool spans = false;
    for (std::size_t j = 0; j < n_in; ++j)
      if (group_of[cfg.partition_of(g.in[j])] != grp) spans = true;
    if (spans) {
      add(gi, "group span", "gate columns lie in different connected groups");
      continue;
    }
    auto [it, fresh] = gate_in_group.emplace(grp, gi);
    if (!fresh)
      add(gi, "group conflict", "group already used by gate " + std::to_string(it->second));

    auto [wit, wfresh] = writer.emplace(g.out, gi);
    if (!wfresh)
      add(gi, "write conflict", "column " + std::to_string(g.out) + " also written by gate " +
                                    std::to_string(wit->second));
    for (std::size_t j = 0; j < n_in; ++j) reader[g.in[j]].push_back(gi);

    const std::int64_t origin =
        static_cast<std::int64_t>(group_first[grp] * cfg.partition_width);
    std::array<std::int64_t, 3> rel{static_cast<std::int64_t>(g.out) - origin, 0, 0};
    for (std::size_t j = 0; j < n_in; ++j) rel[j + 1] = static_cast<std::int64_t>(g.in[j]) - origin;
    if (!have_ref) {
      have_ref = true;
      ref_kind = g.kind;
      ref_rel = rel;
    } else if (g.kind != ref_kind) {
      add(gi, "uniform pattern", "mixed gate kinds in one step");
    } else if (rel != ref_rel) {
      add(gi, "uniform pattern", "intra-group column offsets differ");
    }
  }
  for (const auto& [col, w] : writer) {
    auto r = reader.find(col);
    if (r == reader.end()) continue;
    for (std::size_t rg : r->second)
      if (rg != w) {
        add(w, "read/write conflict",
            "column " + std::to_string(col) + " read by gate " + std::to_string(rg));
        break;
      }
  }
  return out;
}

RowState apply_step(const RowState& state, const CycleStep& step, const PartitionConfig& cfg) {
  if (state.width() != cfg.row_width())
    throw ConstraintError({0, std::nullopt, "row width", "state does not match configuration"});
  auto v = check_step(step, cfg);
  if (!v.empty()) throw ConstraintError(v.front());
  RowState next = state;
  for (const auto& g : step.gates) {
    bool value = false;
    switch (g.kind) {
      case GateKind::INIT0: value = false; break;
      case GateKind::INIT1: value = true; break;
      case GateKind::NOT: value = !state.get(g.in[0]); break;
      case GateKind::NOR2: value = !(state.get(g.in[0]) || state.get(g.in[1])); break;
    }
    next.set(g.out, value);
  }
  return next;
}

RunResult run_program(const RowState& state, const MicroProgram& prog, bool trace) {
  if (state.width() != prog.row_width())
    throw ConstraintError({0, std::nullopt, "row width",
                           "state width " + std::to_string(state.width()) + " vs program width " +
                               std::to_string(prog.row_width())});
  RunResult r{state, {}};
  for (std::size_t i = 0; i < prog.steps.size(); ++i) {
    try {
      r.state = apply_step(r.state, prog.steps[i], prog.config);
    } catch (const ConstraintError& e) {
      Violation v = e.violation();
      v.step = i;
      throw ConstraintError(v);
    }
    if (trace) r.trace.push_back(r.state);
  }
  return r;
}

ValidationReport validate_program(const MicroProgram& prog) {
  ValidationReport rep;
  const auto& cfg = prog.config;
  auto add = [&](std::size_t step, std::optional<std::size_t> gate, std::string rule,
                 std::string detail) {
    rep.violations.push_back({step, gate, std::move(rule), std::move(detail)});
  };
  if (!config_sane(cfg)) {
    add(0, std::nullopt, "partition config", "k and partition width must be positive");
    return rep;
  }
  if (cfg.k > 1 && (cfg.k & (cfg.k - 1)) != 0)
    add(0, std::nullopt, "partition config", "k must be a power of two");

  const std::size_t width = cfg.row_width();
  std::vector<std::uint8_t> is_input(width, 0), is_output(width, 0), written(width, 0);
  std::vector<int> owner(width, -1);
  for (std::size_t oi = 0; oi < prog.operands.size(); ++oi) {
    const auto& op = prog.operands[oi];
    if (op.format == LayoutFormat::STRIDED &&
        (op.first_partition + op.width > cfg.k || op.base >= cfg.partition_width)) {
      add(0, std::nullopt, "column bound", "operand " + op.name + " exceeds partitions");
      continue;
    }
    for (Col c : op.columns(cfg)) {
      if (c >= width) {
        add(0, std::nullopt, "column bound", "operand " + op.name);
        continue;
      }
      if (owner[c] >= 0)
        add(0, std::nullopt, "operand overlap",
            op.name + " and " + prog.operands[static_cast<std::size_t>(owner[c])].name);
      owner[c] = static_cast<int>(oi);
      (op.role == OperandRole::INPUT ? is_input : is_output)[c] = 1;
    }
  }

  for (std::size_t si = 0; si < prog.steps.size(); ++si) {
    const auto& step = prog.steps[si];
    auto structural = check_step(step, cfg, si);
    bool bounds_ok = true;
    for (auto& v : structural) {
      if (v.rule == "column bound" || v.rule == "switch length") bounds_ok = false;
      rep.violations.push_back(std::move(v));
    }
    if (!bounds_ok) continue;
    for (std::size_t gi = 0; gi < step.gates.size(); ++gi) {
      const auto& g = step.gates[gi];
      for (std::size_t j = 0; j < arity(g.kind); ++j) {
        Col c = g.in[j];
        if (!is_input[c] && !written[c])
          add(si, gi, "uninitialized read", "column " + std::to_string(c));
      }
      if (is_input[g.out]) add(si, gi, "input overwrite", "column " + std::to_string(g.out));
    }
    for (const auto& g : step.gates) written[g.out] = 1;
  }
  for (const auto& op : prog.operands) {
    if (op.role != OperandRole::OUTPUT) continue;
    for (Col c : op.columns(cfg))
      if (c < width && !written[c]) {
        add(prog.steps.size(), std::nullopt, "output unwritten",
            op.name + " column " + std::to_string(c));
        break;
      }
  }
  return rep;
}

CostReport cost(const MicroProgram& prog, Accounting accounting) {
  CostReport r;
  const std::size_t width = prog.row_width();
  std::vector<std::uint8_t> preset(width, 0);
  for (const auto& s : prog.steps) {
    r.gate_count += s.gates.size();
    ++r.cycles;
    bool init_step = true;
    bool covered = true;
    for (const auto& g : s.gates) {
      if (is_init(g.kind)) {
        ++r.init_gates;
      } else {
        init_step = false;
        if (g.out >= width || !preset[g.out]) covered = false;
      }
    }
    if (!init_step && !covered) ++r.implicit_inits;
    for (const auto& g : s.gates)
      if (g.out < width) preset[g.out] = g.kind == GateKind::INIT1;
  }
  if (accounting == Accounting::MEMRISTIVE) r.cycles += r.implicit_inits;

  // Live range of a scratch value: from its write to its last read.
  std::unordered_set<Col> named;
  for (const auto& op : prog.operands)
    for (Col c : op.columns(prog.config)) named.insert(c);
  std::vector<long> open(width, -1), last(width, -1);
  std::vector<long> delta(prog.steps.size() + 2, 0);
  auto close = [&](Col c) {
    if (open[c] < 0) return;
    long end = std::max(open[c], last[c]);
    delta[static_cast<std::size_t>(open[c])] += 1;
    delta[static_cast<std::size_t>(end) + 1] -= 1;
    open[c] = -1;
  };
  for (std::size_t si = 0; si < prog.steps.size(); ++si) {
    const auto& s = prog.steps[si];
    for (const auto& g : s.gates)
      for (std::size_t j = 0; j < arity(g.kind); ++j)
        if (g.in[j] < width && open[g.in[j]] >= 0) last[g.in[j]] = static_cast<long>(si);
    for (const auto& g : s.gates) {
      if (g.out >= width || named.count(g.out)) continue;
      close(g.out);
      open[g.out] = static_cast<long>(si);
      last[g.out] = static_cast<long>(si);
    }
  }
  for (Col c = 0; c < width; ++c) close(c);
  long live = 0;
  for (std::size_t i = 0; i < prog.steps.size(); ++i) {
    live += delta[i];
    r.scratch_peak = std::max(r.scratch_peak, static_cast<std::size_t>(live));
  }
  return r;
}

CompiledProgram compile(const MicroProgram& prog) {
  CompiledProgram cp;
  cp.row_width = prog.row_width();
  cp.ops.reserve(prog.gate_count());
  for (const auto& s : prog.steps)
    for (const auto& g : s.gates) cp.ops.push_back({g.kind, g.in[0], g.in[1], g.out});
  return cp;
}

void run_batch(BatchState& state, const CompiledProgram& prog) {
  if (state.width() != prog.row_width)
    throw std::invalid_argument("batch width does not match program");
  for (const auto& op : prog.ops) {
    switch (op.kind) {
      case GateKind::INIT0: state[op.out] = 0; break;
      case GateKind::INIT1: state[op.out] = ~std::uint64_t{0}; break;
      case GateKind::NOT: state[op.out] = ~state[op.a]; break;
      case GateKind::NOR2: state[op.out] = ~(state[op.a] | state[op.b]); break;
    }
  }
}

}  // namespace pim
