#include "pim/microcode.hpp"

#include <algorithm>
#include <map>

namespace pim {

Allocator::Allocator(PartitionConfig cfg)
    : cfg_(cfg), used_(cfg.k), hint_(cfg.k, 0) {
  if (cfg.k == 0 || cfg.partition_width == 0)
    throw std::invalid_argument("allocator needs a non-empty partition config");
}

std::uint8_t Allocator::state(std::size_t p, std::size_t off) const {
  return off < used_[p].size() ? used_[p][off] : std::uint8_t{FREE};
}

void Allocator::mark(std::size_t p, std::size_t off, std::uint8_t s) {
  if (off >= used_[p].size()) used_[p].resize(off + 1, FREE);
  if (off >= offset_use_.size()) offset_use_.resize(off + 1, 0);
  std::uint8_t old = used_[p][off];
  if (old == s) return;
  if (old == FREE) ++offset_use_[off];
  if (s == FREE) {
    --offset_use_[off];
    hint_[p] = std::min(hint_[p], off);
    if (offset_use_[off] == 0) slot_hint_ = std::min(slot_hint_, off);
  }
  if (old == SCRATCH) --live_scratch_;
  if (s == SCRATCH) ++live_scratch_;
  used_[p][off] = s;
}

void Allocator::bump_peak() { peak_ = std::max(peak_, live_scratch_); }

void Allocator::reserve(const std::vector<Col>& cols) {
  for (Col c : cols) {
    std::size_t p = c / cfg_.partition_width, off = c % cfg_.partition_width;
    if (p >= cfg_.k) throw std::out_of_range("column outside the row");
    if (state(p, off) != FREE)
      throw std::invalid_argument("column " + std::to_string(c) + " is already live");
    mark(p, off, RESERVED);
  }
}

std::vector<Col> Allocator::alloc(std::size_t n, std::optional<std::size_t> partition) {
  std::vector<Col> out;
  std::size_t lo = partition ? *partition : 0, hi = partition ? *partition + 1 : cfg_.k;
  if (hi > cfg_.k) throw std::out_of_range("partition index out of range");
  for (std::size_t p = lo; p < hi && out.size() < n; ++p) {
    std::size_t off = hint_[p];
    while (off < cfg_.partition_width && out.size() < n) {
      if (state(p, off) == FREE) out.push_back(static_cast<Col>(p * cfg_.partition_width + off));
      ++off;
    }
  }
  if (out.size() < n) {
    std::size_t where = partition ? *partition : cfg_.k - 1;
    throw CapacityError(where, "partition " + std::to_string(where) + " exhausted: requested " +
                                   std::to_string(n) + " columns, " +
                                   std::to_string(out.size()) + " free");
  }
  for (Col c : out) {
    std::size_t p = c / cfg_.partition_width, off = c % cfg_.partition_width;
    mark(p, off, SCRATCH);
    if (hint_[p] == off) hint_[p] = off + 1;
  }
  bump_peak();
  return out;
}

std::vector<Col> Allocator::alloc_run(std::size_t n, std::size_t partition, bool reserved) {
  if (partition >= cfg_.k) throw std::out_of_range("partition index out of range");
  std::size_t start = hint_[partition], len = 0;
  for (std::size_t off = start; off < cfg_.partition_width && len < n; ++off) {
    if (state(partition, off) == FREE) {
      if (len == 0) start = off;
      ++len;
    } else {
      len = 0;
    }
  }
  if (len < n)
    throw CapacityError(partition, "partition " + std::to_string(partition) +
                                       " has no free run of " + std::to_string(n) + " columns");
  std::vector<Col> out;
  for (std::size_t i = 0; i < n; ++i) {
    mark(partition, start + i, reserved ? RESERVED : SCRATCH);
    out.push_back(static_cast<Col>(partition * cfg_.partition_width + start + i));
  }
  while (hint_[partition] < cfg_.partition_width && state(partition, hint_[partition]) != FREE)
    ++hint_[partition];
  bump_peak();
  return out;
}

std::vector<Col> Allocator::alloc_slots(std::size_t n, bool reserved) {
  std::vector<Col> out;
  std::size_t off = slot_hint_;
  while (out.size() < n) {
    if (off >= cfg_.partition_width)
      throw CapacityError(0, "no offset free in every partition (requested " + std::to_string(n) +
                                 ")");
    if (off >= offset_use_.size() || offset_use_[off] == 0) out.push_back(static_cast<Col>(off));
    ++off;
  }
  for (Col o : out)
    for (std::size_t p = 0; p < cfg_.k; ++p) mark(p, o, reserved ? RESERVED : SCRATCH);
  while (slot_hint_ < offset_use_.size() && offset_use_[slot_hint_] != 0) ++slot_hint_;
  for (std::size_t p = 0; p < cfg_.k; ++p)
    while (hint_[p] < used_[p].size() && used_[p][hint_[p]] != FREE) ++hint_[p];
  bump_peak();
  return out;
}

void Allocator::free(const std::vector<Col>& cols) {
  for (Col c : cols) {
    std::size_t p = c / cfg_.partition_width, off = c % cfg_.partition_width;
    if (p >= cfg_.k || state(p, off) == FREE)
      throw std::invalid_argument("freeing column " + std::to_string(c) + " that is not live");
    mark(p, off, FREE);
  }
}

void Allocator::free_slots(const std::vector<Col>& offsets) {
  for (Col o : offsets)
    for (std::size_t p = 0; p < cfg_.k; ++p) {
      if (state(p, o) == FREE)
        throw std::invalid_argument("freeing slot " + std::to_string(o) + " that is not live");
      mark(p, o, FREE);
    }
}

bool Allocator::live(Col c) const {
  std::size_t p = c / cfg_.partition_width, off = c % cfg_.partition_width;
  return p < cfg_.k && state(p, off) != FREE;
}

std::size_t macro_gate_count(MacroKind kind) {
  switch (kind) {
    case MacroKind::AND2: return 3;
    case MacroKind::OR2: return 2;
    case MacroKind::XOR2: return 5;
    case MacroKind::XNOR2: return 4;
    case MacroKind::XOR3: return 8;
    case MacroKind::MUX: return 4;
    case MacroKind::HA: return 5;
    case MacroKind::FA: return 9;
  }
  return 0;
}

const char* to_string(MacroKind kind) {
  switch (kind) {
    case MacroKind::AND2: return "AND2";
    case MacroKind::OR2: return "OR2";
    case MacroKind::XOR2: return "XOR2";
    case MacroKind::XNOR2: return "XNOR2";
    case MacroKind::XOR3: return "XOR3";
    case MacroKind::MUX: return "MUX";
    case MacroKind::HA: return "HA";
    case MacroKind::FA: return "FA";
  }
  return "?";
}

Builder::Builder(std::size_t partitions)
    : k_(partitions), alloc_(PartitionConfig{partitions, kSpan}) {
  if (partitions == 0 || (partitions & (partitions - 1)) != 0)
    throw std::invalid_argument("partition count must be a power of two");
}

Lanes Builder::whole() const { return Lanes{SwitchConfig(k_ - 1, true), {0}, false}; }

Lanes Builder::each(std::size_t lo, std::size_t hi) const {
  if (lo >= hi || hi > k_) throw std::out_of_range("partition range out of bounds");
  Lanes l{SwitchConfig(k_ - 1, false), {}, true};
  for (std::size_t p = lo; p < hi; ++p) l.bases.push_back(at(p, 0));
  return l;
}

Lanes Builder::spans(const std::vector<std::pair<std::size_t, std::size_t>>& groups) const {
  Lanes l{SwitchConfig(k_ - 1, false), {}, true};
  for (auto [first, last] : groups) {
    if (first > last || last >= k_) throw std::out_of_range("group span out of bounds");
    for (std::size_t p = first; p < last; ++p) l.switches[p] = true;
    l.bases.push_back(at(first, 0));
  }
  return l;
}

std::vector<Col> Builder::input(const std::string& name, std::size_t width,
                                const std::string& tag) {
  auto cols = alloc_.alloc_run(width, 0, true);
  operands_.push_back({name, LayoutFormat::CONTIGUOUS, OperandRole::INPUT, cols.front(), 0, width, tag});
  return cols;
}

std::vector<Col> Builder::output(const std::string& name, std::size_t width,
                                 const std::string& tag) {
  auto cols = alloc_.alloc_run(width, 0, true);
  operands_.push_back({name, LayoutFormat::CONTIGUOUS, OperandRole::OUTPUT, cols.front(), 0, width, tag});
  return cols;
}

Col Builder::input_strided(const std::string& name, std::size_t width, const std::string& tag,
                           std::size_t first_partition) {
  if (first_partition + width > k_) throw std::out_of_range("strided operand exceeds partitions");
  Col off = alloc_.alloc_slots(1, true).front();
  operands_.push_back({name, LayoutFormat::STRIDED, OperandRole::INPUT, off, first_partition, width, tag});
  return off;
}

Col Builder::output_strided(const std::string& name, std::size_t width, const std::string& tag,
                            std::size_t first_partition) {
  if (first_partition + width > k_) throw std::out_of_range("strided operand exceeds partitions");
  Col off = alloc_.alloc_slots(1, true).front();
  operands_.push_back({name, LayoutFormat::STRIDED, OperandRole::OUTPUT, off, first_partition, width, tag});
  return off;
}

void Builder::gate(const Lanes& lanes, GateKind kind, Col out, Col a, Col b) {
  CycleStep s;
  s.switches = lanes.switches;
  s.gates.reserve(lanes.bases.size());
  const std::size_t n = arity(kind);
  for (Col base : lanes.bases) {
    GateInstance g{kind, {n > 0 ? base + a : 0, n > 1 ? base + b : 0}, base + out};
    s.gates.push_back(g);
  }
  steps_.push_back(std::move(s));
}

void Builder::step(SwitchConfig switches, std::vector<GateInstance> gates) {
  steps_.push_back(CycleStep{std::move(switches), std::move(gates)});
}

Col Builder::tmp(const Lanes& lanes) {
  return lanes.slotted ? alloc_.alloc_slots(1).front() : alloc_.alloc(1).front();
}

std::vector<Col> Builder::tmps(const Lanes& lanes, std::size_t n) {
  return lanes.slotted ? alloc_.alloc_slots(n) : alloc_.alloc(n);
}

void Builder::release(const Lanes& lanes, Col c) {
  if (lanes.slotted) alloc_.free_slots({c});
  else alloc_.free({c});
}

void Builder::release(const Lanes& lanes, const std::vector<Col>& cs) {
  if (lanes.slotted) alloc_.free_slots(cs);
  else alloc_.free(cs);
}

Col Builder::slot() { return alloc_.alloc_slots(1).front(); }
void Builder::release_slot(Col offset) { alloc_.free_slots({offset}); }

Col Builder::constant(const Lanes& lanes, bool value) {
  auto& cache = lanes.slotted ? slot_const_[value] : row_const_[value];
  if (!cache) {
    if (lanes.slotted) {
      cache = alloc_.alloc_slots(1, true).front();
      init(each(0, k_), value, *cache);
    } else {
      cache = alloc_.alloc_run(1, 0, true).front();
      init(whole(), value, *cache);
    }
  }
  return *cache;
}

MicroProgram Builder::finish() const {
  std::vector<Col> offsets;
  auto note = [&](Col c) { offsets.push_back(c % kSpan); };
  for (const auto& s : steps_)
    for (const auto& g : s.gates) {
      note(g.out);
      for (std::size_t j = 0; j < arity(g.kind); ++j) note(g.in[j]);
    }
  PartitionConfig vcfg{k_, kSpan};
  for (const auto& op : operands_)
    for (Col c : op.columns(vcfg)) note(c);
  std::sort(offsets.begin(), offsets.end());
  offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
  if (offsets.empty()) offsets.push_back(0);
  std::vector<Col> dense(offsets.back() + 1, 0);
  for (std::size_t i = 0; i < offsets.size(); ++i) dense[offsets[i]] = static_cast<Col>(i);
  const Col pw = static_cast<Col>(offsets.size());
  auto remap = [&](Col c) { return (c / kSpan) * pw + dense[c % kSpan]; };

  MicroProgram prog;
  prog.config = PartitionConfig{k_, pw};
  prog.steps.reserve(steps_.size());
  for (const auto& s : steps_) {
    CycleStep t{s.switches, s.gates};
    for (auto& g : t.gates) {
      g.out = remap(g.out);
      for (std::size_t j = 0; j < arity(g.kind); ++j) g.in[j] = remap(g.in[j]);
    }
    prog.steps.push_back(std::move(t));
  }
  for (auto op : operands_) {
    op.base = op.format == LayoutFormat::CONTIGUOUS ? remap(op.base) : dense[op.base];
    prog.operands.push_back(std::move(op));
  }
  return prog;
}

namespace mc {

void copy(Builder& b, const Lanes& l, Col a, Col out) {
  Col t = b.tmp(l);
  b.not_(l, a, t);
  b.not_(l, t, out);
  b.release(l, t);
}

void and2(Builder& b, const Lanes& l, Col a, Col c, Col out) {
  auto t = b.tmps(l, 2);
  b.not_(l, a, t[0]);
  b.not_(l, c, t[1]);
  b.nor(l, t[0], t[1], out);
  b.release(l, t);
}

void or2(Builder& b, const Lanes& l, Col a, Col c, Col out) {
  Col t = b.tmp(l);
  b.nor(l, a, c, t);
  b.not_(l, t, out);
  b.release(l, t);
}

void xnor2(Builder& b, const Lanes& l, Col a, Col c, Col out) {
  auto t = b.tmps(l, 3);
  b.nor(l, a, c, t[0]);
  b.nor(l, a, t[0], t[1]);
  b.nor(l, c, t[0], t[2]);
  b.nor(l, t[1], t[2], out);
  b.release(l, t);
}

void xor2(Builder& b, const Lanes& l, Col a, Col c, Col out) {
  Col t = b.tmp(l);
  xnor2(b, l, a, c, t);
  b.not_(l, t, out);
  b.release(l, t);
}

void xor3(Builder& b, const Lanes& l, Col a, Col c, Col d, Col out) {
  auto t = b.tmps(l, 4);
  xnor2(b, l, a, c, t[0]);
  b.nor(l, t[0], d, t[1]);
  b.nor(l, t[0], t[1], t[2]);
  b.nor(l, d, t[1], t[3]);
  b.nor(l, t[2], t[3], out);
  b.release(l, t);
}

void mux_ns(Builder& b, const Lanes& l, Col s, Col ns, Col a, Col c, Col out) {
  auto t = b.tmps(l, 2);
  b.nor(l, ns, a, t[0]);  // s & ~a
  b.nor(l, s, c, t[1]);   // ~s & ~c
  b.nor(l, t[0], t[1], out);
  b.release(l, t);
}

void mux(Builder& b, const Lanes& l, Col s, Col a, Col c, Col out) {
  Col ns = b.tmp(l);
  b.not_(l, s, ns);
  mux_ns(b, l, s, ns, a, c, out);
  b.release(l, ns);
}

void ha(Builder& b, const Lanes& l, Col a, Col c, Col sum, Col carry) {
  auto t = b.tmps(l, 3);
  b.nor(l, a, c, t[0]);
  b.not_(l, a, t[1]);
  b.not_(l, c, t[2]);
  b.nor(l, t[1], t[2], carry);
  b.nor(l, t[0], carry, sum);
  b.release(l, t);
}

void fa(Builder& b, const Lanes& l, Col a, Col c, Col d, Col sum, Col carry) {
  auto t = b.tmps(l, 7);
  b.nor(l, a, c, t[0]);
  b.nor(l, a, t[0], t[1]);
  b.nor(l, c, t[0], t[2]);
  b.nor(l, t[1], t[2], t[3]);  // xnor(a, c)
  b.nor(l, t[3], d, t[4]);
  b.nor(l, t[3], t[4], t[5]);
  b.nor(l, d, t[4], t[6]);
  b.nor(l, t[5], t[6], sum);
  b.nor(l, t[0], t[4], carry);
  b.release(l, t);
}

}  // namespace mc

void lower_macro(Builder& b, const Lanes& lanes, MacroKind kind, std::span<const Col> in,
                 std::span<const Col> out) {
  auto need = [&](std::size_t ni, std::size_t no) {
    if (in.size() != ni || out.size() != no)
      throw std::invalid_argument(std::string("wrong operand count for ") + to_string(kind));
  };
  switch (kind) {
    case MacroKind::AND2: need(2, 1); mc::and2(b, lanes, in[0], in[1], out[0]); break;
    case MacroKind::OR2: need(2, 1); mc::or2(b, lanes, in[0], in[1], out[0]); break;
    case MacroKind::XOR2: need(2, 1); mc::xor2(b, lanes, in[0], in[1], out[0]); break;
    case MacroKind::XNOR2: need(2, 1); mc::xnor2(b, lanes, in[0], in[1], out[0]); break;
    case MacroKind::XOR3: need(3, 1); mc::xor3(b, lanes, in[0], in[1], in[2], out[0]); break;
    case MacroKind::MUX: need(3, 1); mc::mux(b, lanes, in[0], in[1], in[2], out[0]); break;
    case MacroKind::HA: need(2, 2); mc::ha(b, lanes, in[0], in[1], out[0], out[1]); break;
    case MacroKind::FA: need(3, 2); mc::fa(b, lanes, in[0], in[1], in[2], out[0], out[1]); break;
  }
}

namespace {

void check_fits(const OperandLayout& layout, std::uint64_t value) {
  if (layout.width < 64 && (value >> layout.width) != 0)
    throw std::invalid_argument("value " + std::to_string(value) + " does not fit in " +
                                std::to_string(layout.width) + " bits of " + layout.name);
}

}  // namespace

RowState write_operand(const RowState& state, const OperandLayout& layout,
                       const PartitionConfig& cfg, std::uint64_t value) {
  check_fits(layout, value);
  RowState out = state;
  for (std::size_t i = 0; i < layout.width; ++i) {
    Col c = layout.column(i, cfg);
    if (c >= out.width()) throw std::out_of_range("operand " + layout.name + " outside the row");
    out.set(c, (value >> i) & 1);
  }
  return out;
}

std::uint64_t read_operand(const RowState& state, const OperandLayout& layout,
                           const PartitionConfig& cfg) {
  if (layout.width > 64) throw std::invalid_argument("operand wider than 64 bits");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < layout.width; ++i)
    if (state.get(layout.column(i, cfg))) v |= std::uint64_t{1} << i;
  return v;
}

void write_lane(BatchState& state, const OperandLayout& layout, const PartitionConfig& cfg,
                unsigned lane, std::uint64_t value) {
  check_fits(layout, value);
  const std::uint64_t bit = std::uint64_t{1} << lane;
  for (std::size_t i = 0; i < layout.width; ++i) {
    auto& cell = state[layout.column(i, cfg)];
    if ((value >> i) & 1) cell |= bit;
    else cell &= ~bit;
  }
}

std::uint64_t read_lane(const BatchState& state, const OperandLayout& layout,
                        const PartitionConfig& cfg, unsigned lane) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < layout.width; ++i)
    if ((state[layout.column(i, cfg)] >> lane) & 1) v |= std::uint64_t{1} << i;
  return v;
}

}  // namespace pim
