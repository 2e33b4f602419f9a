#include "pim/toolbox.hpp"

#include <algorithm>
#include <stdexcept>

namespace pim {

const char* to_string(AssocOp op) {
  switch (op) {
    case AssocOp::AND: return "and";
    case AssocOp::OR: return "or";
    case AssocOp::XOR: return "xor";
    case AssocOp::CARRY: return "carry";
  }
  return "?";
}

Elem combine(AssocOp op, Elem hi, Elem lo) {
  switch (op) {
    case AssocOp::AND: return {hi.g && lo.g, false};
    case AssocOp::OR: return {hi.g || lo.g, false};
    case AssocOp::XOR: return {hi.g != lo.g, false};
    case AssocOp::CARRY: return {hi.g || (hi.a && lo.g), hi.a && lo.a};
  }
  return {};
}

Elem identity(AssocOp op) {
  switch (op) {
    case AssocOp::AND: return {true, false};
    case AssocOp::CARRY: return {false, true};
    default: return {};
  }
}

std::size_t communication_rounds(const MicroProgram& prog) {
  std::size_t rounds = 0;
  const SwitchConfig* prev = nullptr;
  for (const auto& s : prog.steps) {
    const bool linked = std::find(s.switches.begin(), s.switches.end(), true) != s.switches.end();
    if (linked && (!prev || *prev != s.switches)) ++rounds;
    prev = linked ? &s.switches : nullptr;
  }
  return rounds;
}

namespace par {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace {

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

std::size_t log2_exact(std::size_t n) {
  std::size_t m = 0;
  while ((std::size_t{1} << m) < n) ++m;
  return m;
}

void check_range(const Builder& b, Range r) {
  if (r.n == 0 || r.hi() > b.partitions()) throw std::out_of_range("partition range out of bounds");
}

// Combines the element at relative partition 0 into the one at `dist`.
void combine_into(Builder& b, const Lanes& l, AssocOp op, std::size_t dist, Col x, Col na) {
  const Col xl = x, xr = b.at(dist, x);
  switch (op) {
    case AssocOp::OR: {
      Col t = b.slot();
      b.nor(l, xl, xr, b.at(dist, t));
      b.not_(l, b.at(dist, t), xr);
      b.release_slot(t);
      break;
    }
    case AssocOp::AND: {
      Col t = b.slot();
      b.not_(l, xl, t);
      b.not_(l, xr, b.at(dist, t));
      b.nor(l, t, b.at(dist, t), xr);
      b.release_slot(t);
      break;
    }
    case AssocOp::XOR: {
      Col t = b.slot();
      b.not_(l, xl, b.at(dist, t));
      mc::xnor2(b, l, b.at(dist, t), xr, xr);
      b.release_slot(t);
      break;
    }
    case AssocOp::CARRY: {
      Col ng = b.slot(), w = b.slot(), u = b.slot();
      const Col nar = b.at(dist, na);
      b.not_(l, xl, b.at(dist, ng));
      b.nor(l, na, nar, b.at(dist, w));
      b.nor(l, nar, b.at(dist, ng), b.at(dist, u));
      b.nor(l, xr, b.at(dist, u), b.at(dist, ng));
      b.not_(l, b.at(dist, ng), xr);
      b.not_(l, b.at(dist, w), nar);
      b.release_slot(ng);
      b.release_slot(w);
      b.release_slot(u);
      break;
    }
  }
}

// Combines right <- left for every right partition in `rights` at distance `dist`.
void combine_level(Builder& b, AssocOp op, const std::vector<std::size_t>& rights,
                   std::size_t dist, Col x, Col na) {
  if (rights.empty()) return;
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t p : rights) groups.emplace_back(p - dist, p);
  combine_into(b, b.spans(groups), op, dist, x, na);
}

}  // namespace

Lanes local(const Builder& b, Range r) { return b.each(r.lo, r.hi()); }

std::size_t shift(Builder& b, Range r, Col src, Col dst, long j, bool fill) {
  check_range(b, r);
  if (src == dst) throw std::invalid_argument("shift needs distinct source and destination");
  const std::size_t dist = static_cast<std::size_t>(j < 0 ? -j : j);
  if (dist == 0) {
    mc::copy(b, local(b, r), src, dst);
    return 0;
  }
  if (dist >= r.n) {
    b.init(local(b, r), fill, dst);
    return 0;
  }
  const std::size_t sources = r.n - dist;
  // Sources sit at [lo, hi - dist) for upward shifts and [lo + dist, hi) otherwise.
  const Range from{j > 0 ? r.lo : r.lo + dist, sources};
  const Range vacated{j > 0 ? r.lo : r.hi() - dist, dist};
  Col t = b.slot();
  b.not_(local(b, from), src, t);
  b.init(local(b, vacated), fill, dst);
  std::size_t rounds = 0;
  for (std::size_t phase = 0; phase <= dist && phase < sources; ++phase) {
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    for (std::size_t i = phase; i < sources; i += dist + 1) {
      const std::size_t left = r.lo + i;
      groups.emplace_back(left, left + dist);
    }
    const Lanes l = b.spans(groups);
    if (j > 0) b.not_(l, t, b.at(dist, dst));
    else b.not_(l, b.at(dist, t), dst);
    ++rounds;
  }
  b.release_slot(t);
  return rounds;
}

std::size_t broadcast(Builder& b, Range r, std::size_t src, Col from, Col to, Col nto) {
  check_range(b, r);
  if (!is_pow2(r.n)) throw std::invalid_argument("broadcast range must be a power of two");
  if (src < r.lo || src >= r.hi()) throw std::out_of_range("broadcast source outside range");
  const Lanes at_src = b.single(src);
  b.not_(at_src, from, nto);
  if (to != from) b.not_(at_src, nto, to);
  const std::size_t rel = src - r.lo, m = log2_exact(r.n);
  // Distances halve each round, so every pair stays inside its own 2d-aligned block.
  for (std::size_t t = m; t-- > 0;) {
    const std::size_t d = std::size_t{1} << t;
    const bool holder_right = (rel >> t) & 1;
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    // Holders agree with src on bits < t.
    const std::size_t low = rel & (d - 1);
    for (std::size_t block = 0; block < r.n; block += 2 * d)
      groups.emplace_back(r.lo + block + low, r.lo + block + low + d);
    const Lanes l = b.spans(groups);
    const Col h = holder_right ? d : 0, q = holder_right ? 0 : d;
    b.not_(l, b.at(h, nto), b.at(q, to));
    b.not_(l, b.at(q, to), b.at(q, nto));
  }
  return m;
}

std::size_t reduce(Builder& b, Range r, AssocOp op, Col x, Col na) {
  check_range(b, r);
  if (!is_pow2(r.n)) throw std::invalid_argument("reduce range must be a power of two");
  const std::size_t m = log2_exact(r.n);
  for (std::size_t d = 0; d < m; ++d) {
    const std::size_t dist = std::size_t{1} << d, span = dist << 1;
    std::vector<std::size_t> rights;
    for (std::size_t p = span - 1; p < r.n; p += span) rights.push_back(r.lo + p);
    combine_level(b, op, rights, dist, x, na);
  }
  return m;
}

std::size_t prefix(Builder& b, Range r, AssocOp op, Col x, Col na) {
  const std::size_t up = reduce(b, r, op, x, na);
  std::size_t rounds = up;
  for (std::size_t d = up; d-- > 1;) {
    const std::size_t dist = std::size_t{1} << (d - 1), span = dist << 1;
    std::vector<std::size_t> rights;
    for (std::size_t p = span + dist - 1; p < r.n; p += span) rights.push_back(r.lo + p);
    combine_level(b, op, rights, dist, x, na);
    ++rounds;
  }
  return rounds;
}

void copy_bit(Builder& b, std::size_t from_p, Col from, std::size_t to_p, Col to) {
  if (from_p == to_p) {
    mc::copy(b, b.single(from_p), from, to);
    return;
  }
  const std::size_t lo = std::min(from_p, to_p), hi = std::max(from_p, to_p);
  const Lanes l = b.spans({{lo, hi}});
  Col t = b.slot();
  b.not_(l, b.at(from_p - lo, from), b.at(to_p - lo, t));
  b.not_(l, b.at(to_p - lo, t), b.at(to_p - lo, to));
  b.release_slot(t);
}

void not_bit(Builder& b, std::size_t from_p, Col from, std::size_t to_p, Col to) {
  const std::size_t lo = std::min(from_p, to_p), hi = std::max(from_p, to_p);
  const Lanes l = lo == hi ? b.single(lo) : b.spans({{lo, hi}});
  b.not_(l, b.at(from_p - lo, from), b.at(to_p - lo, to));
}

}  // namespace par

namespace {

ToolboxProgram finish(Builder& b, std::size_t rounds) { return {b.finish(), rounds}; }

}  // namespace

ToolboxProgram emit_shift(std::size_t k, std::size_t j) {
  if (j < 1 || j >= k) throw std::invalid_argument("shift distance must be in [1, k-1]");
  Builder b(k);
  Col x = b.input_strided("x", k);
  Col z = b.output_strided("z", k);
  std::size_t rounds = par::shift(b, {0, k}, x, z, static_cast<long>(j));
  return finish(b, rounds);
}

ToolboxProgram emit_broadcast(std::size_t k, std::size_t src) {
  if (src >= k) throw std::out_of_range("broadcast source out of range");
  Builder b(k);
  Col x = b.input_strided("x", k);
  Col z = b.output_strided("z", k);
  Col nz = b.slot();
  std::size_t rounds = par::broadcast(b, {0, k}, src, x, z, nz);
  return finish(b, rounds);
}

namespace {

ToolboxProgram fold_program(std::size_t k, AssocOp op, bool scan) {
  Builder b(k);
  const par::Range r{0, k};
  const std::size_t first = scan ? 0 : k - 1, width = scan ? k : 1;
  const Lanes all = par::local(b, r);
  std::size_t rounds = 0;
  if (op == AssocOp::CARRY) {
    Col g = b.input_strided("g", k), a = b.input_strided("a", k);
    Col gg = b.output_strided("gg", width, "u", first);
    Col aa = b.output_strided("aa", width, "u", first);
    Col na = b.slot();
    mc::copy(b, all, g, gg);
    b.not_(all, a, na);
    rounds = scan ? par::prefix(b, r, op, gg, na) : par::reduce(b, r, op, gg, na);
    b.not_(scan ? all : b.single(k - 1), na, aa);
    b.release_slot(na);
  } else {
    Col x = b.input_strided("x", k);
    Col z = b.output_strided("z", width, "u", first);
    mc::copy(b, all, x, z);
    rounds = scan ? par::prefix(b, r, op, z) : par::reduce(b, r, op, z);
  }
  return finish(b, rounds);
}

}  // namespace

ToolboxProgram emit_reduce(std::size_t k, AssocOp op) {
  if (!k || (k & (k - 1))) throw std::invalid_argument("reduce needs a power-of-two k");
  return fold_program(k, op, false);
}

ToolboxProgram emit_prefix(std::size_t k, AssocOp op) {
  if (!k || (k & (k - 1))) throw std::invalid_argument("prefix needs a power-of-two k");
  return fold_program(k, op, true);
}

}  // namespace pim
