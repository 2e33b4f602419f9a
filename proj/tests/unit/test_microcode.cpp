#include <functional>
#include <random>

#include "doctest.h"
#include "pim/microcode.hpp"

using namespace pim;

TEST_CASE("allocator respects reserved columns and reuses freed ones") {
  Allocator a({1, 16});
  std::vector<Col> ops;
  for (Col c = 0; c < 8; ++c) ops.push_back(c);
  a.reserve(ops);
  auto c = a.alloc(1);
  CHECK(c.front() >= 8);
  CHECK(c.front() < 16);
  a.free(c);
  CHECK(a.alloc(1) == c);
  CHECK(a.peak() == 1);
}

TEST_CASE("allocator exhaustion names the partition") {
  Allocator a({2, 8});
  a.alloc(8, 1);
  try {
    a.alloc(9, 0);
    FAIL("expected capacity error");
  } catch (const CapacityError& e) {
    CHECK(e.partition() == 0);
  }
  CHECK_THROWS_AS(a.alloc(1, 1), CapacityError);
  CHECK_THROWS_AS(a.free({3}), std::invalid_argument);
}

TEST_CASE("slots are free in every partition") {
  Allocator a({4, 4});
  a.alloc(2, 2);
  auto s = a.alloc_slots(1);
  CHECK(s.front() == 2);
  for (Col p = 0; p < 4; ++p) CHECK(a.live(p * 4 + 2));
  a.free_slots(s);
  CHECK_FALSE(a.live(6));
}

namespace {

// Runs a single-partition macro over every input combination.
template <class Emit>
void exhaustive_macro(std::size_t n_in, std::size_t n_out, std::size_t gates, Emit emit,
                      std::function<std::vector<bool>(const std::vector<bool>&)> truth) {
  Builder b;
  auto in = b.input("in", n_in);
  auto out = b.output("out", n_out);
  auto l = b.whole();
  emit(b, l, in, out);
  auto prog = b.finish();
  CHECK(validate_program(prog).ok());
  CHECK(prog.gate_count() == gates);
  for (std::uint64_t v = 0; v < (1u << n_in); ++v) {
    auto s = write_operand(RowState(prog.row_width()), prog.operand("in"), prog.config, v);
    auto r = run_program(s, prog).state;
    std::vector<bool> bits;
    for (std::size_t i = 0; i < n_in; ++i) bits.push_back((v >> i) & 1);
    auto expect = truth(bits);
    auto got = read_operand(r, prog.operand("out"), prog.config);
    for (std::size_t i = 0; i < n_out; ++i) CHECK(((got >> i) & 1) == expect[i]);
    CHECK(read_operand(r, prog.operand("in"), prog.config) == v);
  }
}

}  // namespace

TEST_CASE("macro lowerings reproduce their truth tables with documented gate counts") {
  using V = std::vector<bool>;
  auto lowered = [](MacroKind kind) {
    return [kind](Builder& b, const Lanes& l, const std::vector<Col>& in,
                  const std::vector<Col>& out) { lower_macro(b, l, kind, in, out); };
  };
  exhaustive_macro(2, 1, macro_gate_count(MacroKind::AND2), lowered(MacroKind::AND2),
                   [](const V& x) { return V{x[0] && x[1]}; });
  exhaustive_macro(2, 1, macro_gate_count(MacroKind::OR2), lowered(MacroKind::OR2),
                   [](const V& x) { return V{x[0] || x[1]}; });
  exhaustive_macro(2, 1, macro_gate_count(MacroKind::XOR2), lowered(MacroKind::XOR2),
                   [](const V& x) { return V{x[0] != x[1]}; });
  exhaustive_macro(2, 1, macro_gate_count(MacroKind::XNOR2), lowered(MacroKind::XNOR2),
                   [](const V& x) { return V{x[0] == x[1]}; });
  exhaustive_macro(3, 1, macro_gate_count(MacroKind::XOR3), lowered(MacroKind::XOR3),
                   [](const V& x) { return V{(x[0] != x[1]) != x[2]}; });
  exhaustive_macro(3, 1, macro_gate_count(MacroKind::MUX), lowered(MacroKind::MUX),
                   [](const V& x) { return V{x[0] ? x[1] : x[2]}; });
  exhaustive_macro(2, 2, macro_gate_count(MacroKind::HA), lowered(MacroKind::HA),
                   [](const V& x) { return V{x[0] != x[1], x[0] && x[1]}; });
  exhaustive_macro(3, 2, macro_gate_count(MacroKind::FA), lowered(MacroKind::FA), [](const V& x) {
    int s = x[0] + x[1] + x[2];
    return V{bool(s & 1), s >= 2};
  });
}

TEST_CASE("full adder is nine gates and FA(1,1,0) gives sum 0 carry 1") {
  CHECK(macro_gate_count(MacroKind::FA) == 9);
  Builder b;
  auto in = b.input("in", 3);
  auto out = b.output("out", 2);
  mc::fa(b, b.whole(), in[0], in[1], in[2], out[0], out[1]);
  auto prog = b.finish();
  CHECK(prog.gate_count() == 9);
  auto s = write_operand(RowState(prog.row_width()), prog.operand("in"), prog.config, 0b011);
  CHECK(read_operand(run_program(s, prog).state, prog.operand("out"), prog.config) == 0b10);
}

TEST_CASE("full adder outputs may alias inputs") {
  Builder b;
  auto in = b.input("in", 3);
  auto out = b.output("out", 2);
  auto l = b.whole();
  auto t = b.tmps(l, 3);
  for (int i = 0; i < 3; ++i) mc::copy(b, l, in[i], t[i]);
  mc::fa(b, l, t[0], t[1], t[2], t[0], t[2]);
  mc::copy(b, l, t[0], out[0]);
  mc::copy(b, l, t[2], out[1]);
  auto prog = b.finish();
  for (std::uint64_t v = 0; v < 8; ++v) {
    auto s = write_operand(RowState(prog.row_width()), prog.operand("in"), prog.config, v);
    int sum = int(v & 1) + int((v >> 1) & 1) + int((v >> 2) & 1);
    CHECK(read_operand(run_program(s, prog).state, prog.operand("out"), prog.config) ==
          std::uint64_t((sum & 1) | ((sum >> 1) << 1)));
  }
}

TEST_CASE("mux with select 0 passes the second data input") {
  Builder b;
  auto in = b.input("in", 3);
  auto out = b.output("out", 1);
  mc::mux(b, b.whole(), in[0], in[1], in[2], out[0]);
  auto prog = b.finish();
  for (std::uint64_t ab = 0; ab < 4; ++ab) {
    auto s = write_operand(RowState(prog.row_width()), prog.operand("in"), prog.config, ab << 1);
    CHECK(read_operand(run_program(s, prog).state, prog.operand("out"), prog.config) == (ab >> 1));
  }
}

TEST_CASE("operand encoding") {
  PartitionConfig cfg{4, 3};
  OperandLayout c{"x", LayoutFormat::CONTIGUOUS, OperandRole::INPUT, 0, 0, 4, "u"};
  auto s = write_operand(RowState(12), c, cfg, 5);
  CHECK(s.get(0));
  CHECK_FALSE(s.get(1));
  CHECK(s.get(2));
  CHECK_FALSE(s.get(3));
  OperandLayout st{"y", LayoutFormat::STRIDED, OperandRole::INPUT, 1, 0, 4, "u"};
  auto t = write_operand(RowState(12), st, cfg, 0b1010);
  for (std::size_t p = 0; p < 4; ++p) CHECK(t.get(p * 3 + 1) == bool((0b1010 >> p) & 1));
  CHECK_THROWS_AS(write_operand(RowState(12), c, cfg, 16), std::invalid_argument);

  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t v = rng() & 0xF;
    CHECK(read_operand(write_operand(RowState(12), c, cfg, v), c, cfg) == v);
    CHECK(read_operand(write_operand(RowState(12), st, cfg, v), st, cfg) == v);
  }
}

TEST_CASE("builder lanes drive every partition with one step") {
  Builder b(4);
  Col x = b.input_strided("x", 4);
  Col z = b.output_strided("z", 4);
  auto l = b.each(0, 4);
  mc::xor2(b, l, x, x, z);
  auto prog = b.finish();
  CHECK(validate_program(prog).ok());
  CHECK(prog.steps.size() == 5);
  CHECK(prog.gate_count() == 20);
}

TEST_CASE("constants are initialized once") {
  Builder b;
  auto out = b.output("z", 2);
  auto l = b.whole();
  Col one = b.constant(l, true);
  CHECK(b.constant(l, true) == one);
  mc::copy(b, l, one, out[0]);
  b.not_(l, one, out[1]);
  auto prog = b.finish();
  CHECK(validate_program(prog).ok());
  CHECK(read_operand(run_program(RowState(prog.row_width()), prog).state, prog.operand("z"),
                     prog.config) == 1);
}
