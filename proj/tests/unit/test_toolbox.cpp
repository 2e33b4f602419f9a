#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "pim/kernels.hpp"
#include "pim/toolbox.hpp"

using namespace pim;

namespace {

std::uint64_t bits_of(const std::vector<Elem>& v, bool carry_a = false) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (carry_a ? v[i].a : v[i].g) out |= std::uint64_t{1} << i;
  return out;
}

std::vector<Elem> host_scan(AssocOp op, const std::vector<Elem>& x) {
  std::vector<Elem> out(x.size());
  Elem acc = identity(op);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = acc = combine(op, x[i], acc);
  return out;
}

std::vector<Elem> random_elems(std::mt19937_64& rng, std::size_t k) {
  std::vector<Elem> v(k);
  for (auto& e : v) e = {static_cast<bool>(rng() & 1), static_cast<bool>(rng() & 1)};
  return v;
}

std::map<std::string, std::uint64_t> run_fold(const ToolboxProgram& tp, AssocOp op,
                                              const std::vector<Elem>& x) {
  if (op == AssocOp::CARRY) return run_named(tp.program, {{"g", bits_of(x)}, {"a", bits_of(x, true)}});
  return run_named(tp.program, {{"x", bits_of(x)}});
}

}  // namespace

TEST_CASE("associativity of every fold operator") {
  std::mt19937_64 rng(3);
  for (auto op : {AssocOp::AND, AssocOp::OR, AssocOp::XOR, AssocOp::CARRY})
    for (int i = 0; i < 200; ++i) {
      auto v = random_elems(rng, 3);
      if (op != AssocOp::CARRY)
        for (auto& e : v) e.a = false;
      CHECK(combine(op, combine(op, v[0], v[1]), v[2]) == combine(op, v[0], combine(op, v[1], v[2])));
      CHECK(combine(op, identity(op), v[0]) == v[0]);
      CHECK(combine(op, v[0], identity(op)) == v[0]);
    }
}

TEST_CASE("shift by one takes two rounds") {
  auto tp = emit_shift(4, 1);
  CHECK(tp.rounds == 2);
  CHECK(communication_rounds(tp.program) == 2);
  // [a,b,c,d] = [1,0,1,1] -> [0,1,0,1]
  CHECK(run_named(tp.program, {{"x", 0b1101}})["z"] == 0b1010);
  CHECK(validate_program(tp.program).ok());
}

TEST_CASE("shift matches host array shift") {
  std::mt19937_64 rng(11);
  for (std::size_t k : {2, 4, 8, 16})
    for (std::size_t j = 1; j < k; ++j) {
      auto tp = emit_shift(k, j);
      CHECK(tp.rounds <= j + 1);
      CHECK(communication_rounds(tp.program) == tp.rounds);
      CHECK(validate_program(tp.program).ok());
      const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
      for (int t = 0; t < 20; ++t) {
        std::uint64_t x = rng() & mask;
        CHECK(run_named(tp.program, {{"x", x}})["z"] == ((x << j) & mask));
      }
    }
  auto full = emit_shift(8, 7);
  CHECK(run_named(full.program, {{"x", 0xff}})["z"] == 0x80);
}

TEST_CASE("broadcast takes log2 k rounds") {
  std::mt19937_64 rng(5);
  for (std::size_t k : {2, 4, 8, 16}) {
    std::size_t m = 0;
    while ((std::size_t{1} << m) < k) ++m;
    for (std::size_t src = 0; src < k; ++src) {
      auto tp = emit_broadcast(k, src);
      CHECK(tp.rounds == m);
      CHECK(communication_rounds(tp.program) == m);
      CHECK(validate_program(tp.program).ok());
      std::uint64_t x = rng() & ((std::uint64_t{1} << k) - 1);
      bool bit = (x >> src) & 1;
      CHECK(run_named(tp.program, {{"x", x}})["z"] == (bit ? (std::uint64_t{1} << k) - 1 : 0));
    }
  }
  auto tp = emit_broadcast(16, 9);
  CHECK(run_named(tp.program, {{"x", 1u << 9}})["z"] == 0xffff);
}

TEST_CASE("reduce and prefix round counts and values") {
  std::mt19937_64 rng(17);
  for (std::size_t k : {2, 4, 8, 16}) {
    std::size_t m = 0;
    while ((std::size_t{1} << m) < k) ++m;
    for (auto op : {AssocOp::AND, AssocOp::OR, AssocOp::XOR, AssocOp::CARRY}) {
      CAPTURE(k);
      CAPTURE(to_string(op));
      auto red = emit_reduce(k, op);
      auto pre = emit_prefix(k, op);
      CHECK(red.rounds == m);
      CHECK(pre.rounds == 2 * m - 1);
      CHECK(communication_rounds(red.program) == m);
      CHECK(communication_rounds(pre.program) == 2 * m - 1);
      CHECK(validate_program(red.program).ok());
      CHECK(validate_program(pre.program).ok());
      CHECK(pre.program.steps.size() <= 8 * pre.rounds + 4);

      const std::size_t trials = k <= 8 ? (std::size_t{1} << (op == AssocOp::CARRY ? 2 * k : k)) : 200;
      for (std::size_t t = 0; t < trials; ++t) {
        std::vector<Elem> x(k);
        if (k <= 8) {
          for (std::size_t i = 0; i < k; ++i) {
            x[i].g = (t >> i) & 1;
            if (op == AssocOp::CARRY) x[i].a = (t >> (k + i)) & 1;
          }
        } else {
          x = random_elems(rng, k);
          if (op != AssocOp::CARRY)
            for (auto& e : x) e.a = false;
        }
        auto want = host_scan(op, x);
        auto got_pre = run_fold(pre, op, x);
        auto got_red = run_fold(red, op, x);
        if (op == AssocOp::CARRY) {
          CHECK(got_pre["gg"] == bits_of(want));
          CHECK(got_pre["aa"] == bits_of(want, true));
          CHECK(got_red["gg"] == want.back().g);
          CHECK(got_red["aa"] == want.back().a);
        } else {
          CHECK(got_pre["z"] == bits_of(want));
          CHECK(got_red["z"] == want.back().g);
          CHECK(((got_pre["z"] >> (k - 1)) & 1) == got_red["z"]);
        }
      }
    }
  }
}

TEST_CASE("fold edge patterns") {
  auto and8 = emit_reduce(8, AssocOp::AND);
  CHECK(run_named(and8.program, {{"x", 0xff}})["z"] == 1);
  auto or8 = emit_reduce(8, AssocOp::OR);
  CHECK(run_named(or8.program, {{"x", 0x10}})["z"] == 1);
  auto scan = emit_prefix(8, AssocOp::OR);
  CHECK(run_named(scan.program, {{"x", 0}})["z"] == 0);
  CHECK(run_named(scan.program, {{"x", 1}})["z"] == 0xff);
}

TEST_CASE("toolbox argument checks") {
  CHECK_THROWS(emit_shift(4, 0));
  CHECK_THROWS(emit_shift(4, 4));
  CHECK_THROWS(emit_broadcast(4, 4));
  CHECK_THROWS(emit_reduce(6, AssocOp::OR));
  CHECK_THROWS(emit_prefix(12, AssocOp::XOR));
}

TEST_CASE("toolbox kernels pass their oracles") {
  for (std::size_t k : {2, 4, 8}) {
    for (std::size_t j = 1; j < k; ++j) CHECK(check_exhaustive(toolbox_kernel(ToolboxKind::SHIFT, k, AssocOp::OR, j)).ok());
    for (std::size_t s = 0; s < k; ++s)
      CHECK(check_exhaustive(toolbox_kernel(ToolboxKind::BROADCAST, k, AssocOp::OR, s)).ok());
    for (auto op : {AssocOp::AND, AssocOp::OR, AssocOp::XOR, AssocOp::CARRY})
      for (auto kind : {ToolboxKind::REDUCE, ToolboxKind::PREFIX}) {
        auto rep = check_exhaustive(toolbox_kernel(kind, k, op));
        CHECK_MESSAGE(rep.ok(), to_csv(rep));
      }
  }
  CHECK(check_random(toolbox_kernel(ToolboxKind::PREFIX, 32, AssocOp::CARRY), 500, 1).ok());
}
