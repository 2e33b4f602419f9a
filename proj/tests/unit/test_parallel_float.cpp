#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "pim/kernels.hpp"
#include "pim/parallel_float.hpp"

using namespace pim;

namespace {

const FloatFormat kToy = FloatFormat::make(4, 3);
const FloatFormat kSingle = FloatFormat::make(8, 23);

}  // namespace

TEST_CASE("parallel variable shift") {
  auto p = emit_varshift_parallel(8, 3, ShiftDir::RIGHT);
  CHECK(validate_program(p).ok());
  CHECK(p.config.k == 8);
  auto r = run_named(p, {{"x", 0b01100000}, {"t", 5}});
  CHECK(r["z"] == 0b11);
  CHECK(r["sticky"] == 0);
  CHECK(run_named(p, {{"x", 0x5A}, {"t", 0}})["z"] == 0x5A);
  for (auto dir : {ShiftDir::LEFT, ShiftDir::RIGHT})
    for (auto [nx, nt] : {std::pair{8, 3}, std::pair{8, 4}, std::pair{6, 2}, std::pair{7, 4}}) {
      auto rep = check_exhaustive(varshift_kernel(nx, nt, dir, Variant::PARALLEL));
      CHECK_MESSAGE(rep.ok(), to_csv(rep));
    }
}

TEST_CASE("parallel shift matches the serial shifter") {
  for (auto dir : {ShiftDir::LEFT, ShiftDir::RIGHT}) {
    auto ks = varshift_kernel(24, 5, dir), kp = varshift_kernel(24, 5, dir, Variant::PARALLEL);
    std::mt19937_64 rng(2);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> in;
    for (int i = 0; i < 300; ++i) in.push_back(ks.sample(rng));
    CHECK(evaluate(ks, in) == evaluate(kp, in));
  }
}

TEST_CASE("parallel normalize") {
  auto p = emit_normalize_parallel(8);
  CHECK(validate_program(p).ok());
  auto r = run_named(p, {{"x", 0b00000110}});
  CHECK(r["z"] == 0b11000000);
  CHECK(r["t"] == 5);
  r = run_named(p, {{"x", 0x80}});
  CHECK(r["z"] == 0x80);
  CHECK(r["t"] == 0);
  for (std::size_t n : {3, 5, 8, 11}) {
    auto rep = check_exhaustive(normalize_kernel(n, Variant::PARALLEL));
    CHECK_MESSAGE(rep.ok(), to_csv(rep));
  }
}

TEST_CASE("parallel float partitions") {
  CHECK(float_partitions(kToy) == 16);
  CHECK(float_partitions(kSingle) == 64);
  CHECK(emit_fadd_parallel(kSingle).config.k == 64);
}

TEST_CASE("parallel toy format exhaustive") {
  for (auto op : {FloatOp::ADD_SAME_SIGN, FloatOp::ADD, FloatOp::SUB, FloatOp::MUL, FloatOp::DIV}) {
    auto k = float_kernel(op, Variant::PARALLEL, kToy);
    REQUIRE(validate_program(k.program).ok());
    auto rep = check_exhaustive(k);
    CHECK_MESSAGE(rep.ok(), to_csv(rep));
  }
}

TEST_CASE("parallel single precision worked examples") {
  auto add = float_kernel(FloatOp::ADD, Variant::PARALLEL, kSingle);
  auto fsub = float_kernel(FloatOp::SUB, Variant::PARALLEL, kSingle);
  auto mul = float_kernel(FloatOp::MUL, Variant::PARALLEL, kSingle);
  auto div = float_kernel(FloatOp::DIV, Variant::PARALLEL, kSingle);
  CHECK(run_one(add, bits_of(1.5f), bits_of(2.25f))[0] == bits_of(3.75f));
  CHECK(run_one(add, bits_of(-1.5f), bits_of(2.25f))[0] == bits_of(0.75f));
  CHECK(run_one(fsub, bits_of(-3.0f), bits_of(-3.0f))[0] == 0);
  CHECK(run_one(fsub, bits_of(1.0f), bits_of(1e-8f))[0] == bits_of(1.0f - 1e-8f));
  CHECK(run_one(mul, bits_of(1.5f), bits_of(-2.25f))[0] == bits_of(-3.375f));
  CHECK(run_one(div, bits_of(1.0f), bits_of(3.0f))[0] == bits_of(1.0f / 3.0f));
  CHECK(run_one(div, bits_of(-6.0f), bits_of(1.5f))[0] == bits_of(-4.0f));
}

TEST_CASE("parallel single precision random against the oracle and the serial emitters") {
  for (auto op : {FloatOp::ADD_SAME_SIGN, FloatOp::ADD, FloatOp::SUB, FloatOp::MUL, FloatOp::DIV}) {
    auto kp = float_kernel(op, Variant::PARALLEL, kSingle);
    auto rep = check_random(kp, 2000, 23);
    CHECK_MESSAGE(rep.ok(), to_csv(rep));
    auto ks = float_kernel(op, Variant::SERIAL, kSingle);
    std::mt19937_64 rng(8);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> in;
    while (in.size() < 200) {
      auto c = ks.sample(rng);
      if (ks.oracle(c.first, c.second).in_domain()) in.push_back(c);
    }
    CHECK(evaluate(ks, in) == evaluate(kp, in));
  }
}

TEST_CASE("parallel float is faster than serial float") {
  for (auto op : {FloatOp::ADD, FloatOp::SUB, FloatOp::MUL, FloatOp::DIV})
    CHECK(cost(float_kernel(op, Variant::PARALLEL, kSingle).program).cycles <
          cost(float_kernel(op, Variant::SERIAL, kSingle).program).cycles);
}
