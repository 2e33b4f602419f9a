#include "doctest.h"
#include "helpers.hpp"
#include "pim/dump.hpp"
#include "pim/kernels.hpp"

using namespace pim;

TEST_CASE("exhaustive add passes every case") {
  auto rep = check_exhaustive(fixed_kernel(FixedOp::ADD, Variant::SERIAL, 4));
  CHECK(rep.cases == 256);
  CHECK(rep.passed == 256);
  CHECK(rep.ok());
  CHECK(to_csv(rep) == "add,serial,N=4,256,256,0,");
}

TEST_CASE("excluded inputs are neither passes nor failures") {
  auto rep = check_exhaustive(fixed_kernel(FixedOp::DIV, Variant::SERIAL, 3));
  // Dividends below d * 8 with d in 1..7.
  std::uint64_t in_domain = 0;
  for (std::uint64_t d = 1; d < 8; ++d) in_domain += d * 8;
  CHECK(rep.cases == in_domain);
  CHECK(rep.passed == in_domain);
}

TEST_CASE("budget refusal reports the estimate") {
  auto k = fixed_kernel(FixedOp::ADD, Variant::SERIAL, 16);
  try {
    check_exhaustive(k, 1000);
    FAIL("expected a budget refusal");
  } catch (const BudgetError& e) {
    CHECK(e.estimate() == (std::uint64_t{1} << 32));
  }
  CHECK_THROWS_AS(check_exhaustive(k), BudgetError);
}

TEST_CASE("same seed gives the same report") {
  auto k = float_kernel(FloatOp::MUL, Variant::SERIAL, FloatFormat::make(8, 23));
  auto a = check_random(k, 300, 99), b = check_random(k, 300, 99);
  CHECK(a == b);
  CHECK(a.cases == 300);
  auto c = check_random(fixed_kernel(FixedOp::ADD, Variant::PARALLEL, 32), 300, 5);
  CHECK(c == check_random(fixed_kernel(FixedOp::ADD, Variant::PARALLEL, 32), 300, 5));
  CHECK(c.ok());
}

TEST_CASE("corrupted program is caught with a counterexample") {
  auto k = fixed_kernel(FixedOp::ADD, Variant::SERIAL, 4);
  // Turn the first NOR into a NOT of its first input.
  bool mutated = false;
  for (auto& step : k.program.steps) {
    for (auto& g : step.gates)
      if (g.kind == GateKind::NOR2) {
        g = GateInstance::not_(g.in[0], g.out);
        mutated = true;
        break;
      }
    if (mutated) break;
  }
  REQUIRE(mutated);
  auto rep = check_exhaustive(k);
  CHECK_FALSE(rep.ok());
  CHECK(rep.failed > 0);
  CHECK(rep.first_fail.find("a=") == 0);
  CHECK(rep.first_fail.find(";want=") != std::string::npos);

  auto p = fixed_kernel(FixedOp::MUL, Variant::PARALLEL, 4);
  p.program.steps.back().gates.back() = GateInstance::init(true, p.program.steps.back().gates.back().out);
  CHECK_FALSE(check_exhaustive(p).ok());
}

TEST_CASE("csv format") {
  CHECK(csv_header() == "op,variant,N_or_fmt,cases,passed,failed,first_fail_inputs");
  Report r{"fadd", "parallel", "fmt=8,23", 10, 9, 1, "a=1;b=2;got=3;want=4"};
  CHECK(to_csv(r) == "fadd,parallel,fmt=8,23,10,9,1,a=1;b=2;got=3;want=4");
}

TEST_CASE("fixed case lists") {
  auto k = fixed_kernel(FixedOp::DIV, Variant::PARALLEL, 4);
  auto rep = check_cases(k, {{100, 7}, {100, 0}, {9, 9}});
  CHECK(rep.cases == 2);
  CHECK(rep.ok());
}

TEST_CASE("every emitted kernel validates and round-trips through the dump format") {
  std::vector<Kernel> ks;
  for (auto v : {Variant::SERIAL, Variant::PARALLEL}) {
    for (auto op : {FixedOp::ADD, FixedOp::SUB, FixedOp::MUL, FixedOp::DIV}) ks.push_back(fixed_kernel(op, v, 8));
    for (auto op : {FloatOp::ADD, FloatOp::SUB, FloatOp::MUL, FloatOp::DIV, FloatOp::ADD_SAME_SIGN})
      ks.push_back(float_kernel(op, v, FloatFormat::make(4, 3)));
    ks.push_back(varshift_kernel(8, 3, ShiftDir::RIGHT, v));
    ks.push_back(normalize_kernel(8, v));
  }
  for (const auto& k : ks) {
    CAPTURE(k.op);
    CAPTURE(k.variant);
    CHECK(validate_program(k.program).ok());
    const std::string text = dump_program(k.program);
    CHECK(dump_program(parse_program(text)) == text);
  }
}
