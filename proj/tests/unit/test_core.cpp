#include <random>

#include "doctest.h"
#include "pim/core.hpp"
#include "pim/dump.hpp"

using namespace pim;

namespace {

MicroProgram single(std::size_t width, std::vector<CycleStep> steps, std::size_t k = 1) {
  MicroProgram p;
  p.config = {k, width / k};
  p.steps = std::move(steps);
  return p;
}

}  // namespace

TEST_CASE("init_row fills and rejects zero width") {
  auto r = init_row(8, false);
  CHECK(r.width() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK_FALSE(r.get(i));
  auto ones = init_row(3, true);
  CHECK(ones.get(0));
  CHECK(ones.get(2));
  CHECK(init_row(1024, false).cells() == std::vector<std::uint8_t>(1024, 0));
  CHECK_THROWS_AS(init_row(0, false), std::invalid_argument);
}

TEST_CASE("apply_step evaluates NOR") {
  PartitionConfig cfg{1, 3};
  RowState s(3);
  s.set(0, true);
  CycleStep step{{}, {GateInstance::nor(0, 1, 2)}};
  CHECK_FALSE(apply_step(s, step, cfg).get(2));
  RowState z(3);
  z.set(2, false);
  CHECK(apply_step(z, step, cfg).get(2));
}

TEST_CASE("parallel gates in disconnected partitions update together") {
  PartitionConfig cfg{2, 3};
  RowState s(6);
  CycleStep step{{false}, {GateInstance::nor(0, 1, 2), GateInstance::nor(3, 4, 5)}};
  auto out = apply_step(s, step, cfg);
  CHECK(out.get(2));
  CHECK(out.get(5));
}

TEST_CASE("apply_step rejects illegal steps") {
  PartitionConfig cfg{2, 3};
  RowState s(6);
  SUBCASE("group span") {
    CycleStep step{{false}, {GateInstance::nor(0, 3, 2)}};
    CHECK_THROWS_AS(apply_step(s, step, cfg), ConstraintError);
  }
  SUBCASE("two gates in one connected group") {
    CycleStep step{{true}, {GateInstance::not_(0, 1), GateInstance::not_(3, 4)}};
    try {
      apply_step(s, step, cfg);
      FAIL("expected a constraint error");
    } catch (const ConstraintError& e) {
      CHECK(e.violation().rule == "group conflict");
      CHECK(e.violation().gate == std::optional<std::size_t>(1));
    }
  }
  SUBCASE("non-uniform offsets") {
    CycleStep step{{false}, {GateInstance::not_(0, 1), GateInstance::not_(3, 5)}};
    CHECK(check_step(step, cfg).front().rule == "uniform pattern");
  }
  SUBCASE("mixed kinds") {
    CycleStep step{{false}, {GateInstance::not_(0, 1), GateInstance::init(true, 4)}};
    CHECK(check_step(step, cfg).front().rule == "uniform pattern");
  }
  SUBCASE("self overlap") {
    CycleStep step{{true}, {GateInstance::not_(1, 1)}};
    CHECK(check_step(step, cfg).front().rule == "self overlap");
  }
  SUBCASE("switch length") {
    CycleStep step{{}, {GateInstance::not_(0, 1)}};
    CHECK(check_step(step, cfg).front().rule == "switch length");
  }
}

TEST_CASE("run_program basics") {
  RowState s(8);
  CHECK(run_program(s, single(8, {})).state == s);
  auto r = run_program(s, single(8, {{{}, {GateInstance::init(true, 5)}}}), true);
  for (std::size_t i = 0; i < 8; ++i) CHECK(r.state.get(i) == (i == 5));
  CHECK(r.trace.size() == 1);
  CHECK_THROWS_AS(run_program(RowState(4), single(8, {})), ConstraintError);
}

TEST_CASE("run_program reports the failing step index") {
  auto prog = single(4, {{{}, {GateInstance::init(true, 0)}}, {{}, {GateInstance::not_(0, 9)}}});
  try {
    run_program(RowState(4), prog);
    FAIL("expected a constraint error");
  } catch (const ConstraintError& e) {
    CHECK(e.violation().step == 1);
    CHECK(e.violation().rule == "column bound");
  }
}

TEST_CASE("validate_program flags violations") {
  SUBCASE("column bound") {
    auto rep = validate_program(single(4, {{{}, {GateInstance::init(false, 4)}}}));
    CHECK(rep.has("column bound"));
  }
  SUBCASE("write conflict") {
    PartitionConfig cfg{2, 2};
    MicroProgram p;
    p.config = cfg;
    p.steps = {{{false}, {GateInstance::init(false, 1), GateInstance::init(false, 1)}}};
    CHECK(validate_program(p).has("write conflict"));
  }
  SUBCASE("read/write conflict across groups") {
    MicroProgram p;
    p.config = {2, 2};
    p.steps = {{{false}, {GateInstance::init(true, 0), GateInstance::init(true, 2)}},
               {{false}, {GateInstance::not_(0, 1), GateInstance::not_(2, 3)}},
               {{false}, {GateInstance::not_(0, 1), GateInstance::not_(1, 0)}}};
    auto rep = validate_program(p);
    CHECK_FALSE(rep.ok());
  }
  SUBCASE("uninitialized read and output unwritten") {
    MicroProgram p = single(4, {{{}, {GateInstance::not_(0, 1)}}});
    p.operands.push_back({"z", LayoutFormat::CONTIGUOUS, OperandRole::OUTPUT, 2, 0, 2, "u"});
    auto rep = validate_program(p);
    CHECK(rep.has("uninitialized read"));
    CHECK(rep.has("output unwritten"));
  }
  SUBCASE("input overwrite and operand overlap") {
    MicroProgram p = single(4, {{{}, {GateInstance::init(true, 0)}}});
    p.operands.push_back({"x", LayoutFormat::CONTIGUOUS, OperandRole::INPUT, 0, 0, 2, "u"});
    p.operands.push_back({"y", LayoutFormat::CONTIGUOUS, OperandRole::INPUT, 1, 0, 2, "u"});
    auto rep = validate_program(p);
    CHECK(rep.has("input overwrite"));
    CHECK(rep.has("operand overlap"));
  }
  SUBCASE("non power of two partitions") {
    MicroProgram p;
    p.config = {3, 2};
    CHECK(validate_program(p).has("partition config"));
  }
}

TEST_CASE("cost accounting") {
  CHECK(cost(single(4, {})).cycles == 0);
  CHECK(cost(single(4, {})).gate_count == 0);
  auto nor = single(4, {{{}, {GateInstance::nor(0, 1, 2)}}});
  CHECK(cost(nor).cycles == 1);
  CHECK(cost(nor).gate_count == 1);
  CHECK(cost(nor, Accounting::MEMRISTIVE).cycles == 2);
  auto preset = single(4, {{{}, {GateInstance::init(true, 2)}}, {{}, {GateInstance::nor(0, 1, 2)}}});
  CHECK(cost(preset, Accounting::MEMRISTIVE).cycles == 2);
  CHECK(cost(preset).init_gates == 1);
}

TEST_CASE("scratch peak counts overlapping live ranges") {
  MicroProgram p = single(8, {{{}, {GateInstance::init(true, 2)}},
                              {{}, {GateInstance::init(true, 3)}},
                              {{}, {GateInstance::nor(2, 3, 4)}},
                              {{}, {GateInstance::not_(4, 0)}}});
  p.operands.push_back({"z", LayoutFormat::CONTIGUOUS, OperandRole::OUTPUT, 0, 0, 1, "u"});
  CHECK(cost(p).scratch_peak == 3);
}

TEST_CASE("determinism, locality and serial splitting on random programs") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    PartitionConfig cfg{4, 4};
    MicroProgram p;
    p.config = cfg;
    for (int s = 0; s < 20; ++s) {
      Col in_off = static_cast<Col>(rng() % 2), out_off = 2 + static_cast<Col>(rng() % 2);
      CycleStep step{{false, false, false}, {}};
      for (Col part = 0; part < 4; ++part)
        if (rng() & 1) step.gates.push_back(GateInstance::not_(part * 4 + in_off, part * 4 + out_off));
      if (step.gates.empty()) step.gates.push_back(GateInstance::not_(in_off, out_off));
      p.steps.push_back(step);
    }
    RowState s(16);
    for (std::size_t i = 0; i < 16; ++i) s.set(i, rng() & 1);
    auto a = run_program(s, p).state;
    CHECK(a == run_program(s, p).state);

    MicroProgram split = p;
    split.steps.clear();
    for (const auto& st : p.steps)
      for (const auto& g : st.gates) split.steps.push_back({st.switches, {g}});
    CHECK(a == run_program(s, split).state);

    for (const auto& st : p.steps) {
      auto next = apply_step(s, st, cfg);
      for (std::size_t c = 0; c < 16; ++c) {
        bool written = false;
        for (const auto& g : st.gates) written = written || g.out == c;
        if (!written) CHECK(next.get(c) == s.get(c));
      }
      s = next;
    }
  }
}

TEST_CASE("batch simulation matches the row simulator") {
  MicroProgram p = single(6, {{{}, {GateInstance::nor(0, 1, 2)}},
                              {{}, {GateInstance::not_(2, 3)}},
                              {{}, {GateInstance::init(true, 4)}},
                              {{}, {GateInstance::nor(3, 4, 5)}}});
  auto cp = compile(p);
  BatchState b(6);
  b[0] = 0b0101;
  b[1] = 0b0011;
  run_batch(b, cp);
  for (unsigned lane = 0; lane < 4; ++lane) {
    RowState s(6);
    s.set(0, (b[0] >> lane) & 1);
    s.set(1, (b[1] >> lane) & 1);
    auto out = run_program(s, p).state;
    for (std::size_t c = 2; c < 6; ++c) CHECK(out.get(c) == bool((b[c] >> lane) & 1));
  }
}

TEST_CASE("dump and parse round-trip") {
  MicroProgram p;
  p.config = {2, 4};
  p.operands.push_back({"x", LayoutFormat::STRIDED, OperandRole::INPUT, 0, 0, 2, "u"});
  p.operands.push_back({"z", LayoutFormat::CONTIGUOUS, OperandRole::OUTPUT, 2, 0, 2, "s"});
  p.steps = {{{false}, {GateInstance::not_(0, 1), GateInstance::not_(4, 5)}},
             {{true}, {GateInstance::nor(1, 5, 2)}},
             {{true}, {GateInstance::init(false, 3)}}};
  auto text = dump_program(p);
  auto q = parse_program(text);
  CHECK(dump_program(q) == text);
  CHECK(q.operands.size() == 2);
  CHECK(q.steps.size() == 3);
  CHECK(q.steps[1].gates[0] == GateInstance::nor(1, 5, 2));
}

TEST_CASE("parse rejects malformed input") {
  const std::string head = "WIDTH 8\nPARTITIONS 2\n";
  CHECK_THROWS_AS(parse_program(head + "STEP 0 SW=2 ; NOT(0)->1\n"), ParseError);
  CHECK_THROWS_AS(parse_program(head + "STEP 0 SW=01 ; NOT(0)->1\n"), ParseError);
  CHECK_THROWS_AS(parse_program(head + "STEP 0 SW=0 ; NOR2(0)->1\n"), ParseError);
  CHECK_THROWS_AS(parse_program(head + "STEP 1 SW=0 ; NOT(0)->1\n"), ParseError);
  CHECK_THROWS_AS(parse_program("WIDTH 7\nPARTITIONS 2\n"), ParseError);
  CHECK_NOTHROW(parse_program(head + "STEP 0 SW=0 ; NOT(0)->1 ; NOT(4)->5\n"));
}
