#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "pim/serial_fixed.hpp"

using namespace pim;

TEST_CASE("serial add examples") {
  auto p = emit_add_serial(4);
  CHECK(validate_program(p).ok());
  CHECK(run_named(p, {{"x", 5}, {"y", 7}})["z"] == 12);
  CHECK(run_named(p, {{"x", 0}, {"y", 0}})["z"] == 0);
  CHECK(run_named(p, {{"x", 15}, {"y", 1}})["z"] == 16);
  CHECK(cost(p).cycles == 9 * 4 + 1);
}

TEST_CASE("serial add and sub exhaustive at 4 bits") {
  auto add_u = emit_add_serial(4), sub_u = emit_sub_serial(4);
  auto add_s = emit_add_serial(4, true), sub_s = emit_sub_serial(4, true);
  for (auto* p : {&add_u, &sub_u, &add_s, &sub_s}) CHECK(validate_program(*p).ok());
  for (std::uint64_t x = 0; x < 16; ++x)
    for (std::uint64_t y = 0; y < 16; ++y) {
      CHECK(run_named(add_u, {{"x", x}, {"y", y}})["z"] == x + y);
      CHECK(run_named(sub_u, {{"x", x}, {"y", y}})["z"] == ((x - y) & 31));
      auto sx = static_cast<std::int64_t>(x) - (x >= 8 ? 16 : 0);
      auto sy = static_cast<std::int64_t>(y) - (y >= 8 ? 16 : 0);
      CHECK(run_named(add_s, {{"x", x}, {"y", y}})["z"] == static_cast<std::uint64_t>(sx + sy) % 32);
      CHECK(run_named(sub_s, {{"x", x}, {"y", y}})["z"] == static_cast<std::uint64_t>(sx - sy) % 32);
    }
  CHECK(run_named(sub_u, {{"x", 7}, {"y", 5}})["z"] == 2);
  CHECK(run_named(sub_u, {{"x", 0}, {"y", 1}})["z"] == 31);
}

TEST_CASE("serial multiply") {
  auto p4 = emit_mult_serial(4);
  CHECK(validate_program(p4).ok());
  for (std::uint64_t x = 0; x < 16; ++x)
    for (std::uint64_t y = 0; y < 16; ++y) CHECK(run_named(p4, {{"x", x}, {"y", y}})["z"] == x * y);
  auto p8 = emit_mult_serial(8);
  CHECK(run_named(p8, {{"x", 13}, {"y", 11}})["z"] == 143);
  CHECK(run_named(p8, {{"x", 0}, {"y", 201}})["z"] == 0);
  CHECK(run_named(emit_mult_serial(1), {{"x", 1}, {"y", 1}})["z"] == 1);
}

TEST_CASE("karatsuba matches shift-and-add for every split shape") {
  std::mt19937_64 rng(3);
  for (std::size_t n : {4, 5, 6, 7, 9, 13, 16, 21, 32}) {
    auto p = emit_mult_serial(n, 2);
    REQUIRE(validate_program(p).ok());
    for (int t = 0; t < 40; ++t) {
      std::uint64_t mask = (std::uint64_t{1} << n) - 1, x = rng() & mask, y = rng() & mask;
      if (t == 0) x = y = mask;
      CHECK(run_named(p, {{"x", x}, {"y", y}})["z"] == x * y);
    }
  }
}

TEST_CASE("serial division") {
  auto p = emit_div_serial(4);
  CHECK(validate_program(p).ok());
  auto r = run_named(p, {{"z", 100}, {"d", 7}});
  CHECK(r["q"] == 14);
  CHECK(r["r"] == 2);
  for (std::uint64_t d = 1; d < 16; ++d)
    for (std::uint64_t z = 0; z < d * 16; ++z) {
      auto o = run_named(p, {{"z", z}, {"d", d}});
      CHECK(o["q"] == z / d);
      CHECK(o["r"] == z % d);
    }
  auto self = run_named(emit_div_serial(8), {{"z", 77}, {"d", 77}});
  CHECK(self["q"] == 1);
  CHECK(self["r"] == 0);
}

TEST_CASE("serial cost growth") {
  auto c = [](std::size_t n) { return static_cast<double>(cost(emit_add_serial(n)).cycles); };
  CHECK((c(16) - c(8)) * 2 == c(32) - c(16));
  auto m = [](std::size_t n) {
    return static_cast<double>(cost(emit_mult_serial(n, 64)).cycles);
  };
  double ratio = m(16) / m(8);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}
