#pragma once

#include <cstdint>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "pim/core.hpp"
#include "pim/harness.hpp"
#include "pim/microcode.hpp"

// Writes the named inputs into a zero row, runs the program, and decodes every operand.
inline std::map<std::string, std::uint64_t> run_named(
    const pim::MicroProgram& prog, const std::map<std::string, std::uint64_t>& inputs) {
  pim::RowState s(prog.row_width());
  for (const auto& [name, value] : inputs) s = pim::write_operand(s, prog.operand(name), prog.config, value);
  auto out = pim::run_program(s, prog).state;
  std::map<std::string, std::uint64_t> result;
  for (const auto& op : prog.operands) result[op.name] = pim::read_operand(out, op, prog.config);
  return result;
}


// Decoded results of one kernel evaluation, in port order.
inline std::vector<std::uint64_t> run_one(const pim::Kernel& k, std::uint64_t a, std::uint64_t b = 0) {
  std::vector<std::uint64_t> out;
  for (const auto& port : pim::evaluate(k, {{a, b}})) out.push_back(port.at(0));
  return out;
}

inline std::uint64_t bits_of(float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, sizeof u);
  return u;
}
