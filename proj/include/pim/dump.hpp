#pragma once

#include <stdexcept>
#include <string>

#include "pim/core.hpp"

namespace pim {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Text form:
//   WIDTH <c>
//   PARTITIONS <k>
//   OPERAND <name> C <base> <width> <in|out> <tag>
//   OPERAND <name> S <first-partition> <offset> <width> <in|out> <tag>
//   STEP <idx> SW=<k-1 bits> ; NOR2(a,b)->o ; NOT(a)->o ; INIT1()->o
std::string dump_program(const MicroProgram& prog);
MicroProgram parse_program(const std::string& text);

}  // namespace pim
