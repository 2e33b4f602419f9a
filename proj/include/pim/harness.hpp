#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pim/core.hpp"
#include "pim/oracle.hpp"

namespace pim {

// A value spread over several operands: each field holds the bits starting at `shift`.
struct Port {
  struct Field {
    std::string operand;
    unsigned shift = 0;
  };
  std::vector<Field> fields;

  static Port of(std::string operand) { return Port{{{std::move(operand), 0}}}; }
  std::size_t width(const MicroProgram& prog) const;
};

struct Kernel {
  std::string op;
  std::string variant;
  std::string size;  // "N=8" or "fmt=4,3"
  MicroProgram program;
  Port a, b;
  std::vector<Port> results;  // compared against oracle value, then aux
  std::function<OracleResult(std::uint64_t, std::uint64_t)> oracle;
  // Candidate inputs for random checking; the oracle decides whether they count.
  std::function<std::pair<std::uint64_t, std::uint64_t>(std::mt19937_64&)> sample;
  std::size_t b_width_override = 0;  // 0: derive from the port
};

class BudgetError : public std::runtime_error {
 public:
  BudgetError(std::uint64_t estimate, std::uint64_t budget);
  std::uint64_t estimate() const { return estimate_; }

 private:
  std::uint64_t estimate_;
};

struct Report {
  std::string op, variant, size;
  std::uint64_t cases = 0, passed = 0, failed = 0;
  std::string first_fail;  // "a=..;b=..;got=..;want=.."

  bool ok() const { return failed == 0; }
  friend bool operator==(const Report&, const Report&) = default;
};

// Decoded outputs for a batch of (a, b) inputs, one vector per result port.
std::vector<std::vector<std::uint64_t>> evaluate(
    const Kernel& k, const std::vector<std::pair<std::uint64_t, std::uint64_t>>& inputs);

inline constexpr std::uint64_t kDefaultBudget = std::uint64_t{1} << 24;

Report check_exhaustive(const Kernel& k, std::uint64_t budget = kDefaultBudget);
Report check_random(const Kernel& k, std::uint64_t count, std::uint64_t seed);
// Runs a fixed list of inputs (EXCLUDED ones are skipped).
Report check_cases(const Kernel& k,
                   const std::vector<std::pair<std::uint64_t, std::uint64_t>>& inputs);

std::string csv_header();
std::string to_csv(const Report& r);

}  // namespace pim
