#include "pim/harness.hpp"

#include <sstream>

#include "pim/microcode.hpp"

namespace pim {

std::size_t Port::width(const MicroProgram& prog) const {
  std::size_t w = 0;
  for (const auto& f : fields) w = std::max(w, f.shift + prog.operand(f.operand).width);
  return w;
}

BudgetError::BudgetError(std::uint64_t estimate, std::uint64_t budget)
    : std::runtime_error("exhaustive check needs about " + std::to_string(estimate) +
                         " cases, budget is " + std::to_string(budget)),
      estimate_(estimate) {}

namespace {

void write_port(BatchState& s, const MicroProgram& prog, const Port& port, unsigned lane,
                std::uint64_t value) {
  for (const auto& f : port.fields) {
    const auto& op = prog.operand(f.operand);
    std::uint64_t mask = op.width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << op.width) - 1;
    write_lane(s, op, prog.config, lane, (value >> f.shift) & mask);
  }
}

std::uint64_t read_port(const BatchState& s, const MicroProgram& prog, const Port& port,
                        unsigned lane) {
  std::uint64_t v = 0;
  for (const auto& f : port.fields)
    v |= read_lane(s, prog.operand(f.operand), prog.config, lane) << f.shift;
  return v;
}

struct Runner {
  const Kernel& k;
  CompiledProgram compiled;
  Report report;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pending;
  std::vector<OracleResult> expected;

  explicit Runner(const Kernel& kernel) : k(kernel), compiled(compile(kernel.program)) {
    report.op = k.op;
    report.variant = k.variant;
    report.size = k.size;
  }

  void push(std::uint64_t a, std::uint64_t b, const OracleResult& want) {
    pending.emplace_back(a, b);
    expected.push_back(want);
    if (pending.size() == 64) flush();
  }

  void flush() {
    if (pending.empty()) return;
    BatchState s(compiled.row_width);
    for (unsigned lane = 0; lane < pending.size(); ++lane) {
      write_port(s, k.program, k.a, lane, pending[lane].first);
      write_port(s, k.program, k.b, lane, pending[lane].second);
    }
    run_batch(s, compiled);
    for (unsigned lane = 0; lane < pending.size(); ++lane) {
      const auto& want = expected[lane];
      bool ok = true;
      std::string got_text, want_text;
      for (std::size_t r = 0; r < k.results.size(); ++r) {
        std::uint64_t got = read_port(s, k.program, k.results[r], lane);
        std::uint64_t exp = r == 0 ? want.value : want.aux;
        ok = ok && got == exp;
        got_text += (r ? "/" : "") + std::to_string(got);
        want_text += (r ? "/" : "") + std::to_string(exp);
      }
      ++report.cases;
      if (ok) {
        ++report.passed;
      } else {
        if (report.failed == 0)
          report.first_fail = "a=" + std::to_string(pending[lane].first) +
                              ";b=" + std::to_string(pending[lane].second) + ";got=" + got_text +
                              ";want=" + want_text;
        ++report.failed;
      }
    }
    pending.clear();
    expected.clear();
  }
};

}  // namespace

std::vector<std::vector<std::uint64_t>> evaluate(
    const Kernel& k, const std::vector<std::pair<std::uint64_t, std::uint64_t>>& inputs) {
  const auto compiled = compile(k.program);
  std::vector<std::vector<std::uint64_t>> out(k.results.size());
  for (std::size_t base = 0; base < inputs.size(); base += 64) {
    BatchState s(compiled.row_width);
    const std::size_t count = std::min<std::size_t>(64, inputs.size() - base);
    for (unsigned lane = 0; lane < count; ++lane) {
      write_port(s, k.program, k.a, lane, inputs[base + lane].first);
      write_port(s, k.program, k.b, lane, inputs[base + lane].second);
    }
    run_batch(s, compiled);
    for (unsigned lane = 0; lane < count; ++lane)
      for (std::size_t r = 0; r < k.results.size(); ++r)
        out[r].push_back(read_port(s, k.program, k.results[r], lane));
  }
  return out;
}

Report check_exhaustive(const Kernel& k, std::uint64_t budget) {
  const std::size_t wa = k.a.width(k.program);
  const std::size_t wb = k.b_width_override ? k.b_width_override
                         : k.b.fields.empty() ? 0
                                              : k.b.width(k.program);
  if (wa + wb >= 63 || (std::uint64_t{1} << (wa + wb)) > budget)
    throw BudgetError(wa + wb >= 63 ? ~std::uint64_t{0} : std::uint64_t{1} << (wa + wb), budget);
  Runner run(k);
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << wa); ++a)
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << wb); ++b) {
      auto want = k.oracle(a, b);
      if (want.in_domain()) run.push(a, b, want);
    }
  run.flush();
  return run.report;
}

Report check_random(const Kernel& k, std::uint64_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Runner run(k);
  std::uint64_t accepted = 0, attempts = 0;
  const std::uint64_t max_attempts = count * 1000 + 1000;
  while (accepted < count && attempts < max_attempts) {
    ++attempts;
    auto [a, b] = k.sample(rng);
    auto want = k.oracle(a, b);
    if (!want.in_domain()) continue;
    run.push(a, b, want);
    ++accepted;
  }
  run.flush();
  return run.report;
}

Report check_cases(const Kernel& k,
                   const std::vector<std::pair<std::uint64_t, std::uint64_t>>& inputs) {
  Runner run(k);
  for (auto [a, b] : inputs) {
    auto want = k.oracle(a, b);
    if (want.in_domain()) run.push(a, b, want);
  }
  run.flush();
  return run.report;
}

std::string csv_header() { return "op,variant,N_or_fmt,cases,passed,failed,first_fail_inputs"; }

std::string to_csv(const Report& r) {
  std::ostringstream os;
  os << r.op << ',' << r.variant << ',' << r.size << ',' << r.cases << ',' << r.passed << ','
     << r.failed << ',' << r.first_fail;
  return os.str();
}

}  // namespace pim
