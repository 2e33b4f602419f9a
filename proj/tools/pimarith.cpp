#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "pim/dump.hpp"
#include "pim/kernels.hpp"

using namespace pim;

namespace {

struct Selector {
  std::vector<std::string> ops;
  std::vector<std::string> variants{"serial"};
  std::vector<std::size_t> sizes;
  std::string fmt = "8,23";
  std::size_t nt = 5;
  std::string dir = "right";
  std::string assoc = "or";
  std::size_t param = 1;
  std::size_t karatsuba = kDefaultKaratsubaThreshold;
  bool legacy_tail = false;
};

FloatFormat parse_fmt(const std::string& text) {
  std::size_t ne = 0, nm = 0;
  char comma = 0;
  std::istringstream in(text);
  if (!(in >> ne >> comma >> nm) || comma != ',') throw std::invalid_argument("bad --fmt, want Ne,Nm: " + text);
  return FloatFormat::make(ne, nm);
}

bool is_float(const std::string& op) { return !op.empty() && op[0] == 'f'; }

std::vector<Kernel> kernels(const Selector& sel, const std::vector<std::size_t>& default_sizes) {
  if (sel.ops.empty()) throw std::invalid_argument("no --op given");
  const auto sizes = sel.sizes.empty() ? default_sizes : sel.sizes;
  KernelOptions opt;
  opt.karatsuba_threshold = sel.karatsuba;
  opt.legacy_tail = sel.legacy_tail;
  std::vector<Kernel> out;
  for (const auto& op : sel.ops) {
    if (op.rfind("toolbox-", 0) == 0) {
      const auto kind = parse_toolbox_kind(op.substr(8));
      for (std::size_t k : sizes) out.push_back(toolbox_kernel(kind, k, parse_assoc_op(sel.assoc), sel.param));
      continue;
    }
    for (const auto& vname : sel.variants) {
      const Variant v = parse_variant(vname);
      if (is_float(op)) {
        out.push_back(float_kernel(parse_float_op(op), v, parse_fmt(sel.fmt), opt));
      } else if (op == "varshift") {
        if (sel.dir != "left" && sel.dir != "right") throw std::invalid_argument("--dir is left or right");
        const ShiftDir d = sel.dir == "left" ? ShiftDir::LEFT : ShiftDir::RIGHT;
        for (std::size_t n : sizes) out.push_back(varshift_kernel(n, sel.nt, d, v));
      } else if (op == "normalize") {
        for (std::size_t n : sizes) out.push_back(normalize_kernel(n, v));
      } else {
        const FixedOp f = parse_fixed_op(op);
        for (std::size_t n : sizes) out.push_back(fixed_kernel(f, v, n, opt));
      }
    }
  }
  return out;
}

void add_selector(CLI::App* cmd, Selector& sel) {
  cmd->add_option("--op", sel.ops,
                  "add sub mul div fadd fsub fmul fdiv fadd-unsigned varshift normalize "
                  "toolbox-{shift,broadcast,reduce,prefix}")
      ->delimiter(',');
  cmd->add_option("--variant", sel.variants, "serial, parallel")->delimiter(',');
  cmd->add_option("--n", sel.sizes, "operand width (partition count for toolbox ops)")->delimiter(',');
  cmd->add_option("--fmt", sel.fmt, "float format Ne,Nm")->capture_default_str();
  cmd->add_option("--nt", sel.nt, "shift amount width for varshift")->capture_default_str();
  cmd->add_option("--dir", sel.dir, "varshift direction: left or right")->capture_default_str();
  cmd->add_option("--assoc", sel.assoc, "toolbox reduce/prefix operator: and or xor carry")
      ->capture_default_str();
  cmd->add_option("--param", sel.param, "toolbox shift distance or broadcast source")->capture_default_str();
  cmd->add_option("--karatsuba-threshold", sel.karatsuba, "serial multiply recursion threshold")
      ->capture_default_str();
  cmd->add_flag("--legacy-tail", sel.legacy_tail, "parallel multiply with the N-iteration tail");
}

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw std::runtime_error("cannot write " + path);
  }
  void line(const std::string& s) {
    std::cout << s << '\n';
    if (file_.is_open()) file_ << s << '\n';
  }

 private:
  std::ofstream file_;
};

std::vector<Kernel> suite(bool quick, std::uint64_t& count) {
  count = quick ? 200 : 10000;
  Selector s;
  s.variants = {"serial", "parallel"};
  std::vector<Kernel> out;
  for (const char* op : {"add", "sub", "mul", "div"}) {
    s.ops = {op};
    for (auto& k : kernels(s, {4, 16, 32})) out.push_back(std::move(k));
  }
  for (const char* fmt : {"4,3", "8,23"}) {
    s.fmt = fmt;
    s.ops = {"fadd", "fsub", "fmul", "fdiv", "fadd-unsigned"};
    for (auto& k : kernels(s, {})) out.push_back(std::move(k));
  }
  s.ops = {"varshift", "normalize"};
  for (auto& k : kernels(s, {8, 24})) out.push_back(std::move(k));
  return out;
}

int cmd_verify(const Selector& sel, bool all, bool quick, bool exhaustive,
               std::optional<std::uint64_t> random, std::uint64_t seed, std::uint64_t budget,
               const std::string& csv) {
  std::uint64_t count = random.value_or(1000);
  std::vector<Kernel> ks;
  if (all) ks = suite(quick, count);
  else ks = kernels(sel, {4});
  if (random) count = *random;
  Sink out(csv);
  out.line(csv_header());
  bool ok = true;
  for (const auto& k : ks) {
    Report r;
    // The suite tries every case where the budget allows it.
    if (exhaustive || (all && !random)) {
      try {
        r = check_exhaustive(k, budget);
      } catch (const BudgetError&) {
        if (exhaustive && !all) throw;
        r = check_random(k, count, seed);
      }
    } else {
      r = check_random(k, count, seed);
    }
    ok = ok && r.ok();
    out.line(to_csv(r));
  }
  return ok ? 0 : 1;
}

int cmd_cost(const Selector& sel, Accounting acc, const std::string& csv) {
  Sink out(csv);
  out.line("op,variant,N_or_fmt,cycles,gates,init_gates,scratch_peak,partitions,rounds");
  for (const auto& k : kernels(sel, {8, 16, 32})) {
    const CostReport c = cost(k.program, acc);
    std::ostringstream line;
    line << k.op << ',' << k.variant << ',' << k.size << ',' << c.cycles << ',' << c.gate_count << ','
         << c.init_gates << ',' << c.scratch_peak << ',' << k.program.config.k << ','
         << communication_rounds(k.program);
    out.line(line.str());
  }
  return 0;
}

struct Hardware {
  std::optional<double> rows, cols, arrays, partitions, period, energy;
};

double need(const std::optional<double>& v, const char* name) {
  if (!v) throw std::invalid_argument(std::string("missing hardware parameter: ") + name);
  if (*v <= 0) throw std::invalid_argument(std::string("hardware parameter must be positive: ") + name);
  return *v;
}

Hardware load_hw(const std::string& path, const Hardware& flags) {
  Hardware hw;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    const auto j = nlohmann::json::parse(in);
    auto get = [&](const char* key, std::optional<double>& dst) {
      if (j.contains(key)) dst = j.at(key).get<double>();
    };
    get("rows", hw.rows);
    get("cols", hw.cols);
    get("arrays", hw.arrays);
    get("partitions", hw.partitions);
    get("clock_period_s", hw.period);
    get("energy_per_gate_j", hw.energy);
  }
  for (auto [dst, src] : {std::pair{&hw.rows, &flags.rows}, std::pair{&hw.cols, &flags.cols},
                          std::pair{&hw.arrays, &flags.arrays}, std::pair{&hw.partitions, &flags.partitions},
                          std::pair{&hw.period, &flags.period}, std::pair{&hw.energy, &flags.energy}})
    if (*src) *dst = *src;
  return hw;
}

int cmd_throughput(const Selector& sel, const Hardware& hw, Accounting acc, const std::string& csv) {
  const double rows = need(hw.rows, "rows"), cols = need(hw.cols, "cols");
  const double arrays = need(hw.arrays, "arrays"), period = need(hw.period, "clock_period_s");
  const double energy = need(hw.energy, "energy_per_gate_j");
  Sink out(csv);
  out.line("op,variant,N_or_fmt,cycles,gates,ops_per_row,parallel_rows,throughput_ops_per_s,"
           "energy_per_batch_j,throughput_per_w");
  for (const auto& k : kernels(sel, {32})) {
    const CostReport c = cost(k.program, acc);
    const auto& cfg = k.program.config;
    // A logical partition wider than a hardware partition spans several joined ones;
    // copies in disjoint partition groups run in the same cycles.
    const double parts = hw.partitions ? *hw.partitions : static_cast<double>(cfg.k);
    const double per_partition = std::floor(cols / parts);
    const double joined = std::ceil(static_cast<double>(cfg.partition_width) / per_partition);
    const double ops_per_row = std::floor(parts / (static_cast<double>(cfg.k) * joined));
    if (ops_per_row < 1) {
      std::cerr << k.op << ' ' << k.variant << ' ' << k.size << " does not fit the configured row\n";
      out.line(k.op + ',' + k.variant + ',' + k.size + ',' + std::to_string(c.cycles) + ',' +
               std::to_string(c.gate_count) + ",0,0,0,0,0");
      continue;
    }
    const double lanes = rows * arrays;
    const double seconds = static_cast<double>(c.cycles) * period;
    const double ops = lanes * ops_per_row;
    const double joules = static_cast<double>(c.gate_count) * energy * ops;
    std::ostringstream line;
    line.precision(6);
    line << k.op << ',' << k.variant << ',' << k.size << ',' << c.cycles << ',' << c.gate_count << ','
         << ops_per_row << ',' << lanes << ',' << ops / seconds << ',' << joules << ','
         << ops / joules;
    out.line(line.str());
  }
  return 0;
}

int cmd_dump(const Selector& sel, const std::string& path, const std::string& input, bool roundtrip) {
  std::vector<std::string> texts;
  if (!input.empty()) {
    std::ifstream in(input);
    if (!in) throw std::runtime_error("cannot read " + input);
    std::stringstream buf;
    buf << in.rdbuf();
    texts.push_back(buf.str());
  } else {
    for (const auto& k : kernels(sel, {8})) texts.push_back(dump_program(k.program));
  }
  int status = 0;
  std::ofstream file;
  if (!path.empty()) {
    file.open(path);
    if (!file) throw std::runtime_error("cannot write " + path);
  }
  std::ostream& out = path.empty() ? std::cout : file;
  for (const auto& text : texts) {
    const MicroProgram prog = parse_program(text);
    const std::string again = dump_program(prog);
    if (roundtrip && again != text) {
      std::cerr << "round trip changed the program text\n";
      status = 1;
    }
    if (!validate_program(prog).ok()) {
      std::cerr << "program fails validation: " << describe(validate_program(prog).violations.at(0)) << '\n';
      status = 1;
    }
    out << again;
  }
  return status;
}

Accounting parse_accounting(const std::string& s) {
  if (s == "logical") return Accounting::LOGICAL;
  if (s == "memristive") return Accounting::MEMRISTIVE;
  throw std::invalid_argument("unknown accounting mode: " + s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gate-level arithmetic for partitioned processing-in-memory crossbars"};
  app.require_subcommand(1);

  Selector sel;
  std::string csv, accounting = "logical", hw_path, out_path, in_path;
  bool all = false, quick = false, exhaustive = false, roundtrip = false;
  std::optional<std::uint64_t> random;
  std::uint64_t seed = 1, budget = kDefaultBudget;
  Hardware hw_flags;

  auto* verify = app.add_subcommand("verify", "Check emitted programs against the oracles");
  add_selector(verify, sel);
  verify->add_flag("--all", all, "run the full suite over every op, variant and format");
  verify->add_flag("--quick", quick, "with --all: fewer random cases");
  auto* ex = verify->add_flag("--exhaustive", exhaustive, "every input pair");
  verify->add_option("--random", random, "number of random cases")->excludes(ex);
  verify->add_option("--seed", seed, "random seed")->capture_default_str();
  verify->add_option("--budget", budget, "largest exhaustive case count")->capture_default_str();
  verify->add_option("--csv", csv, "also write the report here");

  auto* costc = app.add_subcommand("cost", "Cycle and gate counts without simulation");
  add_selector(costc, sel);
  costc->add_option("--accounting", accounting, "logical or memristive")->capture_default_str();
  costc->add_option("--csv", csv, "also write the table here");

  auto* tp = app.add_subcommand("throughput", "Project throughput from user hardware parameters");
  add_selector(tp, sel);
  tp->add_option("--hw", hw_path, "JSON hardware description");
  tp->add_option("--rows", hw_flags.rows, "rows per array");
  tp->add_option("--cols", hw_flags.cols, "columns per row");
  tp->add_option("--arrays", hw_flags.arrays, "number of arrays");
  tp->add_option("--partitions", hw_flags.partitions, "hardware partitions per row");
  tp->add_option("--period", hw_flags.period, "clock period in seconds");
  tp->add_option("--energy", hw_flags.energy, "energy per gate in joules");
  tp->add_option("--accounting", accounting, "logical or memristive")->capture_default_str();
  tp->add_option("--csv", csv, "also write the table here");

  auto* dump = app.add_subcommand("dump", "Write programs in the text dump format");
  add_selector(dump, sel);
  dump->add_option("--out", out_path, "output file (default stdout)");
  dump->add_option("--in", in_path, "re-read an existing dump instead of emitting");
  dump->add_flag("--roundtrip", roundtrip, "fail unless parse then dump reproduces the text");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*verify) return cmd_verify(sel, all, quick, exhaustive, random, seed, budget, csv);
    if (*costc) return cmd_cost(sel, parse_accounting(accounting), csv);
    if (*tp) return cmd_throughput(sel, load_hw(hw_path, hw_flags), parse_accounting(accounting), csv);
    if (*dump) return cmd_dump(sel, out_path, in_path, roundtrip);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
