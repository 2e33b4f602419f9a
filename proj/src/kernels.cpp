#include "pim/kernels.hpp"

#include <algorithm>
#include <stdexcept>

#include "pim/parallel_float.hpp"
#include "pim/serial_fixed.hpp"

namespace pim {

const char* to_string(Variant v) { return v == Variant::SERIAL ? "serial" : "parallel"; }

Variant parse_variant(const std::string& s) {
  if (s == "serial") return Variant::SERIAL;
  if (s == "parallel") return Variant::PARALLEL;
  throw std::invalid_argument("unknown variant: " + s);
}

FixedOp parse_fixed_op(const std::string& s) {
  if (s == "add") return FixedOp::ADD;
  if (s == "sub") return FixedOp::SUB;
  if (s == "mul") return FixedOp::MUL;
  if (s == "div") return FixedOp::DIV;
  throw std::invalid_argument("unknown fixed-point op: " + s);
}

FloatOp parse_float_op(const std::string& s) {
  if (s == "fadd") return FloatOp::ADD;
  if (s == "fsub") return FloatOp::SUB;
  if (s == "fmul") return FloatOp::MUL;
  if (s == "fdiv") return FloatOp::DIV;
  if (s == "fadd-unsigned") return FloatOp::ADD_SAME_SIGN;
  throw std::invalid_argument("unknown floating-point op: " + s);
}

Port float_port(const std::string& prefix, const FloatFormat& fmt) {
  return Port{{{prefix + ".m", 0},
               {prefix + ".e", static_cast<unsigned>(fmt.nm)},
               {prefix + ".s", static_cast<unsigned>(fmt.nm + fmt.ne)}}};
}

namespace {

std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

MicroProgram fixed_program(FixedOp op, Variant v, std::size_t n, const KernelOptions& opt) {
  if (v == Variant::SERIAL) {
    switch (op) {
      case FixedOp::ADD: return emit_add_serial(n);
      case FixedOp::SUB: return emit_sub_serial(n);
      case FixedOp::MUL: return emit_mult_serial(n, opt.karatsuba_threshold);
      case FixedOp::DIV: return emit_div_serial(n);
    }
  }
  switch (op) {
    case FixedOp::ADD: return emit_add_parallel(n);
    case FixedOp::SUB: return emit_sub_parallel(n);
    case FixedOp::MUL:
      return emit_mult_parallel(n, opt.legacy_tail ? MultTail::LEGACY_N_ITER : MultTail::PREFIX_ADDER);
    case FixedOp::DIV: return emit_div_parallel(n);
  }
  throw std::invalid_argument("unknown fixed-point op");
}

MicroProgram float_program(FloatOp op, Variant v, const FloatFormat& fmt) {
  if (v == Variant::SERIAL) {
    switch (op) {
      case FloatOp::ADD: return emit_fadd_signed_serial(fmt);
      case FloatOp::SUB: return emit_fsub_signed_serial(fmt);
      case FloatOp::MUL: return emit_fmul_serial(fmt);
      case FloatOp::DIV: return emit_fdiv_serial(fmt);
      case FloatOp::ADD_SAME_SIGN: return emit_fadd_unsigned_serial(fmt);
    }
  }
  switch (op) {
    case FloatOp::ADD: return emit_fadd_parallel(fmt);
    case FloatOp::SUB: return emit_fsub_parallel(fmt);
    case FloatOp::MUL: return emit_fmul_parallel(fmt);
    case FloatOp::DIV: return emit_fdiv_parallel(fmt);
    case FloatOp::ADD_SAME_SIGN: return emit_fadd_unsigned_parallel(fmt);
  }
  throw std::invalid_argument("unknown floating-point op");
}

}  // namespace

Kernel fixed_kernel(FixedOp op, Variant v, std::size_t n, const KernelOptions& opt) {
  if (n == 0 || n > 32) throw std::invalid_argument("fixed-point width must be 1..32");
  Kernel k;
  k.op = to_string(op);
  k.variant = to_string(v);
  k.size = "N=" + std::to_string(n);
  k.program = fixed_program(op, v, n, opt);
  const std::uint64_t lim = std::uint64_t{1} << n;
  k.oracle = [op, n](std::uint64_t a, std::uint64_t b) { return oracle_fixed(op, n, a, b); };
  const bool par = v == Variant::PARALLEL;
  const auto hi = static_cast<unsigned>(n);
  if (op == FixedOp::DIV) {
    k.a = par ? Port{{{"z", 0}, {"w", hi}}} : Port::of("z");
    k.b = Port::of("d");
    k.results = {Port::of("q"), Port::of("r")};
    k.sample = [lim](std::mt19937_64& rng) {
      std::uint64_t d = 1 + below(rng, lim - 1);
      std::uint64_t q = below(rng, lim), r = below(rng, d);
      return std::pair{q * d + r, d};
    };
  } else {
    k.a = Port::of("x");
    k.b = Port::of("y");
    if (!par) k.results = {Port::of("z")};
    else if (op == FixedOp::MUL) k.results = {Port{{{"z", 0}, {"w", hi}}}};
    else k.results = {Port{{{"z", 0}, {"zn", hi}}}};
    k.sample = [lim](std::mt19937_64& rng) { return std::pair{below(rng, lim), below(rng, lim)}; };
  }
  return k;
}

Kernel float_kernel(FloatOp op, Variant v, const FloatFormat& fmt, const KernelOptions&) {
  fmt.check();
  Kernel k;
  k.op = to_string(op);
  k.variant = to_string(v);
  k.size = "fmt=" + std::to_string(fmt.ne) + "," + std::to_string(fmt.nm);
  k.program = float_program(op, v, fmt);
  k.a = float_port("x", fmt);
  k.b = float_port("y", fmt);
  k.results = {float_port("z", fmt)};
  k.oracle = [fmt, op](std::uint64_t a, std::uint64_t b) { return oracle_float(fmt, op, a, b); };
  const std::uint64_t emax = (std::uint64_t{1} << fmt.ne) - 2;
  const std::uint64_t mlim = std::uint64_t{1} << fmt.nm;
  k.sample = [fmt, op, emax, mlim](std::mt19937_64& rng) {
    auto mantissa = [&]() -> std::uint64_t {
      switch (below(rng, 8)) {
        case 0: return std::uint64_t{0};
        case 1: return mlim - 1;
        default: return below(rng, mlim);
      }
    };
    bool s1 = below(rng, 2), s2 = below(rng, 2);
    if (op == FloatOp::ADD_SAME_SIGN) s2 = s1;
    std::uint64_t e1 = 1 + below(rng, emax), e2;
    const bool additive = op != FloatOp::MUL && op != FloatOp::DIV;
    if (additive && below(rng, 2)) {
      // Nearby exponents exercise alignment, cancellation and rounding.
      std::int64_t delta = static_cast<std::int64_t>(below(rng, 2 * fmt.nm + 7)) -
                           static_cast<std::int64_t>(fmt.nm + 3);
      std::int64_t e = static_cast<std::int64_t>(e1) + delta;
      e2 = static_cast<std::uint64_t>(std::clamp<std::int64_t>(e, 1, static_cast<std::int64_t>(emax)));
    } else if (!additive) {
      // Keep the result exponent inside the normal range most of the time.
      std::int64_t centre = op == FloatOp::MUL
                                ? static_cast<std::int64_t>(2 * fmt.bias) - static_cast<std::int64_t>(e1)
                                : static_cast<std::int64_t>(e1);
      std::int64_t spread = static_cast<std::int64_t>(fmt.bias) / 2 + 1;
      std::int64_t e = centre + static_cast<std::int64_t>(below(rng, 2 * spread + 1)) - spread;
      e2 = static_cast<std::uint64_t>(std::clamp<std::int64_t>(e, 1, static_cast<std::int64_t>(emax)));
    } else {
      e2 = 1 + below(rng, emax);
    }
    return std::pair{fmt.pack(s1, e1, mantissa()), fmt.pack(s2, e2, mantissa())};
  };
  return k;
}

Kernel varshift_kernel(std::size_t nx, std::size_t nt, ShiftDir dir, Variant v) {
  Kernel k;
  k.op = dir == ShiftDir::LEFT ? "shl" : "shr";
  k.variant = to_string(v);
  k.size = "N=" + std::to_string(nx);
  k.program = v == Variant::SERIAL ? emit_varshift_serial(nx, nt, dir) : emit_varshift_parallel(nx, nt, dir);
  k.a = Port::of("x");
  k.b = Port::of("t");
  k.results = {Port::of("z")};
  if (dir == ShiftDir::RIGHT) k.results.push_back(Port::of("sticky"));
  const std::uint64_t mask = nx >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << nx) - 1;
  k.oracle = [dir, nx, mask](std::uint64_t x, std::uint64_t t) {
    if (t >= nx) return OracleResult::of(0, dir == ShiftDir::RIGHT && x != 0);
    if (dir == ShiftDir::LEFT) return OracleResult::of((x << t) & mask);
    return OracleResult::of(x >> t, (x & ((std::uint64_t{1} << t) - 1)) != 0);
  };
  const std::uint64_t tlim = std::uint64_t{1} << nt;
  k.sample = [mask, tlim](std::mt19937_64& rng) {
    return std::pair{rng() & mask, below(rng, tlim)};
  };
  return k;
}

Kernel normalize_kernel(std::size_t nx, Variant v) {
  Kernel k;
  k.op = "normalize";
  k.variant = to_string(v);
  k.size = "N=" + std::to_string(nx);
  k.program = v == Variant::SERIAL ? emit_normalize_serial(nx) : emit_normalize_parallel(nx);
  k.a = Port::of("x");
  k.results = {Port::of("z"), Port::of("t")};
  const std::uint64_t mask = nx >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << nx) - 1;
  k.oracle = [nx, mask](std::uint64_t x, std::uint64_t) {
    if (x == 0) return OracleResult::excluded();
    std::uint64_t t = 0;
    while (!((x << t) >> (nx - 1) & 1)) ++t;
    return OracleResult::of((x << t) & mask, t);
  };
  k.sample = [mask, nx](std::mt19937_64& rng) {
    return std::pair{(rng() & mask) >> below(rng, nx), std::uint64_t{0}};
  };
  return k;
}

ToolboxKind parse_toolbox_kind(const std::string& s) {
  if (s == "shift") return ToolboxKind::SHIFT;
  if (s == "broadcast") return ToolboxKind::BROADCAST;
  if (s == "reduce") return ToolboxKind::REDUCE;
  if (s == "prefix") return ToolboxKind::PREFIX;
  throw std::invalid_argument("unknown toolbox routine: " + s);
}

AssocOp parse_assoc_op(const std::string& s) {
  if (s == "and") return AssocOp::AND;
  if (s == "or") return AssocOp::OR;
  if (s == "xor") return AssocOp::XOR;
  if (s == "carry") return AssocOp::CARRY;
  throw std::invalid_argument("unknown associative op: " + s);
}

Kernel toolbox_kernel(ToolboxKind kind, std::size_t k, AssocOp assoc, std::size_t param) {
  if (k == 0 || k > 64) throw std::invalid_argument("toolbox width must be 1..64");
  Kernel out;
  out.variant = "parallel";
  out.size = "k=" + std::to_string(k);
  const std::uint64_t mask = k >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
  out.a = Port::of(assoc == AssocOp::CARRY && kind >= ToolboxKind::REDUCE ? "g" : "x");
  out.results = {Port::of("z")};
  out.sample = [mask](std::mt19937_64& rng) { return std::pair{rng() & mask, rng() & mask}; };
  switch (kind) {
    case ToolboxKind::SHIFT:
      out.op = "toolbox-shift";
      out.program = emit_shift(k, param).program;
      out.oracle = [param, mask](std::uint64_t x, std::uint64_t) {
        return OracleResult::of((x << param) & mask);
      };
      return out;
    case ToolboxKind::BROADCAST:
      out.op = "toolbox-broadcast";
      out.program = emit_broadcast(k, param).program;
      out.oracle = [param, mask](std::uint64_t x, std::uint64_t) {
        return OracleResult::of((x >> param) & 1 ? mask : 0);
      };
      return out;
    case ToolboxKind::REDUCE:
    case ToolboxKind::PREFIX:
      break;
  }
  const bool scan = kind == ToolboxKind::PREFIX;
  out.op = std::string(scan ? "toolbox-prefix-" : "toolbox-reduce-") + to_string(assoc);
  out.program = scan ? emit_prefix(k, assoc).program : emit_reduce(k, assoc).program;
  if (assoc == AssocOp::CARRY) {
    out.b = Port::of("a");
    out.results = {Port::of("gg"), Port::of("aa")};
  }
  out.oracle = [k, assoc, scan](std::uint64_t x, std::uint64_t y) {
    Elem acc = identity(assoc);
    std::uint64_t g = 0, a = 0;
    for (std::size_t i = 0; i < k; ++i) {
      acc = combine(assoc, {static_cast<bool>((x >> i) & 1), static_cast<bool>((y >> i) & 1)}, acc);
      if (scan) {
        g |= std::uint64_t{acc.g} << i;
        a |= std::uint64_t{acc.a} << i;
      }
    }
    if (!scan) {
      g = acc.g;
      a = acc.a;
    }
    return OracleResult::of(g, a);
  };
  return out;
}

}  // namespace pim
