#include "pim/oracle.hpp"

#include <bit>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstring>
#include <stdexcept>

namespace pim {

using boost::multiprecision::cpp_int;

const char* to_string(FixedOp op) {
  switch (op) {
    case FixedOp::ADD: return "add";
    case FixedOp::SUB: return "sub";
    case FixedOp::MUL: return "mul";
    case FixedOp::DIV: return "div";
  }
  return "?";
}

const char* to_string(FloatOp op) {
  switch (op) {
    case FloatOp::ADD: return "fadd";
    case FloatOp::SUB: return "fsub";
    case FloatOp::MUL: return "fmul";
    case FloatOp::DIV: return "fdiv";
    case FloatOp::ADD_SAME_SIGN: return "fadd-unsigned";
  }
  return "?";
}

OracleResult oracle_fixed(FixedOp op, std::size_t n, std::uint64_t a, std::uint64_t b) {
  if (n == 0 || n > 32) throw std::invalid_argument("fixed oracle supports 1..32 bits");
  const std::uint64_t lim = std::uint64_t{1} << n;
  if (op == FixedOp::DIV) {
    if ((n < 32 && a >= lim * lim) || b >= lim) throw std::invalid_argument("operand exceeds width");
    if (b == 0 || (a >> n) >= b) return OracleResult::excluded();
    return OracleResult::of(a / b, a % b);
  }
  if (a >= lim || b >= lim) throw std::invalid_argument("operand exceeds width");
  switch (op) {
    case FixedOp::ADD: return OracleResult::of(a + b);
    case FixedOp::SUB: return OracleResult::of((a - b) & (2 * lim - 1));
    default: return OracleResult::of(a * b);
  }
}

namespace {

// value = sign * (mag + frac) * 2^exp, where frac in (0, 1) exactly when `inexact`.
OracleResult round_to(const FloatFormat& fmt, bool sign, cpp_int mag, long exp, bool inexact) {
  const long nm = static_cast<long>(fmt.nm);
  const long len = static_cast<long>(msb(mag)) + 1;
  if (len > nm + 1) {
    const long shift = len - (nm + 1);
    cpp_int q = mag >> shift;
    cpp_int rem = mag - (q << shift);
    cpp_int half = cpp_int(1) << (shift - 1);
    bool up = rem > half || (rem == half && (inexact || bit_test(q, 0)));
    if (up) q += 1;
    mag = q;
    exp += shift;
    if (msb(mag) == static_cast<unsigned long>(nm + 1)) {
      mag >>= 1;
      exp += 1;
    }
  } else {
    if (inexact) throw std::logic_error("inexact value without enough precision");
    mag <<= (nm + 1 - len);
    exp -= (nm + 1 - len);
  }
  const long biased = exp + nm + static_cast<long>(fmt.bias);
  const long emax = (1L << fmt.ne) - 2;
  if (biased < 1 || biased > emax) return OracleResult::excluded();
  std::uint64_t m = static_cast<std::uint64_t>(mag - (cpp_int(1) << nm));
  return OracleResult::of(fmt.pack(sign, static_cast<std::uint64_t>(biased), m));
}

}  // namespace

OracleResult oracle_float(const FloatFormat& fmt, FloatOp op, std::uint64_t x, std::uint64_t y) {
  if (!fmt.is_normal(x) || !fmt.is_normal(y)) return OracleResult::excluded();
  const long nm = static_cast<long>(fmt.nm), bias = static_cast<long>(fmt.bias);
  bool sx = fmt.sign_of(x), sy = fmt.sign_of(y);
  cpp_int mx = cpp_int(fmt.man_of(x)) + (cpp_int(1) << nm);
  cpp_int my = cpp_int(fmt.man_of(y)) + (cpp_int(1) << nm);
  long ex = static_cast<long>(fmt.exp_of(x)) - bias - nm;
  long ey = static_cast<long>(fmt.exp_of(y)) - bias - nm;

  switch (op) {
    case FloatOp::ADD_SAME_SIGN:
      if (sx != sy) return OracleResult::excluded();
      [[fallthrough]];
    case FloatOp::ADD:
    case FloatOp::SUB: {
      if (op == FloatOp::SUB) sy = !sy;
      long e = std::min(ex, ey);
      cpp_int a = mx << (ex - e), c = my << (ey - e);
      cpp_int sum = (sx ? -a : a) + (sy ? -c : c);
      if (sum == 0) return OracleResult::of(0);
      bool neg = sum < 0;
      return round_to(fmt, neg, neg ? cpp_int(-sum) : sum, e, false);
    }
    case FloatOp::MUL:
      return round_to(fmt, sx != sy, mx * my, ex + ey, false);
    case FloatOp::DIV: {
      const long k = 2 * nm + 8;
      cpp_int num = mx << k;
      cpp_int q = num / my;
      bool inexact = q * my != num;
      return round_to(fmt, sx != sy, q, ex - ey - k, inexact);
    }
  }
  return OracleResult::excluded();
}

std::uint64_t host_float32(FloatOp op, std::uint64_t x, std::uint64_t y) {
  float a = std::bit_cast<float>(static_cast<std::uint32_t>(x));
  float b = std::bit_cast<float>(static_cast<std::uint32_t>(y));
  volatile float r = 0;
  switch (op) {
    case FloatOp::ADD:
    case FloatOp::ADD_SAME_SIGN: r = a + b; break;
    case FloatOp::SUB: r = a - b; break;
    case FloatOp::MUL: r = a * b; break;
    case FloatOp::DIV: r = a / b; break;
  }
  float v = r;
  if (v == 0.0f) v = 0.0f;
  return std::bit_cast<std::uint32_t>(v);
}

}  // namespace pim
