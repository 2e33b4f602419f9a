#include "pim/serial_fixed.hpp"

#include <stdexcept>
#include <string>

namespace pim {
namespace serial {

namespace {

Col bit_at(const Bits& v, std::size_t i) { return i < v.size() ? v[i] : kZero; }

void require_columns(const Bits& v, const char* what) {
  for (Col c : v)
    if (c == kZero) throw std::invalid_argument(std::string(what) + " must not contain constant bits");
}

}  // namespace

Bits slice(const Bits& v, std::size_t from, std::size_t count) {
  if (from + count > v.size()) throw std::out_of_range("slice beyond word");
  return Bits(v.begin() + static_cast<std::ptrdiff_t>(from),
              v.begin() + static_cast<std::ptrdiff_t>(from + count));
}

Bits zeros(std::size_t n) { return Bits(n, kZero); }

void add(Builder& b, const Lanes& l, const Bits& a, const Bits& addend, const Bits& out,
         Col carry_in) {
  const std::size_t n = out.size();
  Col carry = carry_in;
  bool own = false;
  auto drop_carry = [&] {
    if (own) b.release(l, carry);
    carry = kZero;
    own = false;
  };
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Col> ins;
    for (Col c : {bit_at(a, i), bit_at(addend, i), carry})
      if (c != kZero) ins.push_back(c);
    const bool last = i + 1 == n;
    // Carry out of this bit lands straight in the top output when nothing else feeds it.
    const bool direct = i + 2 == n && bit_at(a, i + 1) == kZero && bit_at(addend, i + 1) == kZero;
    Col next = kZero;
    if (ins.size() >= 2 && !last) {
      if (direct) next = out[i + 1];
      else next = own ? carry : b.tmp(l);
    }
    switch (ins.size()) {
      case 0: b.init(l, false, out[i]); break;
      case 1:
        if (ins[0] != out[i]) mc::copy(b, l, ins[0], out[i]);
        if (ins[0] == carry) drop_carry();
        break;
      case 2:
        if (last) mc::xor2(b, l, ins[0], ins[1], out[i]);
        else mc::ha(b, l, ins[0], ins[1], out[i], next);
        break;
      default:
        if (last) mc::xor3(b, l, ins[0], ins[1], ins[2], out[i]);
        else mc::fa(b, l, ins[0], ins[1], ins[2], out[i], next);
        break;
    }
    if (next != kZero) {
      if (own && next != carry) b.release(l, carry);
      own = !direct;
      carry = direct ? kZero : next;
      if (direct) break;
    }
  }
  drop_carry();
}

void sub(Builder& b, const Lanes& l, const Bits& a, const Bits& subtrahend, const Bits& out) {
  const Col one = b.constant(l, true);
  Bits inverted(out.size());
  std::vector<Col> owned;
  for (std::size_t i = 0; i < out.size(); ++i) {
    Col s = bit_at(subtrahend, i);
    if (s == kZero) {
      inverted[i] = one;
    } else {
      inverted[i] = b.tmp(l);
      owned.push_back(inverted[i]);
      b.not_(l, s, inverted[i]);
    }
  }
  add(b, l, a, inverted, out, one);
  b.release(l, owned);
}

void shift_add_multiply(Builder& b, const Lanes& l, const Bits& x, const Bits& y,
                        const Bits& out) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n || out.size() != 2 * n)
    throw std::invalid_argument("multiply expects n-bit factors and a 2n-bit product");
  require_columns(x, "multiplicand");
  require_columns(y, "multiplier");
  auto nx = b.tmps(l, n);
  for (std::size_t j = 0; j < n; ++j) b.not_(l, x[j], nx[j]);
  Col ny = b.tmp(l), partial = b.tmp(l), carry = b.tmp(l);
  for (std::size_t i = 0; i < n; ++i) {
    b.not_(l, y[i], ny);
    if (i == 0) {
      for (std::size_t j = 0; j < n; ++j) b.nor(l, nx[j], ny, out[j]);
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) {
      b.nor(l, nx[j], ny, partial);
      Col acc = out[i + j];
      Col carry_out = j + 1 == n ? out[i + n] : carry;
      if (j == 0) mc::ha(b, l, acc, partial, acc, carry_out);
      else if (i == 1 && j + 1 == n) mc::ha(b, l, partial, carry, acc, carry_out);
      else mc::fa(b, l, acc, partial, carry, acc, carry_out);
    }
  }
  if (n == 1) b.init(l, false, out[1]);
  b.release(l, {ny, partial, carry});
  b.release(l, nx);
}

void multiply(Builder& b, const Lanes& l, const Bits& x, const Bits& y, const Bits& out,
              std::size_t threshold) {
  const std::size_t n = x.size();
  if (n <= threshold || n < 4) {
    shift_add_multiply(b, l, x, y, out);
    return;
  }
  if (y.size() != n || out.size() != 2 * n)
    throw std::invalid_argument("multiply expects n-bit factors and a 2n-bit product");
  const std::size_t lo = (n + 1) / 2, hi = n - lo;
  const Bits xl = slice(x, 0, lo), xh = slice(x, lo, hi);
  const Bits yl = slice(y, 0, lo), yh = slice(y, lo, hi);

  Bits sx = b.tmps(l, lo + 1), sy = b.tmps(l, lo + 1);
  add(b, l, xl, xh, sx);
  add(b, l, yl, yh, sy);
  Bits cross = b.tmps(l, 2 * (lo + 1));
  multiply(b, l, sx, sy, cross, threshold);
  b.release(l, sx);
  b.release(l, sy);

  const Bits low = slice(out, 0, 2 * lo), high = slice(out, 2 * lo, 2 * hi);
  multiply(b, l, xl, yl, low, threshold);
  multiply(b, l, xh, yh, high, threshold);

  const std::size_t width = 2 * lo + 1;
  Bits outer = b.tmps(l, width);
  add(b, l, low, high, outer);
  Bits middle = b.tmps(l, width);
  sub(b, l, slice(cross, 0, width), outer, middle);
  b.release(l, outer);
  b.release(l, cross);

  const Bits upper = slice(out, lo, 2 * n - lo);
  add(b, l, upper, middle, upper);
  b.release(l, middle);
}

void divide(Builder& b, const Lanes& l, const Bits& dividend, const Bits& divisor,
            const Bits& quotient, const Bits& remainder) {
  const std::size_t n = divisor.size();
  if (n == 0 || dividend.size() != 2 * n || quotient.size() != n || remainder.size() != n)
    throw std::invalid_argument("divide expects a 2n-bit dividend and n-bit divisor");
  const Col one = b.constant(l, true);

  Bits inverted(n);
  std::vector<Col> owned_inverted;
  for (std::size_t j = 0; j < n; ++j) {
    if (divisor[j] == kZero) {
      inverted[j] = one;
      continue;
    }
    inverted[j] = b.tmp(l);
    owned_inverted.push_back(inverted[j]);
    b.not_(l, divisor[j], inverted[j]);
  }

  // Partial remainder as n+1 two's-complement bits, already shifted left by one.
  Bits cur(n + 1);
  cur[0] = dividend[n - 1];
  for (std::size_t j = 0; j < n; ++j) cur[j + 1] = dividend[n + j];
  std::vector<Col> owned_cur;
  Col sign = kZero;
  Bits next;

  for (std::size_t it = 0; it < n; ++it) {
    const std::size_t i = n - 1 - it;
    Bits addend(n + 1);
    std::vector<Col> owned_addend;
    Col carry_in = one;
    if (it == 0) {
      for (std::size_t j = 0; j < n; ++j) addend[j] = inverted[j];
      addend[n] = one;
    } else {
      const Col q = quotient[i + 1];
      for (std::size_t j = 0; j < n; ++j) {
        if (divisor[j] == kZero) {
          addend[j] = q;
          continue;
        }
        addend[j] = b.tmp(l);
        owned_addend.push_back(addend[j]);
        mc::mux_ns(b, l, q, sign, inverted[j], divisor[j], addend[j]);
      }
      addend[n] = q;
      carry_in = q;
    }
    next = b.tmps(l, n + 1);
    add(b, l, cur, addend, next, carry_in);
    b.release(l, owned_addend);
    b.release(l, owned_cur);
    if (sign != kZero) b.release(l, sign);
    b.not_(l, next[n], quotient[i]);
    sign = next[n];
    if (it + 1 < n) {
      cur.assign(n + 1, kZero);
      cur[0] = dividend[i - 1];
      for (std::size_t j = 0; j < n; ++j) cur[j + 1] = next[j];
      owned_cur.assign(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(n));
    }
  }

  // Negative final remainder: add the divisor back.
  Bits fix(n, kZero);
  std::vector<Col> owned_fix;
  for (std::size_t j = 0; j < n; ++j) {
    if (divisor[j] == kZero) continue;
    fix[j] = b.tmp(l);
    owned_fix.push_back(fix[j]);
    b.nor(l, inverted[j], quotient[0], fix[j]);
  }
  add(b, l, slice(next, 0, n), fix, remainder);
  b.release(l, owned_fix);
  b.release(l, next);
  b.release(l, owned_inverted);
}

void nor_reduce(Builder& b, const Lanes& l, const Bits& v, Col out) {
  std::vector<Col> live;
  for (Col c : v)
    if (c != kZero) live.push_back(c);
  if (live.empty()) {
    b.init(l, true, out);
    return;
  }
  if (live.size() == 1) {
    b.not_(l, live[0], out);
    return;
  }
  const bool chain = live.size() > 2;
  Col none = chain ? b.tmp(l) : out, any = chain ? b.tmp(l) : kZero;
  b.nor(l, live[0], live[1], none);
  for (std::size_t i = 2; i < live.size(); ++i) {
    b.not_(l, none, any);
    b.nor(l, any, live[i], i + 1 == live.size() ? out : none);
  }
  if (chain) b.release(l, {none, any});
}

void or_reduce(Builder& b, const Lanes& l, const Bits& v, Col out) {
  std::vector<Col> live;
  for (Col c : v)
    if (c != kZero) live.push_back(c);
  if (live.size() <= 1) {
    if (live.empty()) b.init(l, false, out);
    else mc::copy(b, l, live[0], out);
    return;
  }
  Col none = b.tmp(l);
  nor_reduce(b, l, live, none);
  b.not_(l, none, out);
  b.release(l, none);
}

void select(Builder& b, const Lanes& l, Col s, Col ns, Col a, Col c, Col out) {
  if (a == kZero && c == kZero) {
    b.init(l, false, out);
  } else if (a == kZero || c == kZero) {
    // Only one data input is live: AND it with the matching select polarity.
    Col keep = a == kZero ? c : a;
    Col gate_off = a == kZero ? s : ns;
    Col inv = b.tmp(l);
    b.not_(l, keep, inv);
    b.nor(l, gate_off, inv, out);
    b.release(l, inv);
  } else {
    mc::mux_ns(b, l, s, ns, a, c, out);
  }
}

}  // namespace serial

namespace {

void check_width(std::size_t n) {
  if (n == 0) throw std::invalid_argument("bit width must be at least 1");
}

serial::Bits sign_extend(const std::vector<Col>& v) {
  serial::Bits out = v;
  out.push_back(v.back());
  return out;
}

}  // namespace

MicroProgram emit_add_serial(std::size_t n, bool is_signed) {
  check_width(n);
  const std::string tag = is_signed ? "s" : "u";
  Builder b;
  auto x = b.input("x", n, tag);
  auto y = b.input("y", n, tag);
  auto z = b.output("z", n + 1, tag);
  auto l = b.whole();
  const Col zero = b.constant(l, false);
  if (is_signed) serial::add(b, l, sign_extend(x), sign_extend(y), z, zero);
  else serial::add(b, l, x, y, z, zero);
  return b.finish();
}

MicroProgram emit_sub_serial(std::size_t n, bool is_signed) {
  check_width(n);
  const std::string tag = is_signed ? "s" : "u";
  Builder b;
  auto x = b.input("x", n, tag);
  auto y = b.input("y", n, tag);
  auto z = b.output("z", n + 1, tag);
  auto l = b.whole();
  if (is_signed) serial::sub(b, l, sign_extend(x), sign_extend(y), z);
  else serial::sub(b, l, x, y, z);
  return b.finish();
}

MicroProgram emit_mult_serial(std::size_t n, std::size_t threshold) {
  check_width(n);
  if (threshold < 2) throw std::invalid_argument("karatsuba threshold must be at least 2");
  Builder b;
  auto x = b.input("x", n);
  auto y = b.input("y", n);
  auto z = b.output("z", 2 * n);
  serial::multiply(b, b.whole(), x, y, z, threshold);
  return b.finish();
}

MicroProgram emit_div_serial(std::size_t n) {
  check_width(n);
  Builder b;
  auto z = b.input("z", 2 * n);
  auto d = b.input("d", n);
  auto q = b.output("q", n);
  auto r = b.output("r", n);
  serial::divide(b, b.whole(), z, d, q, r);
  return b.finish();
}

}  // namespace pim
