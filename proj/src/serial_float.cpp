#include "pim/serial_float.hpp"

#include <stdexcept>

namespace pim {

FloatFormat FloatFormat::make(std::size_t ne, std::size_t nm) {
  FloatFormat f{ne, nm, (std::uint64_t{1} << (ne - 1)) - 1};
  f.check();
  return f;
}

std::string FloatFormat::tag() const {
  return "f" + std::to_string(ne) + "." + std::to_string(nm);
}

void FloatFormat::check() const {
  if (ne < 2 || nm < 1) throw std::invalid_argument("float format needs ne >= 2 and nm >= 1");
  if (ne + nm + 1 > 64) throw std::invalid_argument("float format wider than 64 bits");
  if (bias >= (std::uint64_t{1} << ne)) throw std::invalid_argument("bias out of range");
}

std::uint64_t FloatFormat::pack(bool s, std::uint64_t e, std::uint64_t m) const {
  return (std::uint64_t{s} << (ne + nm)) | (e << nm) | m;
}

bool FloatFormat::is_normal(std::uint64_t bits) const {
  std::uint64_t e = exp_of(bits);
  return e != 0 && e != (std::uint64_t{1} << ne) - 1;
}

namespace serial {

Bits constant_bits(Builder& b, const Lanes& l, std::uint64_t value, std::size_t width) {
  Bits out(width, kZero);
  for (std::size_t i = 0; i < width; ++i)
    if ((value >> i) & 1) out[i] = b.constant(l, true);
  return out;
}

namespace {

// sticky |= extra, where `first` means sticky has not been written yet.
void accumulate(Builder& b, const Lanes& l, Col sticky, Col extra, bool& first) {
  if (first) {
    mc::copy(b, l, extra, sticky);
    first = false;
    return;
  }
  Col t = b.tmp(l);
  b.nor(l, sticky, extra, t);
  b.not_(l, t, sticky);
  b.release(l, t);
}

// out = keep AND NOT off, with keep possibly kZero.
void mask(Builder& b, const Lanes& l, Col off, Col keep, Col out) {
  if (keep == kZero) {
    b.init(l, false, out);
    return;
  }
  Col inv = b.tmp(l);
  b.not_(l, keep, inv);
  b.nor(l, off, inv, out);
  b.release(l, inv);
}

// One log-shifter stage by `dist` under select s (ns = NOT s).
void shift_stage(Builder& b, const Lanes& l, const Bits& cur, const Bits& out, std::size_t dist,
                 Col s, Col ns, ShiftDir dir) {
  const std::size_t n = cur.size();
  if (dir == ShiftDir::RIGHT) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i + dist < n) select(b, l, s, ns, cur[i + dist], cur[i], out[i]);
      else mask(b, l, s, cur[i], out[i]);
    }
  } else {
    for (std::size_t i = n; i-- > 0;) {
      if (i >= dist) select(b, l, s, ns, cur[i - dist], cur[i], out[i]);
      else mask(b, l, s, cur[i], out[i]);
    }
  }
}

}  // namespace

void var_shift(Builder& b, const Lanes& l, const Bits& src, const Bits& amount, const Bits& out,
               ShiftDir dir, Col sticky) {
  const std::size_t n = src.size();
  if (out.size() != n) throw std::invalid_argument("shift output width differs from input");
  if (sticky != kZero && dir != ShiftDir::RIGHT)
    throw std::invalid_argument("sticky output only exists for right shifts");
  Bits cur = src;
  bool sticky_first = true;
  std::vector<Col> overflow;
  for (std::size_t j = 0; j < amount.size(); ++j) {
    if (j >= 63 || (std::size_t{1} << j) >= n) {
      overflow.push_back(amount[j]);
      continue;
    }
    const std::size_t dist = std::size_t{1} << j;
    const Col s = amount[j];
    Col ns = b.tmp(l);
    b.not_(l, s, ns);
    if (sticky != kZero) {
      Col none = b.tmp(l), lost = b.tmp(l);
      nor_reduce(b, l, slice(cur, 0, dist), none);
      b.nor(l, ns, none, lost);
      accumulate(b, l, sticky, lost, sticky_first);
      b.release(l, {none, lost});
    }
    shift_stage(b, l, cur, out, dist, s, ns, dir);
    b.release(l, ns);
    cur = out;
  }
  if (!overflow.empty()) {
    Col big = b.tmp(l);
    or_reduce(b, l, overflow, big);
    if (sticky != kZero) {
      Col none = b.tmp(l), nbig = b.tmp(l), lost = b.tmp(l);
      nor_reduce(b, l, cur, none);
      b.not_(l, big, nbig);
      b.nor(l, nbig, none, lost);
      accumulate(b, l, sticky, lost, sticky_first);
      b.release(l, {none, nbig, lost});
    }
    for (std::size_t i = 0; i < n; ++i) mask(b, l, big, cur[i], out[i]);
    b.release(l, big);
    cur = out;
  }
  if (cur != out)
    for (std::size_t i = 0; i < n; ++i) {
      if (src[i] == kZero) b.init(l, false, out[i]);
      else mc::copy(b, l, src[i], out[i]);
    }
  if (sticky != kZero && sticky_first) b.init(l, false, sticky);
}

void normalize(Builder& b, const Lanes& l, const Bits& src, const Bits& out, const Bits& count) {
  const std::size_t n = src.size();
  if (out.size() != n || count.size() != normalize_count_bits(n))
    throw std::invalid_argument("normalize widths do not match");
  Bits cur = src;
  for (std::size_t j = count.size(); j-- > 0;) {
    const std::size_t dist = std::size_t{1} << j;
    const Col s = count[j];
    nor_reduce(b, l, slice(cur, n - dist, dist), s);
    Col ns = b.tmp(l);
    b.not_(l, s, ns);
    Bits next = out;
    for (std::size_t i = n; i-- > 0;) {
      if (i >= dist) {
        select(b, l, s, ns, cur[i - dist], cur[i], out[i]);
      } else if (i >= n - dist) {
        // Inside the window: a taken shift means this bit is already zero.
        next[i] = cur[i];
      } else {
        mask(b, l, s, cur[i], out[i]);
      }
    }
    b.release(l, ns);
    cur = next;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (cur[i] == out[i]) continue;
    if (cur[i] == kZero) b.init(l, false, out[i]);
    else mc::copy(b, l, cur[i], out[i]);
  }
}

void round_nearest_even(Builder& b, const Lanes& l, const Bits& mantissa, Col guard,
                        const Bits& lower, const Bits& out, Col carry) {
  Bits rest = lower;
  rest.push_back(mantissa.at(0));
  Col none = b.tmp(l), ng = b.tmp(l), up = b.tmp(l);
  nor_reduce(b, l, rest, none);
  b.not_(l, guard, ng);
  b.nor(l, ng, none, up);
  b.release(l, {none, ng});
  Bits wide = out;
  wide.push_back(carry);
  add(b, l, mantissa, {}, wide, up);
  b.release(l, up);
}

}  // namespace serial

std::size_t normalize_count_bits(std::size_t nx) {
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < nx) ++bits;
  return bits;
}

MicroProgram emit_varshift_serial(std::size_t nx, std::size_t nt, ShiftDir dir) {
  if (nx == 0 || nt == 0) throw std::invalid_argument("shift widths must be positive");
  Builder b;
  auto x = b.input("x", nx);
  auto t = b.input("t", nt);
  auto z = b.output("z", nx);
  Col sticky = dir == ShiftDir::RIGHT ? b.output("sticky", 1).front() : serial::kZero;
  serial::var_shift(b, b.whole(), x, t, z, dir, sticky);
  return b.finish();
}

MicroProgram emit_normalize_serial(std::size_t nx) {
  if (nx < 2) throw std::invalid_argument("normalize needs at least 2 bits");
  Builder b;
  auto x = b.input("x", nx);
  auto z = b.output("z", nx);
  auto t = b.output("t", normalize_count_bits(nx));
  serial::normalize(b, b.whole(), x, z, t);
  return b.finish();
}

namespace {

using serial::Bits;
using serial::kZero;

struct FloatCols {
  Col s;
  Bits e;
  Bits m;
};

FloatCols float_input(Builder& b, const std::string& name, const FloatFormat& fmt) {
  const std::string tag = fmt.tag();
  Col s = b.input(name + ".s", 1, tag).front();
  auto e = b.input(name + ".e", fmt.ne, tag);
  auto m = b.input(name + ".m", fmt.nm, tag);
  return {s, e, m};
}

FloatCols float_output(Builder& b, const std::string& name, const FloatFormat& fmt) {
  const std::string tag = fmt.tag();
  Col s = b.output(name + ".s", 1, tag).front();
  auto e = b.output(name + ".e", fmt.ne, tag);
  auto m = b.output(name + ".m", fmt.nm, tag);
  return {s, e, m};
}

Bits with_hidden(Builder& b, const Lanes& l, const Bits& m) {
  Bits out = m;
  out.push_back(b.constant(l, true));
  return out;
}

Bits concat(std::initializer_list<Bits> parts) {
  Bits out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Shared front end of both adders: exponent compare, operand swap and
// alignment of the smaller significand with sticky collection.
struct Aligned {
  Col lt;     // x.e < y.e
  Col ge;     // NOT lt
  Bits emax;  // larger exponent
  Bits big;   // significand of the larger operand, W bits, 3 zero low bits
  Bits small; // aligned smaller significand, W bits
  Col sticky; // OR of bits shifted out of `small`
};

Aligned align(Builder& b, const Lanes& l, const FloatFormat& fmt, const FloatCols& x,
              const FloatCols& y) {
  const std::size_t ne = fmt.ne, nm = fmt.nm, w = nm + 4;
  Aligned a;
  Bits diff = b.tmps(l, ne + 1);
  serial::sub(b, l, x.e, y.e, diff);
  a.lt = diff[ne];
  a.ge = b.tmp(l);
  b.not_(l, a.lt, a.ge);

  // |x.e - y.e| = (diff XOR lt) + lt
  Bits mag = b.tmps(l, ne);
  Col inv = b.tmp(l);
  for (std::size_t i = 0; i < ne; ++i) {
    b.not_(l, diff[i], inv);
    serial::select(b, l, a.lt, a.ge, inv, diff[i], mag[i]);
  }
  b.release(l, inv);
  serial::add(b, l, mag, {}, mag, a.lt);

  a.emax = b.tmps(l, ne);
  for (std::size_t i = 0; i < ne; ++i) mc::mux_ns(b, l, a.ge, a.lt, x.e[i], y.e[i], a.emax[i]);
  Bits big_m = b.tmps(l, nm), small_m = b.tmps(l, nm);
  for (std::size_t i = 0; i < nm; ++i) {
    mc::mux_ns(b, l, a.ge, a.lt, x.m[i], y.m[i], big_m[i]);
    mc::mux_ns(b, l, a.ge, a.lt, y.m[i], x.m[i], small_m[i]);
  }
  const Col one = b.constant(l, true);
  a.big = concat({serial::zeros(3), big_m, {one}});
  Bits small_src = concat({serial::zeros(3), small_m, {one}});
  a.small = b.tmps(l, w);
  a.sticky = b.tmp(l);
  serial::var_shift(b, l, small_src, mag, a.small, ShiftDir::RIGHT, a.sticky);
  b.release(l, small_m);
  b.release(l, mag);
  // diff[ne] is lt and stays live.
  b.release(l, serial::slice(diff, 0, ne));
  return a;
}

void release_aligned(Builder& b, const Lanes& l, const FloatFormat& fmt, Aligned& a) {
  b.release(l, {a.lt, a.ge, a.sticky});
  b.release(l, a.emax);
  b.release(l, serial::slice(a.big, 3, fmt.nm));
  b.release(l, a.small);
}

}  // namespace

MicroProgram emit_fadd_unsigned_serial(const FloatFormat& fmt) {
  fmt.check();
  Builder b;
  auto x = float_input(b, "x", fmt);
  auto y = float_input(b, "y", fmt);
  auto z = float_output(b, "z", fmt);
  auto l = b.whole();
  const std::size_t nm = fmt.nm, w = nm + 4;

  Aligned a = align(b, l, fmt, x, y);
  // sum = big + small over W+1 bits, written over the aligned operand
  Bits sum = concat({a.small, {b.tmp(l)}});
  serial::add(b, l, a.big, a.small, sum);
  const Col carry = sum[w];

  Bits norm = b.tmps(l, w + 1);
  Col sticky2 = b.tmp(l);
  serial::var_shift(b, l, sum, {carry}, norm, ShiftDir::RIGHT, sticky2);

  Col round_carry = b.tmp(l);
  serial::round_nearest_even(b, l, serial::slice(norm, 3, nm), norm[2],
                             {norm[1], norm[0], a.sticky, sticky2}, z.m, round_carry);
  serial::add(b, l, a.emax, {carry}, z.e, round_carry);
  mc::copy(b, l, x.s, z.s);

  b.release(l, {round_carry, sticky2, carry});
  b.release(l, norm);
  release_aligned(b, l, fmt, a);
  return b.finish();
}

namespace {

MicroProgram signed_add(const FloatFormat& fmt, bool subtract) {
  fmt.check();
  Builder b;
  auto x = float_input(b, "x", fmt);
  auto y = float_input(b, "y", fmt);
  auto z = float_output(b, "z", fmt);
  auto l = b.whole();
  const std::size_t ne = fmt.ne, nm = fmt.nm, w = nm + 4;

  Col ys = y.s;
  if (subtract) {
    ys = b.tmp(l);
    b.not_(l, y.s, ys);
  }
  FloatCols yy{ys, y.e, y.m};
  Col ds = b.tmp(l), nds = b.tmp(l);
  mc::xnor2(b, l, x.s, ys, nds);
  b.not_(l, nds, ds);

  Aligned a = align(b, l, fmt, x, yy);
  Col low = b.tmp(l);
  mc::or2(b, l, a.small[0], a.sticky, low);
  b.release(l, a.small[0]);
  a.small[0] = low;

  // R = big + (small XOR ds) + ds over W+1 bits
  Bits addend(w + 1);
  Col inv = b.tmp(l);
  for (std::size_t i = 0; i < w; ++i) {
    addend[i] = b.tmp(l);
    b.not_(l, a.small[i], inv);
    mc::mux_ns(b, l, ds, nds, inv, a.small[i], addend[i]);
  }
  addend[w] = ds;
  Bits raw = b.tmps(l, w + 1);
  serial::add(b, l, a.big, addend, raw, ds);
  b.release(l, serial::slice(addend, 0, w));

  // A negative difference is negated back to a magnitude.
  Col neg = b.tmp(l), nneg = b.tmp(l);
  b.not_(l, raw[w], inv);
  b.nor(l, nds, inv, neg);
  b.not_(l, neg, nneg);
  Bits mag = b.tmps(l, w + 1);
  for (std::size_t i = 0; i <= w; ++i) {
    b.not_(l, raw[i], inv);
    mc::mux_ns(b, l, neg, nneg, inv, raw[i], mag[i]);
  }
  b.release(l, raw);
  serial::add(b, l, mag, {}, mag, neg);

  const std::size_t tbits = normalize_count_bits(w + 1);
  Bits normed = b.tmps(l, w + 1), shift = b.tmps(l, tbits);
  serial::normalize(b, l, mag, normed, shift);
  b.release(l, mag);

  // normed[w] is the hidden bit; mantissa sits at [4, w).
  Bits rounded = b.tmps(l, nm);
  Col round_carry = b.tmp(l);
  serial::round_nearest_even(b, l, serial::slice(normed, 4, nm), normed[3],
                             {normed[2], normed[1], normed[0]}, rounded, round_carry);

  // exponent = emax + 1 - shift + round_carry
  Bits lowered = b.tmps(l, ne), exponent = b.tmps(l, ne);
  serial::sub(b, l, a.emax, shift, lowered);
  serial::add(b, l, lowered, {round_carry}, exponent, b.constant(l, true));
  b.release(l, lowered);

  Col sign = b.tmp(l), base_sign = b.tmp(l);
  mc::mux_ns(b, l, a.ge, a.lt, x.s, ys, base_sign);
  mc::xor2(b, l, base_sign, neg, sign);

  // An exact cancellation leaves no hidden bit: force the all-zero encoding.
  Col zero = b.tmp(l);
  b.not_(l, normed[w], zero);
  for (std::size_t i = 0; i < nm; ++i) serial::select(b, l, zero, normed[w], kZero, rounded[i], z.m[i]);
  for (std::size_t i = 0; i < ne; ++i)
    serial::select(b, l, zero, normed[w], kZero, exponent[i], z.e[i]);
  serial::select(b, l, zero, normed[w], kZero, sign, z.s);

  b.release(l, {zero, sign, base_sign, round_carry, neg, nneg, inv, ds, nds});
  if (subtract) b.release(l, ys);
  b.release(l, rounded);
  b.release(l, exponent);
  b.release(l, normed);
  b.release(l, shift);
  release_aligned(b, l, fmt, a);
  return b.finish();
}

}  // namespace

MicroProgram emit_fadd_signed_serial(const FloatFormat& fmt) { return signed_add(fmt, false); }
MicroProgram emit_fsub_signed_serial(const FloatFormat& fmt) { return signed_add(fmt, true); }

MicroProgram emit_fmul_serial(const FloatFormat& fmt) {
  fmt.check();
  Builder b;
  auto x = float_input(b, "x", fmt);
  auto y = float_input(b, "y", fmt);
  auto z = float_output(b, "z", fmt);
  auto l = b.whole();
  const std::size_t ne = fmt.ne, nm = fmt.nm;

  mc::xor2(b, l, x.s, y.s, z.s);

  Bits product = b.tmps(l, 2 * nm + 2);
  serial::multiply(b, l, with_hidden(b, l, x.m), with_hidden(b, l, y.m), product);
  const Col high = product[2 * nm + 1];

  // [low sticky, P(nm-2) .. P(2nm+1)], shifted right by one when the product reached [2, 4).
  Col low = b.tmp(l);
  Bits below;
  for (std::size_t i = 0; i + 2 < nm; ++i) below.push_back(product[i]);
  serial::or_reduce(b, l, below, low);
  Bits word{low};
  for (int i = static_cast<int>(nm) - 2; i < static_cast<int>(2 * nm + 2); ++i)
    word.push_back(i < 0 ? kZero : product[static_cast<std::size_t>(i)]);
  Bits shifted = b.tmps(l, word.size());
  Col sticky = b.tmp(l);
  serial::var_shift(b, l, word, {high}, shifted, ShiftDir::RIGHT, sticky);

  Col round_carry = b.tmp(l);
  serial::round_nearest_even(b, l, serial::slice(shifted, 3, nm), shifted[2],
                             {shifted[1], shifted[0], sticky}, z.m, round_carry);

  // exponent = e1 + e2 - bias + high + round_carry (mod 2^ne)
  Bits partial = b.tmps(l, ne);
  serial::add(b, l, x.e, y.e, partial, high);
  const std::uint64_t minus_bias = ((std::uint64_t{1} << ne) - fmt.bias) & ((std::uint64_t{1} << ne) - 1);
  serial::add(b, l, partial, serial::constant_bits(b, l, minus_bias, ne), z.e, round_carry);

  b.release(l, partial);
  b.release(l, {round_carry, sticky, low});
  b.release(l, shifted);
  b.release(l, product);
  return b.finish();
}

MicroProgram emit_fdiv_serial(const FloatFormat& fmt) {
  fmt.check();
  Builder b;
  auto x = float_input(b, "x", fmt);
  auto y = float_input(b, "y", fmt);
  auto z = float_output(b, "z", fmt);
  auto l = b.whole();
  const std::size_t ne = fmt.ne, nm = fmt.nm, n = nm + 3;

  mc::xor2(b, l, x.s, y.s, z.s);

  // Q = floor(Mx * 2^(nm+2) / My) with nm+3 quotient bits.
  Bits dividend = concat({serial::zeros(nm + 2), with_hidden(b, l, x.m), serial::zeros(3)});
  Bits divisor = concat({with_hidden(b, l, y.m), serial::zeros(2)});
  Bits quotient = b.tmps(l, n), remainder = b.tmps(l, n);
  serial::divide(b, l, dividend, divisor, quotient, remainder);
  const Col top = quotient[n - 1];

  Col sticky = b.tmp(l);
  serial::or_reduce(b, l, remainder, sticky);
  b.release(l, remainder);

  // A quotient below 1 is shifted left once; the sticky bit moves up with it.
  Col low = b.tmp(l);
  b.not_(l, top, low);
  Bits word = concat({{sticky}, quotient});
  Bits shifted = b.tmps(l, word.size());
  serial::var_shift(b, l, word, {low}, shifted, ShiftDir::LEFT);

  Col round_carry = b.tmp(l);
  serial::round_nearest_even(b, l, serial::slice(shifted, 3, nm), shifted[2],
                             {shifted[1], shifted[0]}, z.m, round_carry);

  // exponent = e1 - e2 + bias - low + round_carry = e1 + NOT e2 + top + bias + round_carry
  Bits inv = b.tmps(l, ne), partial = b.tmps(l, ne);
  for (std::size_t i = 0; i < ne; ++i) b.not_(l, y.e[i], inv[i]);
  serial::add(b, l, x.e, inv, partial, top);
  serial::add(b, l, partial, serial::constant_bits(b, l, fmt.bias, ne), z.e, round_carry);

  b.release(l, inv);
  b.release(l, partial);
  b.release(l, {round_carry, low, sticky});
  b.release(l, shifted);
  b.release(l, quotient);
  return b.finish();
}

}  // namespace pim
