#include "pim/parallel_float.hpp"

#include <algorithm>
#include <stdexcept>

namespace pim {

namespace par {
namespace {

struct Overflow {
  std::size_t first = 0;  // lowest amount bit whose weight reaches n
  std::size_t span = 0;   // power-of-two range used to OR those bits
};

Overflow overflow_bits(std::size_t n, std::size_t nt) {
  std::size_t j = 0;
  while (j < nt && j < 63 && (std::size_t{1} << j) < n) ++j;
  if (j >= nt) return {nt, 0};
  return {j, next_pow2(nt - j)};
}

std::size_t shift_range(std::size_t n, std::size_t nt) {
  const Overflow o = overflow_bits(n, nt);
  return next_pow2(std::max({n, nt, o.first + o.span}));
}

// OR of src over r, copied into u and reduced; returns the partition holding it.
std::size_t or_bits(Builder& b, Range r, Col src, Col u) {
  const std::size_t p2 = next_pow2(r.n);
  mc::copy(b, local(b, r), src, u);
  if (p2 > r.n) b.init(local(b, {r.hi(), p2 - r.n}), false, u);
  reduce(b, {r.lo, p2}, AssocOp::OR, u);
  return r.lo + p2 - 1;
}

}  // namespace

std::size_t var_shift(Builder& b, std::size_t n, Col src, std::size_t nt, Col amount, Col out,
                      ShiftDir dir, bool want_sticky, Col sticky) {
  if (src == out) throw std::invalid_argument("shift output must differ from its input");
  if (want_sticky && dir != ShiftDir::RIGHT)
    throw std::invalid_argument("sticky output only exists for right shifts");
  const std::size_t p2 = next_pow2(std::max(n, nt));
  const std::size_t need = shift_range(n, nt);
  if (need > b.partitions()) throw CapacityError(need - 1, "variable shift needs more partitions");
  const Range r{0, n}, all{0, p2};
  const Lanes l = local(b, r);
  Col sh = b.slot(), sb = b.slot(), nsb = b.slot(), u = b.slot(), v = b.slot();
  mc::copy(b, l, src, out);
  if (want_sticky) b.init(local(b, all), false, sticky);

  const Overflow o = overflow_bits(n, nt);
  for (std::size_t j = 0; j < o.first; ++j) {
    const std::size_t dist = std::size_t{1} << j;
    broadcast(b, all, j, amount, sb, nsb);
    if (want_sticky) {
      // Bits about to fall off: their OR, gated by t_j, is parked in partition dist-1.
      const Range gone = dir == ShiftDir::RIGHT ? Range{0, dist} : Range{n - dist, dist};
      const std::size_t at = or_bits(b, gone, out, u);
      const Lanes here = b.single(at);
      b.not_(here, u, v);
      b.nor(here, nsb, v, sticky);
    }
    shift(b, r, out, sh, dir == ShiftDir::RIGHT ? -static_cast<long>(dist) : static_cast<long>(dist));
    mc::mux_ns(b, l, sb, nsb, sh, out, out);
  }
  if (o.span) {
    // Any amount bit worth n or more clears the word.
    const std::size_t at = or_bits(b, {o.first, nt - o.first}, amount, u);
    const Range wide{0, next_pow2(std::max(p2, at + 1))};
    broadcast(b, wide, at, u, sb, nsb);
    if (want_sticky) {
      const std::size_t last = or_bits(b, r, out, v);
      const Lanes here = b.single(last);
      b.not_(here, v, u);
      b.nor(here, nsb, u, sticky);
    }
    b.not_(l, out, v);
    b.nor(l, v, sb, out);
  }
  std::size_t where = 0;
  if (want_sticky) {
    reduce(b, all, AssocOp::OR, sticky);
    where = p2 - 1;
  }
  for (Col t : {sh, sb, nsb, u, v}) b.release_slot(t);
  return where;
}

void normalize(Builder& b, std::size_t n, Col src, Col out, Col count) {
  if (src == out) throw std::invalid_argument("normalize output must differ from its input");
  const std::size_t bits = normalize_count_bits(n), p2 = next_pow2(n);
  if (p2 > b.partitions()) throw CapacityError(p2 - 1, "normalize needs more partitions");
  const Range r{0, n}, all{0, p2};
  const Lanes l = local(b, r);
  Col sh = b.slot(), top = b.slot(), ntop = b.slot(), u = b.slot();
  mc::copy(b, l, src, out);
  for (std::size_t j = bits; j-- > 0;) {
    const std::size_t dist = std::size_t{1} << j;
    // t_j = NOT OR(top dist bits); the fold lands in partition n-1.
    or_bits(b, {n - dist, dist}, out, u);
    not_bit(b, n - 1, u, j, count);
    broadcast(b, all, n - 1, u, top, ntop);
    shift(b, r, out, sh, static_cast<long>(dist));
    mc::mux_ns(b, l, ntop, top, sh, out, out);
  }
  for (Col t : {sh, top, ntop, u}) b.release_slot(t);
}

}  // namespace par

std::size_t varshift_partitions(std::size_t nx, std::size_t nt) { return par::shift_range(nx, nt); }

std::size_t varshift_sticky_partition(std::size_t nx, std::size_t nt) {
  return par::next_pow2(std::max(nx, nt)) - 1;
}

MicroProgram emit_varshift_parallel(std::size_t nx, std::size_t nt, ShiftDir dir) {
  if (nx == 0 || nt == 0) throw std::invalid_argument("shift widths must be positive");
  Builder b(varshift_partitions(nx, nt));
  Col x = b.input_strided("x", nx), t = b.input_strided("t", nt);
  Col z = b.output_strided("z", nx);
  if (dir == ShiftDir::RIGHT) {
    Col sticky = b.output_strided("sticky", 1, "u", varshift_sticky_partition(nx, nt));
    par::var_shift(b, nx, x, nt, t, z, dir, true, sticky);
  } else {
    par::var_shift(b, nx, x, nt, t, z, dir);
  }
  return b.finish();
}

MicroProgram emit_normalize_parallel(std::size_t nx) {
  if (nx < 2) throw std::invalid_argument("normalize needs at least 2 bits");
  Builder b(par::next_pow2(nx));
  Col x = b.input_strided("x", nx);
  Col z = b.output_strided("z", nx);
  Col t = b.output_strided("t", normalize_count_bits(nx));
  par::normalize(b, nx, x, z, t);
  return b.finish();
}

std::size_t float_partitions(const FloatFormat& fmt) {
  fmt.check();
  const std::size_t ne = fmt.ne, nm = fmt.nm, w = nm + 4;
  return par::next_pow2(std::max({1 + ne + nm + 3, w + 2, 4 + par::next_pow2(nm + 1),
                                  par::shift_range(w, ne), par::next_pow2(ne + 1)}));
}

namespace {

using par::Range;

struct FloatSlots {
  Col s, e, m;
};

FloatSlots float_in(Builder& b, const std::string& name, const FloatFormat& fmt, std::size_t mlo) {
  const std::string tag = fmt.tag();
  return {b.input_strided(name + ".s", 1, tag), b.input_strided(name + ".e", fmt.ne, tag),
          b.input_strided(name + ".m", fmt.nm, tag, mlo)};
}

FloatSlots float_out(Builder& b, const std::string& name, const FloatFormat& fmt, std::size_t mlo) {
  const std::string tag = fmt.tag();
  return {b.output_strided(name + ".s", 1, tag), b.output_strided(name + ".e", fmt.ne, tag),
          b.output_strided(name + ".m", fmt.nm, tag, mlo)};
}

void constant_vec(Builder& b, Range r, std::uint64_t value, Col out) {
  std::vector<std::pair<std::size_t, std::size_t>> ones, zeros;
  for (std::size_t i = 0; i < r.n; ++i)
    ((value >> i) & 1 ? ones : zeros).emplace_back(r.lo + i, r.lo + i);
  if (!ones.empty()) b.init(b.spans(ones), true, out);
  if (!zeros.empty()) b.init(b.spans(zeros), false, out);
}

// Vector over r whose bit 0 is the scalar (p, c) and the rest zero.
void scalar_vec(Builder& b, Range r, std::size_t p, Col c, Col out) {
  if (r.n > 1) b.init(par::local(b, {r.lo + 1, r.n - 1}), false, out);
  par::copy_bit(b, p, c, r.lo, out);
}

struct StickyBit {
  std::size_t partition;
  Col col;
};

// Rounds the mantissa of `word` held in [base, base+nm) to nearest even; the
// guard bit is at base-1 and every lower bit plus `extra` is sticky. The carry
// out lands at partition base+nm in `carry`.
void round_word(Builder& b, const FloatFormat& fmt, Col word, std::size_t base,
                const std::vector<StickyBit>& extra, Col out, Col carry) {
  const std::size_t nm = fmt.nm;
  const std::size_t p2 = par::next_pow2(base + 1);
  Col u = b.slot(), t = b.slot(), nt = b.slot(), up = b.slot();
  // u = [lower bits, extras folded at base-1, lsb of the mantissa]
  mc::copy(b, par::local(b, {0, base + 1}), word, u);
  const Lanes g = b.single(base - 1);
  b.init(g, false, u);
  for (const auto& s : extra) {
    par::copy_bit(b, s.partition, s.col, base - 1, t);
    mc::or2(b, g, u, t, u);
  }
  if (p2 > base + 1) b.init(par::local(b, {base + 1, p2 - base - 1}), false, u);
  par::reduce(b, {0, p2}, AssocOp::OR, u);
  // up = guard AND (sticky OR lsb), formed in partition base
  par::not_bit(b, p2 - 1, u, base, t);
  par::not_bit(b, base - 1, word, base, nt);
  b.nor(b.single(base), t, nt, up);
  par::increment(b, {base, nm}, word, up, out, true, carry);
  for (Col c : {u, t, nt, up}) b.release_slot(c);
}

struct Aligned {
  Col ge, lt;    // broadcast everywhere
  Col emax;      // [0, ne)
  Col big;       // [0, W), zero low bits
  Col small;     // aligned smaller significand, [0, W)
  Col sticky;
  std::size_t sticky_at;
};

// Exponent compare, operand swap, alignment with sticky. Mantissas start at partition 3.
Aligned align(Builder& b, const FloatFormat& fmt, const FloatSlots& x, const FloatSlots& y) {
  const std::size_t ne = fmt.ne, nm = fmt.nm, w = nm + 4;
  const Range er{0, ne}, mr{3, nm}, all{0, b.partitions()};
  const Lanes el = par::local(b, er), ml = par::local(b, mr);
  Aligned a{};
  a.ge = b.slot();
  a.lt = b.slot();
  a.emax = b.slot();
  a.big = b.slot();
  a.small = b.slot();
  a.sticky = b.slot();
  Col diff = b.slot(), cy = b.slot(), mag = b.slot(), src = b.slot();

  // x.e - y.e; the carry out is set exactly when x.e >= y.e.
  par::add(b, er, x.e, y.e, diff, par::CarryIn::one(), true, true, cy);
  par::broadcast(b, all, ne - 1, cy, a.ge, a.lt);
  // |diff| = (diff XOR lt) + lt
  b.not_(el, diff, src);
  mc::mux_ns(b, el, a.lt, a.ge, src, diff, mag);
  par::increment(b, er, mag, a.lt, diff);

  mc::mux_ns(b, el, a.lt, a.ge, y.e, x.e, a.emax);
  for (auto [dst, hi, lo] : {std::tuple{a.big, y.m, x.m}, std::tuple{src, x.m, y.m}}) {
    mc::mux_ns(b, ml, a.lt, a.ge, hi, lo, dst);
    b.init(par::local(b, {0, 3}), false, dst);
    b.init(b.single(3 + nm), true, dst);
  }
  a.sticky_at = par::var_shift(b, w, src, ne, diff, a.small, ShiftDir::RIGHT, true, a.sticky);
  for (Col c : {diff, cy, mag, src}) b.release_slot(c);
  return a;
}

void release(Builder& b, const Aligned& a) {
  for (Col c : {a.ge, a.lt, a.emax, a.big, a.small, a.sticky}) b.release_slot(c);
}

MicroProgram fadd_unsigned(const FloatFormat& fmt) {
  Builder b(float_partitions(fmt));
  const std::size_t ne = fmt.ne, nm = fmt.nm, w = nm + 4;
  auto x = float_in(b, "x", fmt, 3), y = float_in(b, "y", fmt, 3);
  auto z = float_out(b, "z", fmt, 3);
  Aligned a = align(b, fmt, x, y);

  Col sum = b.slot(), cy = b.slot(), tc = b.slot(), norm = b.slot(), sticky = b.slot();
  Col rc = b.slot(), cv = b.slot(), rcb = b.slot();
  par::add(b, {0, w}, a.big, a.small, sum, par::CarryIn::zero(), false, true, cy);
  par::copy_bit(b, w - 1, cy, w, sum);
  par::copy_bit(b, w - 1, cy, 0, tc);
  const std::size_t at = par::var_shift(b, w + 1, sum, 1, tc, norm, ShiftDir::RIGHT, true, sticky);
  round_word(b, fmt, norm, 3, {{a.sticky_at, a.sticky}, {at, sticky}}, z.m, rc);

  // z.e = emax + carry + round carry
  scalar_vec(b, {0, ne}, 0, tc, cv);
  par::copy_bit(b, 3 + nm, rc, 0, rcb);
  par::add(b, {0, ne}, a.emax, cv, z.e, par::CarryIn::bit(rcb));
  mc::copy(b, b.single(0), x.s, z.s);

  for (Col c : {sum, cy, tc, norm, sticky, rc, cv, rcb}) b.release_slot(c);
  release(b, a);
  return b.finish();
}

MicroProgram fadd_signed(const FloatFormat& fmt, bool subtract) {
  Builder b(float_partitions(fmt));
  const std::size_t ne = fmt.ne, nm = fmt.nm, w = nm + 4;
  auto x = float_in(b, "x", fmt, 3), y = float_in(b, "y", fmt, 3);
  auto z = float_out(b, "z", fmt, 4);
  const Lanes p0 = b.single(0);
  const Range wide{0, w + 1}, pow{0, par::next_pow2(w + 2)}, er{0, ne};
  const Lanes wl = par::local(b, wide), el = par::local(b, er);

  Col ys = b.slot(), ds = b.slot(), nds = b.slot();
  if (subtract) b.not_(p0, y.s, ys);
  else mc::copy(b, p0, y.s, ys);
  mc::xnor2(b, p0, x.s, ys, nds);
  Aligned a = align(b, fmt, x, {ys, y.e, y.m});

  // The sticky bit joins the aligned operand as its lowest bit.
  Col t = b.slot();
  par::copy_bit(b, a.sticky_at, a.sticky, 0, t);
  mc::or2(b, p0, a.small, t, a.small);

  // raw = big + (small XOR ds) + ds over W+1 bits
  Col dsb = b.slot(), ndsb = b.slot(), addend = b.slot(), raw = b.slot();
  par::broadcast(b, pow, 0, nds, ndsb, dsb);
  b.not_(par::local(b, {0, w}), a.small, t);
  mc::mux_ns(b, par::local(b, {0, w}), dsb, ndsb, t, a.small, addend);
  b.not_(b.single(w), ndsb, addend);
  b.init(b.single(w), false, a.big);
  par::add(b, wide, a.big, addend, raw, par::CarryIn::bit(dsb));

  // A negative difference is negated back to a magnitude.
  Col negb = b.slot(), nnegb = b.slot(), mag = b.slot();
  const Lanes top = b.single(w);
  b.not_(top, raw, t);
  b.nor(top, ndsb, t, ds);
  par::broadcast(b, pow, w, ds, negb, nnegb);
  b.not_(wl, raw, t);
  mc::mux_ns(b, wl, negb, nnegb, t, raw, addend);
  par::increment(b, wide, addend, negb, mag);

  Col normed = b.slot(), count = b.slot();
  par::normalize(b, w + 1, mag, normed, count);
  Col mant = b.slot(), rc = b.slot();
  round_word(b, fmt, normed, 4, {}, mant, rc);

  // exponent = emax - count + 1 + round carry
  const std::size_t bits = normalize_count_bits(w + 1);
  if (bits < ne) b.init(par::local(b, {bits, ne - bits}), false, count);
  Col lowered = b.slot(), rcv = b.slot(), expo = b.slot();
  par::add(b, er, a.emax, count, lowered, par::CarryIn::one(), true);
  scalar_vec(b, er, w, rc, rcv);
  par::add(b, er, lowered, rcv, expo, par::CarryIn::one());

  Col sign = b.slot();
  mc::mux_ns(b, p0, a.ge, a.lt, x.s, ys, t);
  mc::xor2(b, p0, t, negb, sign);

  // An exact cancellation leaves no hidden bit: force the all-zero encoding.
  Col hb = b.slot(), nhb = b.slot();
  par::broadcast(b, pow, w, normed, hb, nhb);
  auto keep = [&](const Lanes& l, Col val, Col out) {
    b.not_(l, val, t);
    b.nor(l, t, nhb, out);
  };
  keep(par::local(b, {4, nm}), mant, z.m);
  keep(el, expo, z.e);
  keep(p0, sign, z.s);

  for (Col c : {ys, ds, nds, t, dsb, ndsb, addend, raw, negb, nnegb, mag, normed, count, mant, rc,
                lowered, rcv, expo, sign, hb, nhb})
    b.release_slot(c);
  release(b, a);
  return b.finish();
}

}  // namespace

MicroProgram emit_fadd_unsigned_parallel(const FloatFormat& fmt) { return fadd_unsigned(fmt); }
MicroProgram emit_fadd_parallel(const FloatFormat& fmt) { return fadd_signed(fmt, false); }
MicroProgram emit_fsub_parallel(const FloatFormat& fmt) { return fadd_signed(fmt, true); }

MicroProgram emit_fmul_parallel(const FloatFormat& fmt) {
  Builder b(float_partitions(fmt));
  const std::size_t ne = fmt.ne, nm = fmt.nm, len = nm + 5;
  auto x = float_in(b, "x", fmt, 0), y = float_in(b, "y", fmt, 0);
  auto z = float_out(b, "z", fmt, 3);
  const Lanes p0 = b.single(0);
  const Range er{0, ne}, mr{0, nm};
  mc::xor2(b, p0, x.s, y.s, z.s);

  Col xm = b.slot(), ym = b.slot(), lo = b.slot(), hi = b.slot();
  for (auto [dst, src] : {std::pair{xm, x.m}, std::pair{ym, y.m}}) {
    mc::copy(b, par::local(b, mr), src, dst);
    b.init(b.single(nm), true, dst);
  }
  par::multiply(b, {0, nm + 1}, xm, ym, lo, hi, MultTail::PREFIX_ADDER);

  // word = [sticky of P(0..nm-3), P(nm-2), P(nm-1), P(nm), P(nm+1) .. P(2nm+1)]
  Col word = b.slot(), u = b.slot();
  par::shift(b, {0, len}, hi, word, 4);
  for (std::size_t i = 1; i <= 3; ++i)
    if (nm + i >= 3) par::copy_bit(b, nm + i - 3, lo, i, word);
  if (nm > 2) {
    const std::size_t p2 = par::next_pow2(nm - 2);
    mc::copy(b, par::local(b, {0, nm - 2}), lo, u);
    if (p2 > nm - 2) b.init(par::local(b, {nm - 2, p2 - (nm - 2)}), false, u);
    par::reduce(b, {0, p2}, AssocOp::OR, u);
    par::copy_bit(b, p2 - 1, u, 0, word);
  }

  // A product in [2, 4) moves right by one.
  Col th = b.slot(), shifted = b.slot(), sticky = b.slot(), rc = b.slot();
  par::copy_bit(b, nm, hi, 0, th);
  const std::size_t at = par::var_shift(b, len, word, 1, th, shifted, ShiftDir::RIGHT, true, sticky);
  round_word(b, fmt, shifted, 3, {{at, sticky}}, z.m, rc);

  // exponent = e1 + e2 - bias + high + round carry (mod 2^ne)
  Col partial = b.slot(), cb = b.slot(), rcb = b.slot();
  par::add(b, er, x.e, y.e, partial, par::CarryIn::bit(th));
  const std::uint64_t emask = (std::uint64_t{1} << ne) - 1;
  constant_vec(b, er, ((std::uint64_t{1} << ne) - fmt.bias) & emask, cb);
  par::copy_bit(b, 3 + nm, rc, 0, rcb);
  par::add(b, er, partial, cb, z.e, par::CarryIn::bit(rcb));

  for (Col c : {xm, ym, lo, hi, word, u, th, shifted, sticky, rc, partial, cb, rcb}) b.release_slot(c);
  return b.finish();
}

MicroProgram emit_fdiv_parallel(const FloatFormat& fmt) {
  Builder b(float_partitions(fmt));
  const std::size_t ne = fmt.ne, nm = fmt.nm, n = nm + 3;
  auto x = float_in(b, "x", fmt, 0), y = float_in(b, "y", fmt, 0);
  auto z = float_out(b, "z", fmt, 3);
  const Lanes p0 = b.single(0);
  const Range er{0, ne};
  mc::xor2(b, p0, x.s, y.s, z.s);

  // Dividend Mx * 2^(nm+2) split into low (dz) and high (dw) halves; divisor My.
  Col dz = b.slot(), dw = b.slot(), dd = b.slot();
  b.init(par::local(b, {0, n}), false, dz);
  par::copy_bit(b, 0, x.m, nm + 2, dz);
  par::shift(b, {0, nm}, x.m, dw, -1);
  b.init(b.single(nm - 1), true, dw);
  b.init(par::local(b, {nm, n - nm}), false, dw);
  mc::copy(b, par::local(b, {0, nm}), y.m, dd);
  b.init(b.single(nm), true, dd);
  b.init(par::local(b, {nm + 1, n - nm - 1}), false, dd);

  Col q = b.slot(), rem = b.slot();
  par::divide(b, n, dz, dw, dd, q, rem);

  // word = [OR(remainder), Q], moved left once when Q is below 1.
  Col word = b.slot(), u = b.slot(), tl = b.slot(), shifted = b.slot();
  const std::size_t p2 = par::next_pow2(n);
  mc::copy(b, par::local(b, {0, n}), rem, u);
  if (p2 > n) b.init(par::local(b, {n, p2 - n}), false, u);
  par::reduce(b, {0, p2}, AssocOp::OR, u);
  par::shift(b, {0, n + 1}, q, word, 1);
  par::copy_bit(b, p2 - 1, u, 0, word);
  par::not_bit(b, n - 1, q, 0, tl);
  par::var_shift(b, n + 1, word, 1, tl, shifted, ShiftDir::LEFT);

  Col rc = b.slot();
  round_word(b, fmt, shifted, 3, {}, z.m, rc);

  // exponent = e1 + NOT e2 + top + bias + round carry
  Col top = b.slot(), partial = b.slot(), cb = b.slot(), rcb = b.slot();
  par::copy_bit(b, n - 1, q, 0, top);
  par::add(b, er, x.e, y.e, partial, par::CarryIn::bit(top), true);
  constant_vec(b, er, fmt.bias, cb);
  par::copy_bit(b, 3 + nm, rc, 0, rcb);
  par::add(b, er, partial, cb, z.e, par::CarryIn::bit(rcb));

  for (Col c : {dz, dw, dd, q, rem, word, u, tl, shifted, rc, top, partial, cb, rcb}) b.release_slot(c);
  return b.finish();
}

}  // namespace pim
