#include "pim/parallel_fixed.hpp"

#include <stdexcept>

namespace pim {

const char* to_string(MultTail tail) {
  return tail == MultTail::PREFIX_ADDER ? "prefix-adder" : "legacy-n-iter";
}

namespace par {

void add(Builder& b, Range r, Col x, Col y, Col z, CarryIn cin, bool subtract, bool want_cout,
         Col cout) {
  const std::size_t p2 = next_pow2(r.n);
  if (r.lo + p2 > b.partitions()) throw CapacityError(r.lo + p2 - 1, "adder needs more partitions");
  const Lanes l = local(b, r);
  Col g = b.slot(), na = b.slot(), nx = b.slot(), ny = b.slot();
  b.not_(l, x, nx);
  Col yv = y;
  if (subtract) {
    b.nor(l, nx, y, g);
    b.not_(l, y, ny);
    b.nor(l, x, ny, na);
    yv = ny;
  } else {
    b.not_(l, y, ny);
    b.nor(l, nx, ny, g);
    b.nor(l, x, y, na);
  }
  if (p2 > r.n) {
    const Lanes pad = local(b, {r.hi(), p2 - r.n});
    b.init(pad, false, g);
    b.init(pad, false, na);
  }
  const Lanes first = b.single(r.lo);
  if (cin.kind == CarryIn::ONE) {
    b.not_(first, na, g);
  } else if (cin.kind == CarryIn::BIT) {
    // g |= a & cin
    Col u = b.slot();
    b.not_(first, cin.off, nx);
    b.nor(first, na, nx, u);
    b.nor(first, g, u, nx);
    b.not_(first, nx, g);
    b.release_slot(u);
  }
  prefix(b, {r.lo, p2}, AssocOp::CARRY, g, na);
  Col c = b.slot();
  shift(b, r, g, c, 1, cin.kind == CarryIn::ONE);
  if (cin.kind == CarryIn::BIT) mc::copy(b, first, cin.off, c);
  mc::xor3(b, l, x, yv, c, z);
  if (want_cout) mc::copy(b, b.single(r.hi() - 1), g, cout);
  for (Col s : {g, na, nx, ny, c}) b.release_slot(s);
}

void increment(Builder& b, Range r, Col m, Col cin, Col z, bool want_cout, Col cout) {
  const Range wide{r.lo, r.n + 1};
  const std::size_t p2 = next_pow2(wide.n);
  if (r.lo + p2 > b.partitions()) throw CapacityError(r.lo + p2 - 1, "increment needs more partitions");
  // v = [cin, m_0, m_1, ...]; its running AND is the carry into each bit.
  Col v = b.slot();
  shift(b, wide, m, v, 1);
  mc::copy(b, b.single(r.lo), cin, v);
  if (p2 > wide.n) b.init(local(b, {wide.hi(), p2 - wide.n}), true, v);
  prefix(b, {r.lo, p2}, AssocOp::AND, v);
  mc::xor2(b, local(b, r), m, v, z);
  if (want_cout) mc::copy(b, b.single(r.hi()), v, cout);
  b.release_slot(v);
}

}  // namespace par

namespace {

void require_pow2(std::size_t n) {
  if (n == 0 || (n & (n - 1))) throw std::invalid_argument("parallel width must be a power of two");
}

MicroProgram add_like(std::size_t n, bool subtract) {
  require_pow2(n);
  Builder b(n);
  Col x = b.input_strided("x", n), y = b.input_strided("y", n);
  Col z = b.output_strided("z", n), zn = b.output_strided("zn", 1, "u", n - 1);
  const par::Range r{0, n};
  if (!subtract) {
    par::add(b, r, x, y, z, par::CarryIn::zero(), false, true, zn);
    return b.finish();
  }
  // x - y over n+1 bits: the top bit is the complement of the carry out.
  Col carry = b.slot();
  par::add(b, r, x, y, z, par::CarryIn::one(), true, true, carry);
  b.not_(b.single(n - 1), carry, zn);
  b.release_slot(carry);
  return b.finish();
}

}  // namespace

MicroProgram emit_add_parallel(std::size_t n) { return add_like(n, false); }
MicroProgram emit_sub_parallel(std::size_t n) { return add_like(n, true); }

namespace par {

void multiply(Builder& b, Range r, Col x, Col y, Col z, Col w, MultTail tail) {
  const std::size_t n = r.n;
  const Range bcast{r.lo, next_pow2(n)};
  if (bcast.hi() > b.partitions()) throw CapacityError(bcast.hi() - 1, "multiplier needs more partitions");
  const Lanes l = local(b, r);
  Col s = b.slot(), c = b.slot(), nx = b.slot(), pp = b.slot(), yb = b.slot(), nyb = b.slot();
  Col spare = b.slot();
  b.init(l, false, s);
  b.init(l, false, c);
  b.not_(l, x, nx);

  // The lowest sum bit is final after each carry-save step and leaves to `out`.
  auto retire = [&](Col out, std::size_t i) {
    copy_bit(b, r.lo, s, r.lo + i, out);
    shift(b, r, s, spare, -1);
    std::swap(s, spare);
  };
  for (std::size_t i = 0; i < n; ++i) {
    broadcast(b, bcast, r.lo + i, y, yb, nyb);
    b.nor(l, nx, nyb, pp);
    mc::fa(b, l, s, c, pp, s, c);
    retire(z, i);
  }
  if (tail == MultTail::PREFIX_ADDER) {
    add(b, r, s, c, w, CarryIn::zero());
  } else {
    const Col zero = b.constant(l, false);
    for (std::size_t i = 0; i < n; ++i) {
      mc::fa(b, l, s, c, zero, s, c);
      retire(w, i);
    }
  }
  for (Col t : {s, c, nx, pp, yb, nyb, spare}) b.release_slot(t);
}

void divide(Builder& b, std::size_t n, Col z, Col w, Col d, Col q, Col rem) {
  const std::size_t k = next_pow2(n + 1), p2 = next_pow2(n);
  if (k > b.partitions()) throw CapacityError(k - 1, "divider needs more partitions");
  const Range low{0, n}, span{0, n + 1}, all{0, k};
  const Lanes lo = local(b, low), sp = local(b, span), top = b.single(n);

  Col s = b.slot(), c = b.slot(), spare = b.slot(), dv = b.slot(), nd = b.slot();
  Col nz = b.slot(), qb = b.slot(), nqb = b.slot(), dd = b.slot(), g = b.slot(), na = b.slot();
  Col qn = b.slot();

  // Partial remainder s + c over n+1 positions, modulo 2^(n+1); it starts as w.
  mc::copy(b, lo, w, s);
  b.init(top, false, s);
  b.init(sp, false, c);
  mc::copy(b, lo, d, dv);
  b.init(top, false, dv);
  b.not_(sp, dv, nd);
  b.not_(lo, z, nz);
  b.init(local(b, all), true, qb);
  b.init(local(b, all), false, nqb);

  for (std::size_t i = n; i-- > 0;) {
    // 2R + z_i
    shift(b, span, s, spare, 1);
    std::swap(s, spare);
    not_bit(b, i, nz, 0, s);
    shift(b, span, c, spare, 1);
    std::swap(c, spare);
    // Subtract d after a non-negative remainder, add it otherwise.
    mc::mux_ns(b, sp, qb, nqb, nd, dv, dd);
    mc::fa(b, sp, s, c, dd, s, dd);
    shift(b, span, dd, c, 1);
    b.not_(b.single(0), nqb, c);

    // Sign of s + c: carry into the top position from a reduction over the rest.
    b.nor(lo, s, c, na);
    b.not_(lo, s, dd);
    b.not_(lo, c, qn);
    b.nor(lo, dd, qn, g);
    if (p2 > n) {
      // The fold leaves partial results in the padding; reset it each pass.
      const Lanes pad = local(b, {n, p2 - n});
      b.init(pad, false, g);
      b.init(pad, false, na);
    }
    reduce(b, {0, p2}, AssocOp::CARRY, g, na);
    not_bit(b, p2 - 1, g, n, dd);
    mc::xor3(b, top, s, c, dd, qn);
    copy_bit(b, n, qn, i, q);
    broadcast(b, all, n, qn, qb, nqb);
  }

  // A negative remainder gets d added back.
  b.nor(lo, nd, qb, dd);
  mc::fa(b, lo, s, c, dd, s, dd);
  shift(b, low, dd, c, 1);
  add(b, low, s, c, rem, CarryIn::zero());
  for (Col t : {s, c, spare, dv, nd, nz, qb, nqb, dd, g, na, qn}) b.release_slot(t);
}

}  // namespace par

MicroProgram emit_mult_parallel(std::size_t n, MultTail tail) {
  require_pow2(n);
  Builder b(n);
  Col x = b.input_strided("x", n), y = b.input_strided("y", n);
  Col z = b.output_strided("z", n), w = b.output_strided("w", n);
  par::multiply(b, {0, n}, x, y, z, w, tail);
  return b.finish();
}

MicroProgram emit_div_parallel(std::size_t n) {
  require_pow2(n);
  Builder b(par::next_pow2(n + 1));
  Col z = b.input_strided("z", n), w = b.input_strided("w", n), d = b.input_strided("d", n);
  Col q = b.output_strided("q", n), rem = b.output_strided("r", n);
  par::divide(b, n, z, w, d, q, rem);
  return b.finish();
}

}  // namespace pim
