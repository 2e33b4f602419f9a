#pragma once

#include <cstddef>
#include <string>

#include "pim/harness.hpp"
#include "pim/serial_float.hpp"
#include "pim/toolbox.hpp"

namespace pim {

enum class Variant : std::uint8_t { SERIAL, PARALLEL };

const char* to_string(Variant v);
Variant parse_variant(const std::string& s);
FixedOp parse_fixed_op(const std::string& s);  // add sub mul div
FloatOp parse_float_op(const std::string& s);  // fadd fsub fmul fdiv fadd-unsigned

struct KernelOptions {
  std::size_t karatsuba_threshold = kDefaultKaratsubaThreshold;
  bool legacy_tail = false;  // parallel multiply: N-iteration carry-save tail
};

Kernel fixed_kernel(FixedOp op, Variant v, std::size_t n, const KernelOptions& opt = {});
Kernel float_kernel(FloatOp op, Variant v, const FloatFormat& fmt, const KernelOptions& opt = {});
Kernel varshift_kernel(std::size_t nx, std::size_t nt, ShiftDir dir, Variant v = Variant::SERIAL);
Kernel normalize_kernel(std::size_t nx, Variant v = Variant::SERIAL);

enum class ToolboxKind : std::uint8_t { SHIFT, BROADCAST, REDUCE, PREFIX };
ToolboxKind parse_toolbox_kind(const std::string& s);  // shift broadcast reduce prefix
AssocOp parse_assoc_op(const std::string& s);          // and or xor carry
// `param` is the shift distance or the broadcast source; `assoc` feeds reduce and prefix.
Kernel toolbox_kernel(ToolboxKind kind, std::size_t k, AssocOp assoc = AssocOp::OR,
                      std::size_t param = 1);

// Port covering operands <prefix>.m, <prefix>.e, <prefix>.s as one packed float.
Port float_port(const std::string& prefix, const FloatFormat& fmt);

}  // namespace pim
