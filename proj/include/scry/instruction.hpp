// Copyright 2026 The Scry Toolchain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "scry/types.hpp"

namespace scry {

inline constexpr unsigned kMaxOperands = 4;

// ---------------------------------------------------------------------------
// ALU operations
// ---------------------------------------------------------------------------

enum class AluOp : uint8_t {
  eq,
  add_sat,
  add,
  bit_and,
  sub_sat,
  sub,
  lt,
  gt,
  shl,
  shr,
  bit_or,
  bit_xor,
  is_nar,
  mul,
  div,
};

/// How a two-output ALU instruction routes its low/high results.
///
/// "same" variants send both outputs to the encoded reference, one right
/// after the other. "ref/next" variants send the named half to the encoded
/// reference and the other half to the next instruction. "drop" variants
/// discard the other half.
enum class AluVariant : uint8_t {
  single,             // one-output operation, mod carries no routing
  low_high_same,      // mod 1: low then high, both to ref
  high_low_same,      // mod 2: high then low, both to ref
  low_ref_high_next,  // mod 3: low to ref, high to next
  high_ref_low_next,  // mod 4: high to ref, low to next
  low_ref_high_drop,  // mod 5: low to ref, high dropped
  high_ref_low_drop,  // mod 6: high to ref, low dropped
};

/// True for operations that produce a (low, high) pair.
constexpr bool alu_two_output(AluOp op) {
  switch (op) {
    case AluOp::add:
    case AluOp::sub:
    case AluOp::shl:
    case AluOp::shr:
    case AluOp::mul:
    case AluOp::div:
      return true;
    default:
      return false;
  }
}

/// Decodes a (func, mod) pair into an operation. nullopt means the
/// combination is undefined and the word does not decode.
constexpr std::optional<AluOp> alu_op_for(uint8_t func, uint8_t mod) {
  if (func > 7 || mod > 7) return std::nullopt;
  const bool routing = mod >= 1 && mod <= 6;
  switch (func) {
    case 0:
      if (mod == 0) return AluOp::eq;
      if (mod == 7) return AluOp::add_sat;
      return AluOp::add;
    case 1:
      if (mod == 0) return AluOp::bit_and;
      if (mod == 7) return AluOp::sub_sat;
      return AluOp::sub;
    case 2:
      if (mod == 0) return AluOp::lt;
      if (mod == 7) return AluOp::gt;
      return AluOp::shl;
    case 3:
      if (mod == 0) return AluOp::bit_or;
      if (mod == 7) return AluOp::bit_xor;
      return AluOp::shr;
    case 4:
      if (mod == 0) return AluOp::is_nar;
      if (routing) return AluOp::mul;
      return std::nullopt;
    case 5:
      if (routing) return AluOp::div;
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

constexpr bool alu_combo_valid(uint8_t func, uint8_t mod) {
  return alu_op_for(func, mod).has_value();
}

/// Number of defined (func, mod) pairs in the 6-bit ALU subspace.
constexpr unsigned alu_valid_combo_count() {
  unsigned n = 0;
  for (uint8_t f = 0; f < 8; ++f) {
    for (uint8_t m = 0; m < 8; ++m) {
      if (alu_combo_valid(f, m)) ++n;
    }
  }
  return n;
}

constexpr AluVariant alu_variant_for(uint8_t mod) {
  switch (mod) {
    case 1: return AluVariant::low_high_same;
    case 2: return AluVariant::high_low_same;
    case 3: return AluVariant::low_ref_high_next;
    case 4: return AluVariant::high_ref_low_next;
    case 5: return AluVariant::low_ref_high_drop;
    case 6: return AluVariant::high_ref_low_drop;
    default: return AluVariant::single;
  }
}

struct AluFields {
  uint8_t func;
  uint8_t mod;
};

/// Inverse of alu_op_for/alu_variant_for, used by the assembler.
constexpr std::optional<AluFields> alu_fields_for(AluOp op, AluVariant variant) {
  const auto routing_mod = [variant]() -> std::optional<uint8_t> {
    switch (variant) {
      case AluVariant::low_high_same: return 1;
      case AluVariant::high_low_same: return 2;
      case AluVariant::low_ref_high_next: return 3;
      case AluVariant::high_ref_low_next: return 4;
      case AluVariant::low_ref_high_drop: return 5;
      case AluVariant::high_ref_low_drop: return 6;
      default: return std::nullopt;
    }
  }();
  if (alu_two_output(op) != routing_mod.has_value()) return std::nullopt;
  switch (op) {
    case AluOp::eq: return AluFields{0, 0};
    case AluOp::add_sat: return AluFields{0, 7};
    case AluOp::add: return AluFields{0, *routing_mod};
    case AluOp::bit_and: return AluFields{1, 0};
    case AluOp::sub_sat: return AluFields{1, 7};
    case AluOp::sub: return AluFields{1, *routing_mod};
    case AluOp::lt: return AluFields{2, 0};
    case AluOp::gt: return AluFields{2, 7};
    case AluOp::shl: return AluFields{2, *routing_mod};
    case AluOp::bit_or: return AluFields{3, 0};
    case AluOp::bit_xor: return AluFields{3, 7};
    case AluOp::shr: return AluFields{3, *routing_mod};
    case AluOp::is_nar: return AluFields{4, 0};
    case AluOp::mul: return AluFields{4, *routing_mod};
    case AluOp::div: return AluFields{5, *routing_mod};
  }
  return std::nullopt;
}

constexpr std::string_view alu_mnemonic(AluOp op) {
  switch (op) {
    case AluOp::eq: return "eq";
    case AluOp::add_sat: return "add.s";
    case AluOp::add: return "add";
    case AluOp::bit_and: return "and";
    case AluOp::sub_sat: return "sub.s";
    case AluOp::sub: return "sub";
    case AluOp::lt: return "lt";
    case AluOp::gt: return "gt";
    case AluOp::shl: return "shl";
    case AluOp::shr: return "shr";
    case AluOp::bit_or: return "or";
    case AluOp::bit_xor: return "xor";
    case AluOp::is_nar: return "isnar";
    case AluOp::mul: return "mul";
    case AluOp::div: return "div";
  }
  return "?";
}

constexpr std::optional<AluOp> alu_op_from_mnemonic(std::string_view s) {
  constexpr AluOp ops[] = {
      AluOp::eq,  AluOp::add_sat, AluOp::add,     AluOp::bit_and,
      AluOp::sub_sat, AluOp::sub, AluOp::lt,      AluOp::gt,
      AluOp::shl, AluOp::shr,     AluOp::bit_or,  AluOp::bit_xor,
      AluOp::is_nar, AluOp::mul,  AluOp::div,
  };
  for (AluOp op : ops) {
    if (alu_mnemonic(op) == s) return op;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Instruction forms
// ---------------------------------------------------------------------------

struct Trap {
  friend constexpr bool operator==(Trap, Trap) = default;
};

struct Nop {
  friend constexpr bool operator==(Nop, Nop) = default;
};

struct St {
  friend constexpr bool operator==(St, St) = default;
};

/// Reserve stack space: bytes scaled by 16 when unit16 is set.
/// bytes == 0 with unit16 clear is unencodable (the word would be trap).
struct Rsrv {
  uint8_t bytes = 0;  // 4 bits
  bool unit16 = false;
  friend constexpr bool operator==(Rsrv, Rsrv) = default;
};

struct Free {
  uint8_t bytes = 0;  // 4 bits
  bool unit16 = false;
  friend constexpr bool operator==(Free, Free) = default;
};

struct Sts {
  uint8_t slot = 0;  // 5 bits
  friend constexpr bool operator==(Sts, Sts) = default;
};

struct Call {
  uint8_t trig = 0;  // 6 bits
  friend constexpr bool operator==(Call, Call) = default;
};

struct Ret {
  uint8_t trig = 0;  // 6 bits
  friend constexpr bool operator==(Ret, Ret) = default;
};

struct Saddr {
  uint8_t slot = 0;      // 5 bits
  uint8_t size_log2 = 0; // 2 bits
  friend constexpr bool operator==(Saddr, Saddr) = default;
};

struct Grow {
  uint8_t imm = 0;  // 8 bits
  friend constexpr bool operator==(Grow, Grow) = default;
};

struct LdStack {
  uint8_t slot = 0;  // 5 bits
  TypeTag type;
  friend constexpr bool operator==(LdStack, LdStack) = default;
};

struct Const {
  uint8_t imm = 0;  // 8 bits, sign- or zero-extended per type
  TypeTag type;
  friend constexpr bool operator==(Const, Const) = default;
};

struct Fence {
  uint8_t succ = 0;  // 4 bits
  uint8_t pred = 0;  // 4 bits
  friend constexpr bool operator==(Fence, Fence) = default;
};

struct Jmp {
  uint8_t trig = 0;   // 6 bits
  int8_t offset = 0;  // signed 7 bits, relative to the jmp itself
  friend constexpr bool operator==(Jmp, Jmp) = default;
};

struct Pick {
  uint8_t ref = 0;  // 5 bits
  friend constexpr bool operator==(Pick, Pick) = default;
};

struct PickImm {
  uint8_t index = 0;  // 2 bits, which delivered operand to forward
  uint8_t ref = 0;    // 5 bits
  friend constexpr bool operator==(PickImm, PickImm) = default;
};

struct Ld {
  TypeTag type;
  uint8_t ref = 0;  // 5 bits
  friend constexpr bool operator==(Ld, Ld) = default;
};

struct Cast {
  TypeTag type;
  uint8_t ref = 0;  // 5 bits
  friend constexpr bool operator==(Cast, Cast) = default;
};

struct EchoLong {
  uint16_t ref = 0;  // 10 bits
  friend constexpr bool operator==(EchoLong, EchoLong) = default;
};

struct Alu {
  uint8_t func = 0;  // 3 bits
  uint8_t mod = 0;   // 3 bits
  uint8_t ref = 0;   // 5 bits
  friend constexpr bool operator==(Alu, Alu) = default;

  constexpr AluOp op() const { return *alu_op_for(func, mod); }
  constexpr AluVariant variant() const { return alu_variant_for(mod); }
};

struct Echo {
  uint8_t ref = 0;   // 5 bits, first input
  uint8_t ref2 = 0;  // 5 bits, second input
  bool pass_next = false;  // route inputs 3 and 4 to the next instruction
  friend constexpr bool operator==(Echo, Echo) = default;
};

struct Dup {
  uint8_t ref = 0;   // 5 bits, first copy of each input
  uint8_t ref2 = 0;  // 5 bits, second copy of each input
  bool pass_next = false;  // a third copy to the next instruction
  friend constexpr bool operator==(Dup, Dup) = default;
};

using Instruction =
    std::variant<Trap, Nop, St, Rsrv, Free, Sts, Call, Ret, Saddr, Grow,
                 LdStack, Const, Fence, Jmp, Pick, PickImm, Ld, Cast, EchoLong,
                 Alu, Echo, Dup>;

/// Mnemonic for trace lines and disassembly. ALU instructions report the
/// operation name (e.g. "add.s"); everything else is the form name.
inline std::string_view mnemonic(const Instruction& ins) {
  struct Visitor {
    std::string_view operator()(const Trap&) { return "trap"; }
    std::string_view operator()(const Nop&) { return "nop"; }
    std::string_view operator()(const St&) { return "st"; }
    std::string_view operator()(const Rsrv&) { return "rsrv"; }
    std::string_view operator()(const Free&) { return "free"; }
    std::string_view operator()(const Sts&) { return "sts"; }
    std::string_view operator()(const Call&) { return "call"; }
    std::string_view operator()(const Ret&) { return "ret"; }
    std::string_view operator()(const Saddr&) { return "saddr"; }
    std::string_view operator()(const Grow&) { return "grow"; }
    std::string_view operator()(const LdStack&) { return "ld.s"; }
    std::string_view operator()(const Const&) { return "const"; }
    std::string_view operator()(const Fence&) { return "fence"; }
    std::string_view operator()(const Jmp&) { return "jmp"; }
    std::string_view operator()(const Pick&) { return "pick"; }
    std::string_view operator()(const PickImm&) { return "pick.i"; }
    std::string_view operator()(const Ld&) { return "ld"; }
    std::string_view operator()(const Cast&) { return "cast"; }
    std::string_view operator()(const EchoLong&) { return "echo.l"; }
    std::string_view operator()(const Alu& a) { return alu_mnemonic(a.op()); }
    std::string_view operator()(const Echo&) { return "echo"; }
    std::string_view operator()(const Dup&) { return "dup"; }
  };
  return std::visit(Visitor{}, ins);
}

}  // namespace scry
