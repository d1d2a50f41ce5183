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
#include <stdexcept>

#include "scry/instruction.hpp"
#include "scry/types.hpp"

namespace scry {

/// Result of one ALU evaluation. `high` is engaged exactly for the
/// two-output operations (add, sub, shl, shr, mul, div); routing of the
/// two halves is the machine's concern, not the ALU's.
struct AluResult {
  TaggedValue low;
  std::optional<TaggedValue> high;

  friend bool operator==(const AluResult&, const AluResult&) = default;
};

/// Implicit second operand used when only one operand arrives. is_nar has
/// none and must not ask for one.
constexpr TaggedValue alu_implicit_operand(AluOp op, TypeTag tag,
                                           unsigned xlen_bytes) {
  switch (op) {
    case AluOp::eq:
    case AluOp::lt:
    case AluOp::gt:
      return TaggedValue::value(0, tag);
    case AluOp::bit_or:
    case AluOp::bit_xor:
      return TaggedValue::value(tag.mask(), tag);
    case AluOp::mul:
    case AluOp::div:
      return TaggedValue::value(xlen_bytes, tag);
    default:
      // add, add.s, sub, sub.s, and, shl, shr
      return TaggedValue::value(1, tag);
  }
}

namespace detail {

inline AluResult alu_nars(NarCode code, bool two_output) {
  AluResult r;
  r.low = TaggedValue::nar(code);
  if (two_output) r.high = TaggedValue::nar(code);
  return r;
}

}  // namespace detail

/// Evaluates one operation on canonical operands.
///
/// Rules, in order: is_nar inspects rather than propagates; any NaR operand
/// poisons the result; a missing second operand is replaced by the
/// operation's implicit; mismatched tags yield NaR(type-mismatch); then the
/// arithmetic runs at the tag's width. Two-output shapes:
///   add: carry (u8 0/1); sub: borrow (u8 0/1);
///   shl/shr: the shifted-out bits, right-aligned, operand tag;
///   mul: upper half of the double-width product; div: remainder.
/// Shift counts are taken modulo the tag's bit width, reading the count's
/// container bits as unsigned.
inline AluResult alu_apply(AluOp op, TaggedValue a, std::optional<TaggedValue> b,
                           unsigned xlen_bytes) {
  const bool two = alu_two_output(op);

  if (op == AluOp::is_nar) {
    const bool any_nar = a.is_nar() || (b && b->is_nar());
    return AluResult{TaggedValue::value(any_nar ? 1 : 0, u8), std::nullopt};
  }
  if (a.is_nar() || (b && b->is_nar())) {
    return detail::alu_nars(NarCode::propagated, two);
  }
  if (!b) b = alu_implicit_operand(op, a.tag(), xlen_bytes);
  if (b->tag() != a.tag()) {
    return detail::alu_nars(NarCode::type_mismatch, two);
  }

  const TypeTag tag = a.tag();
  const unsigned w = tag.width_bits();
  const uint64_t mask = tag.mask();
  const uint64_t ua = a.bits();
  const uint64_t ub = b->bits();
  const int64_t sa = a.svalue();
  const int64_t sb = b->svalue();

  const auto val = [tag](uint64_t bits) { return TaggedValue::value(bits, tag); };
  const auto flag = [](bool v) { return TaggedValue::value(v ? 1 : 0, u8); };

  switch (op) {
    case AluOp::add: {
      const unsigned __int128 sum =
          static_cast<unsigned __int128>(ua) + ub;
      return AluResult{val(static_cast<uint64_t>(sum)),
                       flag((sum >> w) != 0)};
    }
    case AluOp::sub:
      return AluResult{val(ua - ub), flag(ua < ub)};
    case AluOp::add_sat: {
      if (!tag.is_signed()) {
        const unsigned __int128 sum =
            static_cast<unsigned __int128>(ua) + ub;
        return AluResult{val(sum > mask ? mask : static_cast<uint64_t>(sum)),
                         std::nullopt};
      }
      __int128 sum = static_cast<__int128>(sa) + sb;
      if (sum < tag.min_value()) sum = tag.min_value();
      if (sum > tag.max_value()) sum = tag.max_value();
      return AluResult{val(static_cast<uint64_t>(static_cast<int64_t>(sum))),
                       std::nullopt};
    }
    case AluOp::sub_sat: {
      if (!tag.is_signed()) {
        return AluResult{val(ua < ub ? 0 : ua - ub), std::nullopt};
      }
      __int128 diff = static_cast<__int128>(sa) - sb;
      if (diff < tag.min_value()) diff = tag.min_value();
      if (diff > tag.max_value()) diff = tag.max_value();
      return AluResult{val(static_cast<uint64_t>(static_cast<int64_t>(diff))),
                       std::nullopt};
    }
    case AluOp::mul: {
      if (!tag.is_signed()) {
        const unsigned __int128 p =
            static_cast<unsigned __int128>(ua) * ub;
        return AluResult{val(static_cast<uint64_t>(p)),
                         val(static_cast<uint64_t>(p >> w))};
      }
      const __int128 p = static_cast<__int128>(sa) * sb;
      const unsigned __int128 up = static_cast<unsigned __int128>(p);
      return AluResult{val(static_cast<uint64_t>(up)),
                       val(static_cast<uint64_t>(up >> w))};
    }
    case AluOp::div: {
      if (ub == 0) return detail::alu_nars(NarCode::div_by_zero, true);
      if (!tag.is_signed()) {
        return AluResult{val(ua / ub), val(ua % ub)};
      }
      if (sa == tag.min_value() && sb == -1) {
        return detail::alu_nars(NarCode::div_by_zero, true);
      }
      return AluResult{val(static_cast<uint64_t>(sa / sb)),
                       val(static_cast<uint64_t>(sa % sb))};
    }
    case AluOp::shl: {
      const unsigned e = static_cast<unsigned>(ub % w);
      if (e == 0) return AluResult{val(ua), val(0)};
      return AluResult{val(ua << e), val(ua >> (w - e))};
    }
    case AluOp::shr: {
      const unsigned e = static_cast<unsigned>(ub % w);
      if (e == 0) return AluResult{val(ua), val(0)};
      const uint64_t out = ua & ((uint64_t{1} << e) - 1);
      const uint64_t kept = tag.is_signed()
                                ? static_cast<uint64_t>(sa >> e)
                                : ua >> e;
      return AluResult{val(kept), val(out)};
    }
    case AluOp::eq:
      return AluResult{flag(ua == ub), std::nullopt};
    case AluOp::lt:
      return AluResult{flag(tag.is_signed() ? sa < sb : ua < ub), std::nullopt};
    case AluOp::gt:
      return AluResult{flag(tag.is_signed() ? sa > sb : ua > ub), std::nullopt};
    case AluOp::bit_and:
      return AluResult{val(ua & ub), std::nullopt};
    case AluOp::bit_or:
      return AluResult{val(ua | ub), std::nullopt};
    case AluOp::bit_xor:
      return AluResult{val(ua ^ ub), std::nullopt};
    case AluOp::is_nar:
      break;  // handled above
  }
  throw std::logic_error("unreachable alu op");
}

/// Field-level entry point: rejects undefined (func, mod) combinations.
inline AluResult alu_apply(uint8_t func, uint8_t mod, TaggedValue a,
                           std::optional<TaggedValue> b, unsigned xlen_bytes) {
  const auto op = alu_op_for(func, mod);
  if (!op) throw std::invalid_argument("undefined alu func/mod combination");
  return alu_apply(*op, a, b, xlen_bytes);
}

/// Retags a value at a new width. Narrowing keeps the low bits; widening
/// extends by the source tag's signedness; NaR passes through unchanged.
constexpr TaggedValue cast_value(TaggedValue v, TypeTag target) {
  if (v.is_nar()) return v;
  if (target.width_bits() <= v.tag().width_bits()) {
    return TaggedValue::value(v.bits(), target);
  }
  const uint64_t bits =
      v.tag().is_signed() ? static_cast<uint64_t>(v.svalue()) : v.bits();
  return TaggedValue::value(bits, target);
}

/// Resolves an operand to a byte address in the 2^xlen_bits space.
/// Unsigned operands are absolute (zero-extended or truncated); signed
/// operands are anchor-relative. NaR has no address.
constexpr std::optional<uint64_t> normalize_address(TaggedValue v,
                                                    uint64_t anchor,
                                                    unsigned xlen_bits) {
  if (v.is_nar()) return std::nullopt;
  const uint64_t xmask =
      xlen_bits >= 64 ? ~uint64_t{0} : (uint64_t{1} << xlen_bits) - 1;
  if (v.tag().is_signed()) {
    return (anchor + static_cast<uint64_t>(v.svalue())) & xmask;
  }
  return v.bits() & xmask;
}

}  // namespace scry
