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

namespace scry {

/// Operand type tag: signedness plus a power-of-two byte width (1/2/4/8).
///
/// The canonical 3-bit code packs the tag as bit2 = signedness
/// (0 unsigned, 1 signed) and bits 1:0 = log2 of the byte width.
class TypeTag {
 public:
  constexpr TypeTag() = default;

  static constexpr std::optional<TypeTag> from_code(uint8_t code) {
    if (code > 7) return std::nullopt;
    return TypeTag(code);
  }

  static constexpr TypeTag make(bool is_signed, unsigned width_log2) {
    return TypeTag(static_cast<uint8_t>((is_signed ? 4u : 0u) | (width_log2 & 3u)));
  }

  constexpr uint8_t code() const { return code_; }
  constexpr bool is_signed() const { return (code_ & 4u) != 0; }
  constexpr unsigned width_log2() const { return code_ & 3u; }
  constexpr unsigned width_bytes() const { return 1u << width_log2(); }
  constexpr unsigned width_bits() const { return 8u << width_log2(); }

  /// Mask with the low width_bits() bits set.
  constexpr uint64_t mask() const {
    return width_bits() == 64 ? ~uint64_t{0} : (uint64_t{1} << width_bits()) - 1;
  }

  /// Largest/smallest representable values, as canonical bit patterns.
  constexpr uint64_t max_bits() const {
    return is_signed() ? (mask() >> 1) : mask();
  }
  constexpr int64_t min_value() const {
    return is_signed() ? -static_cast<int64_t>(mask() >> 1) - 1 : 0;
  }
  constexpr int64_t max_value() const {
    return is_signed() ? static_cast<int64_t>(mask() >> 1)
                       : static_cast<int64_t>(mask());
  }

  constexpr std::string_view name() const {
    constexpr std::string_view names[8] = {"u8", "u16", "u32", "u64",
                                           "i8", "i16", "i32", "i64"};
    return names[code_];
  }

  static constexpr std::optional<TypeTag> from_name(std::string_view s) {
    for (uint8_t c = 0; c < 8; ++c) {
      if (TypeTag(c).name() == s) return TypeTag(c);
    }
    return std::nullopt;
  }

  friend constexpr bool operator==(TypeTag a, TypeTag b) = default;

 private:
  constexpr explicit TypeTag(uint8_t code) : code_(code) {}
  uint8_t code_ = 0;
};

inline constexpr TypeTag u8 = TypeTag::make(false, 0);
inline constexpr TypeTag u16 = TypeTag::make(false, 1);
inline constexpr TypeTag u32 = TypeTag::make(false, 2);
inline constexpr TypeTag u64 = TypeTag::make(false, 3);
inline constexpr TypeTag i8 = TypeTag::make(true, 0);
inline constexpr TypeTag i16 = TypeTag::make(true, 1);
inline constexpr TypeTag i32 = TypeTag::make(true, 2);
inline constexpr TypeTag i64 = TypeTag::make(true, 3);

/// Diagnostic payload carried by a NaR.
enum class NarCode : uint16_t {
  type_mismatch = 1,
  div_by_zero = 2,
  bad_address = 3,
  missing_operand = 4,
  propagated = 5,
};

constexpr std::string_view to_string(NarCode code) {
  switch (code) {
    case NarCode::type_mismatch: return "type-mismatch";
    case NarCode::div_by_zero: return "div-by-zero";
    case NarCode::bad_address: return "bad-address";
    case NarCode::missing_operand: return "missing-operand";
    case NarCode::propagated: return "propagated";
  }
  return "unknown";
}

constexpr int64_t sign_extend(uint64_t bits, unsigned width_bits) {
  if (width_bits >= 64) return static_cast<int64_t>(bits);
  const uint64_t sign = uint64_t{1} << (width_bits - 1);
  return static_cast<int64_t>((bits ^ sign) - sign);
}

/// A runtime operand: either a typed integer or a NaR.
///
/// Typed integers are stored canonically: the 64-bit container holds the
/// value's low `width` bits with everything above zero-filled, for signed
/// tags as well. NaRs carry only their diagnostic payload; they have no type.
class TaggedValue {
 public:
  constexpr TaggedValue() = default;  // u8:0

  static constexpr TaggedValue value(uint64_t bits, TypeTag tag) {
    TaggedValue v;
    v.bits_ = bits & tag.mask();
    v.tag_ = tag;
    return v;
  }

  static constexpr TaggedValue nar(NarCode code) {
    TaggedValue v;
    v.nar_ = true;
    v.nar_code_ = code;
    return v;
  }

  constexpr bool is_nar() const { return nar_; }
  constexpr NarCode nar_code() const { return nar_code_; }
  constexpr TypeTag tag() const { return tag_; }

  /// Canonical container bits (zero above the tag's width).
  constexpr uint64_t bits() const { return bits_; }

  constexpr uint64_t uvalue() const { return bits_; }
  constexpr int64_t svalue() const {
    return tag_.is_signed() ? sign_extend(bits_, tag_.width_bits())
                            : static_cast<int64_t>(bits_);
  }

  /// True when the value is a non-NaR with nonzero bits.
  constexpr bool truthy() const { return !nar_ && bits_ != 0; }

  std::string to_string() const {
    if (nar_) return "NaR(" + std::string(scry::to_string(nar_code_)) + ")";
    const std::string digits = tag_.is_signed() ? std::to_string(svalue())
                                                : std::to_string(uvalue());
    return std::string(tag_.name()) + ":" + digits;
  }

  friend constexpr bool operator==(const TaggedValue& a, const TaggedValue& b) {
    if (a.nar_ != b.nar_) return false;
    if (a.nar_) return a.nar_code_ == b.nar_code_;
    return a.tag_ == b.tag_ && a.bits_ == b.bits_;
  }

 private:
  uint64_t bits_ = 0;
  TypeTag tag_;
  bool nar_ = false;
  NarCode nar_code_ = NarCode::propagated;
};

}  // namespace scry
