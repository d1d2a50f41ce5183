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
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "scry/instruction.hpp"

namespace scry {

using Word = uint16_t;

struct EncodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_field(uint32_t value, unsigned bits, const char* what) {
  if (value >> bits) {
    throw EncodeError(std::string(what) + " out of range");
  }
}

constexpr uint16_t bits_of(Word w, unsigned hi, unsigned lo) {
  return static_cast<uint16_t>((w >> lo) & ((1u << (hi - lo + 1)) - 1));
}

constexpr bool bit_of(Word w, unsigned n) { return (w >> n) & 1u; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Encode
//
// Bit layout, [hi:lo] inclusive, everything unstated is zero:
//   trap 0x0000   nop 0x4000   st 0x8000
//   rsrv   bytes[13:10] t[9]
//   free   bytes[13:10] t[9]  bit8
//   sts    idx[14:10]         bit7
//   call   trig[15:10]        bit8 bit7
//   ret    trig[15:10]   bit9 bit8 bit7
//   saddr  idx[14:10] siz[9:8]          bit6
//   grow   imm[15:8]               bit7 bit6
//   ld.s   idx[14:10] type[9:6]              bit5
//   const  imm[15:8] type[7:5]                    bit4
//   fence  succ[15:12] pred[11:8]                      bit3
//   jmp    trig[15:10] imm[9:3]                             bit2
//   pick   ref[14:10]                                            bit1
//   pick.i bit15 ref[14:10] im[9:8]                              bit1
//   ld     ref[14:10] type[9:6] bit5                             bit1
//   cast   bit15 ref[14:10] type[9:6] bit5                       bit1
//   echo.l ref[15:6] bit4                                        bit1
//   alu    ref[14:10] mod[9:7] func[6:4]                              bit0
//   echo   s[15] ref[14:10] ref2[9:5] bit3                           bit0
//   dup    s[15] ref[14:10] ref2[9:5] bit4 bit3                      bit0
// ---------------------------------------------------------------------------

inline Word encode(const Instruction& ins) {
  using detail::check_field;
  struct Visitor {
    Word operator()(const Trap&) const { return 0x0000; }
    Word operator()(const Nop&) const { return 0x4000; }
    Word operator()(const St&) const { return 0x8000; }
    Word operator()(const Rsrv& r) const {
      check_field(r.bytes, 4, "rsrv bytes");
      if (r.bytes == 0 && !r.unit16) {
        throw EncodeError("rsrv of zero units has no encoding");
      }
      return static_cast<Word>(r.bytes << 10 | (r.unit16 ? 1u : 0u) << 9);
    }
    Word operator()(const Free& f) const {
      check_field(f.bytes, 4, "free bytes");
      return static_cast<Word>(f.bytes << 10 | (f.unit16 ? 1u : 0u) << 9 |
                               1u << 8);
    }
    Word operator()(const Sts& s) const {
      check_field(s.slot, 5, "sts slot");
      return static_cast<Word>(s.slot << 10 | 1u << 7);
    }
    Word operator()(const Call& c) const {
      check_field(c.trig, 6, "call trigger");
      return static_cast<Word>(c.trig << 10 | 1u << 8 | 1u << 7);
    }
    Word operator()(const Ret& r) const {
      check_field(r.trig, 6, "ret trigger");
      return static_cast<Word>(r.trig << 10 | 1u << 9 | 1u << 8 | 1u << 7);
    }
    Word operator()(const Saddr& s) const {
      check_field(s.slot, 5, "saddr slot");
      check_field(s.size_log2, 2, "saddr size");
      return static_cast<Word>(s.slot << 10 | s.size_log2 << 8 | 1u << 6);
    }
    Word operator()(const Grow& g) const {
      return static_cast<Word>(g.imm << 8 | 1u << 7 | 1u << 6);
    }
    Word operator()(const LdStack& l) const {
      check_field(l.slot, 5, "ld.s slot");
      return static_cast<Word>(l.slot << 10 | l.type.code() << 6 | 1u << 5);
    }
    Word operator()(const Const& c) const {
      return static_cast<Word>(c.imm << 8 | c.type.code() << 5 | 1u << 4);
    }
    Word operator()(const Fence& f) const {
      check_field(f.succ, 4, "fence successor set");
      check_field(f.pred, 4, "fence predecessor set");
      return static_cast<Word>(f.succ << 12 | f.pred << 8 | 1u << 3);
    }
    Word operator()(const Jmp& j) const {
      check_field(j.trig, 6, "jmp trigger");
      if (j.offset < -64 || j.offset > 63) {
        throw EncodeError("jmp offset out of range");
      }
      return static_cast<Word>(j.trig << 10 |
                               (static_cast<uint16_t>(j.offset) & 0x7F) << 3 |
                               1u << 2);
    }
    Word operator()(const Pick& p) const {
      check_field(p.ref, 5, "pick reference");
      return static_cast<Word>(p.ref << 10 | 1u << 1);
    }
    Word operator()(const PickImm& p) const {
      check_field(p.ref, 5, "pick.i reference");
      check_field(p.index, 2, "pick.i index");
      return static_cast<Word>(1u << 15 | p.ref << 10 | p.index << 8 |
                               1u << 1);
    }
    Word operator()(const Ld& l) const {
      check_field(l.ref, 5, "ld reference");
      return static_cast<Word>(l.ref << 10 | l.type.code() << 6 | 1u << 5 |
                               1u << 1);
    }
    Word operator()(const Cast& c) const {
      check_field(c.ref, 5, "cast reference");
      return static_cast<Word>(1u << 15 | c.ref << 10 | c.type.code() << 6 |
                               1u << 5 | 1u << 1);
    }
    Word operator()(const EchoLong& e) const {
      check_field(e.ref, 10, "echo.l reference");
      return static_cast<Word>(e.ref << 6 | 1u << 4 | 1u << 1);
    }
    Word operator()(const Alu& a) const {
      check_field(a.ref, 5, "alu reference");
      if (!alu_combo_valid(a.func, a.mod)) {
        throw EncodeError("undefined alu func/mod combination");
      }
      return static_cast<Word>(a.ref << 10 | a.mod << 7 | a.func << 4 | 1u);
    }
    Word operator()(const Echo& e) const {
      check_field(e.ref, 5, "echo reference");
      check_field(e.ref2, 5, "echo reference");
      return static_cast<Word>((e.pass_next ? 1u : 0u) << 15 | e.ref << 10 |
                               e.ref2 << 5 | 1u << 3 | 1u);
    }
    Word operator()(const Dup& d) const {
      check_field(d.ref, 5, "dup reference");
      check_field(d.ref2, 5, "dup reference");
      return static_cast<Word>((d.pass_next ? 1u : 0u) << 15 | d.ref << 10 |
                               d.ref2 << 5 | 1u << 4 | 1u << 3 | 1u);
    }
  };
  return std::visit(Visitor{}, ins);
}

// ---------------------------------------------------------------------------
// Decode
// ---------------------------------------------------------------------------

/// Decodes one word. nullopt marks a reserved or malformed encoding,
/// including any word with a nonzero bit outside its form's fields.
inline std::optional<Instruction> decode(Word w) {
  using detail::bit_of;
  using detail::bits_of;

  const unsigned group = bits_of(w, 1, 0);
  if (group == 3) return std::nullopt;

  if (group == 1) {
    if (bit_of(w, 2)) return std::nullopt;
    if (!bit_of(w, 3)) {
      // alu: ref[14:10] mod[9:7] func[6:4]
      if (bit_of(w, 15)) return std::nullopt;
      const uint8_t func = static_cast<uint8_t>(bits_of(w, 6, 4));
      const uint8_t mod = static_cast<uint8_t>(bits_of(w, 9, 7));
      if (!alu_combo_valid(func, mod)) return std::nullopt;
      return Alu{func, mod, static_cast<uint8_t>(bits_of(w, 14, 10))};
    }
    const bool pass = bit_of(w, 15);
    const uint8_t ref = static_cast<uint8_t>(bits_of(w, 14, 10));
    const uint8_t ref2 = static_cast<uint8_t>(bits_of(w, 9, 5));
    if (bit_of(w, 4)) return Dup{ref, ref2, pass};
    return Echo{ref, ref2, pass};
  }

  if (group == 2) {
    if (bit_of(w, 2)) return std::nullopt;
    if (bit_of(w, 5)) {
      // ld/cast: ref[14:10] type[9:6]
      if (bit_of(w, 4) || bit_of(w, 3)) return std::nullopt;
      const auto type = TypeTag::from_code(static_cast<uint8_t>(bits_of(w, 9, 6)));
      if (!type) return std::nullopt;
      const uint8_t ref = static_cast<uint8_t>(bits_of(w, 14, 10));
      if (bit_of(w, 15)) return Cast{*type, ref};
      return Ld{*type, ref};
    }
    if (bit_of(w, 4)) {
      if (bit_of(w, 3)) return std::nullopt;
      return EchoLong{bits_of(w, 15, 6)};
    }
    if (bit_of(w, 3) || bits_of(w, 7, 6) != 0) return std::nullopt;
    const uint8_t ref = static_cast<uint8_t>(bits_of(w, 14, 10));
    if (bit_of(w, 15)) {
      return PickImm{static_cast<uint8_t>(bits_of(w, 9, 8)), ref};
    }
    if (bits_of(w, 9, 8) != 0) return std::nullopt;
    return Pick{ref};
  }

  // group == 0
  if (bit_of(w, 2)) {
    const uint8_t trig = static_cast<uint8_t>(bits_of(w, 15, 10));
    const uint16_t raw = bits_of(w, 9, 3);
    const int8_t offset =
        static_cast<int8_t>(raw & 0x40 ? raw - 0x80 : raw);
    return Jmp{trig, offset};
  }
  if (bit_of(w, 3)) {
    if (bit_of(w, 4) || bits_of(w, 7, 5) != 0) return std::nullopt;
    return Fence{static_cast<uint8_t>(bits_of(w, 15, 12)),
                 static_cast<uint8_t>(bits_of(w, 11, 8))};
  }
  if (bit_of(w, 4)) {
    const auto type = TypeTag::from_code(static_cast<uint8_t>(bits_of(w, 7, 5)));
    return Const{static_cast<uint8_t>(bits_of(w, 15, 8)), *type};
  }
  if (bit_of(w, 5)) {
    if (bit_of(w, 15)) return std::nullopt;
    const auto type = TypeTag::from_code(static_cast<uint8_t>(bits_of(w, 9, 6)));
    if (!type) return std::nullopt;
    return LdStack{static_cast<uint8_t>(bits_of(w, 14, 10)), *type};
  }
  if (bit_of(w, 6)) {
    if (bit_of(w, 7)) {
      return Grow{static_cast<uint8_t>(bits_of(w, 15, 8))};
    }
    if (bit_of(w, 15)) return std::nullopt;
    return Saddr{static_cast<uint8_t>(bits_of(w, 14, 10)),
                 static_cast<uint8_t>(bits_of(w, 9, 8))};
  }
  if (bit_of(w, 7)) {
    if (bit_of(w, 8)) {
      const uint8_t trig = static_cast<uint8_t>(bits_of(w, 15, 10));
      if (bit_of(w, 9)) return Ret{trig};
      return Call{trig};
    }
    if (bit_of(w, 9) || bit_of(w, 15)) return std::nullopt;
    return Sts{static_cast<uint8_t>(bits_of(w, 14, 10))};
  }
  if (bit_of(w, 8)) {
    if (bits_of(w, 15, 14) != 0) return std::nullopt;
    return Free{static_cast<uint8_t>(bits_of(w, 13, 10)), bit_of(w, 9)};
  }
  if (w == 0x0000) return Trap{};
  if (w == 0x4000) return Nop{};
  if (w == 0x8000) return St{};
  if (bits_of(w, 15, 14) == 0) {
    // Only bits [13:9] can still be nonzero here, so (bytes, t) != (0, 0).
    return Rsrv{static_cast<uint8_t>(bits_of(w, 13, 10)), bit_of(w, 9)};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace detail {

inline std::string ref_text(unsigned ref) { return "=>" + std::to_string(ref); }

inline std::string const_imm_text(uint8_t imm, TypeTag type) {
  if (type.is_signed()) return std::to_string(sign_extend(imm, 8));
  return std::to_string(unsigned{imm});
}

inline std::string signed_offset_text(int offset) {
  return offset < 0 ? std::to_string(offset) : "+" + std::to_string(offset);
}

}  // namespace detail

/// Renders one instruction in assembly syntax with numeric references.
inline std::string render_instruction(const Instruction& ins) {
  using detail::ref_text;
  struct Visitor {
    std::string operator()(const Trap&) const { return "trap"; }
    std::string operator()(const Nop&) const { return "nop"; }
    std::string operator()(const St&) const { return "st"; }
    std::string operator()(const Rsrv& r) const {
      std::string s = "rsrv " + std::to_string(unsigned{r.bytes});
      if (r.unit16) s += ", x16";
      return s;
    }
    std::string operator()(const Free& f) const {
      std::string s = "free " + std::to_string(unsigned{f.bytes});
      if (f.unit16) s += ", x16";
      return s;
    }
    std::string operator()(const Sts& s) const {
      return "sts " + std::to_string(unsigned{s.slot});
    }
    std::string operator()(const Call& c) const {
      return "call " + std::to_string(unsigned{c.trig});
    }
    std::string operator()(const Ret& r) const {
      return "ret " + std::to_string(unsigned{r.trig});
    }
    std::string operator()(const Saddr& s) const {
      return "saddr " + std::to_string(unsigned{s.slot}) + ", " +
             std::to_string(unsigned{s.size_log2});
    }
    std::string operator()(const Grow& g) const {
      return "grow " + std::to_string(unsigned{g.imm});
    }
    std::string operator()(const LdStack& l) const {
      return "ld.s " + std::string(l.type.name()) + ", " +
             std::to_string(unsigned{l.slot});
    }
    std::string operator()(const Const& c) const {
      return "const " + std::string(c.type.name()) + ", " +
             detail::const_imm_text(c.imm, c.type);
    }
    std::string operator()(const Fence& f) const {
      return "fence " + std::to_string(unsigned{f.succ}) + ", " +
             std::to_string(unsigned{f.pred});
    }
    std::string operator()(const Jmp& j) const {
      return "jmp " + detail::signed_offset_text(j.offset) + ", " +
             std::to_string(unsigned{j.trig});
    }
    std::string operator()(const Pick& p) const {
      return "pick " + ref_text(p.ref);
    }
    std::string operator()(const PickImm& p) const {
      return "pick.i " + std::to_string(unsigned{p.index}) + ", " +
             ref_text(p.ref);
    }
    std::string operator()(const Ld& l) const {
      return "ld " + std::string(l.type.name()) + ", " + ref_text(l.ref);
    }
    std::string operator()(const Cast& c) const {
      return "cast " + std::string(c.type.name()) + ", " + ref_text(c.ref);
    }
    std::string operator()(const EchoLong& e) const {
      return "echo.l " + ref_text(e.ref);
    }
    std::string operator()(const Alu& a) const {
      const std::string name(alu_mnemonic(a.op()));
      const std::string ref = ref_text(a.ref);
      switch (a.variant()) {
        case AluVariant::single: return name + " " + ref;
        case AluVariant::low_high_same: return name + " Low, High, " + ref;
        case AluVariant::high_low_same: return name + " High, Low, " + ref;
        case AluVariant::low_ref_high_next:
          return name + " Low, " + ref + ", High, =>";
        case AluVariant::high_ref_low_next:
          return name + " High, " + ref + ", Low, =>";
        case AluVariant::low_ref_high_drop: return name + " Low, " + ref;
        case AluVariant::high_ref_low_drop: return name + " High, " + ref;
      }
      return name;
    }
    std::string operator()(const Echo& e) const {
      std::string s = "echo " + ref_text(e.ref) + ", " + ref_text(e.ref2);
      if (e.pass_next) s += ", =>";
      return s;
    }
    std::string operator()(const Dup& d) const {
      std::string s = "dup " + ref_text(d.ref) + ", " + ref_text(d.ref2);
      if (d.pass_next) s += ", =>";
      return s;
    }
  };
  return std::visit(Visitor{}, ins);
}

/// Renders any word: valid encodings as assembly, everything else as a
/// raw `.word` directive.
inline std::string disassemble_word(Word w) {
  if (auto ins = decode(w)) return render_instruction(*ins);
  char buf[16];
  std::snprintf(buf, sizeof buf, ".word 0x%04X", w);
  return buf;
}

// ---------------------------------------------------------------------------
// Field width summary, used by the density analyzer's cross-check.
// ---------------------------------------------------------------------------

struct FieldWidth {
  std::string name;
  unsigned bits;
};

struct InstructionLayout {
  std::string name;
  std::vector<FieldWidth> fields;  // variable fields only, opcode bits excluded
};

inline std::vector<InstructionLayout> instruction_layouts() {
  return {
      {"trap", {}},
      {"nop", {}},
      {"st", {}},
      {"rsrv", {{"bytes", 4}, {"t", 1}}},
      {"free", {{"bytes", 4}, {"t", 1}}},
      {"sts", {{"idx", 5}}},
      {"call", {{"trig", 6}}},
      {"ret", {{"trig", 6}}},
      {"saddr", {{"idx", 5}, {"siz", 2}}},
      {"grow", {{"imm", 8}}},
      {"ld.s", {{"idx", 5}, {"type", 4}}},
      {"const", {{"imm", 8}, {"type", 3}}},
      {"fence", {{"succ", 4}, {"pred", 4}}},
      {"jmp", {{"trig", 6}, {"imm", 7}}},
      {"pick", {{"ref", 5}}},
      {"pick.i", {{"ref", 5}, {"im", 2}}},
      {"ld", {{"ref", 5}, {"type", 4}}},
      {"cast", {{"ref", 5}, {"type", 4}}},
      {"echo.l", {{"ref", 10}}},
      {"alu", {{"ref", 5}, {"mod", 3}, {"func", 3}}},
      {"echo", {{"s", 1}, {"ref", 5}, {"ref2", 5}}},
      {"dup", {{"s", 1}, {"ref", 5}, {"ref2", 5}}},
  };
}

// ---------------------------------------------------------------------------
// Program container
// ---------------------------------------------------------------------------

inline void append_word_le(std::vector<uint8_t>& out, Word w) {
  out.push_back(static_cast<uint8_t>(w & 0xFF));
  out.push_back(static_cast<uint8_t>(w >> 8));
}

}  // namespace scry
