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

#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "scry/encoding.hpp"

namespace {

using scry::decode;
using scry::encode;
using scry::Instruction;
using scry::TypeTag;
using scry::Word;

/// encode(decode(w)) == w for every word that decodes at all.
TEST(EncodingScan, EveryValidWordRoundTrips) {
  unsigned valid = 0;
  for (uint32_t w = 0; w <= 0xFFFF; ++w) {
    const auto ins = decode(static_cast<Word>(w));
    if (!ins) continue;
    ++valid;
    const Word back = encode(*ins);
    if (back != w) {
      ADD_FAILURE() << "word " << w << " decodes to '"
                    << scry::render_instruction(*ins) << "' but re-encodes to "
                    << back;
      return;
    }
  }
  // A census pin: the number of decodable words must not drift.
  EXPECT_EQ(valid, 18594u);
}

TEST(EncodingScan, ReservedLowBitPairNeverDecodes) {
  for (uint32_t w = 3; w <= 0xFFFF; w += 4) {
    if (decode(static_cast<Word>(w))) {
      ADD_FAILURE() << "word " << w << " has low bits 11 but decodes";
      return;
    }
  }
}

/// Every constructible instruction encodes to a word that decodes back to
/// the same value, and no two distinct instructions share a word.
TEST(EncodingConstructive, AllFieldCombinationsRoundTrip) {
  std::vector<Instruction> all;
  all.push_back(scry::Trap{});
  all.push_back(scry::Nop{});
  all.push_back(scry::St{});
  for (uint8_t bytes = 0; bytes < 16; ++bytes) {
    for (bool unit16 : {false, true}) {
      if (bytes == 0 && !unit16) continue;  // unencodable rsrv
      all.push_back(scry::Rsrv{bytes, unit16});
    }
  }
  for (uint8_t bytes = 0; bytes < 16; ++bytes) {
    for (bool unit16 : {false, true}) all.push_back(scry::Free{bytes, unit16});
  }
  for (uint8_t slot = 0; slot < 32; ++slot) all.push_back(scry::Sts{slot});
  for (uint8_t trig = 0; trig < 64; ++trig) {
    all.push_back(scry::Call{trig});
    all.push_back(scry::Ret{trig});
  }
  for (uint8_t slot = 0; slot < 32; ++slot) {
    for (uint8_t siz = 0; siz < 4; ++siz) all.push_back(scry::Saddr{slot, siz});
  }
  for (unsigned imm = 0; imm < 256; ++imm) {
    all.push_back(scry::Grow{static_cast<uint8_t>(imm)});
  }
  for (uint8_t slot = 0; slot < 32; ++slot) {
    for (uint8_t code = 0; code < 8; ++code) {
      all.push_back(scry::LdStack{slot, *TypeTag::from_code(code)});
    }
  }
  for (unsigned imm = 0; imm < 256; ++imm) {
    for (uint8_t code = 0; code < 8; ++code) {
      all.push_back(scry::Const{static_cast<uint8_t>(imm),
                                *TypeTag::from_code(code)});
    }
  }
  for (uint8_t succ = 0; succ < 16; ++succ) {
    for (uint8_t pred = 0; pred < 16; ++pred) {
      all.push_back(scry::Fence{succ, pred});
    }
  }
  for (uint8_t trig = 0; trig < 64; ++trig) {
    for (int offset = -64; offset <= 63; ++offset) {
      all.push_back(scry::Jmp{trig, static_cast<int8_t>(offset)});
    }
  }
  for (uint8_t ref = 0; ref < 32; ++ref) {
    all.push_back(scry::Pick{ref});
    for (uint8_t index = 0; index < 4; ++index) {
      all.push_back(scry::PickImm{index, ref});
    }
    for (uint8_t code = 0; code < 8; ++code) {
      all.push_back(scry::Ld{*TypeTag::from_code(code), ref});
      all.push_back(scry::Cast{*TypeTag::from_code(code), ref});
    }
  }
  for (uint16_t ref = 0; ref < 1024; ++ref) {
    all.push_back(scry::EchoLong{ref});
  }
  for (uint8_t func = 0; func < 8; ++func) {
    for (uint8_t mod = 0; mod < 8; ++mod) {
      if (!scry::alu_combo_valid(func, mod)) continue;
      for (uint8_t ref = 0; ref < 32; ++ref) {
        all.push_back(scry::Alu{func, mod, ref});
      }
    }
  }
  for (uint8_t ref = 0; ref < 32; ++ref) {
    for (uint8_t ref2 = 0; ref2 < 32; ++ref2) {
      for (bool pass : {false, true}) {
        all.push_back(scry::Echo{ref, ref2, pass});
        all.push_back(scry::Dup{ref, ref2, pass});
      }
    }
  }

  std::set<Word> seen;
  for (const Instruction& ins : all) {
    const Word w = encode(ins);
    ASSERT_TRUE(seen.insert(w).second)
        << "duplicate word " << w << " for " << scry::render_instruction(ins);
    const auto back = decode(w);
    ASSERT_TRUE(back.has_value()) << scry::render_instruction(ins);
    ASSERT_TRUE(*back == ins) << scry::render_instruction(ins) << " came back "
                              << scry::render_instruction(*back);
  }
}

TEST(EncodingExamples, KnownWords) {
  EXPECT_EQ(decode(0x0000), Instruction{scry::Trap{}});
  EXPECT_EQ(decode(0x4000), Instruction{scry::Nop{}});
  EXPECT_EQ(decode(0x8000), Instruction{scry::St{}});
  // add.s =>3 — saturating add aimed three instructions ahead.
  EXPECT_EQ(decode(0x0F81), (Instruction{scry::Alu{0, 7, 3}}));
  // jmp -3, 4 — back three words, firing after four more instructions.
  EXPECT_EQ(decode(0x13EC), (Instruction{scry::Jmp{4, -3}}));
  // const u8, 48
  EXPECT_EQ(decode(0x3010), (Instruction{scry::Const{48, scry::u8}}));
  EXPECT_EQ(decode(0x0003), std::nullopt);
}

TEST(EncodingErrors, OutOfRangeFieldsThrow) {
  EXPECT_THROW(encode(scry::Rsrv{16, false}), scry::EncodeError);
  EXPECT_THROW(encode(scry::Rsrv{0, false}), scry::EncodeError);
  EXPECT_NO_THROW(encode(scry::Rsrv{0, true}));
  EXPECT_THROW(encode(scry::Sts{32}), scry::EncodeError);
  EXPECT_THROW(encode(scry::Call{64}), scry::EncodeError);
  EXPECT_THROW(encode(scry::Jmp{0, 64}), scry::EncodeError);
  EXPECT_NO_THROW(encode(scry::Jmp{0, -64}));
  EXPECT_THROW(encode(scry::Alu{4, 7, 0}), scry::EncodeError);
  EXPECT_THROW(encode(scry::Alu{0, 0, 32}), scry::EncodeError);
  EXPECT_THROW(encode(scry::EchoLong{1024}), scry::EncodeError);
}

TEST(EncodingLayouts, TableMatchesTheDecoder) {
  const auto layouts = scry::instruction_layouts();
  ASSERT_EQ(layouts.size(), 22u);
  std::set<std::string> names;
  for (const auto& row : layouts) {
    EXPECT_TRUE(names.insert(row.name).second) << row.name;
    unsigned sum = 0;
    for (const auto& f : row.fields) sum += f.bits;
    EXPECT_LE(sum, 16u) << row.name;
  }
  EXPECT_TRUE(names.count("alu"));
  EXPECT_TRUE(names.count("echo.l"));
}

TEST(Disassembly, RendersWordsAndRawFallback) {
  EXPECT_EQ(scry::disassemble_word(0x3010), "const u8, 48");
  EXPECT_EQ(scry::disassemble_word(0x0F81), "add.s =>3");
  EXPECT_EQ(scry::disassemble_word(0x0003), ".word 0x0003");
}

}  // namespace
