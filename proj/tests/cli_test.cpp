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

// End-to-end checks of the command-line tool: the asm/dis/run/analyze
// subcommands, their exit codes, and trace determinism. Each test drives
// the real binary through support::run_cli.

#include <gtest/gtest.h>

#include <string>

#include "support.hpp"

namespace {

using support::program_path;
using support::read_file;
using support::run_cli;
using support::temp_path;
using support::write_file;

// Assembles a corpus program into a scratch container, failing the test on
// any tool error.
std::string assemble_to_temp(const std::string& name) {
  const std::string out = temp_path(name + ".scry");
  auto r = run_cli("asm " + program_path(name) + " -o " + out);
  EXPECT_EQ(r.exit_code, 0) << r.err;
  return out;
}

TEST(Pipeline, AssembleDisassembleReassembleIdentically) {
  for (const char* name :
       {"strcpy.scry-asm", "isxdigit.scry-asm", "bsearch.scry-asm"}) {
    const std::string first = assemble_to_temp(name);
    const std::string listing = temp_path("listing.txt");
    auto dis = run_cli("dis " + first + " -o " + listing);
    ASSERT_EQ(dis.exit_code, 0) << dis.err;

    const std::string second = temp_path("again.scry");
    auto redo = run_cli("asm " + listing + " -o " + second);
    ASSERT_EQ(redo.exit_code, 0) << name << ": " << redo.err;
    EXPECT_EQ(read_file(first), read_file(second)) << name;
  }
}

TEST(Run, PrintsReturnedValues) {
  const std::string prog = assemble_to_temp("isxdigit.scry-asm");
  auto hex = run_cli("run " + prog + " --arg u8:55");  // '7'
  EXPECT_EQ(hex.exit_code, 0) << hex.err;
  EXPECT_EQ(hex.out, "u8:1\n");
  EXPECT_TRUE(hex.err.empty());

  auto colon = run_cli("run " + prog + " --arg u8:58");  // ':'
  EXPECT_EQ(colon.exit_code, 0) << colon.err;
  EXPECT_EQ(colon.out, "u8:0\n");
}

TEST(Run, MemoryPreloadFeedsPointerPrograms) {
  const std::string prog = assemble_to_temp("find_max.scry-asm");
  const std::string data = temp_path("bytes.bin");
  write_file(data, std::string("\x03\xc8\x11\x5b", 4));  // max is 200
  auto r = run_cli("run " + prog + " --mem " + data +
                   "@100 --arg u64:0x100 --arg u64:4");
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out, "u8:200\n");
}

TEST(Run, TraceFilesAreByteIdentical) {
  const std::string prog = assemble_to_temp("find_max.scry-asm");
  const std::string data = temp_path("bytes.bin");
  write_file(data, std::string("\x04\xc8\x11\x5b\xc8\x03", 6));
  std::string traces[2];
  for (int i = 0; i < 2; ++i) {
    const std::string path = temp_path("trace.txt");
    auto r = run_cli("run " + prog + " --mem " + data +
                     "@100 --arg u64:0x100 --arg u64:6 --trace " + path);
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(r.out, "u8:200\n");
    traces[i] = read_file(path);
  }
  EXPECT_FALSE(traces[0].empty());
  EXPECT_EQ(traces[0], traces[1]);
  EXPECT_NE(traces[0].find("halt=returned values=[u8:200]\n"),
            std::string::npos);
}

TEST(Run, ExitCodesDistinguishOutcomes) {
  // A software trap exits 2 and reports the cause.
  const std::string trap_src = temp_path("trap.s");
  write_file(trap_src, "  trap\n");
  const std::string trap_prog = temp_path("trap.scry");
  ASSERT_EQ(run_cli("asm " + trap_src + " -o " + trap_prog).exit_code, 0);
  auto trapped = run_cli("run " + trap_prog);
  EXPECT_EQ(trapped.exit_code, 2);
  EXPECT_NE(trapped.err.find("trapped: software after 1 steps"),
            std::string::npos);

  // A spin loop exhausts the budget and exits 5.
  const std::string loop_src = temp_path("loop.s");
  write_file(loop_src,
             "lp:  const u8, 1\n"
             "     jmp lp, 0\n");
  const std::string loop_prog = temp_path("loop.scry");
  ASSERT_EQ(run_cli("asm " + loop_src + " -o " + loop_prog).exit_code, 0);
  auto spun = run_cli("run " + loop_prog + " --steps 50");
  EXPECT_EQ(spun.exit_code, 5);
  EXPECT_NE(spun.err.find("timeout: step budget of 50 exhausted"),
            std::string::npos);

  // Source that does not assemble exits 3 with a position.
  const std::string bad_src = temp_path("bad.s");
  write_file(bad_src, "  frobnicate =>1\n");
  auto bad = run_cli("asm " + bad_src + " -o " + temp_path("bad.scry"));
  EXPECT_EQ(bad.exit_code, 3);
  EXPECT_NE(bad.err.find("error: line 1"), std::string::npos);
  EXPECT_NE(bad.err.find("unknown mnemonic 'frobnicate'"), std::string::npos);

  // A malformed binary exits 4.
  const std::string odd = temp_path("odd.bin");
  write_file(odd, "ABC");  // no magic, odd byte count
  auto torn = run_cli("run " + odd);
  EXPECT_EQ(torn.exit_code, 4);
  EXPECT_NE(torn.err.find("trailing odd byte"), std::string::npos);
  auto missing = run_cli("run " + temp_path("never-written.scry"));
  EXPECT_EQ(missing.exit_code, 4);
  EXPECT_NE(missing.err.find("cannot open"), std::string::npos);

  // Usage problems exit 64.
  auto nothing = run_cli("");
  EXPECT_EQ(nothing.exit_code, 64);
  auto bad_arg = run_cli("run " + trap_prog + " --arg fifty");
  EXPECT_EQ(bad_arg.exit_code, 64);
  EXPECT_NE(bad_arg.err.find("not of the form tag:value"), std::string::npos);
}

TEST(Run, EntryFlagOverridesTheHeader) {
  const std::string src = temp_path("entry.s");
  write_file(src,
             "  trap\n"
             "  trap\n"
             "  const u8, 9\n"
             "  echo.l =>1\n"
             "  ret 0\n");
  const std::string prog = temp_path("entry.scry");
  ASSERT_EQ(run_cli("asm " + src + " -o " + prog).exit_code, 0);

  auto head = run_cli("run " + prog);
  EXPECT_EQ(head.exit_code, 2);  // entry 0 hits the trap

  auto moved = run_cli("run " + prog + " --entry 2");
  EXPECT_EQ(moved.exit_code, 0) << moved.err;
  EXPECT_EQ(moved.out, "u8:9\n");
}

TEST(Run, XlenFlagControlsAddressWidth) {
  const std::string prog = assemble_to_temp("isxdigit.scry-asm");
  for (const char* xlen : {"16", "32", "64"}) {
    auto r = run_cli("run " + prog + " --xlen " + xlen + " --arg u8:102");
    EXPECT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(r.out, "u8:1\n") << "xlen " << xlen;
  }
  auto odd = run_cli("run " + prog + " --xlen 48 --arg u8:102");
  EXPECT_EQ(odd.exit_code, 64);
}

TEST(Dis, AcceptsContainerAndRawImages) {
  const std::string src = program_path("cmpu8.scry-asm");
  const std::string boxed = temp_path("boxed.scry");
  const std::string bare = temp_path("bare.bin");
  ASSERT_EQ(run_cli("asm " + src + " -o " + boxed).exit_code, 0);
  ASSERT_EQ(run_cli("asm " + src + " -o " + bare + " --raw").exit_code, 0);
  auto from_boxed = run_cli("dis " + boxed);
  auto from_bare = run_cli("dis " + bare);
  EXPECT_EQ(from_boxed.exit_code, 0);
  EXPECT_EQ(from_bare.exit_code, 0);
  EXPECT_EQ(from_boxed.out, from_bare.out);
  EXPECT_FALSE(from_boxed.out.empty());

  // Words with no decoding come back as raw .word directives.
  const std::string undecodable = temp_path("undecodable.bin");
  write_file(undecodable, std::string("\x03\x00", 2));
  auto fallback = run_cli("dis " + undecodable);
  EXPECT_EQ(fallback.exit_code, 0);
  EXPECT_NE(fallback.out.find(".word 0x0003"), std::string::npos);
}

TEST(Analyze, CoversBuiltinsAndDescriptionFiles) {
  auto both = run_cli("analyze");
  EXPECT_EQ(both.exit_code, 0);
  EXPECT_NE(both.out.find("scry-naive (16-bit encoding space)"),
            std::string::npos);
  EXPECT_NE(both.out.find("scry-valid (16-bit encoding space)"),
            std::string::npos);
  EXPECT_NE(both.out.find("19971"), std::string::npos);
  EXPECT_NE(both.out.find("19363"), std::string::npos);

  auto csv = run_cli("analyze --csv");
  EXPECT_EQ(csv.exit_code, 0);
  EXPECT_NE(csv.out.find("total,,19971\n"), std::string::npos);
  EXPECT_NE(csv.out.find("total,,19363\n"), std::string::npos);

  const std::string toy = temp_path("toy.isa");
  write_file(toy,
             "isa toy 8\n"
             "instr halt\n"
             "instr imm 4\n"
             "instr pair 2 3 valid=20\n");
  auto custom = run_cli("analyze --csv --isa " + toy);
  EXPECT_EQ(custom.exit_code, 0);
  EXPECT_NE(custom.out.find("total,,37\n"), std::string::npos);

  const std::string broken = temp_path("broken.isa");
  write_file(broken, "instr early 3\n");
  auto rejected = run_cli("analyze --isa " + broken);
  EXPECT_EQ(rejected.exit_code, 4);
  EXPECT_NE(rejected.err.find("line 1: 'instr' before 'isa' header"),
            std::string::npos);
}

}  // namespace
