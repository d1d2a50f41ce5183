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

// Encoding-density analysis: the built-in conventions, their agreement with
// the encoder's field table, and the description-file parser.

#include <gtest/gtest.h>

#include <cstdint>
#include <string>

#include "scry/density.hpp"
#include "scry/encoding.hpp"

namespace {

using scry::analyze;
using scry::builtin_scry;
using scry::DensityError;
using scry::DensityReport;
using scry::IsaDescription;
using scry::parse_isa_description;

TEST(Conventions, NaiveCountsEveryFieldCombination) {
  DensityReport report = analyze(builtin_scry(false));
  EXPECT_EQ(report.isa_name, "scry-naive");
  EXPECT_EQ(report.space_bits, 16u);
  EXPECT_EQ(report.rows.size(), 22u);
  EXPECT_EQ(report.total, 19971u);
  char pct[16];
  std::snprintf(pct, sizeof pct, "%.1f", report.fraction * 100.0);
  EXPECT_STREQ(pct, "30.5");

  uint64_t sum = 0;
  for (const scry::DensityRow& row : report.rows) sum += row.points;
  EXPECT_EQ(sum, report.total);
}

TEST(Conventions, RestrictedAluCountsOnlyDefinedOperations) {
  DensityReport report = analyze(builtin_scry(true));
  EXPECT_EQ(report.isa_name, "scry-valid");
  EXPECT_EQ(report.total, 19363u);
  char pct[16];
  std::snprintf(pct, sizeof pct, "%.1f", report.fraction * 100.0);
  EXPECT_STREQ(pct, "29.5");
}

TEST(Conventions, RestrictionOnlyAffectsTheAluRow) {
  DensityReport naive = analyze(builtin_scry(false));
  DensityReport valid = analyze(builtin_scry(true));
  ASSERT_EQ(naive.rows.size(), valid.rows.size());
  for (size_t i = 0; i < naive.rows.size(); ++i) {
    ASSERT_EQ(naive.rows[i].name, valid.rows[i].name);
    if (naive.rows[i].name == "alu") {
      EXPECT_EQ(naive.rows[i].points, 2048u);  // full 11-bit block
      EXPECT_EQ(valid.rows[i].points,
                uint64_t{scry::alu_valid_combo_count()} * 32);
      EXPECT_EQ(valid.rows[i].points, 1440u);
    } else {
      EXPECT_EQ(naive.rows[i].points, valid.rows[i].points);
    }
  }
  EXPECT_EQ(naive.total - valid.total, (64u - 45u) * 32u);
}

// The analyzer's layout table and the encoder's field summary must agree
// name for name and width for width, or the density figures describe some
// other machine.
TEST(Conventions, TableMatchesTheEncoderFieldForField) {
  const IsaDescription desc = builtin_scry(false);
  const std::vector<scry::InstructionLayout> encoder =
      scry::instruction_layouts();
  ASSERT_EQ(desc.layouts.size(), encoder.size());
  for (size_t i = 0; i < encoder.size(); ++i) {
    EXPECT_EQ(desc.layouts[i].name, encoder[i].name) << "row " << i;
    ASSERT_EQ(desc.layouts[i].fields.size(), encoder[i].fields.size())
        << encoder[i].name;
    for (size_t f = 0; f < encoder[i].fields.size(); ++f) {
      EXPECT_EQ(desc.layouts[i].fields[f].first, encoder[i].fields[f].name)
          << encoder[i].name << " field " << f;
      EXPECT_EQ(desc.layouts[i].fields[f].second, encoder[i].fields[f].bits)
          << encoder[i].name << " field " << f;
    }
  }
}

TEST(Parsing, ReadsADescriptionFile) {
  const char* text =
      "# a toy machine\n"
      "isa toy 8\n"
      "instr halt            # no variable fields\n"
      "instr imm 4\n"
      "instr pair 2 3 valid=20\n";
  IsaDescription desc = parse_isa_description(text);
  EXPECT_EQ(desc.name, "toy");
  EXPECT_EQ(desc.space_bits, 8u);
  ASSERT_EQ(desc.layouts.size(), 3u);
  EXPECT_EQ(desc.layouts[0].name, "halt");
  EXPECT_EQ(scry::code_points(desc.layouts[0]), 1u);
  EXPECT_EQ(scry::code_points(desc.layouts[1]), 16u);
  EXPECT_EQ(desc.layouts[2].fields.size(), 2u);
  EXPECT_EQ(desc.layouts[2].fields[0].first, "f0");
  EXPECT_EQ(scry::code_points(desc.layouts[2]), 20u);

  DensityReport report = analyze(desc);
  EXPECT_EQ(report.total, 37u);
  EXPECT_DOUBLE_EQ(report.fraction, 37.0 / 256.0);
}

TEST(Parsing, RejectsMalformedInput) {
  struct Case {
    const char* text;
    unsigned line;
    const char* needle;
  } cases[] = {
      {"instr x 4\n", 1, "'instr' before 'isa'"},
      {"isa t 16\ninstr a 4\ninstr a 4\n", 3, "duplicate instruction 'a'"},
      {"isa t 16\ninstr b 0\n", 2, "bad field width '0'"},
      {"isa t 16\ninstr c 17\n", 2, "bad field width '17'"},
      {"isa t 16\ninstr d 8 9\n", 2, "exceed the encoding space"},
      {"isa t 16\ninstr e 2 valid=5\n", 2, "exceeds its field combinations"},
      {"isa t 16\ninstr f 3 valid=x\n", 2, "bad valid= count"},
      {"isa t 16\nbogus\n", 2, "unknown keyword 'bogus'"},
      {"", 0, "missing 'isa' header"},
      {"isa t 0\n", 1, "expected: isa <name> <space_bits>"},
  };
  for (const Case& c : cases) {
    try {
      parse_isa_description(c.text);
      ADD_FAILURE() << "no error for: " << c.text;
    } catch (const DensityError& e) {
      EXPECT_EQ(e.line(), c.line) << c.text;
      EXPECT_NE(std::string(e.what()).find(c.needle), std::string::npos)
          << "got: " << e.what();
    }
  }
}

TEST(Analysis, RejectsContradictoryDescriptions) {
  IsaDescription wide;
  wide.name = "bad";
  wide.space_bits = 4;
  wide.layouts = {{"big", {{"f", 5}}, {}}};
  EXPECT_THROW(analyze(wide), std::invalid_argument);

  IsaDescription inflated;
  inflated.name = "bad";
  inflated.space_bits = 16;
  inflated.layouts = {{"claims", {{"f", 2}}, uint64_t{5}}};
  EXPECT_THROW(analyze(inflated), std::invalid_argument);
}

TEST(Reporting, TableAndCsvFormats) {
  DensityReport report = analyze(builtin_scry(true));
  const std::string table = scry::format_report(report, false);
  EXPECT_NE(table.find("scry-valid (16-bit encoding space)"),
            std::string::npos);
  EXPECT_NE(table.find("19363"), std::string::npos);
  EXPECT_NE(table.find("(29.5% of 2^16)"), std::string::npos);

  const std::string csv = scry::format_report(report, true);
  EXPECT_EQ(csv.rfind("instruction,field_bits,code_points\n", 0), 0u);
  EXPECT_NE(csv.find("alu,11,1440\n"), std::string::npos);
  EXPECT_NE(csv.find("total,,19363\n"), std::string::npos);
  EXPECT_NE(csv.find("fraction,,29.5%\n"), std::string::npos);
}

}  // namespace
