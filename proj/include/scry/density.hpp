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

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scry/instruction.hpp"

namespace scry {

class DensityError : public std::runtime_error {
 public:
  DensityError(const std::string& message, unsigned line)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line_(line) {}

  unsigned line() const { return line_; }

 private:
  unsigned line_;
};

/// One instruction's variable-field layout. Opcode (discriminator) bits are
/// not listed; an instruction with no variable fields occupies one code point.
struct FieldLayout {
  std::string name;
  std::vector<std::pair<std::string, unsigned>> fields;
  // Overrides the full-combination count when some field combinations are
  // undefined (e.g. an ALU block where not every func/mod pair is an
  // operation).
  std::optional<uint64_t> valid_points;

  unsigned width_sum() const {
    unsigned sum = 0;
    for (const auto& f : fields) sum += f.second;
    return sum;
  }
};

struct IsaDescription {
  std::string name;
  unsigned space_bits = 16;
  std::vector<FieldLayout> layouts;
};

/// Number of encodings the instruction occupies: the explicit valid count if
/// one is given, otherwise every combination of its field values.
inline uint64_t code_points(const FieldLayout& layout) {
  if (layout.valid_points) return *layout.valid_points;
  return uint64_t{1} << layout.width_sum();
}

struct DensityRow {
  std::string name;
  unsigned width_sum = 0;
  uint64_t points = 0;
};

struct DensityReport {
  std::string isa_name;
  unsigned space_bits = 16;
  std::vector<DensityRow> rows;
  uint64_t total = 0;
  double fraction = 0.0;  // of 2^space_bits
};

inline DensityReport analyze(const IsaDescription& desc) {
  DensityReport report;
  report.isa_name = desc.name;
  report.space_bits = desc.space_bits;
  for (const FieldLayout& layout : desc.layouts) {
    if (layout.width_sum() > desc.space_bits) {
      throw std::invalid_argument("instruction '" + layout.name +
                                  "' is wider than the encoding space");
    }
    const uint64_t full = uint64_t{1} << layout.width_sum();
    if (layout.valid_points && *layout.valid_points > full) {
      throw std::invalid_argument("instruction '" + layout.name +
                                  "' claims more valid encodings than its "
                                  "fields can express");
    }
    report.rows.push_back({layout.name, layout.width_sum(),
                           code_points(layout)});
    report.total += code_points(layout);
  }
  const double space = std::ldexp(1.0, static_cast<int>(desc.space_bits));
  report.fraction = static_cast<double>(report.total) / space;
  return report;
}

/// The shipped 16-bit instruction set. With `restrict_alu` the ALU block
/// counts only its 45 defined operation/routing pairs instead of all 64
/// func/mod combinations; everything else counts full field combinations.
inline IsaDescription builtin_scry(bool restrict_alu) {
  IsaDescription desc;
  desc.name = restrict_alu ? "scry-valid" : "scry-naive";
  desc.space_bits = 16;
  desc.layouts = {
      {"trap", {}, {}},
      {"nop", {}, {}},
      {"st", {}, {}},
      {"rsrv", {{"bytes", 4}, {"t", 1}}, {}},
      {"free", {{"bytes", 4}, {"t", 1}}, {}},
      {"sts", {{"idx", 5}}, {}},
      {"call", {{"trig", 6}}, {}},
      {"ret", {{"trig", 6}}, {}},
      {"saddr", {{"idx", 5}, {"siz", 2}}, {}},
      {"grow", {{"imm", 8}}, {}},
      {"ld.s", {{"idx", 5}, {"type", 4}}, {}},
      {"const", {{"imm", 8}, {"type", 3}}, {}},
      {"fence", {{"succ", 4}, {"pred", 4}}, {}},
      {"jmp", {{"trig", 6}, {"imm", 7}}, {}},
      {"pick", {{"ref", 5}}, {}},
      {"pick.i", {{"ref", 5}, {"im", 2}}, {}},
      {"ld", {{"ref", 5}, {"type", 4}}, {}},
      {"cast", {{"ref", 5}, {"type", 4}}, {}},
      {"echo.l", {{"ref", 10}}, {}},
      {"alu", {{"ref", 5}, {"mod", 3}, {"func", 3}}, {}},
      {"echo", {{"s", 1}, {"ref", 5}, {"ref2", 5}}, {}},
      {"dup", {{"s", 1}, {"ref", 5}, {"ref2", 5}}, {}},
  };
  if (restrict_alu) {
    for (FieldLayout& layout : desc.layouts) {
      if (layout.name == "alu") {
        layout.valid_points = uint64_t{alu_valid_combo_count()} * 32;
      }
    }
  }
  return desc;
}

// Description file format, line oriented:
//   isa <name> <space_bits>
//   instr <name> <width> <width> ... [valid=<count>]
// Blank lines and text after '#' are ignored.
inline IsaDescription parse_isa_description(std::string_view text) {
  IsaDescription desc;
  bool saw_isa = false;
  unsigned line_no = 0;
  std::istringstream stream{std::string(text)};
  std::string raw;
  while (std::getline(stream, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) {
      raw.erase(hash);
    }
    std::istringstream line{raw};
    std::string keyword;
    if (!(line >> keyword)) continue;
    if (keyword == "isa") {
      std::string name;
      unsigned bits = 0;
      if (!(line >> name >> bits) || bits == 0 || bits > 63) {
        throw DensityError("expected: isa <name> <space_bits>", line_no);
      }
      desc.name = name;
      desc.space_bits = bits;
      saw_isa = true;
      continue;
    }
    if (keyword == "instr") {
      if (!saw_isa) {
        throw DensityError("'instr' before 'isa' header", line_no);
      }
      FieldLayout layout;
      if (!(line >> layout.name)) {
        throw DensityError("expected: instr <name> [widths...]", line_no);
      }
      for (const FieldLayout& existing : desc.layouts) {
        if (existing.name == layout.name) {
          throw DensityError("duplicate instruction '" + layout.name + "'",
                             line_no);
        }
      }
      std::string token;
      unsigned field_index = 0;
      while (line >> token) {
        if (token.rfind("valid=", 0) == 0) {
          char* end = nullptr;
          const auto value = std::strtoull(token.c_str() + 6, &end, 10);
          if (end == token.c_str() + 6 || *end != '\0') {
            throw DensityError("bad valid= count '" + token + "'", line_no);
          }
          layout.valid_points = value;
          continue;
        }
        char* end = nullptr;
        const auto width = std::strtoul(token.c_str(), &end, 10);
        if (end == token.c_str() || *end != '\0' || width == 0 ||
            width > desc.space_bits) {
          throw DensityError("bad field width '" + token + "'", line_no);
        }
        layout.fields.emplace_back("f" + std::to_string(field_index++),
                                   static_cast<unsigned>(width));
      }
      if (layout.width_sum() > desc.space_bits) {
        throw DensityError("fields of '" + layout.name +
                               "' exceed the encoding space",
                           line_no);
      }
      if (layout.valid_points &&
          *layout.valid_points > (uint64_t{1} << layout.width_sum())) {
        throw DensityError("valid= count of '" + layout.name +
                               "' exceeds its field combinations",
                           line_no);
      }
      desc.layouts.push_back(std::move(layout));
      continue;
    }
    throw DensityError("unknown keyword '" + keyword + "'", line_no);
  }
  if (!saw_isa) throw DensityError("missing 'isa' header", line_no);
  return desc;
}

/// Renders the report as an aligned table, or as comma-separated rows
/// (`name,field_bits,points` with a trailing total row) when `csv` is set.
inline std::string format_report(const DensityReport& report, bool csv) {
  std::string out;
  char buf[128];
  const double pct = report.fraction * 100.0;
  if (csv) {
    out += "instruction,field_bits,code_points\n";
    for (const DensityRow& row : report.rows) {
      std::snprintf(buf, sizeof buf, "%s,%u,%" PRIu64 "\n", row.name.c_str(),
                    row.width_sum, row.points);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "total,,%" PRIu64 "\n", report.total);
    out += buf;
    std::snprintf(buf, sizeof buf, "fraction,,%.1f%%\n", pct);
    out += buf;
    return out;
  }
  std::snprintf(buf, sizeof buf, "%s (%u-bit encoding space)\n",
                report.isa_name.c_str(), report.space_bits);
  out += buf;
  size_t name_width = 11;  // "instruction"
  for (const DensityRow& row : report.rows) {
    if (row.name.size() > name_width) name_width = row.name.size();
  }
  std::snprintf(buf, sizeof buf, "%-*s  %10s  %12s\n", (int)name_width,
                "instruction", "field bits", "code points");
  out += buf;
  for (const DensityRow& row : report.rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %10u  %12" PRIu64 "\n",
                  (int)name_width, row.name.c_str(), row.width_sum,
                  row.points);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-*s  %10s  %12" PRIu64 "  (%.1f%% of 2^%u)\n",
                (int)name_width, "total", "", report.total, pct,
                report.space_bits);
  out += buf;
  return out;
}

}  // namespace scry
