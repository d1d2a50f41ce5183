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

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scry/encoding.hpp"
#include "scry/instruction.hpp"

namespace scry {

struct AsmError : std::runtime_error {
  AsmError(const std::string& message, int line, int col)
      : std::runtime_error("line " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + message),
        line(line),
        col(col) {}
  int line;
  int col;
};

using LabelMap = std::map<std::string, uint32_t, std::less<>>;

/// An output reference written in source. `=>` expressions name the
/// consumer either directly (numeric distance, or a label reached by
/// straight-line execution) or as a chain alternating jump trigger points
/// with jump targets, ending at the consumer (`=>lp_end=>lp_start=>dup_dst`).
/// A bare `=>` (Pass) routes to the next instruction.
struct RefExpr {
  enum class Kind { numeric, label, chain, pass };
  Kind kind = Kind::numeric;
  int64_t number = 0;
  std::vector<std::string> labels;
  int line = 0;
  int col = 0;
};

struct Arg {
  enum class Kind { number, ident, ref };
  Kind kind = Kind::number;
  int64_t number = 0;
  std::string text;
  RefExpr ref;
  int line = 0;
  int col = 0;
};

struct Statement {
  std::string mnemonic;
  std::vector<Arg> args;
  int line = 0;
  int col = 0;
};

struct SourceProgram {
  std::vector<Statement> statements;
  LabelMap labels;  // name -> instruction index; may equal statements.size()
};

// ---------------------------------------------------------------------------
// Lexing and parsing
// ---------------------------------------------------------------------------

namespace detail {

struct Token {
  enum class Kind { ident, number, arrow, comma, colon, end };
  Kind kind = Kind::end;
  std::string text;
  int64_t value = 0;
  int line = 0;
  int col = 0;
};

inline bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
         c == '.';
}

inline bool ident_char(char c) {
  return ident_start(c) || (c >= '0' && c <= '9');
}

inline void lex_line(std::string_view text, int line_no,
                     std::vector<Token>& out) {
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    const int col = static_cast<int>(i) + 1;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && text[i + 1] == '/') break;
    if (c == ',') {
      out.push_back({Token::Kind::comma, ",", 0, line_no, col});
      ++i;
      continue;
    }
    if (c == ':') {
      out.push_back({Token::Kind::colon, ":", 0, line_no, col});
      ++i;
      continue;
    }
    if (c == '=' && i + 1 < n && text[i + 1] == '>') {
      out.push_back({Token::Kind::arrow, "=>", 0, line_no, col});
      i += 2;
      continue;
    }
    if ((c >= '0' && c <= '9') ||
        ((c == '+' || c == '-') && i + 1 < n && text[i + 1] >= '0' &&
         text[i + 1] <= '9')) {
      size_t j = i;
      if (c == '+' || c == '-') ++j;
      const bool hex = j + 1 < n && text[j] == '0' &&
                       (text[j + 1] == 'x' || text[j + 1] == 'X');
      if (hex) j += 2;
      const size_t digits_begin = j;
      while (j < n && ((text[j] >= '0' && text[j] <= '9') ||
                       (hex && ((text[j] >= 'a' && text[j] <= 'f') ||
                                (text[j] >= 'A' && text[j] <= 'F'))))) {
        ++j;
      }
      if (j == digits_begin) {
        throw AsmError("malformed number", line_no, col);
      }
      const std::string lit(text.substr(i, j - i));
      errno = 0;
      const long long v = std::strtoll(lit.c_str(), nullptr, 0);
      if (errno == ERANGE) throw AsmError("number out of range", line_no, col);
      out.push_back({Token::Kind::number, lit, v, line_no, col});
      i = j;
      continue;
    }
    if (ident_start(c)) {
      size_t j = i + 1;
      while (j < n && ident_char(text[j])) ++j;
      out.push_back({Token::Kind::ident, std::string(text.substr(i, j - i)), 0,
                     line_no, col});
      i = j;
      continue;
    }
    throw AsmError(std::string("unexpected character '") + c + "'", line_no,
                   col);
  }
}

}  // namespace detail

/// Parses assembly text: labels, mnemonics, and argument lists, without
/// resolving anything. Statements continue across lines after a trailing
/// comma; `//` starts a comment; a label may bind one past the last
/// instruction.
inline SourceProgram parse(std::string_view source) {
  using detail::Token;
  SourceProgram program;

  // Split into logical lines: a line whose last token is a comma pulls in
  // the following line.
  std::vector<std::vector<Token>> lines;
  {
    std::vector<Token> current;
    size_t pos = 0;
    int line_no = 0;
    bool joining = false;
    while (pos <= source.size()) {
      const size_t eol = source.find('\n', pos);
      const size_t end = eol == std::string_view::npos ? source.size() : eol;
      ++line_no;
      if (!joining) current.clear();
      detail::lex_line(source.substr(pos, end - pos), line_no, current);
      joining = !current.empty() && current.back().kind == Token::Kind::comma;
      if (!joining && !current.empty()) {
        lines.push_back(current);
        current.clear();
      }
      if (eol == std::string_view::npos) break;
      pos = eol + 1;
    }
    if (joining) {
      const Token& t = current.back();
      throw AsmError("statement continues past end of input", t.line, t.col);
    }
  }

  for (const auto& tokens : lines) {
    size_t i = 0;
    const Token end_token{Token::Kind::end, "", 0,
                          tokens.empty() ? 0 : tokens.back().line,
                          tokens.empty() ? 0 : tokens.back().col + 1};
    const auto peek = [&](size_t ahead = 0) -> const Token& {
      return i + ahead < tokens.size() ? tokens[i + ahead] : end_token;
    };

    while (peek().kind == Token::Kind::ident &&
           peek(1).kind == Token::Kind::colon) {
      const Token& name = peek();
      if (program.labels.count(name.text)) {
        throw AsmError("duplicate label '" + name.text + "'", name.line,
                       name.col);
      }
      program.labels.emplace(name.text,
                             static_cast<uint32_t>(program.statements.size()));
      i += 2;
    }
    if (i >= tokens.size()) continue;

    const Token& head = peek();
    if (head.kind != Token::Kind::ident) {
      throw AsmError("expected a mnemonic", head.line, head.col);
    }
    Statement stmt;
    stmt.mnemonic = head.text;
    stmt.line = head.line;
    stmt.col = head.col;
    ++i;

    bool expect_arg = i < tokens.size();
    while (expect_arg) {
      const Token& t = peek();
      Arg arg;
      arg.line = t.line;
      arg.col = t.col;
      switch (t.kind) {
        case Token::Kind::number:
          arg.kind = Arg::Kind::number;
          arg.number = t.value;
          arg.text = t.text;
          ++i;
          break;
        case Token::Kind::ident:
          arg.kind = Arg::Kind::ident;
          arg.text = t.text;
          ++i;
          break;
        case Token::Kind::arrow: {
          arg.kind = Arg::Kind::ref;
          arg.ref.line = t.line;
          arg.ref.col = t.col;
          ++i;
          if (peek().kind == Token::Kind::number) {
            if (peek().value < 0) {
              throw AsmError("reference distance must be non-negative",
                             peek().line, peek().col);
            }
            arg.ref.kind = RefExpr::Kind::numeric;
            arg.ref.number = peek().value;
            ++i;
          } else if (peek().kind == Token::Kind::ident) {
            arg.ref.labels.push_back(peek().text);
            ++i;
            while (peek().kind == Token::Kind::arrow &&
                   peek(1).kind == Token::Kind::ident) {
              arg.ref.labels.push_back(peek(1).text);
              i += 2;
            }
            if (arg.ref.labels.size() == 1) {
              arg.ref.kind = RefExpr::Kind::label;
            } else if (arg.ref.labels.size() % 2 == 1) {
              arg.ref.kind = RefExpr::Kind::chain;
            } else {
              throw AsmError(
                  "chain reference must alternate trigger and target labels "
                  "and end at the consumer",
                  t.line, t.col);
            }
          } else {
            arg.ref.kind = RefExpr::Kind::pass;
          }
          break;
        }
        default:
          throw AsmError("expected an argument", t.line, t.col);
      }
      stmt.args.push_back(std::move(arg));
      if (peek().kind == Token::Kind::comma) {
        ++i;
        expect_arg = true;
      } else {
        expect_arg = false;
      }
    }
    if (i < tokens.size()) {
      throw AsmError("trailing tokens after statement", peek().line,
                     peek().col);
    }
    program.statements.push_back(std::move(stmt));
  }
  return program;
}

// ---------------------------------------------------------------------------
// Reference resolution
// ---------------------------------------------------------------------------

namespace detail {

inline uint32_t lookup_label(const LabelMap& labels, const std::string& name,
                             int line, int col) {
  const auto it = labels.find(name);
  if (it == labels.end()) {
    throw AsmError("unknown label '" + name + "'", line, col);
  }
  return it->second;
}

}  // namespace detail

/// Resolves a reference expression to a temporal distance: the number of
/// instructions that execute between the producer and the consumer. A label
/// counts straight-line instructions; a chain follows armed control
/// transfers, so each leg is (trigger point - position - 1) for the leg the
/// producer starts on and (next stop - jump target) for each leg after a
/// taken jump.
inline int64_t resolve_reference(const RefExpr& expr, uint32_t producer,
                                 const LabelMap& labels) {
  switch (expr.kind) {
    case RefExpr::Kind::numeric:
      return expr.number;
    case RefExpr::Kind::pass:
      return 0;
    case RefExpr::Kind::label: {
      const int64_t target =
          detail::lookup_label(labels, expr.labels[0], expr.line, expr.col);
      const int64_t distance = target - static_cast<int64_t>(producer) - 1;
      if (distance < 0) {
        throw AsmError("reference to '" + expr.labels[0] +
                           "' is not forward in time",
                       expr.line, expr.col);
      }
      return distance;
    }
    case RefExpr::Kind::chain: {
      int64_t distance = 0;
      int64_t position = static_cast<int64_t>(producer) + 1;
      for (size_t k = 0; k + 1 < expr.labels.size(); k += 2) {
        const int64_t trigger = detail::lookup_label(
            labels, expr.labels[k], expr.line, expr.col);
        const int64_t leg = trigger - position;
        if (leg < 0) {
          throw AsmError("chain trigger '" + expr.labels[k] +
                             "' is not forward in time",
                         expr.line, expr.col);
        }
        distance += leg;
        position = detail::lookup_label(labels, expr.labels[k + 1], expr.line,
                                        expr.col);
      }
      const int64_t consumer = detail::lookup_label(
          labels, expr.labels.back(), expr.line, expr.col);
      const int64_t leg = consumer - position;
      if (leg < 0) {
        throw AsmError("chain consumer '" + expr.labels.back() +
                           "' is not forward in time",
                       expr.line, expr.col);
      }
      return distance + leg;
    }
  }
  throw AsmError("unresolvable reference", expr.line, expr.col);
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

struct AssembledProgram {
  std::vector<Word> words;
  uint32_t entry = 0;
  LabelMap labels;
  std::vector<int> source_lines;  // source line of each instruction
};

namespace detail {

inline int64_t arg_number(const Arg& arg, int64_t min, int64_t max,
                          const char* what) {
  if (arg.kind != Arg::Kind::number) {
    throw AsmError(std::string("expected ") + what, arg.line, arg.col);
  }
  if (arg.number < min || arg.number > max) {
    throw AsmError(std::string(what) + " out of range", arg.line, arg.col);
  }
  return arg.number;
}

inline TypeTag arg_type(const Arg& arg) {
  if (arg.kind == Arg::Kind::ident) {
    if (const auto tag = TypeTag::from_name(arg.text)) return *tag;
  }
  throw AsmError("expected a type name (u8..u64, i8..i64)", arg.line, arg.col);
}

inline uint32_t arg_ref(const Arg& arg, uint32_t producer,
                        const LabelMap& labels, unsigned bits,
                        const char* what) {
  if (arg.kind != Arg::Kind::ref || arg.ref.kind == RefExpr::Kind::pass) {
    throw AsmError(std::string("expected a reference for ") + what, arg.line,
                   arg.col);
  }
  const int64_t distance = resolve_reference(arg.ref, producer, labels);
  const int64_t limit = (int64_t{1} << bits) - 1;
  if (distance > limit) {
    std::string msg = std::string(what) + " reference distance " +
                      std::to_string(distance) + " exceeds " +
                      std::to_string(limit);
    if (bits < 10) msg += " (echo.l reaches up to 1023)";
    throw AsmError(msg, arg.line, arg.col);
  }
  return static_cast<uint32_t>(distance);
}

inline bool arg_is_pass(const Arg& arg) {
  return arg.kind == Arg::Kind::ref && arg.ref.kind == RefExpr::Kind::pass;
}

inline bool arg_is_keyword(const Arg& arg, std::string_view kw) {
  return arg.kind == Arg::Kind::ident && arg.text == kw;
}

/// Trigger argument of jmp/call/ret: an instruction count, or a label
/// naming the trigger point.
inline uint8_t arg_trigger(const Arg& arg, uint32_t index,
                           const LabelMap& labels) {
  int64_t count;
  if (arg.kind == Arg::Kind::number) {
    count = arg.number;
  } else if (arg.kind == Arg::Kind::ident) {
    const int64_t target = lookup_label(labels, arg.text, arg.line, arg.col);
    count = target - static_cast<int64_t>(index) - 1;
  } else {
    throw AsmError("expected a trigger count or label", arg.line, arg.col);
  }
  if (count < 0 || count > 63) {
    throw AsmError("trigger count out of range (0..63)", arg.line, arg.col);
  }
  return static_cast<uint8_t>(count);
}

inline const Arg& expect_args(const Statement& stmt, size_t n) {
  if (stmt.args.size() != n) {
    throw AsmError("'" + stmt.mnemonic + "' takes " + std::to_string(n) +
                       (n == 1 ? " argument" : " arguments"),
                   stmt.line, stmt.col);
  }
  static const Arg dummy{};
  return n ? stmt.args[0] : dummy;
}

inline Instruction build_alu(const Statement& stmt, AluOp op, uint32_t index,
                             const LabelMap& labels) {
  const auto fields = [&](AluVariant variant, const Arg& ref_arg) {
    const auto f = alu_fields_for(op, variant);
    if (!f) {
      throw AsmError("operation does not take Low/High routing", stmt.line,
                     stmt.col);
    }
    const uint32_t ref = arg_ref(ref_arg, index, labels, 5, "alu");
    return Alu{f->func, f->mod, static_cast<uint8_t>(ref)};
  };

  if (!alu_two_output(op)) {
    expect_args(stmt, 1);
    return fields(AluVariant::single, stmt.args[0]);
  }

  const auto& args = stmt.args;
  const auto bad = [&]() -> AsmError {
    return AsmError("'" + stmt.mnemonic +
                        "' routing must be one of: Low, High, =>r | High, "
                        "Low, =>r | Low, =>r, High, => | High, =>r, Low, => "
                        "| Low, =>r | High, =>r",
                    stmt.line, stmt.col);
  };
  if (args.size() == 2) {
    if (arg_is_keyword(args[0], "Low")) {
      return fields(AluVariant::low_ref_high_drop, args[1]);
    }
    if (arg_is_keyword(args[0], "High")) {
      return fields(AluVariant::high_ref_low_drop, args[1]);
    }
    throw bad();
  }
  if (args.size() == 3) {
    if (arg_is_keyword(args[0], "Low") && arg_is_keyword(args[1], "High")) {
      return fields(AluVariant::low_high_same, args[2]);
    }
    if (arg_is_keyword(args[0], "High") && arg_is_keyword(args[1], "Low")) {
      return fields(AluVariant::high_low_same, args[2]);
    }
    throw bad();
  }
  if (args.size() == 4 && arg_is_pass(args[3])) {
    if (arg_is_keyword(args[0], "Low") && arg_is_keyword(args[2], "High")) {
      return fields(AluVariant::low_ref_high_next, args[1]);
    }
    if (arg_is_keyword(args[0], "High") && arg_is_keyword(args[2], "Low")) {
      return fields(AluVariant::high_ref_low_next, args[1]);
    }
  }
  throw bad();
}

inline std::optional<Word> build_statement(const Statement& stmt,
                                           uint32_t index,
                                           const LabelMap& labels) {
  const std::string& m = stmt.mnemonic;

  if (m == ".word") {
    const int64_t v = arg_number(expect_args(stmt, 1), 0, 0xFFFF, "word value");
    return static_cast<Word>(v);
  }

  const auto encode_checked = [&](const Instruction& ins) -> Word {
    try {
      return encode(ins);
    } catch (const EncodeError& e) {
      throw AsmError(e.what(), stmt.line, stmt.col);
    }
  };

  if (m == "trap" || m == "trp") {
    expect_args(stmt, 0);
    return encode_checked(Trap{});
  }
  if (m == "nop") {
    expect_args(stmt, 0);
    return encode_checked(Nop{});
  }
  if (m == "st") {
    expect_args(stmt, 0);
    return encode_checked(St{});
  }
  if (m == "rsrv" || m == "free") {
    bool unit16 = false;
    if (stmt.args.size() == 2) {
      if (!arg_is_keyword(stmt.args[1], "x16")) {
        throw AsmError("expected x16", stmt.args[1].line, stmt.args[1].col);
      }
      unit16 = true;
    } else {
      expect_args(stmt, 1);
    }
    const auto bytes = static_cast<uint8_t>(
        arg_number(stmt.args[0], 0, 15, "unit count"));
    if (m == "rsrv") {
      if (bytes == 0 && !unit16) {
        throw AsmError("rsrv of zero units has no encoding", stmt.line,
                       stmt.col);
      }
      return encode_checked(Rsrv{bytes, unit16});
    }
    return encode_checked(Free{bytes, unit16});
  }
  if (m == "sts" || m == "st.s") {
    const auto slot =
        static_cast<uint8_t>(arg_number(expect_args(stmt, 1), 0, 31, "slot"));
    return encode_checked(Sts{slot});
  }
  if (m == "call") {
    return encode_checked(Call{arg_trigger(expect_args(stmt, 1), index, labels)});
  }
  if (m == "ret") {
    return encode_checked(Ret{arg_trigger(expect_args(stmt, 1), index, labels)});
  }
  if (m == "saddr") {
    expect_args(stmt, 2);
    const auto slot =
        static_cast<uint8_t>(arg_number(stmt.args[0], 0, 31, "slot"));
    const auto siz =
        static_cast<uint8_t>(arg_number(stmt.args[1], 0, 3, "size"));
    return encode_checked(Saddr{slot, siz});
  }
  if (m == "grow") {
    const auto imm = static_cast<uint8_t>(
        arg_number(expect_args(stmt, 1), 0, 255, "immediate"));
    return encode_checked(Grow{imm});
  }
  if (m == "ld.s") {
    expect_args(stmt, 2);
    const TypeTag type = arg_type(stmt.args[0]);
    const auto slot =
        static_cast<uint8_t>(arg_number(stmt.args[1], 0, 31, "slot"));
    return encode_checked(LdStack{slot, type});
  }
  if (m == "const") {
    expect_args(stmt, 2);
    const TypeTag type = arg_type(stmt.args[0]);
    const int64_t v = type.is_signed()
                          ? arg_number(stmt.args[1], -128, 127, "immediate")
                          : arg_number(stmt.args[1], 0, 255, "immediate");
    return encode_checked(Const{static_cast<uint8_t>(v & 0xFF), type});
  }
  if (m == "fence" || m == "fnc") {
    expect_args(stmt, 2);
    const auto succ =
        static_cast<uint8_t>(arg_number(stmt.args[0], 0, 15, "successor set"));
    const auto pred =
        static_cast<uint8_t>(arg_number(stmt.args[1], 0, 15, "predecessor set"));
    return encode_checked(Fence{succ, pred});
  }
  if (m == "jmp") {
    expect_args(stmt, 2);
    int64_t offset;
    const Arg& target = stmt.args[0];
    if (target.kind == Arg::Kind::number) {
      offset = target.number;
    } else if (target.kind == Arg::Kind::ident) {
      offset = static_cast<int64_t>(lookup_label(labels, target.text,
                                                 target.line, target.col)) -
               static_cast<int64_t>(index);
    } else {
      throw AsmError("expected a jump target label or offset", target.line,
                     target.col);
    }
    if (offset < -64 || offset > 63) {
      throw AsmError("jump offset out of range (-64..63)", target.line,
                     target.col);
    }
    const uint8_t trig = arg_trigger(stmt.args[1], index, labels);
    return encode_checked(Jmp{trig, static_cast<int8_t>(offset)});
  }
  if (m == "pick") {
    const uint32_t ref =
        arg_ref(expect_args(stmt, 1), index, labels, 5, "pick");
    return encode_checked(Pick{static_cast<uint8_t>(ref)});
  }
  if (m == "pick.i") {
    expect_args(stmt, 2);
    const auto im =
        static_cast<uint8_t>(arg_number(stmt.args[0], 0, 3, "operand index"));
    const uint32_t ref = arg_ref(stmt.args[1], index, labels, 5, "pick.i");
    return encode_checked(PickImm{im, static_cast<uint8_t>(ref)});
  }
  if (m == "ld" || m == "cast") {
    expect_args(stmt, 2);
    const TypeTag type = arg_type(stmt.args[0]);
    const uint32_t ref = arg_ref(stmt.args[1], index, labels, 5, m.c_str());
    if (m == "ld") return encode_checked(Ld{type, static_cast<uint8_t>(ref)});
    return encode_checked(Cast{type, static_cast<uint8_t>(ref)});
  }
  if (m == "echo.l") {
    const uint32_t ref =
        arg_ref(expect_args(stmt, 1), index, labels, 10, "echo.l");
    return encode_checked(EchoLong{static_cast<uint16_t>(ref)});
  }
  if (m == "echo" || m == "dup") {
    bool pass = false;
    size_t n = stmt.args.size();
    if (n == 3 && arg_is_pass(stmt.args[2])) {
      pass = true;
      n = 2;
    }
    if (n != 2) {
      throw AsmError("'" + m + "' takes =>a, =>b and an optional trailing =>",
                     stmt.line, stmt.col);
    }
    const auto ref = static_cast<uint8_t>(
        arg_ref(stmt.args[0], index, labels, 5, m.c_str()));
    const auto ref2 = static_cast<uint8_t>(
        arg_ref(stmt.args[1], index, labels, 5, m.c_str()));
    if (m == "echo") return encode_checked(Echo{ref, ref2, pass});
    return encode_checked(Dup{ref, ref2, pass});
  }
  if (const auto op = alu_op_from_mnemonic(m)) {
    return encode_checked(build_alu(stmt, *op, index, labels));
  }
  return std::nullopt;
}

}  // namespace detail

/// Assembles a whole source file to encoded words. Entry is instruction 0.
inline AssembledProgram assemble(std::string_view source) {
  const SourceProgram program = parse(source);
  AssembledProgram out;
  out.labels = program.labels;
  out.words.reserve(program.statements.size());
  for (size_t i = 0; i < program.statements.size(); ++i) {
    const Statement& stmt = program.statements[i];
    const auto word = detail::build_statement(stmt, static_cast<uint32_t>(i),
                                              program.labels);
    if (!word) {
      throw AsmError("unknown mnemonic '" + stmt.mnemonic + "'", stmt.line,
                     stmt.col);
    }
    out.words.push_back(*word);
    out.source_lines.push_back(stmt.line);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole-program disassembly
// ---------------------------------------------------------------------------

/// Renders a word sequence as assembly that reassembles to the identical
/// words. Jump targets and trigger points inside the program get synthetic
/// labels; references stay numeric.
inline std::string disassemble(std::span<const Word> words) {
  const auto n = static_cast<int64_t>(words.size());
  std::vector<std::optional<Instruction>> decoded(words.size());
  std::vector<bool> labelled(words.size() + 1, false);

  const auto mark = [&](int64_t idx) -> bool {
    if (idx < 0 || idx > n) return false;
    labelled[static_cast<size_t>(idx)] = true;
    return true;
  };

  for (int64_t i = 0; i < n; ++i) {
    decoded[i] = decode(words[i]);
    if (!decoded[i]) continue;
    if (const auto* j = std::get_if<Jmp>(&*decoded[i])) {
      mark(i + j->offset);
      mark(i + 1 + j->trig);
    } else if (const auto* c = std::get_if<Call>(&*decoded[i])) {
      mark(i + 1 + c->trig);
    } else if (const auto* r = std::get_if<Ret>(&*decoded[i])) {
      mark(i + 1 + r->trig);
    }
  }

  const auto label_for = [&](int64_t idx) {
    return "L" + std::to_string(idx);
  };
  const auto trigger_text = [&](int64_t i, unsigned trig) {
    const int64_t point = i + 1 + trig;
    if (point >= 0 && point <= n && labelled[static_cast<size_t>(point)]) {
      return label_for(point);
    }
    return std::to_string(trig);
  };

  std::string out;
  for (int64_t i = 0; i < n; ++i) {
    if (labelled[static_cast<size_t>(i)]) {
      out += label_for(i) + ":";
    }
    out += "\t";
    if (!decoded[i]) {
      char buf[16];
      std::snprintf(buf, sizeof buf, ".word 0x%04X", words[i]);
      out += buf;
    } else if (const auto* j = std::get_if<Jmp>(&*decoded[i])) {
      const int64_t target = i + j->offset;
      out += "jmp ";
      if (target >= 0 && target <= n && labelled[static_cast<size_t>(target)]) {
        out += label_for(target);
      } else {
        out += detail::signed_offset_text(j->offset);
      }
      out += ", " + trigger_text(i, j->trig);
    } else if (const auto* c = std::get_if<Call>(&*decoded[i])) {
      out += "call " + trigger_text(i, c->trig);
    } else if (const auto* r = std::get_if<Ret>(&*decoded[i])) {
      out += "ret " + trigger_text(i, r->trig);
    } else {
      out += render_instruction(*decoded[i]);
    }
    out += "\n";
  }
  if (n >= 0 && labelled[static_cast<size_t>(n)]) {
    out += label_for(n) + ":\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Program container
// ---------------------------------------------------------------------------

struct ContainerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProgramImage {
  std::vector<Word> words;
  uint32_t entry = 0;
};

inline constexpr char kContainerMagic[4] = {'S', 'C', 'R', 'Y'};
inline constexpr uint8_t kContainerVersion = 0x01;

inline void write_container(std::ostream& out, const ProgramImage& image) {
  out.write(kContainerMagic, 4);
  out.put(static_cast<char>(kContainerVersion));
  for (int shift = 0; shift < 32; shift += 8) {
    out.put(static_cast<char>((image.entry >> shift) & 0xFF));
  }
  for (const Word w : image.words) {
    out.put(static_cast<char>(w & 0xFF));
    out.put(static_cast<char>(w >> 8));
  }
}

inline void write_raw(std::ostream& out, const ProgramImage& image) {
  for (const Word w : image.words) {
    out.put(static_cast<char>(w & 0xFF));
    out.put(static_cast<char>(w >> 8));
  }
}

namespace detail {

inline std::vector<uint8_t> read_all(std::istream& in) {
  std::vector<uint8_t> bytes;
  char chunk[4096];
  while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
    bytes.insert(bytes.end(), chunk, chunk + in.gcount());
    if (!in) break;
  }
  return bytes;
}

inline std::vector<Word> words_from_bytes(const uint8_t* data, size_t size) {
  if (size % 2 != 0) {
    throw ContainerError("program has a trailing odd byte");
  }
  std::vector<Word> words(size / 2);
  for (size_t i = 0; i < words.size(); ++i) {
    words[i] = static_cast<Word>(data[2 * i] | data[2 * i + 1] << 8);
  }
  return words;
}

}  // namespace detail

inline ProgramImage read_container(std::istream& in) {
  const std::vector<uint8_t> bytes = detail::read_all(in);
  if (bytes.size() < 9 || std::memcmp(bytes.data(), kContainerMagic, 4) != 0) {
    throw ContainerError("not a SCRY program (bad magic)");
  }
  if (bytes[4] != kContainerVersion) {
    throw ContainerError("unsupported container version");
  }
  ProgramImage image;
  image.entry = static_cast<uint32_t>(bytes[5]) |
                static_cast<uint32_t>(bytes[6]) << 8 |
                static_cast<uint32_t>(bytes[7]) << 16 |
                static_cast<uint32_t>(bytes[8]) << 24;
  image.words = detail::words_from_bytes(bytes.data() + 9, bytes.size() - 9);
  if (image.entry > image.words.size()) {
    throw ContainerError("entry index outside the program");
  }
  return image;
}

inline ProgramImage read_raw(std::istream& in) {
  const std::vector<uint8_t> bytes = detail::read_all(in);
  ProgramImage image;
  image.words = detail::words_from_bytes(bytes.data(), bytes.size());
  return image;
}

}  // namespace scry
