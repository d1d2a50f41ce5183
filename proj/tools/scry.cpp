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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scry/scry.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTrapped = 2;
constexpr int kExitAsmError = 3;
constexpr int kExitBadBinary = 4;
constexpr int kExitTimeout = 5;
constexpr int kExitUsage = 64;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<uint8_t> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

// Accepts a container image or, when the magic is absent, bare
// little-endian code words.
scry::ProgramImage load_program(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open");
  std::istringstream probe;
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  std::istringstream stream(bytes);
  if (bytes.size() >= 4 &&
      std::memcmp(bytes.data(), scry::kContainerMagic, 4) == 0) {
    return scry::read_container(stream);
  }
  return scry::read_raw(stream);
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << text;
}

// Parses one `tag:value` argument token, e.g. u8:55, i16:-3, u64:0x400.
scry::TaggedValue parse_argument(const std::string& token) {
  const auto colon = token.find(':');
  if (colon == std::string::npos) {
    throw std::runtime_error("argument '" + token +
                             "' is not of the form tag:value");
  }
  const auto tag = scry::TypeTag::from_name(token.substr(0, colon));
  if (!tag) {
    throw std::runtime_error("argument '" + token + "' has an unknown tag");
  }
  const std::string digits = token.substr(colon + 1);
  errno = 0;
  char* end = nullptr;
  uint64_t bits;
  if (tag->is_signed()) {
    const long long parsed = std::strtoll(digits.c_str(), &end, 0);
    bits = static_cast<uint64_t>(parsed);
  } else {
    bits = std::strtoull(digits.c_str(), &end, 0);
  }
  if (end == digits.c_str() || *end != '\0' || errno == ERANGE) {
    throw std::runtime_error("argument '" + token + "' has a bad value");
  }
  return scry::TaggedValue::value(bits, *tag);
}

struct Preload {
  std::string path;
  uint64_t address = 0;
};

// `file@hexaddr`, address in hex with or without 0x.
Preload parse_preload(const std::string& token) {
  const auto at = token.rfind('@');
  if (at == std::string::npos || at == 0 || at + 1 == token.size()) {
    throw std::runtime_error("preload '" + token +
                             "' is not of the form file@hexaddr");
  }
  Preload p;
  p.path = token.substr(0, at);
  const std::string digits = token.substr(at + 1);
  char* end = nullptr;
  p.address = std::strtoull(digits.c_str(), &end, 16);
  if (end == digits.c_str() || *end != '\0') {
    throw std::runtime_error("preload '" + token + "' has a bad address");
  }
  return p;
}

int cmd_asm(const std::string& input, const std::string& output, bool raw) {
  std::string source;
  try {
    source = read_text_file(input);
  } catch (const std::exception& e) {
    std::cerr << input << ": error: " << e.what() << "\n";
    return kExitUsage;
  }
  scry::AssembledProgram program;
  try {
    program = scry::assemble(source);
  } catch (const scry::AsmError& e) {
    std::cerr << input << ": error: " << e.what() << "\n";
    return kExitAsmError;
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) {
    std::cerr << "error: " << output << ": cannot open for writing\n";
    return kExitUsage;
  }
  const scry::ProgramImage image{program.words, program.entry};
  if (raw) {
    scry::write_raw(out, image);
  } else {
    scry::write_container(out, image);
  }
  return kExitOk;
}

int cmd_dis(const std::string& input, const std::string& output) {
  scry::ProgramImage image;
  try {
    image = load_program(input);
  } catch (const std::exception& e) {
    std::cerr << input << ": error: " << e.what() << "\n";
    return kExitBadBinary;
  }
  try {
    write_output(output, scry::disassemble(image.words));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_run(const std::string& input, const std::vector<std::string>& args,
            unsigned xlen, const std::vector<std::string>& preloads,
            int64_t entry, const std::string& trace_path, uint64_t steps) {
  scry::ProgramImage image;
  try {
    image = load_program(input);
  } catch (const std::exception& e) {
    std::cerr << input << ": error: " << e.what() << "\n";
    return kExitBadBinary;
  }

  scry::RunConfig config;
  config.xlen_bits = xlen;
  config.step_budget = steps;
  config.entry = entry >= 0 ? static_cast<uint32_t>(entry) : image.entry;

  std::unique_ptr<scry::Machine> machine;
  try {
    machine = std::make_unique<scry::Machine>(image.words, config);
  } catch (const std::exception& e) {
    std::cerr << input << ": error: " << e.what() << "\n";
    return kExitBadBinary;
  }

  try {
    for (const std::string& token : preloads) {
      const Preload p = parse_preload(token);
      machine->poke(p.address, read_binary_file(p.path));
    }
    for (const std::string& token : args) {
      machine->seed_argument(parse_argument(token));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::string trace;
  if (!trace_path.empty()) machine->set_trace(&trace);

  const scry::Outcome outcome = machine->run();

  if (!trace_path.empty()) {
    std::ofstream out(trace_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: " << trace_path << ": cannot open for writing\n";
      return kExitUsage;
    }
    out << trace;
  }

  switch (outcome.kind) {
    case scry::Outcome::Kind::returned:
      for (const scry::TaggedValue& v : outcome.values) {
        std::cout << v.to_string() << "\n";
      }
      return kExitOk;
    case scry::Outcome::Kind::trapped:
      std::cerr << "trapped: " << scry::to_string(outcome.cause) << " after "
                << outcome.steps << " steps\n";
      return kExitTrapped;
    case scry::Outcome::Kind::timeout:
      std::cerr << "timeout: step budget of " << steps << " exhausted\n";
      return kExitTimeout;
    default:
      std::cerr << "error: run ended in an unexpected state\n";
      return kExitTrapped;
  }
}

int cmd_analyze(const std::string& isa_path, bool csv) {
  std::vector<scry::DensityReport> reports;
  if (isa_path.empty()) {
    reports.push_back(scry::analyze(scry::builtin_scry(false)));
    reports.push_back(scry::analyze(scry::builtin_scry(true)));
  } else {
    std::string text;
    try {
      text = read_text_file(isa_path);
    } catch (const std::exception& e) {
      std::cerr << isa_path << ": error: " << e.what() << "\n";
      return kExitUsage;
    }
    try {
      reports.push_back(scry::analyze(scry::parse_isa_description(text)));
    } catch (const std::exception& e) {
      std::cerr << isa_path << ": error: " << e.what() << "\n";
      return kExitBadBinary;
    }
  }
  for (size_t i = 0; i < reports.size(); ++i) {
    if (i) std::cout << "\n";
    std::cout << scry::format_report(reports[i], csv);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scry toolchain: assemble, disassemble, run, and analyze"};
  app.require_subcommand(1);

  auto* asm_cmd = app.add_subcommand("asm", "Assemble a source file");
  std::string asm_input, asm_output;
  bool asm_raw = false;
  asm_cmd->add_option("input", asm_input, "source file")->required();
  asm_cmd->add_option("-o,--output", asm_output, "output program file")
      ->required();
  asm_cmd->add_flag("--raw", asm_raw, "write bare code words, no header");

  auto* dis_cmd = app.add_subcommand("dis", "Disassemble a program file");
  std::string dis_input, dis_output;
  dis_cmd->add_option("input", dis_input, "program file")->required();
  dis_cmd->add_option("-o,--output", dis_output,
                      "output text file (default stdout)");

  auto* run_cmd = app.add_subcommand("run", "Execute a program file");
  std::string run_input, run_trace;
  std::vector<std::string> run_args, run_preloads;
  unsigned run_xlen = 64;
  int64_t run_entry = -1;
  uint64_t run_steps = 1'000'000;
  run_cmd->add_option("input", run_input, "program file")->required();
  run_cmd->add_option("--arg", run_args,
                      "argument as tag:value, e.g. u8:55 (up to 4)");
  run_cmd->add_option("--xlen", run_xlen, "address width in bits")
      ->check(CLI::IsMember({16u, 32u, 64u}));
  run_cmd->add_option("--mem", run_preloads,
                      "preload file bytes at a hex address: file@hexaddr");
  run_cmd->add_option("--entry", run_entry, "entry instruction index");
  run_cmd->add_option("--trace", run_trace, "write an execution trace here");
  run_cmd->add_option("--steps", run_steps, "step budget before timeout");

  auto* analyze_cmd =
      app.add_subcommand("analyze", "Report encoding-space usage");
  std::string analyze_isa;
  bool analyze_csv = false;
  analyze_cmd->add_option("--isa", analyze_isa,
                          "instruction-set description file");
  analyze_cmd->add_flag("--csv", analyze_csv, "comma-separated output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  if (asm_cmd->parsed()) return cmd_asm(asm_input, asm_output, asm_raw);
  if (dis_cmd->parsed()) return cmd_dis(dis_input, dis_output);
  if (run_cmd->parsed()) {
    if (run_args.size() > scry::kMaxOperands) {
      std::cerr << "error: at most " << scry::kMaxOperands
                << " arguments can be delivered\n";
      return kExitUsage;
    }
    return cmd_run(run_input, run_args, run_xlen, run_preloads, run_entry,
                   run_trace, run_steps);
  }
  if (analyze_cmd->parsed()) return cmd_analyze(analyze_isa, analyze_csv);
  return kExitUsage;
}
