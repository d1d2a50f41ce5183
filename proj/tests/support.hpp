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

// Shared plumbing for the test binaries: reading files, assembling the
// sample programs, and spawning the command-line tool.

#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "scry/assembler.hpp"

namespace support {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << bytes;
}

#ifdef SCRY_PROGRAMS_DIR
inline std::string program_path(const std::string& name) {
  return std::string(SCRY_PROGRAMS_DIR) + "/" + name;
}

inline scry::AssembledProgram assemble_program(const std::string& name) {
  return scry::assemble(read_file(program_path(name)));
}
#endif

/// A scratch path unique to this process and call.
inline std::string temp_path(const std::string& stem) {
  static int counter = 0;
  return "/tmp/" + stem + "." + std::to_string(getpid()) + "." +
         std::to_string(counter++);
}

#ifdef SCRY_CLI_PATH
struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs the tool with `args` appended and the streams captured.
inline CliResult run_cli(const std::string& args) {
  const std::string out_path = temp_path("cli.out");
  const std::string err_path = temp_path("cli.err");
  const std::string command = std::string(SCRY_CLI_PATH) + " " + args + " >" +
                              out_path + " 2>" + err_path;
  const int status = std::system(command.c_str());
  CliResult r;
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return r;
}
#endif

}  // namespace support
