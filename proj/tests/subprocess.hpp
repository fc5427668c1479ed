#pragma once

// Minimal helpers for driving the CLI binary from tests: run a shell command,
// capture exit code / stdout / stderr, and manage scratch directories.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace testutil {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

// Fresh scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& hint) {
  std::string tmpl =
      (std::filesystem::temp_directory_path() / (hint + ".XXXXXX")).string();
  char* made = mkdtemp(tmpl.data());
  if (made == nullptr) throw std::runtime_error("mkdtemp failed for " + tmpl);
  return std::filesystem::path(made);
}

// Runs `command` through the shell, capturing both streams.
inline RunResult run(const std::string& command) {
  const std::filesystem::path dir = scratch_dir("ieqa-run");
  const std::filesystem::path out_path = dir / "out";
  const std::filesystem::path err_path = dir / "err";
  const std::string full =
      command + " >" + out_path.string() + " 2>" + err_path.string();
  const int raw = std::system(full.c_str());
  RunResult r;
  if (raw == -1) {
    r.exit_code = -1;
  } else if (WIFEXITED(raw)) {
    r.exit_code = WEXITSTATUS(raw);
  } else {
    r.exit_code = 128;
  }
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  std::filesystem::remove_all(dir);
  return r;
}

// Path of the CLI binary under test, provided by ctest via the environment.
inline std::string cli_path() {
  const char* p = std::getenv("IEQA_CLI");
  return p == nullptr ? std::string() : std::string(p);
}

}  // namespace testutil
