#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wspin/config.hpp"

namespace wspin {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitVerification = 2 };

struct RunOptions {
  std::filesystem::path config;
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> tol_overrides;
  int jobs = 1;
};

inline const std::vector<std::string>& run_commands() {
  static const std::vector<std::string> c{"compactify", "greens-check", "verify-identity",
                                          "spectrum", "sweep"};
  return c;
}

// Write-then-rename so readers never observe partial files.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

int run_command(const std::string& command, const RunConfig& config, const RunOptions& opt,
                std::ostream& log);

// Loads the config, applies overrides and dispatches; maps errors to exit codes.
int run(const std::string& command, const RunOptions& opt, std::ostream& log);

}  // namespace wspin
