#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace pairmrf::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kRuntimeError = 2;

/// Record of one invocation, written next to its outputs as key=value lines.
struct Manifest {
  std::string subcommand;
  /// Full argument list without the program name; always includes --seed.
  std::vector<std::string> args;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  std::vector<std::string> outputs;
  double duration_seconds = 0.0;
};

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

/// Runs one command line (without the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pairmrf::cli
