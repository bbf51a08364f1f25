#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "zetalab/cli/config.hpp"
#include "zetalab/cli/output.hpp"

namespace zetalab::cli {

inline constexpr const char* kArtifactVersion = "1.0.0";

const std::vector<std::string>& subcommands();

struct Invocation {
  std::string subcommand;
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::int64_t> seed;
  std::optional<std::int64_t> threads;
  std::optional<std::string> out;
};

/// Resolves the configuration: file, then overrides, then the dedicated flags
/// (which count as overrides for conflict detection).
Config resolve_config(const Invocation& inv);

/// Output root: run.out, else $ZETALAB_OUT, else ./results.
std::filesystem::path output_root(const Config& cfg);

/// Runs one subcommand and returns its fresh results directory. Throws
/// zetalab::Error subclasses on failure.
std::filesystem::path run(const Invocation& inv);

/// Aggregates the runs below `root` (used by the report subcommand).
Json build_report(const std::filesystem::path& root);

/// Command-line entry point; returns the process exit status.
int main(int argc, char** argv);

}  // namespace zetalab::cli
