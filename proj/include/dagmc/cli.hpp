#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dagmc/modelang.hpp"
#include "dagmc/report.hpp"

namespace dagmc {

struct CliArgs {
  std::vector<std::filesystem::path> model_paths;
  /// Model-language fragments applied after every file.
  std::vector<std::string> inline_overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> thin;
  std::uint64_t chains = 1;
};

/// Parses every file, merges them in order and applies the fragments last.
/// Syntax errors are rethrown with the file name in the message.
lang::ModelFile load_model_files(const CliArgs& args);

/// Trace path of chain `index` (0-based): unchanged for a single chain,
/// otherwise "<stem>_<index+1><ext>".
std::filesystem::path chain_trace_path(const std::filesystem::path& base, std::size_t index,
                                       std::size_t chains);

/// Runs `chains` independent chains (seeds seed, seed+1, ...) concurrently.
std::vector<RunReport> run_chains(const LoadedModel& model, std::uint64_t chains);

/// Sample-weighted mean of the per-chain functional averages.
std::optional<std::vector<double>> pooled_average(const std::vector<RunReport>& reports);

/// Full command-line driver; args excludes the program name. Returns 0 iff a
/// report was printed to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dagmc
