#pragma once

// Subcommand dispatch for the `sdlab` executable. Each subcommand computes
// first and writes afterwards, so a failed run leaves no partial output.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdlab/cli/config.hpp"

namespace sdlab::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsage = 1,
    kInvalidConfig = 2,
    kNumericalFailure = 3,
};

const std::vector<std::string>& subcommands();
std::string usage();

struct RunResult {
    nlohmann::json summary;
    /// Files written, relative to the output directory.
    std::vector<std::string> files;
    /// Set when the computation finished but did not meet its own tolerance.
    std::string failure;
};

/// Runs one subcommand on a parsed config and writes its artifacts into
/// <output.directory>/<subcommand>/. Throws sdlab::Error on numerical failure.
RunResult execute(const std::string& subcommand, const ExperimentConfig& cfg);

/// Full pipeline with exit-code mapping; the summary JSON goes to `out`.
int run(const std::string& subcommand, const std::filesystem::path& config_path,
        const std::vector<std::string>& overrides, std::ostream& out, std::ostream& err);

}  // namespace sdlab::cli
