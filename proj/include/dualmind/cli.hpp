#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dualmind/training.hpp"

namespace dualmind::cli {

// Exit codes: 0 ok, 2 usage/config, 3 state, 4 numeric, 5 I/O.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitState = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitIo = 5;

struct RunConfig {
    enum class Command { train1, train2, experiment, all };
    Command command = Command::all;
    std::string experiment_name;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "runs";
    std::string config_file;
    std::string checkpoint_in;
    std::string checkpoint_out;
    std::size_t jobs = 0;
    // key=value overrides, config file first, then --set (CLI wins)
    std::vector<std::pair<std::string, std::string>> overrides;
};

/// Parse a command line (program name excluded). Returns nullopt when help
/// was requested (already printed). Throws ValidationError on bad usage.
std::optional<RunConfig> parse_args(const std::vector<std::string>& args);

/// Apply key=value overrides onto a TrainConfig; unknown keys are rejected.
void apply_overrides(
    TrainConfig& config,
    const std::vector<std::pair<std::string, std::string>>& overrides);

/// Run the configured pipeline; returns one of the exit codes above and
/// logs a one-line cause for failures.
int execute(const RunConfig& config);

/// parse + execute + error-to-exit-code mapping, used by main().
int run(int argc, const char* const* argv);

}  // namespace dualmind::cli
