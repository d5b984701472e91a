#pragma once

// Subcommand dispatch shared by the sgdelta executable and the tests.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sgdelta/config.hpp"

namespace sgd {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidationFailure = 1,
    kExitRejected = 2,
    kExitNumeric = 3,
};

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"run",   "spectrum", "stability", "instability",
                                                   "sweep", "minimize", "validate"};
    return names;
}

struct CommandLine {
    std::string command;
    std::optional<std::string> config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

/// Loads the config (defaults when no path is given), applies the flag
/// overrides and dispatches. Errors become a one-line JSON record on `err`
/// and the matching exit code.
int run_command(const CommandLine& cmd, std::ostream& out, std::ostream& err);

/// Runs one subcommand on a validated config, writing artifacts under
/// config.out_dir and a human-readable summary to `out`. Throws sgd::Error.
int dispatch(const std::string& command, const RunConfig& config, std::ostream& out);

/// {"error": {"kind", "category", "message", "exit_code"[, "time"]}}
std::string error_record(const std::exception& e, int exit_code);

}  // namespace sgd
