#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace autoform {

struct CommandResult {
    int exit_code = -1;
    bool timed_out = false;
    bool spawn_failed = false; // executable missing or not runnable
    std::string output;        // stdout + stderr, interleaved
};

// Runs argv with a wall-clock timeout; the child is killed on expiry.
// argv[0] resolves through PATH.
CommandResult run_command(const std::vector<std::string>& argv,
                          const std::string& workdir, std::int64_t timeout_ms);

// Shell-like split on whitespace honoring single/double quotes. No
// expansions.
std::vector<std::string> split_command(std::string_view command);

// PATH lookup without spawning; used by health checks.
bool executable_exists(const std::string& name);

} // namespace autoform
