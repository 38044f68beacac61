#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "satuav/dqn.hpp"

namespace satuav {

inline constexpr const char *kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitConfig = 2, kExitRuntime = 3, kExitAudit = 4 };

// 64-bit FNV-1a, printed as 16 hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

struct RunManifest {
    std::string subcommand;
    std::string config_path;
    std::string config_hash;  // FNV-1a of the config file bytes
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string tool_version = kToolVersion;
    std::vector<std::string> args;  // argument vector after the program name

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json &j);
};

// Columns: schema_version, episode, stage, stage_distance, steps, energy, running_min_energy,
// return, epsilon, mean_loss, reached. The running minimum restarts with each stage.
void write_training_log_csv(std::ostream &out, const std::vector<EpisodeLog> &log);

// Entry point of the `satuav` tool. Results go to files under --out; `out` gets the
// self-check lines and short status messages, `err` gets diagnostics.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace satuav
