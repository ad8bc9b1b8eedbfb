#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "prsclt/config.hpp"

namespace prsclt::cli {

enum ExitCode : int {
    kSuccess = 0,
    kVerifyFailed = 1,
    kConfigError = 2,
    kRuntimeError = 3,
};

enum class Format { json, csv };

struct Options {
    std::string config_path;
    std::optional<std::string> out;  // stdout when unset
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<Format> format;  // per-command default: analytic json, sweep csv
};

// Loads the config, then applies PRSCLT_SEED and PRSCLT_WORKERS from the
// environment; explicit flags take precedence over both.
RunConfig resolve_config(const Options& opts);

// Hex SHA-256 of the canonical resolved config.
std::string config_digest(const RunConfig& config);

struct RunManifest {
    std::string config_digest;
    std::string tool_version;
    std::string started_at;
    std::string finished_at;
    std::string config_path;
    std::string output_path;
};

nlohmann::json to_json(const RunManifest& manifest);

// Each command returns its exit code; `err` receives diagnostics.
int cmd_analytic(const Options& opts, std::ostream& out, std::ostream& err);
int cmd_simulate(const Options& opts, std::ostream& out, std::ostream& err);
int cmd_verify(const Options& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const Options& opts, std::ostream& out, std::ostream& err);

const char* tool_version();

}  // namespace prsclt::cli
