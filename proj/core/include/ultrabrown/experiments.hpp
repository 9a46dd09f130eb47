#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ultrabrown/stats.hpp"

namespace ultrabrown::harness {

/// One experiment run. Unset fields take the experiment's defaults.
struct RunConfig {
    std::string experiment;
    std::optional<std::uint32_t> p;
    std::optional<std::uint32_t> N;
    std::optional<std::uint32_t> d;
    std::optional<std::uint32_t> depth;
    std::vector<std::uint32_t> levels;
    std::optional<std::uint64_t> reps;
    std::uint64_t seed = 1;
    double alpha = kDefaultAlpha;
    double sigmas = kDefaultSigmas;
    /// Directory for report.json and CSV dumps; nothing is written when empty.
    std::filesystem::path out_dir;
};

struct RunResult {
    bool pass = false;
    nlohmann::json report;
    /// File name to CSV contents.
    std::vector<std::pair<std::string, std::string>> tables;
};

const std::vector<std::string>& experiment_ids();

/// Runs the named experiment and writes its artifacts. Throws std::invalid_argument for unknown ids.
RunResult run(const RunConfig& cfg);

void write_artifacts(const RunResult& result, const std::filesystem::path& dir);

}  // namespace ultrabrown::harness
