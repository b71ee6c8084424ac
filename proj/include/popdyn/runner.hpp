#pragma once

#include "popdyn/scenario.hpp"

#include <filesystem>
#include <optional>

namespace popdyn {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunOptions {
    bool svg = false;
    bool events = false; // ibm event log
    std::optional<std::uint64_t> seed_override;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitDiverged = 2;

/// Dispatches the scenario to its solver and writes CSV outputs plus
/// metadata.json into out_dir. Returns kExitOk or kExitDiverged; errors
/// propagate as exceptions.
int run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                 const RunOptions& options = {});

} // namespace popdyn
