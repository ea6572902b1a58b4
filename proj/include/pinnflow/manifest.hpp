#pragma once

#include "pinnflow/adaptivity.hpp"
#include "pinnflow/optimizers.hpp"
#include "pinnflow/physics.hpp"
#include "pinnflow/training.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace pinnflow {

enum class RunMode { Fixed, Adaptive };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& text);

/// Fully resolved description of one experiment run.
struct RunManifest {
    RunMode mode = RunMode::Fixed;
    std::uint64_t seed = 0;
    ProblemConfig problem;
    CostWeights weights;
    AdamConfig adam;
    AdaptivityConfig adaptivity;
    TrainingSchedule schedule;
    std::string output_dir = "out";

    void validate() const; ///< throws ConfigError naming the offending key
};

/// Parses the sectioned key = value config format. Unknown keys and invalid
/// values raise ConfigError naming the key; omitted keys keep their
/// defaults (the default problem block is the reference parameter set).
RunManifest load_manifest(const std::string& path);

/// Same parser over an in-memory string (used by tests).
RunManifest parse_manifest(const std::string& text, const std::string& origin = "<string>");

/// The manifest rendered back to config text (every key explicit).
std::string manifest_to_text(const RunManifest& manifest);

} // namespace pinnflow
