#pragma once

#include "asg/eval.hpp"
#include "asg/worldgen.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace asg {

enum class ExperimentMode { static_cpm, exploration };

struct WorldSource {
    bool from_family = true;
    WorldFamily family = WorldFamily::room;
    std::string path; // when !from_family
};

enum class PriorSource { benchmark, uniform, file };

/// Fully resolved experiment description. Everything a run needs is pinned
/// here; no wall-clock entropy anywhere.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    ExperimentMode mode = ExperimentMode::exploration;
    WorldSource world;
    std::vector<std::uint64_t> seeds; // defaults to {seed}
    std::string output_dir = "out";
    bool snapshots = true;
    int steps = 30;
    bool cpm_enabled = false;
    std::vector<std::string> cameras = {"cam_0"};
    bool oracle_association = false;
    bool zero_noise = false;
    std::optional<StartPose> start; // exploration; first navigable cell if unset

    PriorSource prior_source = PriorSource::benchmark;
    std::string prior_path;

    // Engine configs (prior filled in at resolve time).
    PipelineConfig pipeline;
};

/// Parses the config file, applies dotted-path overrides ("planner.steps=10"),
/// validates, and resolves the completion prior. Throws ParseError /
/// ValidationError with field context.
ExperimentConfig loadExperimentConfig(const std::string& path,
                                      const std::vector<std::string>& overrides = {});
ExperimentConfig experimentConfigFromJsonText(const std::string& text,
                                              const std::vector<std::string>& overrides = {});

/// Canonical echo of the resolved config (written as manifest.json).
std::string experimentManifest(const ExperimentConfig& cfg);

/// Executes the experiment and writes metrics.csv, summary.txt,
/// manifest.json, and per-run snapshots under cfg.output_dir. Partial
/// outputs are removed if the run throws. `jobs` parallelizes across runs
/// only; outputs are written in a fixed order regardless.
void runExperiment(const ExperimentConfig& cfg, int jobs = 1);

} // namespace asg
