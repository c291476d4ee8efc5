#pragma once

#include "asg/planner.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace asg {

enum class SimilarityMode { exact, synonym_table, embedding_table };

SimilarityMode similarityModeFromName(const std::string& name); // throws ValidationError
const char* similarityModeName(SimilarityMode mode);

struct SimilarityConfig {
    SimilarityMode mode = SimilarityMode::exact;
    double tau_sem = 0.5;
    std::string table_path; // synonym/embedding modes

    std::map<std::string, int> synonym_class;
    std::map<std::string, std::vector<double>> embeddings;
    mutable std::set<std::string> warned_labels;

    /// Loads table_path according to mode. No-op for exact.
    void loadTables();
};

/// exact: 1/0. synonym: 1 if same class (or equal). embedding: (1+cos)/2;
/// labels without a vector score 0 with a one-time warning.
double semanticSimilarity(const std::string& a, const std::string& b, const SimilarityConfig& cfg);

struct MatchConfig {
    double tau_sem = 0.5;
    double tau_geo = 0.5; // max centroid distance (m)
};

struct NodeMatch {
    std::string pred_id;
    std::string gt_id;
    double similarity = 0.0;
    double distance = 0.0;
};

/// Maximum-cardinality one-to-one matching over feasible pairs (similarity
/// >= tau_sem and centroid distance <= tau_geo), solved as an assignment
/// problem whose weights prefer higher total similarity and then lower total
/// distance among equal-cardinality matchings. Deterministic.
std::vector<NodeMatch> matchNodes(const SceneGraph& pred, const SceneGraph& gt,
                                  const SimilarityConfig& sim, const MatchConfig& cfg);

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int matched = 0;
    int pred_count = 0;
    int gt_count = 0;
};

Metrics prfFromCounts(int matched, int pred_count, int gt_count);
Metrics prf(const std::vector<NodeMatch>& matching, const SceneGraph& pred, const SceneGraph& gt);

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0; // sample standard deviation
};
MeanStd aggregate(const std::vector<double>& values);

struct StepRecord {
    int step = 0;
    int node_count = 0;
    Metrics metrics;
    bool has_selection = false;
    Viewpoint selected;
    double gain_selected = 0.0;
};

struct MetricsSeries {
    std::vector<StepRecord> steps;
};

enum class PlannerMode { info_gain, random_baseline };

/// Everything one run needs besides the world itself. The master seed fully
/// determines all randomness (sensing noise, label flips, completions, the
/// random baseline, candidate subsampling).
struct PipelineConfig {
    NoiseConfig noise;
    PredicateConfig predicates;
    AssociationConfig association;
    SimilarityConfig similarity;
    MatchConfig match;
    RayGrid sensing_grid{64, 48};
    Intrinsics robot_intrinsics;
    PlannerConfig planner;
    PlannerMode planner_mode = PlannerMode::info_gain;
    CompletionPrior prior;
    std::uint64_t seed = 1;
    bool zero_noise = false;
};

/// Applies the zero_noise override and binds the noise stream to the master
/// seed.
NoiseConfig effectiveNoise(const PipelineConfig& cfg);

SimilarityFn similarityFunction(const SimilarityConfig& cfg);

struct StaticRunResult {
    SceneGraph graph;
    Metrics metrics;
};

/// Static pipeline over fixed external cameras only (render -> degrade ->
/// anchor -> backproject -> detect -> associate -> edges), evaluated against
/// ground truth. Throws std::invalid_argument when camera_ids is empty.
StaticRunResult runStaticCpm(const WorldSpec& world, const std::vector<std::string>& camera_ids,
                             const PipelineConfig& cfg);

struct StartPose {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;
};

struct ExplorationResult {
    MetricsSeries series;
    SceneGraph graph;
    std::string termination; // empty, or the early-stop reason
};

using SnapshotCallback = std::function<void(int step, const SceneGraph&)>;

/// The perception-action loop: per step observe, update graph + coverage,
/// then plan and move (steps balance: `steps` moves produce steps+1 records).
/// With cpm_enabled the listed external cameras are ingested before the
/// step-0 robot observation and the first one anchors the frame.
ExplorationResult runExploration(const WorldSpec& world, const StartPose& start, int steps,
                                 bool cpm_enabled, const std::vector<std::string>& cpm_cameras,
                                 const PipelineConfig& cfg,
                                 const SnapshotCallback& snapshot = nullptr);

} // namespace asg
