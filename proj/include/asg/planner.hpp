#pragma once

#include "asg/graph.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace asg {

/// Raised when the candidate generator finds no reachable viewpoint; the
/// exploration loop treats it as a termination signal.
struct NoCandidatesError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PlannerConfig {
    int samples = 32;              // scene completions per conditioning (M)
    int ray_cols = 16;             // planning ray grid, coarser than sensing
    int ray_rows = 12;
    int yaw_bins = 8;
    int max_candidates = 48;       // scored per step (deterministic subsample)
    double camera_height = 1.2;    // m above floor
    double camera_pitch = 0.26;    // rad below horizon
    double max_range = 6.0;        // m, coverage + prediction horizon
    double context_radius = 2.0;   // m, graph conditioning radius (phantom labels)
    double slot_volume = 1.0;      // m^3 of unknown space per phantom slot
    double phantom_z_cap = 1.8;    // m above floor; unknown space above stays empty
    int max_phantoms_per_sample = 48;
    int placement_attempts = 8;
};

/// Candidate camera placement: a navigable grid cell plus a yaw bin.
struct Viewpoint {
    int cell_x = 0;
    int cell_y = 0;
    int yaw_bin = 0;
    Vec3 position{0, 0, 0};
    double yaw = 0.0;

    std::tuple<int, int, int> key() const { return {cell_x, cell_y, yaw_bin}; }
};

struct Candidate {
    Viewpoint viewpoint;
    int path_steps = 0; // known-free grid distance from the current cell
};

/// 3D voxel grid over the world bounds. States move monotonically:
/// unknown -> free, unknown -> occupied, free -> occupied; an occupied voxel
/// never reverts and keeps its first label.
class CoverageMap {
public:
    enum class State : std::uint8_t { unknown = 0, free = 1, occupied = 2 };
    static constexpr std::uint16_t kNoLabel = 0xFFFF;

    CoverageMap(const Vec3& lo, const Vec3& hi, double resolution = 0.25);
    static CoverageMap forWorld(const WorldSpec& world, double resolution = 0.25);

    double resolution() const { return res_; }
    const Vec3& origin() const { return origin_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    std::int64_t voxelCount() const { return static_cast<std::int64_t>(nx_) * ny_ * nz_; }

    bool inBounds(int ix, int iy, int iz) const {
        return ix >= 0 && ix < nx_ && iy >= 0 && iy < ny_ && iz >= 0 && iz < nz_;
    }
    std::int64_t linear(int ix, int iy, int iz) const {
        return (static_cast<std::int64_t>(iz) * ny_ + iy) * nx_ + ix;
    }
    std::optional<std::int64_t> voxelAt(const Vec3& p) const;
    Vec3 voxelCenter(std::int64_t idx) const;
    std::tuple<int, int, int> voxelCoords(std::int64_t idx) const;

    State state(std::int64_t idx) const { return static_cast<State>(state_[static_cast<size_t>(idx)]); }
    std::uint16_t occupiedLabel(std::int64_t idx) const { return label_[static_cast<size_t>(idx)]; }

    void markFree(std::int64_t idx);
    void markOccupied(std::int64_t idx, std::uint16_t label_id);

    double fractionUnknown() const;

    /// Interned label ids; "wall" and scene labels share one table.
    std::uint16_t labelId(const std::string& label);
    std::optional<std::uint16_t> findLabelId(const std::string& label) const;
    const std::string& labelName(std::uint16_t id) const;
    size_t labelCount() const { return label_table_.size(); }

    /// Amanatides-Woo traversal of voxels along origin + t*dir for
    /// t in [0, t_end]. Visits (linear index, t_entry) in order.
    void traverse(const Vec3& origin, const Vec3& dir, double t_end,
                  const std::function<bool(std::int64_t, double)>& visit) const;

private:
    Vec3 origin_;
    double res_;
    int nx_, ny_, nz_;
    std::vector<std::uint8_t> state_;
    std::vector<std::uint16_t> label_;
    std::vector<std::string> label_table_;
    std::map<std::string, std::uint16_t> label_index_;
};

/// Marks ray-traversed voxels free and hit voxels occupied (with the hit
/// label) using the supplied pose for ray origins/directions. Hits beyond
/// max_range are treated as misses (free space up to the horizon).
void updateCoverage(CoverageMap& cov, const SimulatedFrame& frame, const Pose& pose,
                    double max_range = 6.0);

/// All navigable cells whose voxel column (ankle to camera height) is known
/// free and which are grid-reachable from the current cell, crossed with the
/// configured yaw bins. The current cell is always traversable. Throws
/// NoCandidatesError when the current cell is off-grid or blocked.
std::vector<Candidate> generateCandidates(const CoverageMap& cov, const NavGrid& nav, int current_cx,
                                          int current_cy, double floor_z, const PlannerConfig& cfg);

/// Statistical stand-in for a learned completion prior: per-label occupancy
/// rates, pairwise co-occurrence weights, and expected half-extents.
struct CompletionPrior {
    std::vector<std::string> vocabulary;
    std::vector<double> rates;                 // in [0, 1], aligned with vocabulary
    std::vector<std::vector<double>> cooc;     // vocabulary x vocabulary, >= 0
    std::vector<Vec3> sizes;                   // expected half extents per label

    int indexOf(const std::string& label) const;
    static CompletionPrior uniform(const std::vector<std::string>& vocabulary,
                                   double rate = 0.5, const Vec3& half = Vec3(0.2, 0.2, 0.2));
    void validate() const; // throws ValidationError
};

CompletionPrior loadPrior(const std::string& path);
std::string priorToJsonText(const CompletionPrior& prior);

struct PhantomObject {
    std::string label;
    OrientedBox box; // axis-aligned (yaw 0)
};

/// One sampled completion: the known scene (graph + coverage) plus phantom
/// objects seeded into unknown-space clusters.
struct HypotheticalWorld {
    const SceneGraph* known = nullptr;
    std::vector<PhantomObject> phantoms;
};

/// Connected component of unknown voxels within the phantom height band.
struct UnknownCluster {
    std::vector<std::int64_t> voxels;       // ascending discovery order
    std::vector<std::string> context;       // labels of graph nodes within reach
    double volume = 0.0;                    // m^3
};

std::vector<UnknownCluster> findUnknownClusters(const CoverageMap& cov, double floor_z,
                                                const PlannerConfig& cfg,
                                                const SceneGraph* conditioning);

/// Draws M completions. Pass conditioning = nullptr (or an empty graph) for
/// the unconditioned term of the information gain.
std::vector<HypotheticalWorld> sampleCompletions(const SceneGraph* conditioning,
                                                 const CoverageMap& cov, const CompletionPrior& prior,
                                                 int sample_count, double floor_z,
                                                 const PlannerConfig& cfg, Rng& rng);

/// Per-ray categorical over label ids; kEmptyOutcome marks rays that exit
/// the horizon without hitting anything.
struct PredictedObservation {
    static constexpr std::uint16_t kEmptyOutcome = 0xFFFF;
    int sample_count = 0;
    std::vector<std::vector<std::pair<std::uint16_t, int>>> rays; // sorted by outcome id

    double rayEntropyBits(size_t ray) const;
    double totalEntropyBits() const;
};

/// Renders the planning ray grid against every completion. Known structure
/// comes from the coverage map; phantoms are rasterized at voxel granularity.
PredictedObservation predictedDistribution(const Pose& pose, const Intrinsics& intr,
                                           const RayGrid& grid,
                                           const std::vector<HypotheticalWorld>& samples,
                                           CoverageMap& cov, double max_range);

struct InfoGainResult {
    Viewpoint viewpoint;
    double h_prior = 0.0;     // bits
    double h_posterior = 0.0; // bits
    double gain = 0.0;        // h_prior - h_posterior, unclamped
    int path_steps = 0;
};

/// Eq.-style gain under the per-ray independence surrogate: summed Shannon
/// entropies of the unconditioned minus the conditioned predictions.
InfoGainResult infoGain(const Viewpoint& viewpoint, int path_steps, const Pose& pose,
                        const Intrinsics& intr, const RayGrid& grid,
                        const std::vector<HypotheticalWorld>& prior_samples,
                        const std::vector<HypotheticalWorld>& posterior_samples, CoverageMap& cov,
                        double max_range);

/// Argmax of gain clamped at 0; ties broken by shorter path, then by the
/// lexicographic viewpoint key. Throws std::invalid_argument on empty input.
size_t selectNbv(const std::vector<InfoGainResult>& results);

/// Precomputed per-sample phantom rasterization, shared across candidates
/// within one planning step.
class CompletionRenderer {
public:
    CompletionRenderer(const std::vector<HypotheticalWorld>& samples, CoverageMap& cov);
    PredictedObservation predict(const Pose& pose, const Intrinsics& intr, const RayGrid& grid,
                                 double max_range) const;

private:
    const CoverageMap& cov_;
    int sample_count_;
    // Dense per-sample label grids (kNoLabel where no phantom), sized to the
    // coverage map; direct indexing keeps candidate scoring cheap.
    std::vector<std::vector<std::uint16_t>> overlays_;
};

} // namespace asg
