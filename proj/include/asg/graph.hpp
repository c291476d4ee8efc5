#pragma once

#include "asg/geometry.hpp"
#include "asg/rng.hpp"
#include "asg/sensing.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace asg {

enum class Relation { on_top_of, supported_by, under, over, inside, next_to };

const char* relationName(Relation r);
std::optional<Relation> relationFromName(const std::string& name);

/// Thresholds for the geometric edge predicates. Tuned once and held fixed
/// across experiments.
struct PredicateConfig {
    double eps_z = 0.05;       // max vertical contact gap (m)
    double gap_max = 0.5;      // max under/over vertical gap (m)
    double overlap_min = 0.3;  // min footprint overlap ratio
    double inside_min = 0.9;   // min containment ratio
    double near_gap = 0.3;     // max horizontal footprint gap for next_to (m)
    double h_sim = 0.3;        // max centroid height difference for next_to (m)
};

/// Per-view masked region: one frame-local instance with its fitted box.
struct Detection {
    int tag = -1;
    std::string label;
    std::vector<Vec3> points;
    OrientedBox box;
    std::string true_id; // sealed; used only by oracle association + evaluator
};

struct ObjectNode {
    std::string id;
    std::string label;                          // histogram argmax
    std::map<std::string, int> label_histogram; // label -> observation count
    std::vector<Vec3> points;                   // voxel-downsampled
    OrientedBox box;
    Vec3 centroid{0, 0, 0};
    int first_step = 0;
    int last_step = 0;
    std::string true_id; // sealed; meaningful only under oracle association
};

struct RelationEdge {
    std::string src;
    std::string dst;
    Relation relation;

    bool operator==(const RelationEdge&) const = default;
};

struct SceneGraph {
    std::vector<ObjectNode> nodes; // creation order
    std::vector<RelationEdge> edges;
    int step = 0;

    const ObjectNode* find(const std::string& id) const;
    ObjectNode* find(const std::string& id);
};

struct AssociationConfig {
    double w_geometric = 0.6;
    double w_semantic = 0.4;
    double tau = 0.5;    // min score to merge into an existing node
    int min_points = 5;  // detections below this are dropped
    bool oracle = false; // match by sealed ground-truth ids instead of score
};

using SimilarityFn = std::function<double(const std::string&, const std::string&)>;

/// Exact label equality; the default semantic term for association.
double exactLabelSimilarity(const std::string& a, const std::string& b);

/// Groups cloud points by frame-local tag, drops structure tags and groups
/// below min_points, fits one box per group, and applies the label-flip
/// channel of the noise model. `vocabulary` supplies replacement labels.
std::vector<Detection> extractDetections(const TaggedPointCloud& cloud, const NoiseConfig& noise,
                                         const std::vector<std::string>& vocabulary, int min_points,
                                         Rng& rng);

/// Scores every (detection, node) pair and resolves assignments greedily in
/// descending score order: one node per detection, at most one detection per
/// node within this frame. Returns per-detection node index, -1 for "new".
std::vector<int> associateDetections(const SceneGraph& graph, const std::vector<Detection>& detections,
                                     const SimilarityFn& similarity, const AssociationConfig& cfg);

/// Merges a detection into a node: voxel-downsampled point union (0.05 m),
/// box refit, label histogram update with lexicographic tie-break.
void fuseNode(ObjectNode& node, const Detection& det, int step, double voxel = 0.05);

/// First satisfied predicate for the ordered pair (a, b) in fixed priority:
/// on_top_of, supported_by, under, over, inside, next_to.
std::optional<Relation> classifyPair(const ObjectNode& a, const ObjectNode& b,
                                     const PredicateConfig& cfg);

/// Evaluates classifyPair over all ordered pairs (sorted by node id, so the
/// result is independent of node storage order) and enforces inverse-label
/// consistency: (a,b)=on_top_of forces (b,a)=supported_by and (a,b)=under
/// forces (b,a)=over, processing pairs in lexicographic order. Output sorted
/// by (src, dst).
std::vector<RelationEdge> deriveEdges(const std::vector<ObjectNode>& nodes,
                                      const PredicateConfig& cfg);

/// Incremental builder: associates each frame's detections into the graph,
/// fuses or creates nodes, and recomputes the derived edge set.
class GraphBuilder {
public:
    GraphBuilder(PredicateConfig predicates, AssociationConfig association,
                 SimilarityFn similarity = exactLabelSimilarity);

    /// Integrates one frame worth of detections. Returns the node id each
    /// detection ended up in (aligned with the input).
    std::vector<std::string> integrateFrame(const std::vector<Detection>& detections, int step);

    const SceneGraph& graph() const { return graph_; }
    SceneGraph& graph() { return graph_; }

private:
    std::string freshNodeId();

    PredicateConfig predicates_;
    AssociationConfig association_;
    SimilarityFn similarity_;
    SceneGraph graph_;
    std::map<std::string, int> oracle_index_; // sealed true id -> node index
    int next_node_ = 0;
};

/// One node per world object (exact box and label, centroid at the box
/// center) with edges derived by the same predicate engine.
SceneGraph groundTruthGraph(const WorldSpec& world, const PredicateConfig& cfg);

/// Graph snapshot serialization (stable field and element order).
std::string graphToJsonText(const SceneGraph& graph);
SceneGraph graphFromJsonText(const std::string& text);
void saveGraph(const SceneGraph& graph, const std::string& path);
SceneGraph loadGraph(const std::string& path);

} // namespace asg
