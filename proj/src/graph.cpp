#include "asg/graph.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace asg {

using jsonutil::json;
using jsonutil::ordered_json;

const char* relationName(Relation r) {
    switch (r) {
        case Relation::on_top_of: return "on_top_of";
        case Relation::supported_by: return "supported_by";
        case Relation::under: return "under";
        case Relation::over: return "over";
        case Relation::inside: return "inside";
        case Relation::next_to: return "next_to";
    }
    return "?";
}

std::optional<Relation> relationFromName(const std::string& name) {
    static const std::map<std::string, Relation> table = {
        {"on_top_of", Relation::on_top_of}, {"supported_by", Relation::supported_by},
        {"under", Relation::under},         {"over", Relation::over},
        {"inside", Relation::inside},       {"next_to", Relation::next_to},
    };
    auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

const ObjectNode* SceneGraph::find(const std::string& id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

ObjectNode* SceneGraph::find(const std::string& id) {
    for (auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

double exactLabelSimilarity(const std::string& a, const std::string& b) {
    return a == b ? 1.0 : 0.0;
}

std::vector<Detection> extractDetections(const TaggedPointCloud& cloud, const NoiseConfig& noise,
                                         const std::vector<std::string>& vocabulary, int min_points,
                                         Rng& rng) {
    std::vector<std::vector<Vec3>> groups(cloud.tags.size());
    for (size_t i = 0; i < cloud.points.size(); ++i)
        groups[static_cast<size_t>(cloud.point_tags[i])].push_back(cloud.points[i]);

    std::vector<Detection> detections;
    for (size_t tag = 0; tag < groups.size(); ++tag) {
        if (cloud.tags[tag].is_structure) continue;
        if (static_cast<int>(groups[tag].size()) < min_points) continue;
        auto box = fitObb(groups[tag]);
        if (!box) continue; // unfittable detection
        Detection det;
        det.tag = static_cast<int>(tag);
        det.label = cloud.tags[tag].label;
        det.points = std::move(groups[tag]);
        det.box = *box;
        det.true_id = cloud.tags[tag].true_id;
        if (noise.label_flip_prob > 0.0 && rng.uniform() < noise.label_flip_prob &&
            vocabulary.size() > 1) {
            // Replace by a uniformly drawn different label.
            std::vector<const std::string*> others;
            for (const auto& l : vocabulary)
                if (l != det.label) others.push_back(&l);
            det.label = *others[rng.uniformInt(static_cast<std::uint32_t>(others.size()))];
        }
        detections.push_back(std::move(det));
    }
    return detections;
}

namespace {

double geometricOverlap(const OrientedBox& a, const OrientedBox& b) {
    return std::max(containmentRatio(a, b), containmentRatio(b, a));
}

} // namespace

std::vector<int> associateDetections(const SceneGraph& graph, const std::vector<Detection>& detections,
                                     const SimilarityFn& similarity, const AssociationConfig& cfg) {
    std::vector<int> assignment(detections.size(), -1);
    if (graph.nodes.empty() || detections.empty()) return assignment;

    struct Pair {
        double score;
        int det;
        int node;
    };
    std::vector<Pair> pairs;
    for (size_t d = 0; d < detections.size(); ++d) {
        for (size_t n = 0; n < graph.nodes.size(); ++n) {
            const double geo = geometricOverlap(detections[d].box, graph.nodes[n].box);
            const double sem = similarity(detections[d].label, graph.nodes[n].label);
            const double score = cfg.w_geometric * geo + cfg.w_semantic * sem;
            if (score >= cfg.tau)
                pairs.push_back({score, static_cast<int>(d), static_cast<int>(n)});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.det != b.det) return a.det < b.det;
        return a.node < b.node;
    });
    std::vector<bool> det_used(detections.size(), false);
    std::vector<bool> node_used(graph.nodes.size(), false); // one detection per node per frame
    for (const auto& p : pairs) {
        if (det_used[p.det] || node_used[p.node]) continue;
        det_used[p.det] = true;
        node_used[p.node] = true;
        assignment[p.det] = p.node;
    }
    return assignment;
}

namespace {

std::vector<Vec3> voxelDownsample(const std::vector<Vec3>& points, double voxel) {
    std::vector<Vec3> kept;
    kept.reserve(points.size());
    std::set<std::tuple<long long, long long, long long>> seen;
    for (const auto& p : points) {
        const auto key = std::make_tuple(static_cast<long long>(std::floor(p.x() / voxel)),
                                         static_cast<long long>(std::floor(p.y() / voxel)),
                                         static_cast<long long>(std::floor(p.z() / voxel)));
        if (seen.insert(key).second) kept.push_back(p);
    }
    return kept;
}

void refreshDerivedFields(ObjectNode& node) {
    Vec3 mean(0, 0, 0);
    for (const auto& p : node.points) mean += p;
    node.centroid = mean / static_cast<double>(node.points.size());
    if (auto box = fitObb(node.points)) node.box = *box;
    // Histogram argmax; lexicographically smallest label wins ties because
    // std::map iterates in key order and we only replace on strictly greater.
    int best = -1;
    for (const auto& [label, count] : node.label_histogram) {
        if (count > best) {
            best = count;
            node.label = label;
        }
    }
}

} // namespace

void fuseNode(ObjectNode& node, const Detection& det, int step, double voxel) {
    std::vector<Vec3> merged = node.points;
    merged.insert(merged.end(), det.points.begin(), det.points.end());
    node.points = voxelDownsample(merged, voxel);
    node.label_histogram[det.label] += 1;
    node.last_step = step;
    refreshDerivedFields(node);
}

namespace {

// Raw predicate definitions for an ordered pair (a, b).
bool onTopOf(const ObjectNode& a, const ObjectNode& b, const PredicateConfig& cfg) {
    return std::abs(a.box.bottomZ() - b.box.topZ()) <= cfg.eps_z &&
           footprintOverlap(a.box, b.box) >= cfg.overlap_min;
}

bool underOf(const ObjectNode& a, const ObjectNode& b, const PredicateConfig& cfg) {
    return a.box.topZ() < b.box.bottomZ() && b.box.bottomZ() - a.box.topZ() <= cfg.gap_max &&
           footprintOverlap(a.box, b.box) >= cfg.overlap_min;
}

bool overOf(const ObjectNode& a, const ObjectNode& b, const PredicateConfig& cfg) {
    return a.box.bottomZ() > b.box.topZ() && a.box.bottomZ() - b.box.topZ() <= cfg.gap_max &&
           footprintOverlap(a.box, b.box) >= cfg.overlap_min;
}

bool nextTo(const ObjectNode& a, const ObjectNode& b, const PredicateConfig& cfg) {
    return footprintGap(a.box, b.box) <= cfg.near_gap &&
           std::abs(a.centroid.z() - b.centroid.z()) <= cfg.h_sim;
}

} // namespace

std::optional<Relation> classifyPair(const ObjectNode& a, const ObjectNode& b,
                                     const PredicateConfig& cfg) {
    if (onTopOf(a, b, cfg)) return Relation::on_top_of;
    if (onTopOf(b, a, cfg)) return Relation::supported_by;
    if (underOf(a, b, cfg)) return Relation::under;
    if (overOf(a, b, cfg)) return Relation::over;
    if (containmentRatio(a.box, b.box) >= cfg.inside_min) return Relation::inside;
    if (nextTo(a, b, cfg)) return Relation::next_to;
    return std::nullopt;
}

std::vector<RelationEdge> deriveEdges(const std::vector<ObjectNode>& nodes,
                                      const PredicateConfig& cfg) {
    std::vector<const ObjectNode*> sorted;
    sorted.reserve(nodes.size());
    for (const auto& n : nodes) sorted.push_back(&n);
    std::sort(sorted.begin(), sorted.end(),
              [](const ObjectNode* a, const ObjectNode* b) { return a->id < b->id; });

    std::map<std::pair<std::string, std::string>, Relation> edges;
    for (size_t i = 0; i < sorted.size(); ++i) {
        for (size_t j = 0; j < sorted.size(); ++j) {
            if (i == j) continue;
            if (auto rel = classifyPair(*sorted[i], *sorted[j], cfg))
                edges[{sorted[i]->id, sorted[j]->id}] = *rel;
        }
    }

    // Inverse-label consistency, processed in lexicographic pair order so
    // degenerate mutual claims resolve deterministically.
    for (size_t i = 0; i < sorted.size(); ++i) {
        for (size_t j = 0; j < sorted.size(); ++j) {
            if (i == j) continue;
            auto it = edges.find({sorted[i]->id, sorted[j]->id});
            if (it == edges.end()) continue;
            if (it->second == Relation::on_top_of)
                edges[{sorted[j]->id, sorted[i]->id}] = Relation::supported_by;
            else if (it->second == Relation::under)
                edges[{sorted[j]->id, sorted[i]->id}] = Relation::over;
        }
    }

    std::vector<RelationEdge> out;
    out.reserve(edges.size());
    for (const auto& [key, rel] : edges) out.push_back({key.first, key.second, rel});
    return out;
}

GraphBuilder::GraphBuilder(PredicateConfig predicates, AssociationConfig association,
                           SimilarityFn similarity)
    : predicates_(predicates), association_(association), similarity_(std::move(similarity)) {}

std::string GraphBuilder::freshNodeId() {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "n%03d", next_node_++);
    return buf;
}

std::vector<std::string> GraphBuilder::integrateFrame(const std::vector<Detection>& detections,
                                                      int step) {
    std::vector<int> assignment;
    if (association_.oracle) {
        assignment.assign(detections.size(), -1);
        std::set<int> used; // still at most one detection per node per frame
        for (size_t d = 0; d < detections.size(); ++d) {
            auto it = oracle_index_.find(detections[d].true_id);
            if (it != oracle_index_.end() && !used.count(it->second)) {
                assignment[d] = it->second;
                used.insert(it->second);
            }
        }
    } else {
        assignment = associateDetections(graph_, detections, similarity_, association_);
    }

    std::vector<std::string> placed(detections.size());
    for (size_t d = 0; d < detections.size(); ++d) {
        if (assignment[d] >= 0) {
            auto& node = graph_.nodes[static_cast<size_t>(assignment[d])];
            fuseNode(node, detections[d], step);
            placed[d] = node.id;
        } else {
            ObjectNode node;
            node.id = freshNodeId();
            node.first_step = node.last_step = step;
            node.true_id = detections[d].true_id;
            node.box = detections[d].box;
            fuseNode(node, detections[d], step); // downsample, refit, start histogram
            placed[d] = node.id;
            oracle_index_[node.true_id] = static_cast<int>(graph_.nodes.size());
            graph_.nodes.push_back(std::move(node));
        }
    }
    graph_.step = step;
    graph_.edges = deriveEdges(graph_.nodes, predicates_);
    return placed;
}

SceneGraph groundTruthGraph(const WorldSpec& world, const PredicateConfig& cfg) {
    SceneGraph graph;
    for (const auto& obj : world.objects) {
        ObjectNode node;
        node.id = obj.id;
        node.label = obj.label;
        node.label_histogram[obj.label] = 1;
        node.box = obj.box;
        const auto corners = obbCorners(obj.box);
        node.points.assign(corners.begin(), corners.end());
        node.centroid = obj.box.center;
        node.true_id = obj.id;
        graph.nodes.push_back(std::move(node));
    }
    graph.edges = deriveEdges(graph.nodes, cfg);
    return graph;
}

std::string graphToJsonText(const SceneGraph& graph) {
    std::vector<const ObjectNode*> sorted;
    for (const auto& n : graph.nodes) sorted.push_back(&n);
    std::sort(sorted.begin(), sorted.end(),
              [](const ObjectNode* a, const ObjectNode* b) { return a->id < b->id; });

    ordered_json root;
    root["step"] = graph.step;
    root["nodes"] = ordered_json::array();
    for (const auto* n : sorted) {
        ordered_json j;
        j["id"] = n->id;
        j["label"] = n->label;
        ordered_json hist;
        for (const auto& [label, count] : n->label_histogram) hist[label] = count;
        j["histogram"] = std::move(hist);
        j["centroid"] = jsonutil::vec3ToJson(n->centroid);
        j["box"] = jsonutil::boxToJson(n->box);
        j["point_count"] = static_cast<int>(n->points.size());
        root["nodes"].push_back(std::move(j));
    }
    std::vector<RelationEdge> edges = graph.edges;
    std::sort(edges.begin(), edges.end(), [](const RelationEdge& a, const RelationEdge& b) {
        if (a.src != b.src) return a.src < b.src;
        return a.dst < b.dst;
    });
    root["edges"] = ordered_json::array();
    for (const auto& e : edges) {
        ordered_json j;
        j["src"] = e.src;
        j["dst"] = e.dst;
        j["relation"] = relationName(e.relation);
        root["edges"].push_back(std::move(j));
    }
    return root.dump(2) + "\n";
}

SceneGraph graphFromJsonText(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("graph: ") + e.what());
    }
    if (!root.is_object()) throw ParseError("graph: top level must be an object");
    jsonutil::rejectUnknownKeys(root, "graph", {"step", "nodes", "edges"});

    SceneGraph graph;
    if (root.contains("step")) graph.step = jsonutil::asInt(root["step"], "graph.step");
    const json& nodes = jsonutil::require(root, "graph", "nodes");
    if (!nodes.is_array()) throw ParseError("graph.nodes: expected an array");
    for (size_t i = 0; i < nodes.size(); ++i) {
        const std::string ctx = "nodes[" + std::to_string(i) + "]";
        const json& jn = nodes[i];
        if (!jn.is_object()) throw ParseError(ctx + ": expected an object");
        jsonutil::rejectUnknownKeys(jn, ctx, {"id", "label", "histogram", "centroid", "box", "point_count"});
        ObjectNode n;
        n.id = jsonutil::asString(jsonutil::require(jn, ctx, "id"), ctx + ".id");
        n.label = jsonutil::asString(jsonutil::require(jn, ctx, "label"), ctx + ".label");
        const json& hist = jsonutil::require(jn, ctx, "histogram");
        if (!hist.is_object()) throw ParseError(ctx + ".histogram: expected an object");
        for (auto it = hist.begin(); it != hist.end(); ++it)
            n.label_histogram[it.key()] = jsonutil::asInt(it.value(), ctx + ".histogram");
        n.centroid = jsonutil::asVec3(jsonutil::require(jn, ctx, "centroid"), ctx + ".centroid");
        n.box = jsonutil::asBox(jsonutil::require(jn, ctx, "box"), ctx + ".box");
        const int count = jsonutil::asInt(jsonutil::require(jn, ctx, "point_count"), ctx + ".point_count");
        n.points.assign(static_cast<size_t>(std::max(count, 1)), n.centroid);
        graph.nodes.push_back(std::move(n));
    }
    const json& edges = jsonutil::require(root, "graph", "edges");
    if (!edges.is_array()) throw ParseError("graph.edges: expected an array");
    for (size_t i = 0; i < edges.size(); ++i) {
        const std::string ctx = "edges[" + std::to_string(i) + "]";
        const json& je = edges[i];
        if (!je.is_object()) throw ParseError(ctx + ": expected an object");
        jsonutil::rejectUnknownKeys(je, ctx, {"src", "dst", "relation"});
        RelationEdge e;
        e.src = jsonutil::asString(jsonutil::require(je, ctx, "src"), ctx + ".src");
        e.dst = jsonutil::asString(jsonutil::require(je, ctx, "dst"), ctx + ".dst");
        const std::string rel = jsonutil::asString(jsonutil::require(je, ctx, "relation"), ctx + ".relation");
        auto parsed = relationFromName(rel);
        if (!parsed) throw ParseError(ctx + ".relation: unknown relation \"" + rel + "\"");
        e.relation = *parsed;
        if (!graph.find(e.src)) throw ValidationError(ctx + ".src: no such node \"" + e.src + "\"");
        if (!graph.find(e.dst)) throw ValidationError(ctx + ".dst: no such node \"" + e.dst + "\"");
        graph.edges.push_back(std::move(e));
    }
    return graph;
}

void saveGraph(const SceneGraph& graph, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write \"" + path + "\"");
    out << graphToJsonText(graph);
}

SceneGraph loadGraph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("graph: cannot open \"" + path + "\"");
    std::stringstream buf;
    buf << in.rdbuf();
    return graphFromJsonText(buf.str());
}

} // namespace asg
