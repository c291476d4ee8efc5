#pragma once

#include "asg/eval.hpp"
#include "asg/sensing.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

// Test-side oracles shared by the eval suite and the acceptance suite. These
// read the sealed provenance channel, which is exactly what it exists for.

namespace asg::testing {

/// Object ids that receive at least min_points rays in this single frame
/// (the precondition for the pipeline to form a detection).
inline std::set<std::string> eligibleObjects(const WorldSpec& world, const Pose& pose,
                                             const Intrinsics& intr, const RayGrid& grid,
                                             int min_points) {
    const SimulatedFrame frame = renderObservation(world, pose, intr, grid);
    std::map<int, int> counts;
    for (const auto& px : frame.pixels)
        if (px.tag >= 0) counts[px.tag] += 1;
    std::set<std::string> ids;
    for (const auto& [tag, count] : counts) {
        const auto& info = frame.tags[static_cast<size_t>(tag)];
        if (!info.is_structure && count >= min_points) ids.insert(info.true_id);
    }
    return ids;
}

/// Exhaustive maximum-cardinality matching for graphs with <= 8 nodes on a
/// side: tries every injective assignment over feasible pairs.
inline int bruteForceMatchingSize(const SceneGraph& pred, const SceneGraph& gt,
                                  const SimilarityConfig& sim, const MatchConfig& cfg) {
    std::vector<const ObjectNode*> P, G;
    for (const auto& n : pred.nodes) P.push_back(&n);
    for (const auto& n : gt.nodes) G.push_back(&n);
    std::vector<std::vector<int>> feasible(P.size());
    for (size_t i = 0; i < P.size(); ++i)
        for (size_t j = 0; j < G.size(); ++j)
            if (semanticSimilarity(P[i]->label, G[j]->label, sim) >= cfg.tau_sem &&
                (P[i]->centroid - G[j]->centroid).norm() <= cfg.tau_geo)
                feasible[i].push_back(static_cast<int>(j));

    int best = 0;
    std::vector<char> used(G.size(), 0);
    std::function<void(size_t, int)> rec = [&](size_t i, int matched) {
        best = std::max(best, matched);
        if (i == P.size()) return;
        if (matched + static_cast<int>(P.size() - i) <= best) return;
        rec(i + 1, matched); // leave node i unmatched
        for (int j : feasible[i]) {
            if (used[static_cast<size_t>(j)]) continue;
            used[static_cast<size_t>(j)] = 1;
            rec(i + 1, matched + 1);
            used[static_cast<size_t>(j)] = 0;
        }
    };
    rec(0, 0);
    return best;
}

} // namespace asg::testing
