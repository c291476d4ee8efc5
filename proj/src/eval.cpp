#include "asg/eval.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace asg {

using jsonutil::json;

// Named RNG stream purposes; every consumer of randomness gets its own
// (purpose, index) stream derived from the master seed.
namespace stream {
constexpr std::uint64_t kViewNoise = 1;
constexpr std::uint64_t kDetect = 2;
constexpr std::uint64_t kPosteriorSamples = 3;
constexpr std::uint64_t kPriorSamples = 4;
constexpr std::uint64_t kCandidateSubsample = 5;
constexpr std::uint64_t kRandomBaseline = 6;
} // namespace stream

SimilarityMode similarityModeFromName(const std::string& name) {
    if (name == "exact") return SimilarityMode::exact;
    if (name == "synonym_table") return SimilarityMode::synonym_table;
    if (name == "embedding_table") return SimilarityMode::embedding_table;
    throw ValidationError("unknown similarity mode \"" + name + "\"");
}

const char* similarityModeName(SimilarityMode mode) {
    switch (mode) {
        case SimilarityMode::exact: return "exact";
        case SimilarityMode::synonym_table: return "synonym_table";
        case SimilarityMode::embedding_table: return "embedding_table";
    }
    return "?";
}

void SimilarityConfig::loadTables() {
    if (mode == SimilarityMode::exact) return;
    std::ifstream in(table_path);
    if (!in) throw ParseError("similarity table: cannot open \"" + table_path + "\"");
    std::stringstream buf;
    buf << in.rdbuf();
    json root;
    try {
        root = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("similarity table: ") + e.what());
    }
    if (mode == SimilarityMode::synonym_table) {
        jsonutil::rejectUnknownKeys(root, "similarity table", {"classes"});
        const json& classes = jsonutil::require(root, "similarity table", "classes");
        int class_id = 0;
        for (const auto& cls : classes) {
            for (const auto& label : cls)
                synonym_class[jsonutil::asString(label, "classes")] = class_id;
            ++class_id;
        }
    } else {
        jsonutil::rejectUnknownKeys(root, "similarity table", {"embeddings"});
        const json& emb = jsonutil::require(root, "similarity table", "embeddings");
        for (auto it = emb.begin(); it != emb.end(); ++it) {
            std::vector<double> v;
            for (const auto& x : it.value()) v.push_back(jsonutil::asNumber(x, "embeddings"));
            if (v.empty()) throw ParseError("embeddings[" + it.key() + "]: empty vector");
            embeddings[it.key()] = std::move(v);
        }
    }
}

double semanticSimilarity(const std::string& a, const std::string& b, const SimilarityConfig& cfg) {
    switch (cfg.mode) {
        case SimilarityMode::exact:
            return a == b ? 1.0 : 0.0;
        case SimilarityMode::synonym_table: {
            if (a == b) return 1.0;
            auto ia = cfg.synonym_class.find(a);
            auto ib = cfg.synonym_class.find(b);
            if (ia == cfg.synonym_class.end() || ib == cfg.synonym_class.end()) return 0.0;
            return ia->second == ib->second ? 1.0 : 0.0;
        }
        case SimilarityMode::embedding_table: {
            auto ia = cfg.embeddings.find(a);
            auto ib = cfg.embeddings.find(b);
            for (const auto& [label, missing] : {std::make_pair(&a, ia == cfg.embeddings.end()),
                                                 std::make_pair(&b, ib == cfg.embeddings.end())}) {
                if (missing && cfg.warned_labels.insert(*label).second)
                    std::cerr << "warning: no embedding for label \"" << *label
                              << "\", similarity 0\n";
            }
            if (ia == cfg.embeddings.end() || ib == cfg.embeddings.end()) return 0.0;
            const auto& va = ia->second;
            const auto& vb = ib->second;
            if (va.size() != vb.size()) return 0.0;
            double dot = 0.0, na = 0.0, nb = 0.0;
            for (size_t i = 0; i < va.size(); ++i) {
                dot += va[i] * vb[i];
                na += va[i] * va[i];
                nb += vb[i] * vb[i];
            }
            if (na <= 0.0 || nb <= 0.0) return 0.0;
            const double cosine = dot / std::sqrt(na * nb);
            return 0.5 * (1.0 + std::clamp(cosine, -1.0, 1.0));
        }
    }
    return 0.0;
}

SimilarityFn similarityFunction(const SimilarityConfig& cfg) {
    return [&cfg](const std::string& a, const std::string& b) {
        return semanticSimilarity(a, b, cfg);
    };
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

namespace {

/// Potential-based Hungarian algorithm, minimization, square matrix,
/// 1-indexed. Returns column -> row assignment.
std::vector<int> hungarianSquare(const std::vector<std::vector<double>>& cost, int n) {
    const double kInf = 1e18;
    std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(n) + 1, kInf);
        std::vector<char> used(static_cast<size_t>(n) + 1, 0);
        do {
            used[static_cast<size_t>(j0)] = 1;
            const int i0 = p[static_cast<size_t>(j0)];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const double cur = cost[static_cast<size_t>(i0)][static_cast<size_t>(j)] -
                                   u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<size_t>(j0)];
            p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    return p;
}

} // namespace

std::vector<NodeMatch> matchNodes(const SceneGraph& pred, const SceneGraph& gt,
                                  const SimilarityConfig& sim, const MatchConfig& cfg) {
    std::vector<const ObjectNode*> P, G;
    for (const auto& n : pred.nodes) P.push_back(&n);
    for (const auto& n : gt.nodes) G.push_back(&n);
    auto by_id = [](const ObjectNode* a, const ObjectNode* b) { return a->id < b->id; };
    std::sort(P.begin(), P.end(), by_id);
    std::sort(G.begin(), G.end(), by_id);

    const int np = static_cast<int>(P.size());
    const int ng = static_cast<int>(G.size());
    if (np == 0 || ng == 0) return {};

    // Cardinality dominates (kBig), then similarity, then distance with a
    // documented 1e-6 weight.
    constexpr double kBig = 1e5;
    const int n = std::max(np, ng);
    std::vector<std::vector<double>> cost(static_cast<size_t>(n) + 1,
                                          std::vector<double>(static_cast<size_t>(n) + 1, 0.0));
    std::vector<std::vector<double>> sim_cache(static_cast<size_t>(np),
                                               std::vector<double>(static_cast<size_t>(ng), 0.0));
    std::vector<std::vector<double>> dist_cache(static_cast<size_t>(np),
                                                std::vector<double>(static_cast<size_t>(ng), 0.0));
    for (int i = 0; i < np; ++i) {
        for (int j = 0; j < ng; ++j) {
            const double s = semanticSimilarity(P[static_cast<size_t>(i)]->label,
                                                G[static_cast<size_t>(j)]->label, sim);
            const double d =
                (P[static_cast<size_t>(i)]->centroid - G[static_cast<size_t>(j)]->centroid).norm();
            sim_cache[static_cast<size_t>(i)][static_cast<size_t>(j)] = s;
            dist_cache[static_cast<size_t>(i)][static_cast<size_t>(j)] = d;
            if (s >= cfg.tau_sem && d <= cfg.tau_geo)
                cost[static_cast<size_t>(i) + 1][static_cast<size_t>(j) + 1] =
                    -(kBig + s - 1e-6 * d);
        }
    }

    const auto assignment = hungarianSquare(cost, n);
    std::vector<NodeMatch> matches;
    for (int j = 1; j <= n; ++j) {
        const int i = assignment[static_cast<size_t>(j)];
        if (i == 0 || i > np || j > ng) continue;
        if (cost[static_cast<size_t>(i)][static_cast<size_t>(j)] >= 0.0) continue; // infeasible
        matches.push_back({P[static_cast<size_t>(i) - 1]->id, G[static_cast<size_t>(j) - 1]->id,
                           sim_cache[static_cast<size_t>(i) - 1][static_cast<size_t>(j) - 1],
                           dist_cache[static_cast<size_t>(i) - 1][static_cast<size_t>(j) - 1]});
    }
    std::sort(matches.begin(), matches.end(),
              [](const NodeMatch& a, const NodeMatch& b) { return a.pred_id < b.pred_id; });
    return matches;
}

Metrics prfFromCounts(int matched, int pred_count, int gt_count) {
    Metrics m;
    m.matched = matched;
    m.pred_count = pred_count;
    m.gt_count = gt_count;
    m.precision = pred_count > 0 ? static_cast<double>(matched) / pred_count : 0.0;
    m.recall = gt_count > 0 ? static_cast<double>(matched) / gt_count : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                          : 0.0;
    return m;
}

Metrics prf(const std::vector<NodeMatch>& matching, const SceneGraph& pred, const SceneGraph& gt) {
    return prfFromCounts(static_cast<int>(matching.size()), static_cast<int>(pred.nodes.size()),
                         static_cast<int>(gt.nodes.size()));
}

MeanStd aggregate(const std::vector<double>& values) {
    MeanStd out;
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiment harnesses
// ---------------------------------------------------------------------------

NoiseConfig effectiveNoise(const PipelineConfig& cfg) {
    NoiseConfig noise = cfg.zero_noise ? NoiseConfig::zero() : cfg.noise;
    noise.metric_scale = cfg.noise.metric_scale;
    noise.seed = cfg.seed;
    return noise;
}

namespace {

/// Shared per-view pipeline: render, degrade, anchor, backproject, detect,
/// integrate, and (optionally) update coverage.
struct ViewProcessor {
    const WorldSpec& world;
    const PipelineConfig& cfg;
    NoiseConfig noise;
    std::vector<std::string> vocabulary;
    GraphBuilder builder;
    Pose anchor_pose;
    CoverageMap* coverage = nullptr;
    int view_index = 0;

    ViewProcessor(const WorldSpec& w, const PipelineConfig& c, const Pose& anchor)
        : world(w), cfg(c), noise(effectiveNoise(c)), vocabulary(w.labelVocabulary()),
          builder(c.predicates, c.association, similarityFunction(c.similarity)),
          anchor_pose(anchor) {}

    void observe(const Pose& true_pose, const Intrinsics& intr, int step) {
        const SimulatedFrame frame = renderObservation(world, true_pose, intr, cfg.sensing_grid);
        Rng view_rng = Rng::stream(noise.seed, stream::kViewNoise, static_cast<std::uint64_t>(view_index));
        FactoredGeometryEstimate est = degradeToEstimate(frame, anchor_pose, noise, view_rng);
        anchorFrame(est, anchor_pose);
        const TaggedPointCloud cloud = backproject(est, frame, view_index);
        Rng det_rng = Rng::stream(noise.seed, stream::kDetect, static_cast<std::uint64_t>(view_index));
        const auto detections =
            extractDetections(cloud, noise, vocabulary, cfg.association.min_points, det_rng);
        builder.integrateFrame(detections, step);
        if (coverage) updateCoverage(*coverage, frame, est.pose_est, cfg.planner.max_range);
        ++view_index;
    }
};

Pose viewpointPose(const Viewpoint& vp, double pitch) {
    return Pose::lookTowards(vp.position, vp.yaw, pitch);
}

} // namespace

StaticRunResult runStaticCpm(const WorldSpec& world, const std::vector<std::string>& camera_ids,
                             const PipelineConfig& cfg) {
    if (camera_ids.empty())
        throw std::invalid_argument("runStaticCpm: at least one external camera required");
    const ExternalCamera* anchor_cam = world.findCamera(camera_ids.front());
    if (!anchor_cam) throw ValidationError("unknown camera id \"" + camera_ids.front() + "\"");

    ViewProcessor proc(world, cfg, anchor_cam->pose);
    for (const auto& id : camera_ids) {
        const ExternalCamera* cam = world.findCamera(id);
        if (!cam) throw ValidationError("unknown camera id \"" + id + "\"");
        proc.observe(cam->pose, cam->intrinsics, 0);
    }

    StaticRunResult result;
    result.graph = proc.builder.graph();
    const SceneGraph gt = groundTruthGraph(world, cfg.predicates);
    result.metrics = prf(matchNodes(result.graph, gt, cfg.similarity, cfg.match), result.graph, gt);
    return result;
}

ExplorationResult runExploration(const WorldSpec& world, const StartPose& start, int steps,
                                 bool cpm_enabled, const std::vector<std::string>& cpm_cameras,
                                 const PipelineConfig& cfg, const SnapshotCallback& snapshot) {
    const auto start_cell = world.navigable.cellOf(start.x, start.y);
    if (!start_cell || !world.navigable.navigable(start_cell->first, start_cell->second))
        throw ValidationError("start pose off-grid or not navigable");
    if (cpm_enabled && cpm_cameras.empty())
        throw ValidationError("cpm_enabled requires at least one camera id");

    Pose anchor_pose;
    if (cpm_enabled) {
        const ExternalCamera* cam = world.findCamera(cpm_cameras.front());
        if (!cam) throw ValidationError("unknown camera id \"" + cpm_cameras.front() + "\"");
        anchor_pose = cam->pose;
    }

    Viewpoint current;
    current.cell_x = start_cell->first;
    current.cell_y = start_cell->second;
    current.yaw_bin = 0;
    const Vec2 c0 = world.navigable.cellCenter(current.cell_x, current.cell_y);
    current.position = Vec3(c0.x(), c0.y(), world.floor_z + cfg.planner.camera_height);
    current.yaw = start.yaw;

    if (!cpm_enabled) anchor_pose = viewpointPose(current, cfg.planner.camera_pitch);

    ViewProcessor proc(world, cfg, anchor_pose);
    CoverageMap coverage = CoverageMap::forWorld(world);
    proc.coverage = &coverage;

    const SceneGraph gt = groundTruthGraph(world, cfg.predicates);

    ExplorationResult result;
    for (int step = 0; step <= steps; ++step) {
        if (step == 0 && cpm_enabled) {
            for (const auto& id : cpm_cameras) {
                const ExternalCamera* cam = world.findCamera(id);
                if (!cam) throw ValidationError("unknown camera id \"" + id + "\"");
                proc.observe(cam->pose, cam->intrinsics, 0);
            }
        }
        proc.observe(viewpointPose(current, cfg.planner.camera_pitch), cfg.robot_intrinsics, step);

        StepRecord record;
        record.step = step;
        record.node_count = static_cast<int>(proc.builder.graph().nodes.size());
        record.metrics = prf(matchNodes(proc.builder.graph(), gt, cfg.similarity, cfg.match),
                             proc.builder.graph(), gt);
        if (snapshot) snapshot(step, proc.builder.graph());

        if (step < steps) {
            std::vector<Candidate> candidates;
            try {
                candidates = generateCandidates(coverage, world.navigable, current.cell_x,
                                                current.cell_y, world.floor_z, cfg.planner);
            } catch (const NoCandidatesError& e) {
                result.termination = e.what();
                result.series.steps.push_back(record);
                break;
            }

            // Deterministic subsample keeps per-step planning cost bounded.
            if (static_cast<int>(candidates.size()) > cfg.planner.max_candidates) {
                Rng pick = Rng::stream(cfg.seed, stream::kCandidateSubsample,
                                       static_cast<std::uint64_t>(step));
                for (size_t i = candidates.size() - 1; i > 0; --i)
                    std::swap(candidates[i], candidates[pick.uniformInt(static_cast<std::uint32_t>(i + 1))]);
                candidates.resize(static_cast<size_t>(cfg.planner.max_candidates));
                std::sort(candidates.begin(), candidates.end(),
                          [](const Candidate& a, const Candidate& b) {
                              return a.viewpoint.key() < b.viewpoint.key();
                          });
            }

            size_t chosen = 0;
            double chosen_gain = 0.0;
            if (cfg.planner_mode == PlannerMode::random_baseline) {
                Rng pick = Rng::stream(cfg.seed, stream::kRandomBaseline,
                                       static_cast<std::uint64_t>(step));
                chosen = pick.uniformInt(static_cast<std::uint32_t>(candidates.size()));
            } else {
                // Paired streams: prior and posterior sampling share their
                // randomness so the gain isolates the conditioning effect.
                Rng post_rng = Rng::stream(cfg.seed, stream::kPosteriorSamples,
                                           static_cast<std::uint64_t>(step));
                Rng prior_rng = Rng::stream(cfg.seed, stream::kPosteriorSamples,
                                            static_cast<std::uint64_t>(step));
                const SceneGraph empty_graph;
                const auto posterior = sampleCompletions(&proc.builder.graph(), coverage, cfg.prior,
                                                         cfg.planner.samples, world.floor_z,
                                                         cfg.planner, post_rng);
                const auto prior_samples = sampleCompletions(&empty_graph, coverage, cfg.prior,
                                                             cfg.planner.samples, world.floor_z,
                                                             cfg.planner, prior_rng);
                const CompletionRenderer render_prior(prior_samples, coverage);
                const CompletionRenderer render_post(posterior, coverage);
                const RayGrid plan_grid{cfg.planner.ray_cols, cfg.planner.ray_rows};
                std::vector<InfoGainResult> results;
                results.reserve(candidates.size());
                for (const auto& cand : candidates) {
                    const Pose pose = viewpointPose(cand.viewpoint, cfg.planner.camera_pitch);
                    InfoGainResult r;
                    r.viewpoint = cand.viewpoint;
                    r.path_steps = cand.path_steps;
                    r.h_prior = render_prior
                                    .predict(pose, cfg.robot_intrinsics, plan_grid,
                                             cfg.planner.max_range)
                                    .totalEntropyBits();
                    r.h_posterior = render_post
                                        .predict(pose, cfg.robot_intrinsics, plan_grid,
                                                 cfg.planner.max_range)
                                        .totalEntropyBits();
                    r.gain = r.h_prior - r.h_posterior;
                    results.push_back(r);
                }
                chosen = selectNbv(results);
                chosen_gain = results[chosen].gain;
            }

            record.has_selection = true;
            record.selected = candidates[chosen].viewpoint;
            record.gain_selected = chosen_gain;
            current = candidates[chosen].viewpoint;
        }
        result.series.steps.push_back(record);
    }

    result.graph = proc.builder.graph();
    return result;
}

} // namespace asg
