#include "asg/config.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <semaphore>
#include <sstream>

namespace asg {

namespace fs = std::filesystem;
using jsonutil::json;
using jsonutil::ordered_json;

namespace {

constexpr double kDegToRad = M_PI / 180.0;

void applyOverride(json& root, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw ParseError("override \"" + spec + "\": expected key.path=value");
    const std::string path = spec.substr(0, eq);
    const std::string raw = spec.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw; // plain string
    }
    json* node = &root;
    size_t begin = 0;
    for (;;) {
        const auto dot = path.find('.', begin);
        const std::string key = path.substr(begin, dot == std::string::npos ? dot : dot - begin);
        if (key.empty()) throw ParseError("override \"" + spec + "\": empty path segment");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            break;
        }
        node = &(*node)[key];
        if (!node->is_object() && !node->is_null())
            throw ParseError("override \"" + spec + "\": path crosses a non-object");
        begin = dot + 1;
    }
}

double numberOr(const json& obj, const char* key, double fallback, const std::string& ctx) {
    if (!obj.contains(key)) return fallback;
    return jsonutil::asNumber(obj[key], ctx + "." + key);
}

int intOr(const json& obj, const char* key, int fallback, const std::string& ctx) {
    if (!obj.contains(key)) return fallback;
    return jsonutil::asInt(obj[key], ctx + "." + key);
}

bool boolOr(const json& obj, const char* key, bool fallback, const std::string& ctx) {
    if (!obj.contains(key)) return fallback;
    return jsonutil::asBool(obj[key], ctx + "." + key);
}

std::string stringOr(const json& obj, const char* key, const std::string& fallback,
                     const std::string& ctx) {
    if (!obj.contains(key)) return fallback;
    return jsonutil::asString(obj[key], ctx + "." + key);
}

} // namespace

ExperimentConfig experimentConfigFromJsonText(const std::string& text,
                                              const std::vector<std::string>& overrides) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (!root.is_object()) throw ParseError("config: top level must be an object");
    for (const auto& o : overrides) applyOverride(root, o);

    jsonutil::rejectUnknownKeys(root, "config",
                                {"seed", "mode", "world", "seeds", "output_dir", "snapshots",
                                 "noise", "predicates", "association", "similarity", "match",
                                 "prior", "sensing", "intrinsics", "planner", "conditions",
                                 "start"});

    ExperimentConfig cfg;
    if (!root.contains("seed")) throw ParseError("config.seed: required (no wall-clock entropy)");
    cfg.seed = static_cast<std::uint64_t>(jsonutil::asInt(root["seed"], "config.seed"));

    const std::string mode = stringOr(root, "mode", "exploration", "config");
    if (mode == "static") cfg.mode = ExperimentMode::static_cpm;
    else if (mode == "exploration") cfg.mode = ExperimentMode::exploration;
    else throw ValidationError("config.mode: expected \"static\" or \"exploration\"");

    if (!root.contains("world")) throw ParseError("config.world: required");
    const json& world = root["world"];
    jsonutil::rejectUnknownKeys(world, "config.world", {"path", "family", "seed"});
    if (world.contains("path")) {
        cfg.world.from_family = false;
        cfg.world.path = jsonutil::asString(world["path"], "config.world.path");
        if (!fs::exists(cfg.world.path))
            throw ValidationError("config.world.path: no such file \"" + cfg.world.path + "\"");
    } else if (world.contains("family")) {
        cfg.world.from_family = true;
        cfg.world.family =
            worldFamilyFromName(jsonutil::asString(world["family"], "config.world.family"));
    } else {
        throw ParseError("config.world: expected \"path\" or \"family\"");
    }

    if (root.contains("seeds")) {
        for (const auto& s : root["seeds"])
            cfg.seeds.push_back(static_cast<std::uint64_t>(jsonutil::asInt(s, "config.seeds")));
        if (cfg.seeds.empty()) throw ValidationError("config.seeds: must not be empty");
    } else {
        cfg.seeds = {cfg.seed};
    }

    cfg.output_dir = stringOr(root, "output_dir", "out", "config");
    cfg.snapshots = boolOr(root, "snapshots", true, "config");

    if (root.contains("noise")) {
        const json& n = root["noise"];
        jsonutil::rejectUnknownKeys(n, "config.noise",
                                    {"sigma_depth_rel", "sigma_trans", "sigma_rot_deg",
                                     "sigma_logscale", "label_flip_prob", "metric_scale"});
        auto& noise = cfg.pipeline.noise;
        noise.sigma_depth_rel = numberOr(n, "sigma_depth_rel", noise.sigma_depth_rel, "config.noise");
        noise.sigma_trans = numberOr(n, "sigma_trans", noise.sigma_trans, "config.noise");
        noise.sigma_rot = numberOr(n, "sigma_rot_deg", noise.sigma_rot / kDegToRad, "config.noise") *
                          kDegToRad;
        noise.sigma_logscale = numberOr(n, "sigma_logscale", noise.sigma_logscale, "config.noise");
        noise.label_flip_prob = numberOr(n, "label_flip_prob", noise.label_flip_prob, "config.noise");
        noise.metric_scale = numberOr(n, "metric_scale", noise.metric_scale, "config.noise");
        if (noise.label_flip_prob < 0.0 || noise.label_flip_prob > 1.0)
            throw ValidationError("config.noise.label_flip_prob: must be in [0, 1]");
        if (noise.sigma_depth_rel < 0.0 || noise.sigma_trans < 0.0 || noise.sigma_rot < 0.0 ||
            noise.sigma_logscale < 0.0)
            throw ValidationError("config.noise: standard deviations must be >= 0");
        if (noise.metric_scale <= 0.0)
            throw ValidationError("config.noise.metric_scale: must be positive");
    }

    if (root.contains("predicates")) {
        const json& p = root["predicates"];
        jsonutil::rejectUnknownKeys(p, "config.predicates",
                                    {"eps_z", "gap_max", "overlap_min", "inside_min", "near_gap",
                                     "h_sim"});
        auto& pc = cfg.pipeline.predicates;
        pc.eps_z = numberOr(p, "eps_z", pc.eps_z, "config.predicates");
        pc.gap_max = numberOr(p, "gap_max", pc.gap_max, "config.predicates");
        pc.overlap_min = numberOr(p, "overlap_min", pc.overlap_min, "config.predicates");
        pc.inside_min = numberOr(p, "inside_min", pc.inside_min, "config.predicates");
        pc.near_gap = numberOr(p, "near_gap", pc.near_gap, "config.predicates");
        pc.h_sim = numberOr(p, "h_sim", pc.h_sim, "config.predicates");
        if (pc.eps_z <= 0 || pc.gap_max <= 0 || pc.overlap_min <= 0 || pc.near_gap <= 0 ||
            pc.h_sim <= 0)
            throw ValidationError("config.predicates: thresholds must be positive");
        if (pc.inside_min <= 0.0 || pc.inside_min > 1.0)
            throw ValidationError("config.predicates.inside_min: must be in (0, 1]");
    }

    if (root.contains("association")) {
        const json& a = root["association"];
        jsonutil::rejectUnknownKeys(a, "config.association",
                                    {"w_geometric", "w_semantic", "tau", "min_points"});
        auto& ac = cfg.pipeline.association;
        ac.w_geometric = numberOr(a, "w_geometric", ac.w_geometric, "config.association");
        ac.w_semantic = numberOr(a, "w_semantic", ac.w_semantic, "config.association");
        ac.tau = numberOr(a, "tau", ac.tau, "config.association");
        ac.min_points = intOr(a, "min_points", ac.min_points, "config.association");
        if (ac.min_points < 4)
            throw ValidationError("config.association.min_points: must be >= 4 (box fitting)");
    }

    if (root.contains("similarity")) {
        const json& s = root["similarity"];
        jsonutil::rejectUnknownKeys(s, "config.similarity", {"mode", "tau_sem", "table"});
        auto& sc = cfg.pipeline.similarity;
        sc.mode = similarityModeFromName(stringOr(s, "mode", "exact", "config.similarity"));
        sc.tau_sem = numberOr(s, "tau_sem", sc.tau_sem, "config.similarity");
        sc.table_path = stringOr(s, "table", "", "config.similarity");
        if (sc.tau_sem < 0.0 || sc.tau_sem > 1.0)
            throw ValidationError("config.similarity.tau_sem: must be in [0, 1]");
        if (sc.mode != SimilarityMode::exact) {
            if (sc.table_path.empty())
                throw ValidationError("config.similarity.table: required for table modes");
            if (!fs::exists(sc.table_path))
                throw ValidationError("config.similarity.table: no such file \"" + sc.table_path +
                                      "\"");
            sc.loadTables();
        }
        cfg.pipeline.match.tau_sem = sc.tau_sem;
    }

    if (root.contains("match")) {
        const json& m = root["match"];
        jsonutil::rejectUnknownKeys(m, "config.match", {"tau_geo"});
        cfg.pipeline.match.tau_geo = numberOr(m, "tau_geo", cfg.pipeline.match.tau_geo, "config.match");
        if (cfg.pipeline.match.tau_geo <= 0.0)
            throw ValidationError("config.match.tau_geo: must be positive");
    }

    if (root.contains("prior")) {
        const json& p = root["prior"];
        jsonutil::rejectUnknownKeys(p, "config.prior", {"builtin", "path"});
        if (p.contains("path")) {
            cfg.prior_source = PriorSource::file;
            cfg.prior_path = jsonutil::asString(p["path"], "config.prior.path");
            if (!fs::exists(cfg.prior_path))
                throw ValidationError("config.prior.path: no such file \"" + cfg.prior_path + "\"");
        } else {
            const std::string builtin = stringOr(p, "builtin", "benchmark", "config.prior");
            if (builtin == "benchmark") cfg.prior_source = PriorSource::benchmark;
            else if (builtin == "uniform") cfg.prior_source = PriorSource::uniform;
            else throw ValidationError("config.prior.builtin: expected \"benchmark\" or \"uniform\"");
        }
    }

    if (root.contains("sensing")) {
        const json& s = root["sensing"];
        jsonutil::rejectUnknownKeys(s, "config.sensing", {"ray_cols", "ray_rows"});
        cfg.pipeline.sensing_grid.cols = intOr(s, "ray_cols", cfg.pipeline.sensing_grid.cols,
                                               "config.sensing");
        cfg.pipeline.sensing_grid.rows = intOr(s, "ray_rows", cfg.pipeline.sensing_grid.rows,
                                               "config.sensing");
        if (cfg.pipeline.sensing_grid.cols <= 0 || cfg.pipeline.sensing_grid.rows <= 0)
            throw ValidationError("config.sensing: ray grid must be positive");
    }

    if (root.contains("intrinsics")) {
        const json& k = root["intrinsics"];
        jsonutil::rejectUnknownKeys(k, "config.intrinsics", {"width", "height", "fx", "fy", "cx", "cy"});
        auto& intr = cfg.pipeline.robot_intrinsics;
        intr.width = intOr(k, "width", intr.width, "config.intrinsics");
        intr.height = intOr(k, "height", intr.height, "config.intrinsics");
        intr.fx = numberOr(k, "fx", intr.fx, "config.intrinsics");
        intr.fy = numberOr(k, "fy", intr.fy, "config.intrinsics");
        intr.cx = numberOr(k, "cx", intr.cx, "config.intrinsics");
        intr.cy = numberOr(k, "cy", intr.cy, "config.intrinsics");
    }

    if (root.contains("planner")) {
        const json& p = root["planner"];
        jsonutil::rejectUnknownKeys(p, "config.planner",
                                    {"samples", "ray_cols", "ray_rows", "yaw_bins", "steps",
                                     "max_candidates", "camera_height", "camera_pitch", "max_range",
                                     "mode", "context_radius", "slot_volume", "phantom_z_cap",
                                     "max_phantoms_per_sample"});
        auto& pl = cfg.pipeline.planner;
        pl.samples = intOr(p, "samples", pl.samples, "config.planner");
        pl.ray_cols = intOr(p, "ray_cols", pl.ray_cols, "config.planner");
        pl.ray_rows = intOr(p, "ray_rows", pl.ray_rows, "config.planner");
        pl.yaw_bins = intOr(p, "yaw_bins", pl.yaw_bins, "config.planner");
        pl.max_candidates = intOr(p, "max_candidates", pl.max_candidates, "config.planner");
        pl.camera_height = numberOr(p, "camera_height", pl.camera_height, "config.planner");
        pl.camera_pitch = numberOr(p, "camera_pitch", pl.camera_pitch, "config.planner");
        pl.max_range = numberOr(p, "max_range", pl.max_range, "config.planner");
        pl.context_radius = numberOr(p, "context_radius", pl.context_radius, "config.planner");
        pl.slot_volume = numberOr(p, "slot_volume", pl.slot_volume, "config.planner");
        pl.phantom_z_cap = numberOr(p, "phantom_z_cap", pl.phantom_z_cap, "config.planner");
        pl.max_phantoms_per_sample =
            intOr(p, "max_phantoms_per_sample", pl.max_phantoms_per_sample, "config.planner");
        cfg.steps = intOr(p, "steps", cfg.steps, "config.planner");
        const std::string pm = stringOr(p, "mode", "info_gain", "config.planner");
        if (pm == "info_gain") cfg.pipeline.planner_mode = PlannerMode::info_gain;
        else if (pm == "random") cfg.pipeline.planner_mode = PlannerMode::random_baseline;
        else throw ValidationError("config.planner.mode: expected \"info_gain\" or \"random\"");
        if (pl.samples < 1) throw ValidationError("config.planner.samples: must be >= 1");
        if (cfg.steps < 0) throw ValidationError("config.planner.steps: must be >= 0");
    }

    if (root.contains("conditions")) {
        const json& c = root["conditions"];
        jsonutil::rejectUnknownKeys(c, "config.conditions",
                                    {"cpm_enabled", "cameras", "oracle_association", "zero_noise"});
        cfg.cpm_enabled = boolOr(c, "cpm_enabled", cfg.cpm_enabled, "config.conditions");
        if (c.contains("cameras")) {
            cfg.cameras.clear();
            for (const auto& id : c["cameras"])
                cfg.cameras.push_back(jsonutil::asString(id, "config.conditions.cameras"));
        }
        cfg.oracle_association = boolOr(c, "oracle_association", false, "config.conditions");
        cfg.zero_noise = boolOr(c, "zero_noise", false, "config.conditions");
    }

    if (root.contains("start")) {
        const json& s = root["start"];
        jsonutil::rejectUnknownKeys(s, "config.start", {"x", "y", "yaw"});
        StartPose start;
        start.x = jsonutil::asNumber(jsonutil::require(s, "config.start", "x"), "config.start.x");
        start.y = jsonutil::asNumber(jsonutil::require(s, "config.start", "y"), "config.start.y");
        start.yaw = numberOr(s, "yaw", 0.0, "config.start");
        cfg.start = start;
    }

    cfg.pipeline.association.oracle = cfg.oracle_association;
    cfg.pipeline.zero_noise = cfg.zero_noise;

    switch (cfg.prior_source) {
        case PriorSource::benchmark:
            cfg.pipeline.prior = benchmarkPrior(cfg.world.from_family ? cfg.world.family
                                                                      : WorldFamily::apartment);
            break;
        case PriorSource::uniform: {
            // Vocabulary resolved per run from the world's labels.
            cfg.pipeline.prior = CompletionPrior{};
            break;
        }
        case PriorSource::file:
            cfg.pipeline.prior = loadPrior(cfg.prior_path);
            break;
    }
    return cfg;
}

ExperimentConfig loadExperimentConfig(const std::string& path,
                                      const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ParseError("config: cannot open \"" + path + "\"");
    std::stringstream buf;
    buf << in.rdbuf();
    return experimentConfigFromJsonText(buf.str(), overrides);
}

std::string experimentManifest(const ExperimentConfig& cfg) {
    ordered_json m;
    m["seed"] = cfg.seed;
    m["mode"] = cfg.mode == ExperimentMode::static_cpm ? "static" : "exploration";
    if (cfg.world.from_family) m["world"] = {{"family", worldFamilyName(cfg.world.family)}};
    else m["world"] = {{"path", cfg.world.path}};
    m["seeds"] = cfg.seeds;
    m["output_dir"] = cfg.output_dir;
    m["snapshots"] = cfg.snapshots;
    const auto& n = cfg.pipeline.noise;
    m["noise"] = {{"sigma_depth_rel", n.sigma_depth_rel},
                  {"sigma_trans", n.sigma_trans},
                  {"sigma_rot_deg", n.sigma_rot / kDegToRad},
                  {"sigma_logscale", n.sigma_logscale},
                  {"label_flip_prob", n.label_flip_prob},
                  {"metric_scale", n.metric_scale}};
    const auto& p = cfg.pipeline.predicates;
    m["predicates"] = {{"eps_z", p.eps_z},         {"gap_max", p.gap_max},
                       {"overlap_min", p.overlap_min}, {"inside_min", p.inside_min},
                       {"near_gap", p.near_gap},   {"h_sim", p.h_sim}};
    const auto& a = cfg.pipeline.association;
    m["association"] = {{"w_geometric", a.w_geometric},
                        {"w_semantic", a.w_semantic},
                        {"tau", a.tau},
                        {"min_points", a.min_points}};
    m["similarity"] = {{"mode", similarityModeName(cfg.pipeline.similarity.mode)},
                       {"tau_sem", cfg.pipeline.similarity.tau_sem},
                       {"table", cfg.pipeline.similarity.table_path}};
    m["match"] = {{"tau_geo", cfg.pipeline.match.tau_geo}};
    switch (cfg.prior_source) {
        case PriorSource::benchmark: m["prior"] = {{"builtin", "benchmark"}}; break;
        case PriorSource::uniform: m["prior"] = {{"builtin", "uniform"}}; break;
        case PriorSource::file: m["prior"] = {{"path", cfg.prior_path}}; break;
    }
    m["sensing"] = {{"ray_cols", cfg.pipeline.sensing_grid.cols},
                    {"ray_rows", cfg.pipeline.sensing_grid.rows}};
    const auto& k = cfg.pipeline.robot_intrinsics;
    m["intrinsics"] = {{"width", k.width}, {"height", k.height}, {"fx", k.fx},
                       {"fy", k.fy},       {"cx", k.cx},         {"cy", k.cy}};
    const auto& pl = cfg.pipeline.planner;
    m["planner"] = {{"samples", pl.samples},
                    {"ray_cols", pl.ray_cols},
                    {"ray_rows", pl.ray_rows},
                    {"yaw_bins", pl.yaw_bins},
                    {"steps", cfg.steps},
                    {"max_candidates", pl.max_candidates},
                    {"camera_height", pl.camera_height},
                    {"camera_pitch", pl.camera_pitch},
                    {"max_range", pl.max_range},
                    {"mode", cfg.pipeline.planner_mode == PlannerMode::info_gain ? "info_gain"
                                                                                 : "random"}};
    m["conditions"] = {{"cpm_enabled", cfg.cpm_enabled},
                       {"cameras", cfg.cameras},
                       {"oracle_association", cfg.oracle_association},
                       {"zero_noise", cfg.zero_noise}};
    if (cfg.start)
        m["start"] = {{"x", cfg.start->x}, {"y", cfg.start->y}, {"yaw", cfg.start->yaw}};
    return m.dump(2) + "\n";
}

namespace {

struct RunOutput {
    std::string scene_name;
    std::uint64_t seed = 0;
    std::vector<StepRecord> rows;
    std::vector<std::pair<std::string, std::string>> snapshots; // (filename, content)
};

std::string formatCsvRow(const std::string& scene, std::uint64_t seed, const StepRecord& row) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%llu,%d,%d,%.6f,%.6f,%.6f,%.6f\n", scene.c_str(),
                  static_cast<unsigned long long>(seed), row.step, row.node_count,
                  row.metrics.precision, row.metrics.recall, row.metrics.f1, row.gain_selected);
    return buf;
}

StartPose defaultStart(const WorldSpec& world) {
    for (int cy = 0; cy < world.navigable.rows; ++cy)
        for (int cx = 0; cx < world.navigable.cols; ++cx)
            if (world.navigable.navigable(cx, cy)) {
                const Vec2 c = world.navigable.cellCenter(cx, cy);
                return {c.x(), c.y(), 0.0};
            }
    throw ValidationError("world has no navigable cell");
}

RunOutput executeRun(const ExperimentConfig& cfg, std::uint64_t run_seed) {
    RunOutput out;
    out.seed = run_seed;

    WorldSpec world;
    if (cfg.world.from_family) {
        world = generateWorld(cfg.world.family, run_seed);
        out.scene_name = std::string(worldFamilyName(cfg.world.family)) + "-" +
                         std::to_string(run_seed);
    } else {
        world = loadScene(cfg.world.path);
        out.scene_name = fs::path(cfg.world.path).stem().string();
    }

    PipelineConfig pipeline = cfg.pipeline;
    pipeline.seed = run_seed;
    if (cfg.prior_source == PriorSource::uniform)
        pipeline.prior = CompletionPrior::uniform(world.labelVocabulary(), 0.05);

    if (cfg.mode == ExperimentMode::static_cpm) {
        const auto result = runStaticCpm(world, cfg.cameras, pipeline);
        StepRecord row;
        row.step = 0;
        row.node_count = static_cast<int>(result.graph.nodes.size());
        row.metrics = result.metrics;
        out.rows.push_back(row);
        if (cfg.snapshots) out.snapshots.emplace_back("graph.json", graphToJsonText(result.graph));
    } else {
        const StartPose start = cfg.start ? *cfg.start : defaultStart(world);
        std::vector<std::pair<std::string, std::string>>* snaps =
            cfg.snapshots ? &out.snapshots : nullptr;
        const auto result = runExploration(
            world, start, cfg.steps, cfg.cpm_enabled, cfg.cameras, pipeline,
            [snaps](int step, const SceneGraph& graph) {
                if (!snaps) return;
                char name[32];
                std::snprintf(name, sizeof(name), "step_%03d.json", step);
                snaps->emplace_back(name, graphToJsonText(graph));
            });
        out.rows = result.series.steps;
    }
    return out;
}

} // namespace

void runExperiment(const ExperimentConfig& cfg, int jobs) {
    std::vector<fs::path> written;
    const fs::path out_dir(cfg.output_dir);
    const bool out_dir_existed = fs::exists(out_dir);

    try {
        fs::create_directories(out_dir);

        std::vector<RunOutput> outputs(cfg.seeds.size());
        if (jobs <= 1 || cfg.seeds.size() <= 1) {
            for (size_t i = 0; i < cfg.seeds.size(); ++i) outputs[i] = executeRun(cfg, cfg.seeds[i]);
        } else {
            std::counting_semaphore<> slots(jobs);
            std::vector<std::future<RunOutput>> futures;
            for (size_t i = 0; i < cfg.seeds.size(); ++i) {
                futures.push_back(std::async(std::launch::async, [&cfg, &slots, seed = cfg.seeds[i]] {
                    slots.acquire();
                    auto result = executeRun(cfg, seed);
                    slots.release();
                    return result;
                }));
            }
            for (size_t i = 0; i < futures.size(); ++i) outputs[i] = futures[i].get();
        }

        auto writeFile = [&](const fs::path& path, const std::string& content) {
            fs::create_directories(path.parent_path());
            std::ofstream f(path, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write \"" + path.string() + "\"");
            f << content;
            written.push_back(path);
        };

        writeFile(out_dir / "manifest.json", experimentManifest(cfg));

        std::string csv = "scene,seed,step,nodes_pred,precision,recall,f1,gain_selected\n";
        for (const auto& run : outputs)
            for (const auto& row : run.rows) csv += formatCsvRow(run.scene_name, run.seed, row);
        writeFile(out_dir / "metrics.csv", csv);

        std::vector<double> final_p, final_r, final_f1, step0_r;
        for (const auto& run : outputs) {
            if (run.rows.empty()) continue;
            final_p.push_back(run.rows.back().metrics.precision);
            final_r.push_back(run.rows.back().metrics.recall);
            final_f1.push_back(run.rows.back().metrics.f1);
            step0_r.push_back(run.rows.front().metrics.recall);
        }
        char line[128];
        std::string summary;
        summary += "runs=" + std::to_string(outputs.size()) + "\n";
        auto emit = [&](const char* name, const MeanStd& ms) {
            std::snprintf(line, sizeof(line), "%s mean=%.6f std=%.6f\n", name, ms.mean, ms.stddev);
            summary += line;
        };
        emit("final_precision", aggregate(final_p));
        emit("final_recall", aggregate(final_r));
        emit("final_f1", aggregate(final_f1));
        emit("step0_recall", aggregate(step0_r));
        writeFile(out_dir / "summary.txt", summary);

        for (const auto& run : outputs) {
            const fs::path run_dir =
                out_dir / "snapshots" / (run.scene_name + "_" + std::to_string(run.seed));
            for (const auto& [name, content] : run.snapshots) writeFile(run_dir / name, content);
        }
    } catch (...) {
        // Remove partial outputs; leave a pre-existing directory in place.
        for (const auto& path : written) {
            std::error_code ec;
            fs::remove(path, ec);
        }
        if (!out_dir_existed) {
            std::error_code ec;
            fs::remove_all(out_dir, ec);
        }
        throw;
    }
}

} // namespace asg
