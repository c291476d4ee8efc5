#include "asg/config.hpp"
#include "asg/eval.hpp"
#include "asg/graph.hpp"
#include "asg/world.hpp"
#include "asg/worldgen.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace asg;

/// Scene files carry "objects", graph snapshots carry "nodes".
bool looksLikeScene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open \"" + path + "\"");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto text = buf.str();
    const auto objects = text.find("\"objects\"");
    const auto nodes = text.find("\"nodes\"");
    if (objects == std::string::npos && nodes == std::string::npos)
        throw ParseError("\"" + path + "\": neither a scene nor a graph file");
    return nodes == std::string::npos || (objects != std::string::npos && objects < nodes);
}

SceneGraph loadGraphOrScene(const std::string& path, const PredicateConfig& predicates) {
    if (looksLikeScene(path)) return groundTruthGraph(loadScene(path), predicates);
    return loadGraph(path);
}

int cmdGenWorld(const std::string& family_name, std::uint64_t seed, const std::string& out_path) {
    const WorldFamily family = worldFamilyFromName(family_name);
    saveScene(generateWorld(family, seed), out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmdRun(const std::string& config_path, const std::vector<std::string>& overrides, int jobs) {
    const ExperimentConfig cfg = loadExperimentConfig(config_path, overrides);
    runExperiment(cfg, jobs);
    std::cout << "wrote " << cfg.output_dir << "/metrics.csv\n";
    return 0;
}

int cmdEval(const std::string& pred_path, const std::string& gt_path, double tau_sem, double tau_geo,
            const std::string& out_path) {
    PredicateConfig predicates;
    const SceneGraph pred = loadGraphOrScene(pred_path, predicates);
    const SceneGraph gt = loadGraphOrScene(gt_path, predicates);
    SimilarityConfig sim;
    sim.tau_sem = tau_sem;
    MatchConfig match;
    match.tau_sem = tau_sem;
    match.tau_geo = tau_geo;
    const auto matches = matchNodes(pred, gt, sim, match);
    const Metrics metrics = prf(matches, pred, gt);

    std::string report;
    char line[160];
    std::snprintf(line, sizeof(line), "precision=%.6f recall=%.6f f1=%.6f matched=%d pred=%d gt=%d\n",
                  metrics.precision, metrics.recall, metrics.f1, metrics.matched,
                  metrics.pred_count, metrics.gt_count);
    report += line;
    for (const auto& m : matches) {
        std::snprintf(line, sizeof(line), "match %s -> %s sim=%.4f dist=%.4f\n", m.pred_id.c_str(),
                      m.gt_id.c_str(), m.similarity, m.distance);
        report += line;
    }
    std::cout << report;
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write \"" + out_path + "\"");
        out << report;
    }
    return 0;
}

int cmdEdges(const std::string& input_path, const PredicateConfig& predicates) {
    const SceneGraph graph = loadGraphOrScene(input_path, predicates);
    const auto edges = deriveEdges(graph.nodes, predicates);
    for (const auto& e : edges)
        std::cout << e.src << " " << relationName(e.relation) << " " << e.dst << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"active scene-graph exploration on synthetic worlds"};
    app.require_subcommand(1);

    // gen-world
    auto* gen = app.add_subcommand("gen-world", "generate a benchmark scene file");
    std::string family = "apartment";
    std::uint64_t seed = 0;
    std::string out_path = "scene.json";
    gen->add_option("--family", family, "apartment | room")->required();
    gen->add_option("--seed", seed, "generator seed")->required();
    gen->add_option("--out", out_path, "output scene file")->required();

    // run
    auto* run = app.add_subcommand("run", "execute an experiment config");
    std::string config_path;
    std::vector<std::string> overrides;
    int jobs = 1;
    bool oracle_flag = false, zero_noise_flag = false;
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--set", overrides, "dotted-path override, e.g. planner.steps=10");
    run->add_option("--jobs", jobs, "parallel runs across seeds/scenes");
    run->add_flag("--oracle-association", oracle_flag, "match detections by ground-truth ids");
    run->add_flag("--zero-noise", zero_noise_flag, "disable all sensing noise");

    // eval
    auto* eval = app.add_subcommand("eval", "match a predicted graph against ground truth");
    std::string pred_path, gt_path, eval_out;
    double tau_sem = 0.5, tau_geo = 0.5;
    eval->add_option("--pred", pred_path, "predicted graph file")->required();
    eval->add_option("--gt", gt_path, "ground-truth graph or scene file")->required();
    eval->add_option("--tau-sem", tau_sem, "semantic similarity threshold");
    eval->add_option("--tau-geo", tau_geo, "centroid distance threshold (m)");
    eval->add_option("--out", eval_out, "also write the report here");

    // edges
    auto* edges = app.add_subcommand("edges", "derive relation edges for a graph or scene");
    std::string edges_input;
    PredicateConfig predicates;
    edges->add_option("--input", edges_input, "graph or scene file")->required();
    edges->add_option("--eps-z", predicates.eps_z, "max vertical contact gap (m)");
    edges->add_option("--gap-max", predicates.gap_max, "max under/over gap (m)");
    edges->add_option("--overlap-min", predicates.overlap_min, "min footprint overlap ratio");
    edges->add_option("--inside-min", predicates.inside_min, "min containment ratio");
    edges->add_option("--near-gap", predicates.near_gap, "max next_to footprint gap (m)");
    edges->add_option("--h-sim", predicates.h_sim, "max next_to height difference (m)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (gen->parsed()) return cmdGenWorld(family, seed, out_path);
        if (run->parsed()) {
            if (oracle_flag) overrides.push_back("conditions.oracle_association=true");
            if (zero_noise_flag) overrides.push_back("conditions.zero_noise=true");
            return cmdRun(config_path, overrides, jobs);
        }
        if (eval->parsed()) return cmdEval(pred_path, gt_path, tau_sem, tau_geo, eval_out);
        if (edges->parsed()) return cmdEdges(edges_input, predicates);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
