#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "asg/eval.hpp"
#include "asg/worldgen.hpp"
#include "helpers.hpp"
#include "pipeline_oracles.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace asg;

namespace {

ObjectNode simpleNode(const std::string& id, const std::string& label, const Vec3& centroid) {
    ObjectNode n;
    n.id = id;
    n.label = label;
    n.label_histogram[label] = 1;
    n.centroid = centroid;
    n.box = OrientedBox{centroid, Vec3(0.1, 0.1, 0.1), 0.0};
    n.points = {centroid};
    return n;
}

PipelineConfig basePipeline() {
    PipelineConfig cfg;
    cfg.prior = benchmarkPrior(WorldFamily::room);
    cfg.planner.samples = 8;
    cfg.planner.max_candidates = 12;
    cfg.seed = 1;
    return cfg;
}

} // namespace

TEST_CASE("semantic similarity: exact mode") {
    SimilarityConfig cfg;
    CHECK(semanticSimilarity("cup", "cup", cfg) == 1.0);
    CHECK(semanticSimilarity("cup", "table", cfg) == 0.0);
}

TEST_CASE("semantic similarity: synonym table") {
    const auto path = std::filesystem::temp_directory_path() / "asg_syn_test.json";
    {
        std::ofstream out(path);
        out << R"({"classes": [["cup", "mug"], ["table", "desk"]]})";
    }
    SimilarityConfig cfg;
    cfg.mode = SimilarityMode::synonym_table;
    cfg.table_path = path.string();
    cfg.loadTables();
    CHECK(semanticSimilarity("cup", "mug", cfg) == 1.0);
    CHECK(semanticSimilarity("cup", "table", cfg) == 0.0);
    CHECK(semanticSimilarity("unlisted", "unlisted", cfg) == 1.0);
    std::filesystem::remove(path);
}

TEST_CASE("semantic similarity: embedding table, identical vectors give 1") {
    const auto path = std::filesystem::temp_directory_path() / "asg_emb_test.json";
    {
        std::ofstream out(path);
        out << R"({"embeddings": {"cup": [0.2, 0.5, 0.1], "mug": [0.2, 0.5, 0.1], "table": [-0.5, 0.2, 0.9]}})";
    }
    SimilarityConfig cfg;
    cfg.mode = SimilarityMode::embedding_table;
    cfg.table_path = path.string();
    cfg.loadTables();
    CHECK(semanticSimilarity("cup", "mug", cfg) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(semanticSimilarity("cup", "table", cfg) < 1.0);
    CHECK(semanticSimilarity("cup", "unknown_label", cfg) == 0.0); // warns once
    std::filesystem::remove(path);
}

TEST_CASE("match nodes: identical graphs match perfectly") {
    SceneGraph g;
    for (int i = 0; i < 5; ++i)
        g.nodes.push_back(simpleNode("id" + std::to_string(i), "label" + std::to_string(i),
                                     Vec3(i, 0, 0)));
    SimilarityConfig sim;
    const auto matches = matchNodes(g, g, sim, MatchConfig{});
    CHECK(matches.size() == 5);
    for (const auto& m : matches) CHECK(m.pred_id == m.gt_id);
}

TEST_CASE("match nodes: empty prediction matches nothing") {
    SceneGraph empty;
    SceneGraph gt;
    gt.nodes.push_back(simpleNode("a", "cup", Vec3(0, 0, 0)));
    SimilarityConfig sim;
    CHECK(matchNodes(empty, gt, sim, MatchConfig{}).empty());
}

TEST_CASE("match nodes: every reported match satisfies both thresholds") {
    Rng rng(3, 3);
    SimilarityConfig sim;
    MatchConfig cfg;
    for (int trial = 0; trial < 50; ++trial) {
        SceneGraph pred, gt;
        const int np = 1 + static_cast<int>(rng.uniformInt(6));
        const int ng = 1 + static_cast<int>(rng.uniformInt(6));
        for (int i = 0; i < np; ++i)
            pred.nodes.push_back(simpleNode("p" + std::to_string(i),
                                            "l" + std::to_string(rng.uniformInt(3)),
                                            asg::testing::randomPoint(rng, 1.0)));
        for (int j = 0; j < ng; ++j)
            gt.nodes.push_back(simpleNode("g" + std::to_string(j),
                                          "l" + std::to_string(rng.uniformInt(3)),
                                          asg::testing::randomPoint(rng, 1.0)));
        const auto matches = matchNodes(pred, gt, sim, cfg);
        std::set<std::string> used_p, used_g;
        for (const auto& m : matches) {
            CHECK(used_p.insert(m.pred_id).second); // one-to-one
            CHECK(used_g.insert(m.gt_id).second);
            CHECK(m.similarity >= cfg.tau_sem);
            CHECK(m.distance <= cfg.tau_geo);
            CHECK((pred.find(m.pred_id)->centroid - gt.find(m.gt_id)->centroid).norm() ==
                  doctest::Approx(m.distance));
        }
    }
}

TEST_CASE("match nodes: cardinality equals exhaustive optimum on small graphs") {
    Rng rng(4, 4);
    SimilarityConfig sim;
    MatchConfig cfg;
    for (int trial = 0; trial < 100; ++trial) {
        SceneGraph pred, gt;
        const int np = 1 + static_cast<int>(rng.uniformInt(8));
        const int ng = 1 + static_cast<int>(rng.uniformInt(8));
        for (int i = 0; i < np; ++i)
            pred.nodes.push_back(simpleNode("p" + std::to_string(i),
                                            "l" + std::to_string(rng.uniformInt(2)),
                                            asg::testing::randomPoint(rng, 0.8)));
        for (int j = 0; j < ng; ++j)
            gt.nodes.push_back(simpleNode("g" + std::to_string(j),
                                          "l" + std::to_string(rng.uniformInt(2)),
                                          asg::testing::randomPoint(rng, 0.8)));
        const auto matches = matchNodes(pred, gt, sim, cfg);
        const int brute = asg::testing::bruteForceMatchingSize(pred, gt, sim, cfg);
        CHECK(static_cast<int>(matches.size()) == brute);
    }
}

TEST_CASE("prf arithmetic") {
    const Metrics perfect = prfFromCounts(7, 7, 7);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    const Metrics m = prfFromCounts(5, 10, 20);
    CHECK(m.precision == doctest::Approx(0.5));
    CHECK(m.recall == doctest::Approx(0.25));
    CHECK(m.f1 == doctest::Approx(1.0 / 3.0));

    const Metrics zero = prfFromCounts(0, 4, 9);
    CHECK(zero.f1 == 0.0);

    const Metrics no_pred = prfFromCounts(0, 0, 9);
    CHECK(no_pred.precision == 0.0);
}

TEST_CASE("aggregate: mean and sample standard deviation") {
    const auto agg = aggregate({1.0, 2.0, 3.0, 4.0});
    CHECK(agg.mean == doctest::Approx(2.5));
    CHECK(agg.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(aggregate({}).mean == 0.0);
    CHECK(aggregate({2.0}).stddev == 0.0);
}

TEST_CASE("static CPM: zero noise + oracle association hits the visibility oracle") {
    const WorldSpec world = generateWorld(WorldFamily::room, 11);
    PipelineConfig cfg = basePipeline();
    cfg.zero_noise = true;
    cfg.association.oracle = true;

    const auto& cam = world.external_cameras[0];
    const auto eligible = asg::testing::eligibleObjects(world, cam.pose, cam.intrinsics,
                                                        cfg.sensing_grid, cfg.association.min_points);
    const auto result = runStaticCpm(world, {"cam_0"}, cfg);
    CHECK(result.metrics.pred_count == static_cast<int>(eligible.size()));
    CHECK(result.metrics.precision == 1.0);
    CHECK(result.metrics.recall ==
          doctest::Approx(static_cast<double>(eligible.size()) / world.objects.size()));
}

TEST_CASE("static CPM: camera seeing nothing yields an empty graph") {
    WorldSpec world = generateWorld(WorldFamily::room, 11);
    // Repoint the camera straight up: nothing to hit (no ceiling).
    world.external_cameras[0].pose =
        Pose::lookTowards(world.external_cameras[0].pose.translation, 0.0, -M_PI / 2.0);
    PipelineConfig cfg = basePipeline();
    cfg.zero_noise = true;
    const auto result = runStaticCpm(world, {"cam_0"}, cfg);
    CHECK(result.graph.nodes.empty());
    CHECK(result.metrics.recall == 0.0);
}

TEST_CASE("static CPM: adding cameras never decreases recall under ZN + oracle") {
    PipelineConfig cfg = basePipeline();
    cfg.zero_noise = true;
    cfg.association.oracle = true;
    for (std::uint64_t seed : {21ull, 22ull}) {
        const WorldSpec world = generateWorld(WorldFamily::room, seed);
        double prev = -1.0;
        for (const auto& cams : std::vector<std::vector<std::string>>{
                 {"cam_0"}, {"cam_0", "cam_1"}, {"cam_0", "cam_1", "cam_2"}}) {
            const auto result = runStaticCpm(world, cams, cfg);
            CHECK(result.metrics.recall >= prev);
            prev = result.metrics.recall;
        }
    }
    CHECK_THROWS_AS(runStaticCpm(generateWorld(WorldFamily::room, 21), {}, cfg),
                    std::invalid_argument);
}

TEST_CASE("exploration: steps=0 yields exactly the step-0 record") {
    const WorldSpec world = generateWorld(WorldFamily::room, 11);
    PipelineConfig cfg = basePipeline();
    // Pick any navigable cell for the start.
    StartPose start;
    bool found = false;
    for (int cy = 0; cy < world.navigable.rows && !found; ++cy)
        for (int cx = 0; cx < world.navigable.cols && !found; ++cx)
            if (world.navigable.navigable(cx, cy)) {
                const Vec2 c = world.navigable.cellCenter(cx, cy);
                start = {c.x(), c.y(), 0.0};
                found = true;
            }
    REQUIRE(found);
    const auto result = runExploration(world, start, 0, false, {}, cfg);
    REQUIRE(result.series.steps.size() == 1);
    CHECK(result.series.steps[0].step == 0);
    CHECK_FALSE(result.series.steps[0].has_selection);
}

TEST_CASE("exploration: off-grid start pose is rejected") {
    const WorldSpec world = generateWorld(WorldFamily::room, 11);
    PipelineConfig cfg = basePipeline();
    CHECK_THROWS_AS(runExploration(world, {-5.0, -5.0, 0.0}, 2, false, {}, cfg), ValidationError);
}

TEST_CASE("exploration: identical seeds give bit-identical series") {
    const WorldSpec world = generateWorld(WorldFamily::room, 13);
    PipelineConfig cfg = basePipeline();
    cfg.planner.max_candidates = 10;
    cfg.planner.samples = 6;
    StartPose start{world.navigable.cellCenter(4, 4).x(), world.navigable.cellCenter(4, 4).y(), 0.5};
    REQUIRE(world.navigable.navigable(4, 4));

    const auto a = runExploration(world, start, 3, false, {}, cfg);
    const auto b = runExploration(world, start, 3, false, {}, cfg);
    REQUIRE(a.series.steps.size() == b.series.steps.size());
    for (size_t i = 0; i < a.series.steps.size(); ++i) {
        CHECK(a.series.steps[i].metrics.recall == b.series.steps[i].metrics.recall);
        CHECK(a.series.steps[i].node_count == b.series.steps[i].node_count);
        CHECK(a.series.steps[i].gain_selected == b.series.steps[i].gain_selected);
        if (a.series.steps[i].has_selection)
            CHECK(a.series.steps[i].selected.key() == b.series.steps[i].selected.key());
    }
    CHECK(graphToJsonText(a.graph) == graphToJsonText(b.graph));
}

TEST_CASE("exploration: 3 steps produce 4 records with selections on all but the last") {
    const WorldSpec world = generateWorld(WorldFamily::room, 13);
    PipelineConfig cfg = basePipeline();
    cfg.planner.max_candidates = 10;
    cfg.planner.samples = 6;
    StartPose start{world.navigable.cellCenter(4, 4).x(), world.navigable.cellCenter(4, 4).y(), 0.5};
    const auto result = runExploration(world, start, 3, false, {}, cfg);
    REQUIRE(result.series.steps.size() == 4);
    for (size_t i = 0; i + 1 < result.series.steps.size(); ++i)
        CHECK(result.series.steps[i].has_selection);
    CHECK_FALSE(result.series.steps.back().has_selection);
}

TEST_CASE("exploration: CPM initialization never hurts step-0 recall (ZN + oracle)") {
    PipelineConfig cfg = basePipeline();
    cfg.zero_noise = true;
    cfg.association.oracle = true;
    for (std::uint64_t seed : {31ull, 32ull, 33ull}) {
        const WorldSpec world = generateWorld(WorldFamily::apartment, seed);
        // Start far away from the overhead camera.
        const Vec2 cam_xy(world.external_cameras[0].pose.translation.x(),
                          world.external_cameras[0].pose.translation.y());
        StartPose start;
        double best = -1.0;
        for (int cy = 0; cy < world.navigable.rows; ++cy)
            for (int cx = 0; cx < world.navigable.cols; ++cx) {
                if (!world.navigable.navigable(cx, cy)) continue;
                const Vec2 c = world.navigable.cellCenter(cx, cy);
                const double d = (c - cam_xy).norm();
                if (d > best) {
                    best = d;
                    start = {c.x(), c.y(), 0.0};
                }
            }
        const auto without = runExploration(world, start, 0, false, {}, cfg);
        const auto with = runExploration(world, start, 0, true, {"cam_0"}, cfg);
        CHECK(with.series.steps[0].metrics.recall >= without.series.steps[0].metrics.recall);
        CHECK(with.series.steps[0].node_count >= without.series.steps[0].node_count);
    }
}
