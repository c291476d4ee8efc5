#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "asg/planner.hpp"
#include "asg/sensing.hpp"
#include "asg/worldgen.hpp"
#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

using namespace asg;

namespace {

/// 8x2x1 corridor, res 0.25: all voxels free except two diagonally separated
/// unknown cells (disconnected, so they form two one-voxel clusters). The
/// lower pinhole ray crosses only cell (2,0), the upper one only cell (3,1).
/// Closed form: with p_occ = 1 and two equiprobable labels, each ray's
/// outcome is uniformly binary -> 1 bit per ray.
struct EnumerationWorld {
    CoverageMap cov{Vec3(0, 0, 0), Vec3(2.0, 0.5, 0.25), 0.25};
    Pose pose;
    Intrinsics intr;
    RayGrid grid{2, 1};
    CompletionPrior prior;
    SceneGraph context_graph;
    PlannerConfig cfg;
    std::int64_t unknown_a, unknown_b;

    EnumerationWorld() {
        unknown_a = cov.linear(2, 0, 0);
        unknown_b = cov.linear(3, 1, 0);
        for (std::int64_t i = 0; i < cov.voxelCount(); ++i)
            if (i != unknown_a && i != unknown_b) cov.markFree(i);

        // Rays leave (0, 0.25, 0.125) with slopes dy/dx = +-0.2: the lower ray
        // stays in row 0 past x = 0.5, the upper in row 1 past x = 0.75.
        pose = Pose::lookTowards(Vec3(0.0, 0.25, 0.125), 0.0, 0.0);
        intr.width = 2;
        intr.height = 1;
        intr.fx = intr.fy = 2.5;
        intr.cx = 1.0;
        intr.cy = 0.5;

        prior.vocabulary = {"a", "b", "ctx"};
        prior.rates = {0.5, 0.5, 0.0};
        prior.cooc = {{1, 1, 1}, {1, 1, 0}, {1, 1, 1}}; // cooc[b][ctx] = 0
        const Vec3 half(0.124, 0.124, 0.124);
        prior.sizes = {half, half, half};

        ObjectNode ctx;
        ctx.id = "ctx0";
        ctx.label = "ctx";
        ctx.centroid = Vec3(0.6, 0.25, 0.1);
        ctx.box = OrientedBox{ctx.centroid, Vec3(0.05, 0.05, 0.05), 0.0};
        ctx.points = {ctx.centroid};
        context_graph.nodes.push_back(ctx);

        cfg.samples = 32;
        cfg.phantom_z_cap = 0.25;
        cfg.slot_volume = 1.0;
    }
};

WorldSpec tinyWorld() {
    WorldSpec world;
    world.floor_z = 0.0;
    world.walls.push_back(OrientedBox{Vec3(0.5, 0.5, -0.05), Vec3(1.0, 1.0, 0.05), 0.0});
    world.navigable.origin = Vec2(0, 0);
    world.navigable.resolution = 0.25;
    world.navigable.cols = 4;
    world.navigable.rows = 4;
    world.navigable.cells.assign(16, 1);
    world.objects.push_back({"o0", "box", OrientedBox{Vec3(0.5, 0.5, 0.1), Vec3(0.1, 0.1, 0.1), 0.0}});
    return world;
}

} // namespace

TEST_CASE("coverage: open rays mark free, hits mark occupied, occupied wins") {
    const WorldSpec world = tinyWorld();
    CoverageMap cov = CoverageMap::forWorld(world);
    const Pose pose = Pose::lookTowards(Vec3(0.2, 0.5, 0.1), 0.0, 0.0);
    Intrinsics intr;
    const SimulatedFrame frame = renderObservation(world, pose, intr, RayGrid{16, 12});
    const double before = cov.fractionUnknown();
    updateCoverage(cov, frame, pose, 6.0);
    CHECK(cov.fractionUnknown() < before);

    const auto hit_voxel = cov.voxelAt(Vec3(0.4 /* box face */, 0.5, 0.1));
    REQUIRE(hit_voxel.has_value());
    CHECK(cov.state(*hit_voxel) == CoverageMap::State::occupied);
    CHECK(cov.labelName(cov.occupiedLabel(*hit_voxel)) == "box");

    // Later free evidence cannot revert an occupied voxel.
    cov.markFree(*hit_voxel);
    CHECK(cov.state(*hit_voxel) == CoverageMap::State::occupied);
}

TEST_CASE("coverage: unknown fraction is non-increasing along a random trajectory") {
    const WorldSpec world = generateWorld(WorldFamily::room, 5);
    CoverageMap cov = CoverageMap::forWorld(world);
    Rng rng(4, 4);
    double prev = cov.fractionUnknown();
    Intrinsics intr;
    for (int i = 0; i < 12; ++i) {
        const Pose pose = Pose::lookTowards(
            Vec3(rng.uniform(1.0, 6.0), rng.uniform(1.0, 6.0), 1.2), rng.uniform(0.0, 2 * M_PI), 0.26);
        const SimulatedFrame frame = renderObservation(world, pose, intr, RayGrid{16, 12});
        updateCoverage(cov, frame, pose, 6.0);
        const double now = cov.fractionUnknown();
        CHECK(now <= prev + 1e-12);
        prev = now;
    }
}

TEST_CASE("candidates: fully unknown map offers only the current cell") {
    const WorldSpec world = tinyWorld();
    const CoverageMap cov = CoverageMap::forWorld(world); // everything unknown
    PlannerConfig cfg;
    const auto cands = generateCandidates(cov, world.navigable, 1, 1, 0.0, cfg);
    CHECK(cands.size() == static_cast<size_t>(cfg.yaw_bins));
    for (const auto& c : cands) {
        CHECK(c.viewpoint.cell_x == 1);
        CHECK(c.viewpoint.cell_y == 1);
        CHECK(c.path_steps == 0);
    }
}

TEST_CASE("candidates: fully explored map offers free cells x yaw bins") {
    const WorldSpec world = tinyWorld();
    CoverageMap cov = CoverageMap::forWorld(world);
    for (std::int64_t i = 0; i < cov.voxelCount(); ++i) cov.markFree(i);
    PlannerConfig cfg;
    const auto cands = generateCandidates(cov, world.navigable, 0, 0, 0.0, cfg);
    CHECK(cands.size() == static_cast<size_t>(16 * cfg.yaw_bins));
}

TEST_CASE("candidates: all reachable per independent BFS oracle") {
    const WorldSpec world = tinyWorld();
    CoverageMap cov = CoverageMap::forWorld(world);
    for (std::int64_t i = 0; i < cov.voxelCount(); ++i) cov.markFree(i);
    // Rebuild with a vertical unknown barrier at cell x == 2.
    CoverageMap blocked(cov.origin(), cov.origin() + Vec3(cov.nx() * 0.25, cov.ny() * 0.25,
                                                          cov.nz() * 0.25), 0.25);
    for (std::int64_t i = 0; i < blocked.voxelCount(); ++i) {
        const Vec3 c = blocked.voxelCenter(i);
        const auto cell = world.navigable.cellOf(c.x(), c.y());
        if (cell && cell->first == 2) continue; // stays unknown
        blocked.markFree(i);
    }
    PlannerConfig cfg;
    const auto cands = generateCandidates(blocked, world.navigable, 0, 0, 0.0, cfg);

    // Oracle BFS over cells with x != 2.
    std::set<std::pair<int, int>> reachable;
    std::deque<std::pair<int, int>> queue{{0, 0}};
    reachable.insert({0, 0});
    while (!queue.empty()) {
        auto [cx, cy] = queue.front();
        queue.pop_front();
        const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int nx = cx + dx[k], ny = cy + dy[k];
            if (nx < 0 || nx >= 4 || ny < 0 || ny >= 4 || nx == 2) continue;
            if (reachable.insert({nx, ny}).second) queue.emplace_back(nx, ny);
        }
    }
    std::set<std::pair<int, int>> got;
    for (const auto& c : cands) got.insert({c.viewpoint.cell_x, c.viewpoint.cell_y});
    CHECK(got == reachable);
}

TEST_CASE("completions: no unknown voxels means no phantoms") {
    const WorldSpec world = tinyWorld();
    CoverageMap cov = CoverageMap::forWorld(world);
    for (std::int64_t i = 0; i < cov.voxelCount(); ++i) cov.markFree(i);
    const CompletionPrior prior = CompletionPrior::uniform({"chair"});
    Rng rng(1, 1);
    const auto samples = sampleCompletions(nullptr, cov, prior, 8, 0.0, PlannerConfig{}, rng);
    for (const auto& s : samples) CHECK(s.phantoms.empty());
}

TEST_CASE("completions: deterministic under a fixed seed") {
    EnumerationWorld ew;
    Rng a(9, 9), b(9, 9);
    const auto sa = sampleCompletions(nullptr, ew.cov, ew.prior, 16, 0.0, ew.cfg, a);
    const auto sb = sampleCompletions(nullptr, ew.cov, ew.prior, 16, 0.0, ew.cfg, b);
    REQUIRE(sa.size() == sb.size());
    for (size_t i = 0; i < sa.size(); ++i) {
        REQUIRE(sa[i].phantoms.size() == sb[i].phantoms.size());
        for (size_t j = 0; j < sa[i].phantoms.size(); ++j) {
            CHECK(sa[i].phantoms[j].label == sb[i].phantoms[j].label);
            CHECK(sa[i].phantoms[j].box.center == sb[i].phantoms[j].box.center);
        }
    }
}

TEST_CASE("completions: degenerate prior makes every phantom a chair") {
    EnumerationWorld ew;
    const CompletionPrior prior = CompletionPrior::uniform({"chair"}, 1.0, Vec3(0.124, 0.124, 0.124));
    Rng rng(2, 2);
    const auto samples = sampleCompletions(nullptr, ew.cov, prior, 16, 0.0, ew.cfg, rng);
    int total = 0;
    for (const auto& s : samples) {
        for (const auto& p : s.phantoms) {
            CHECK(p.label == "chair");
            ++total;
        }
    }
    CHECK(total == 32); // p_occ = 1: one phantom per cluster per sample
}

TEST_CASE("completions: phantoms only intersect unknown voxels") {
    const WorldSpec world = generateWorld(WorldFamily::room, 7);
    CoverageMap cov = CoverageMap::forWorld(world);
    Intrinsics intr;
    const Pose pose = Pose::lookTowards(Vec3(2.0, 2.0, 1.2), 0.7, 0.26);
    updateCoverage(cov, renderObservation(world, pose, intr, RayGrid{32, 24}), pose, 6.0);
    const CompletionPrior prior = benchmarkPrior(WorldFamily::room);
    PlannerConfig cfg;
    Rng rng(3, 3);
    const auto samples = sampleCompletions(nullptr, cov, prior, 8, world.floor_z, cfg, rng);
    for (const auto& s : samples) {
        for (const auto& p : s.phantoms) {
            const Vec3 lo = p.box.center - p.box.half_extents + Vec3(1e-9, 1e-9, 1e-9);
            const Vec3 hi = p.box.center + p.box.half_extents - Vec3(1e-9, 1e-9, 1e-9);
            for (double x = lo.x(); x <= hi.x() + 0.24; x += 0.25) {
                for (double y = lo.y(); y <= hi.y() + 0.24; y += 0.25) {
                    for (double z = lo.z(); z <= hi.z() + 0.24; z += 0.25) {
                        const Vec3 q(std::min(x, hi.x()), std::min(y, hi.y()), std::min(z, hi.z()));
                        const auto idx = cov.voxelAt(q);
                        REQUIRE(idx.has_value());
                        CHECK(cov.state(*idx) == CoverageMap::State::unknown);
                    }
                }
            }
        }
    }
}

TEST_CASE("prediction: identical samples give point masses everywhere") {
    EnumerationWorld ew;
    // All samples share one fixed phantom: distribution must be a point mass.
    std::vector<HypotheticalWorld> samples(8);
    for (auto& s : samples)
        s.phantoms.push_back(
            {"a", OrientedBox{ew.cov.voxelCenter(ew.unknown_a), Vec3(0.124, 0.124, 0.124), 0.0}});
    auto obs = predictedDistribution(ew.pose, ew.intr, ew.grid, samples, ew.cov, 6.0);
    for (size_t r = 0; r < obs.rays.size(); ++r) {
        CHECK(obs.rays[r].size() == 1);
        CHECK(obs.rayEntropyBits(r) == 0.0);
        int total = 0;
        for (const auto& [o, c] : obs.rays[r]) total += c;
        CHECK(total == obs.sample_count);
    }
}

TEST_CASE("prediction: ray hitting known occupied space is a point mass on its label") {
    EnumerationWorld ew;
    // Occupy the voxel in front of ray 1's path before the unknown cell.
    const auto idx = ew.cov.voxelAt(Vec3(0.375, 0.125, 0.125));
    REQUIRE(idx.has_value());
    CoverageMap cov2(Vec3(0, 0, 0), Vec3(2.0, 0.5, 0.25), 0.25);
    for (std::int64_t i = 0; i < cov2.voxelCount(); ++i)
        if (i != ew.unknown_a && i != ew.unknown_b && i != *idx) cov2.markFree(i);
    cov2.markOccupied(*idx, cov2.labelId("wall"));

    std::vector<HypotheticalWorld> samples(4);
    auto obs = predictedDistribution(ew.pose, ew.intr, ew.grid, samples, cov2, 6.0);
    // Ray through row y=0.125 hits the wall voxel in every sample.
    bool found_wall_ray = false;
    for (size_t r = 0; r < obs.rays.size(); ++r) {
        if (obs.rays[r].size() == 1 && obs.rays[r][0].first == cov2.findLabelId("wall"))
            found_wall_ray = true;
    }
    CHECK(found_wall_ray);
}

TEST_CASE("prediction: empirical distribution approaches enumeration (TV < 0.05 at M=1000)") {
    EnumerationWorld ew;
    Rng rng(123, 7);
    const auto samples = sampleCompletions(nullptr, ew.cov, ew.prior, 1000, 0.0, ew.cfg, rng);
    auto obs = predictedDistribution(ew.pose, ew.intr, ew.grid, samples, ew.cov, 6.0);
    REQUIRE(obs.rays.size() == 2);
    const auto a_id = ew.cov.findLabelId("a");
    const auto b_id = ew.cov.findLabelId("b");
    REQUIRE(a_id.has_value());
    REQUIRE(b_id.has_value());
    for (size_t r = 0; r < 2; ++r) {
        double pa = 0.0, pb = 0.0, sum = 0.0;
        for (const auto& [o, c] : obs.rays[r]) {
            const double p = static_cast<double>(c) / obs.sample_count;
            sum += p;
            if (o == *a_id) pa = p;
            if (o == *b_id) pb = p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        // Exact distribution is {a: 0.5, b: 0.5}; total variation distance.
        const double tv = 0.5 * (std::abs(pa - 0.5) + std::abs(pb - 0.5));
        CHECK(tv < 0.05);
    }
}

TEST_CASE("info gain: closed-form 1 bit per uniformly-binary ray at M=1000") {
    EnumerationWorld ew;
    Rng prior_rng(55, 1), post_rng(55, 2);
    const auto prior_samples = sampleCompletions(nullptr, ew.cov, ew.prior, 1000, 0.0, ew.cfg, prior_rng);
    const auto post_samples =
        sampleCompletions(&ew.context_graph, ew.cov, ew.prior, 1000, 0.0, ew.cfg, post_rng);

    Viewpoint vp;
    const auto result = infoGain(vp, 0, ew.pose, ew.intr, ew.grid, prior_samples, post_samples,
                                 ew.cov, 6.0);
    // Conditioned samples are deterministic (cooc kills label b near ctx).
    CHECK(result.h_posterior == 0.0);
    CHECK(result.gain == doctest::Approx(2.0).epsilon(0.025)); // 2 rays x 1 bit
}

TEST_CASE("info gain: fully determined frustum gives exactly zero") {
    EnumerationWorld ew;
    CoverageMap all_free(Vec3(0, 0, 0), Vec3(2.0, 0.5, 0.25), 0.25);
    for (std::int64_t i = 0; i < all_free.voxelCount(); ++i) all_free.markFree(i);
    std::vector<HypotheticalWorld> empty_samples(16);
    Viewpoint vp;
    const auto result = infoGain(vp, 0, ew.pose, ew.intr, ew.grid, empty_samples, empty_samples,
                                 all_free, 6.0);
    CHECK(result.h_prior == 0.0);
    CHECK(result.h_posterior == 0.0);
    CHECK(result.gain == 0.0);
}

TEST_CASE("info gain: posterior point masses give gain equal to prior entropy") {
    EnumerationWorld ew;
    Rng prior_rng(66, 1);
    const auto prior_samples = sampleCompletions(nullptr, ew.cov, ew.prior, 200, 0.0, ew.cfg, prior_rng);
    std::vector<HypotheticalWorld> fixed(200);
    for (auto& s : fixed)
        s.phantoms.push_back(
            {"a", OrientedBox{ew.cov.voxelCenter(ew.unknown_a), Vec3(0.124, 0.124, 0.124), 0.0}});
    Viewpoint vp;
    const auto r = infoGain(vp, 0, ew.pose, ew.intr, ew.grid, prior_samples, fixed, ew.cov, 6.0);
    CHECK(r.h_posterior == 0.0);
    CHECK(r.gain == r.h_prior);
    CHECK(r.h_prior >= 0.0);
}

TEST_CASE("entropy bounds: per-ray entropy within [0, log2(outcomes)]") {
    EnumerationWorld ew;
    Rng rng(77, 1);
    const auto samples = sampleCompletions(nullptr, ew.cov, ew.prior, 64, 0.0, ew.cfg, rng);
    auto obs = predictedDistribution(ew.pose, ew.intr, ew.grid, samples, ew.cov, 6.0);
    const double cap = std::log2(static_cast<double>(ew.prior.vocabulary.size()) + 2.0);
    for (size_t r = 0; r < obs.rays.size(); ++r) {
        CHECK(obs.rayEntropyBits(r) >= 0.0);
        CHECK(obs.rayEntropyBits(r) <= cap);
    }
}

TEST_CASE("info gain invariant under label permutation") {
    EnumerationWorld ew;
    Rng r1(88, 1), r2(88, 1);
    const auto samples = sampleCompletions(nullptr, ew.cov, ew.prior, 128, 0.0, ew.cfg, r1);
    auto renamed = sampleCompletions(nullptr, ew.cov, ew.prior, 128, 0.0, ew.cfg, r2);
    for (auto& s : renamed)
        for (auto& p : s.phantoms) p.label = (p.label == "a") ? "b" : (p.label == "b" ? "a" : p.label);
    Viewpoint vp;
    const auto ga = infoGain(vp, 0, ew.pose, ew.intr, ew.grid, samples, samples, ew.cov, 6.0);
    const auto gb = infoGain(vp, 0, ew.pose, ew.intr, ew.grid, renamed, renamed, ew.cov, 6.0);
    CHECK(ga.h_prior == doctest::Approx(gb.h_prior).epsilon(1e-12));
}

TEST_CASE("select NBV: argmax, tie-breaks, scaling invariance") {
    auto make = [](double gain, int path, int cx, int cy, int bin) {
        InfoGainResult r;
        r.gain = gain;
        r.path_steps = path;
        r.viewpoint.cell_x = cx;
        r.viewpoint.cell_y = cy;
        r.viewpoint.yaw_bin = bin;
        return r;
    };
    std::vector<InfoGainResult> single = {make(0.5, 3, 1, 1, 0)};
    CHECK(selectNbv(single) == 0);

    std::vector<InfoGainResult> three = {make(0.5, 1, 0, 0, 0), make(2.0, 9, 5, 5, 1),
                                         make(1.0, 0, 2, 2, 2)};
    CHECK(selectNbv(three) == 1);

    // Positive scaling never changes the argmax (property, 200 random lists).
    Rng rng(5, 6);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<InfoGainResult> results;
        const int n = 2 + static_cast<int>(rng.uniformInt(10));
        for (int i = 0; i < n; ++i)
            results.push_back(make(rng.uniform(-0.2, 3.0), static_cast<int>(rng.uniformInt(20)),
                                   static_cast<int>(rng.uniformInt(10)),
                                   static_cast<int>(rng.uniformInt(10)), static_cast<int>(rng.uniformInt(8))));
        const size_t before = selectNbv(results);
        const double scale = rng.uniform(0.1, 50.0);
        for (auto& r : results) r.gain *= scale;
        CHECK(selectNbv(results) == before);
    }

    // Ties on clamped gain: shorter path wins, then lexicographic key.
    std::vector<InfoGainResult> ties = {make(-0.1, 4, 3, 3, 3), make(-0.5, 2, 9, 9, 9),
                                        make(0.0, 2, 1, 2, 3)};
    CHECK(selectNbv(ties) == 2); // all clamp to 0; path 2 ties; (1,2,3) < (9,9,9)

    CHECK_THROWS_AS(selectNbv({}), std::invalid_argument);
}
