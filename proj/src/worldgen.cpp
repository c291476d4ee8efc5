#include "asg/worldgen.hpp"

#include "asg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace asg {

WorldFamily worldFamilyFromName(const std::string& name) {
    if (name == "apartment") return WorldFamily::apartment;
    if (name == "room") return WorldFamily::room;
    throw ValidationError("unknown world family \"" + name + "\" (expected apartment or room)");
}

const char* worldFamilyName(WorldFamily family) {
    return family == WorldFamily::apartment ? "apartment" : "room";
}

namespace {

constexpr double kWallThickness = 0.1;
constexpr double kWallHeight = 2.5;
constexpr double kNavResolution = 0.25;
constexpr double kRobotRadius = 0.2;

struct ItemSpec {
    const char* label;
    Vec3 half; // base half extents
};

// Furniture small enough that any single-view surface patch centroid stays
// within the 0.5 m matching radius of the box center (half diagonal < 0.48).
const ItemSpec kAptFurniture[] = {
    {"table", {0.30, 0.22, 0.25}},  {"desk", {0.28, 0.20, 0.26}},
    {"shelf", {0.25, 0.14, 0.30}},  {"cabinet", {0.24, 0.20, 0.28}},
    {"chair", {0.17, 0.17, 0.28}},  {"stand", {0.18, 0.18, 0.24}},
};

const ItemSpec kAptItems[] = {
    {"cup", {0.04, 0.04, 0.05}},    {"book", {0.10, 0.07, 0.02}},
    {"plant", {0.08, 0.08, 0.14}},  {"bottle", {0.035, 0.035, 0.10}},
    {"laptop", {0.15, 0.10, 0.015}}, {"bowl", {0.07, 0.07, 0.04}},
    {"lamp", {0.06, 0.06, 0.15}},   {"vase", {0.05, 0.05, 0.12}},
    {"phone", {0.04, 0.02, 0.008}}, {"box", {0.10, 0.10, 0.08}},
};

const ItemSpec kAptClutter[] = {
    {"shoe", {0.05, 0.11, 0.04}},   {"ball", {0.06, 0.06, 0.06}},
    {"basket", {0.12, 0.12, 0.10}}, {"toy", {0.06, 0.05, 0.04}},
    {"bag", {0.14, 0.08, 0.10}},
};

const ItemSpec kRoomFurniture[] = {
    {"sofa", {0.85, 0.38, 0.38}},      {"bed", {0.95, 0.70, 0.28}},
    {"table", {0.55, 0.35, 0.36}},     {"wardrobe", {0.45, 0.28, 0.44}},
    {"bookshelf", {0.40, 0.15, 0.44}}, {"armchair", {0.35, 0.33, 0.38}},
    {"desk", {0.55, 0.30, 0.37}},      {"tv_stand", {0.60, 0.20, 0.25}},
    {"dresser", {0.40, 0.22, 0.40}},   {"rug", {0.80, 0.60, 0.02}},
};

const ItemSpec kRoomClutter[] = {
    {"floor_lamp", {0.12, 0.12, 0.40}}, {"plant", {0.15, 0.15, 0.30}},
    {"stool", {0.18, 0.18, 0.22}},      {"basket", {0.14, 0.14, 0.12}},
    {"box", {0.15, 0.15, 0.12}},        {"cup", {0.04, 0.04, 0.05}},
    {"book", {0.10, 0.07, 0.02}},       {"lamp", {0.06, 0.06, 0.15}},
};

struct Builder {
    WorldSpec world;
    double width = 0.0, height = 0.0;
    int next_id = 0;

    std::string freshId() {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "obj_%03d", next_id++);
        return buf;
    }

    void addOuterWalls() {
        const double hz = kWallHeight / 2.0;
        const double ht = kWallThickness / 2.0;
        // Centered on the boundary lines of [0,width] x [0,height].
        world.walls.push_back({{width / 2.0, 0.0, hz}, {width / 2.0 + ht, ht, hz}, 0.0});
        world.walls.push_back({{width / 2.0, height, hz}, {width / 2.0 + ht, ht, hz}, 0.0});
        world.walls.push_back({{0.0, height / 2.0, hz}, {ht, height / 2.0 + ht, hz}, 0.0});
        world.walls.push_back({{width, height / 2.0, hz}, {ht, height / 2.0 + ht, hz}, 0.0});
        // Floor slab just below floor_z so downward rays terminate.
        world.walls.push_back(
            {{width / 2.0, height / 2.0, -0.05}, {width / 2.0 + 0.3, height / 2.0 + 0.3, 0.05}, 0.0});
    }

    /// Interior wall along x = at, spanning the full depth with a door gap.
    void addInteriorWallX(double at, double gap_center, double gap_width) {
        const double hz = kWallHeight / 2.0;
        const double ht = kWallThickness / 2.0;
        const double lo_end = gap_center - gap_width / 2.0;
        const double hi_start = gap_center + gap_width / 2.0;
        if (lo_end > 0.2)
            world.walls.push_back({{at, lo_end / 2.0, hz}, {ht, lo_end / 2.0, hz}, 0.0});
        if (hi_start < height - 0.2)
            world.walls.push_back(
                {{at, (hi_start + height) / 2.0, hz}, {ht, (height - hi_start) / 2.0, hz}, 0.0});
    }

    void addInteriorWallY(double at, double gap_center, double gap_width, double x_from, double x_to) {
        const double hz = kWallHeight / 2.0;
        const double ht = kWallThickness / 2.0;
        const double lo_end = gap_center - gap_width / 2.0;
        const double hi_start = gap_center + gap_width / 2.0;
        if (lo_end > x_from + 0.2)
            world.walls.push_back(
                {{(x_from + lo_end) / 2.0, at, hz}, {(lo_end - x_from) / 2.0, ht, hz}, 0.0});
        if (hi_start < x_to - 0.2)
            world.walls.push_back(
                {{(hi_start + x_to) / 2.0, at, hz}, {(x_to - hi_start) / 2.0, ht, hz}, 0.0});
    }

    bool footprintClear(const OrientedBox& box, double margin) const {
        for (const auto& o : world.objects) {
            if (footprintGap(box, o.box) < margin && box.bottomZ() < o.box.topZ() + 0.01 &&
                o.box.bottomZ() < box.topZ() + 0.01)
                return false;
        }
        for (const auto& w : world.walls) {
            if (w.half_extents.z() < 0.1) continue; // floor slab
            if (footprintGap(box, w) < margin) return false;
        }
        return true;
    }

    const WorldObject* addObject(const std::string& label, const OrientedBox& box) {
        world.objects.push_back({freshId(), label, box});
        return &world.objects.back();
    }

    void buildNavGrid(double floor_z) {
        NavGrid nav;
        nav.origin = Vec2(0.0, 0.0);
        nav.resolution = kNavResolution;
        nav.cols = static_cast<int>(std::floor(width / kNavResolution));
        nav.rows = static_cast<int>(std::floor(height / kNavResolution));
        nav.cells.assign(static_cast<size_t>(nav.cols) * nav.rows, 0);
        for (int cy = 0; cy < nav.rows; ++cy) {
            for (int cx = 0; cx < nav.cols; ++cx) {
                const Vec2 c = nav.cellCenter(cx, cy);
                if (c.x() < 0.35 || c.x() > width - 0.35 || c.y() < 0.35 || c.y() > height - 0.35)
                    continue;
                bool blocked = false;
                const OrientedBox probe{{c.x(), c.y(), floor_z + 0.1}, {0.01, 0.01, 0.1}, 0.0};
                for (const auto& w : world.walls) {
                    if (w.half_extents.z() < 0.1) continue;
                    if (footprintGap(probe, w) < kRobotRadius) {
                        blocked = true;
                        break;
                    }
                }
                if (!blocked) {
                    for (const auto& o : world.objects) {
                        if (o.box.bottomZ() > floor_z + 0.3) continue; // on furniture
                        if (footprintGap(probe, o.box) < kRobotRadius) {
                            blocked = true;
                            break;
                        }
                    }
                }
                if (!blocked) nav.set(cx, cy, true);
            }
        }
        world.navigable = std::move(nav);
    }

    void addCameras(Rng& rng, const Vec2& overhead_xy) {
        Intrinsics intr; // 640x480, fx=fy=320: ~90 deg horizontal FOV
        auto lookAtCenter = [&](const Vec3& pos, double pitch) {
            const double yaw = std::atan2(height / 2.0 - pos.y(), width / 2.0 - pos.x());
            return Pose::lookTowards(pos, yaw, pitch);
        };
        ExternalCamera cam0;
        cam0.id = "cam_0";
        cam0.pose = Pose::lookTowards(Vec3(overhead_xy.x(), overhead_xy.y(), 2.3),
                                      rng.uniform(0.0, 2.0 * M_PI), M_PI / 2.0);
        cam0.intrinsics = intr;
        ExternalCamera cam1;
        cam1.id = "cam_1";
        cam1.pose = lookAtCenter(Vec3(0.45, 0.45, 2.2), 0.62);
        cam1.intrinsics = intr;
        ExternalCamera cam2;
        cam2.id = "cam_2";
        cam2.pose = lookAtCenter(Vec3(width - 0.45, height - 0.45, 2.2), 0.62);
        cam2.intrinsics = intr;
        world.external_cameras = {cam0, cam1, cam2};
    }
};

Vec3 jitterHalf(const ItemSpec& spec, Rng& rng, double rel = 0.1) {
    Vec3 h = spec.half;
    for (int i = 0; i < 2; ++i) h[i] *= 1.0 + rng.uniform(-rel, rel);
    h.z() *= 1.0 + rng.uniform(-rel, rel);
    return h;
}

void capHalfDiagonal(Vec3& half, double cap) {
    const double d = half.norm();
    if (d > cap) half *= cap / d;
}

} // namespace

WorldSpec generateWorld(WorldFamily family, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, /*purpose=*/0xA11CE, family == WorldFamily::apartment ? 1 : 2);
    Builder b;
    b.world.floor_z = 0.0;

    if (family == WorldFamily::apartment) {
        b.width = 11.0 + rng.uniform(0.0, 1.0);
        b.height = 8.0 + rng.uniform(0.0, 1.0);
        b.addOuterWalls();
        // One full-depth divider with a door, plus a partial wall in one half.
        const double split_x = b.width * rng.uniform(0.42, 0.58);
        b.addInteriorWallX(split_x, b.height * rng.uniform(0.3, 0.7), 1.2);
        const double split_y = b.height * rng.uniform(0.4, 0.6);
        if (rng.uniform() < 0.5)
            b.addInteriorWallY(split_y, split_x * rng.uniform(0.3, 0.7), 1.2, 0.0, split_x);
        else
            b.addInteriorWallY(split_y, split_x + (b.width - split_x) * rng.uniform(0.3, 0.7), 1.2,
                               split_x, b.width);

        const int target_total = 100 + static_cast<int>(rng.uniformInt(26)); // 100..125
        const int furniture_count = 18 + static_cast<int>(rng.uniformInt(5));

        std::vector<const WorldObject*> furniture;
        for (int i = 0; i < furniture_count; ++i) {
            const auto& spec = kAptFurniture[rng.uniformInt(std::size(kAptFurniture))];
            Vec3 half = jitterHalf(spec, rng);
            capHalfDiagonal(half, 0.47);
            for (int attempt = 0; attempt < 50; ++attempt) {
                const Vec3 center(rng.uniform(0.7, b.width - 0.7), rng.uniform(0.7, b.height - 0.7),
                                  half.z());
                const OrientedBox box{center, half, rng.uniform(0.0, 2.0 * M_PI)};
                if (!b.footprintClear(box, 0.55)) continue;
                furniture.push_back(b.addObject(spec.label, box));
                break;
            }
        }

        // Small items on top of furniture.
        int placed_items = 0;
        const int items_wanted = std::min<int>(static_cast<int>(furniture.size()) * 4,
                                               target_total - static_cast<int>(furniture.size()) - 10);
        int fi = 0;
        int guard = 0;
        while (placed_items < items_wanted && guard++ < items_wanted * 8 && !furniture.empty()) {
            const auto* host = furniture[static_cast<size_t>(fi) % furniture.size()];
            ++fi;
            const auto& spec = kAptItems[rng.uniformInt(std::size(kAptItems))];
            Vec3 half = jitterHalf(spec, rng);
            const double max_dx = host->box.half_extents.x() - half.head<2>().norm() - 0.02;
            const double max_dy = host->box.half_extents.y() - half.head<2>().norm() - 0.02;
            if (max_dx <= 0.0 || max_dy <= 0.0) continue;
            const Vec3 local(rng.uniform(-max_dx, max_dx), rng.uniform(-max_dy, max_dy), 0.0);
            const Vec3 base = host->box.toWorld(local);
            const Vec3 center(base.x(), base.y(), host->box.topZ() + half.z());
            const OrientedBox box{center, half, rng.uniform(0.0, 2.0 * M_PI)};
            bool clear = true;
            for (const auto& o : b.world.objects) {
                if (&o == host) continue;
                if (o.box.bottomZ() < host->box.topZ() - 0.01) continue;
                if (footprintGap(box, o.box) < 0.02 && std::abs(o.box.bottomZ() - box.bottomZ()) < 0.2) {
                    clear = false;
                    break;
                }
            }
            if (!clear) continue;
            b.addObject(spec.label, box);
            ++placed_items;
        }

        // Floor clutter fills up to the target count.
        guard = 0;
        while (static_cast<int>(b.world.objects.size()) < target_total && guard++ < 600) {
            const auto& spec = kAptClutter[rng.uniformInt(std::size(kAptClutter))];
            const Vec3 half = jitterHalf(spec, rng);
            const Vec3 center(rng.uniform(0.5, b.width - 0.5), rng.uniform(0.5, b.height - 0.5),
                              half.z());
            const OrientedBox box{center, half, rng.uniform(0.0, 2.0 * M_PI)};
            if (!b.footprintClear(box, 0.30)) continue;
            b.addObject(spec.label, box);
        }

        b.buildNavGrid(0.0);
        const Vec2 overhead = furniture.empty()
                                  ? Vec2(b.width / 2.0, b.height / 2.0)
                                  : Vec2(furniture[0]->box.center.x(), furniture[0]->box.center.y());
        b.addCameras(rng, Vec2(std::clamp(overhead.x(), 1.0, b.width - 1.0),
                               std::clamp(overhead.y(), 1.0, b.height - 1.0)));
    } else {
        b.width = 7.5 + rng.uniform(0.0, 1.0);
        b.height = 7.5 + rng.uniform(0.0, 1.0);
        b.addOuterWalls();

        const int target_total = 21 + static_cast<int>(rng.uniformInt(8)); // 21..28
        const int furniture_count = 10 + static_cast<int>(rng.uniformInt(4));

        std::vector<const WorldObject*> furniture;
        for (int i = 0; i < furniture_count; ++i) {
            const auto& spec = kRoomFurniture[rng.uniformInt(std::size(kRoomFurniture))];
            const Vec3 half = jitterHalf(spec, rng);
            for (int attempt = 0; attempt < 50; ++attempt) {
                const Vec3 center(rng.uniform(1.0, b.width - 1.0), rng.uniform(1.0, b.height - 1.0),
                                  half.z());
                const OrientedBox box{center, half, rng.uniform(0.0, 2.0 * M_PI)};
                if (!b.footprintClear(box, 0.6)) continue;
                furniture.push_back(b.addObject(spec.label, box));
                break;
            }
        }

        // A couple of items on tables/desks so ground truth has contact edges.
        for (const auto* host : furniture) {
            if (std::string(host->label) != "table" && std::string(host->label) != "desk") continue;
            if (static_cast<int>(b.world.objects.size()) >= target_total - 4) break;
            const auto& spec = kRoomClutter[5 + rng.uniformInt(3)]; // cup / book / lamp
            const Vec3 half = jitterHalf(spec, rng);
            const Vec3 local(rng.uniform(-0.2, 0.2), rng.uniform(-0.1, 0.1), 0.0);
            const Vec3 base = host->box.toWorld(local);
            b.addObject(spec.label,
                        {{base.x(), base.y(), host->box.topZ() + half.z()}, half, rng.uniform(0.0, 2.0 * M_PI)});
        }

        int guard = 0;
        while (static_cast<int>(b.world.objects.size()) < target_total && guard++ < 400) {
            const auto& spec = kRoomClutter[rng.uniformInt(5)]; // floor clutter only
            const Vec3 half = jitterHalf(spec, rng);
            const Vec3 center(rng.uniform(0.7, b.width - 0.7), rng.uniform(0.7, b.height - 0.7),
                              half.z());
            const OrientedBox box{center, half, rng.uniform(0.0, 2.0 * M_PI)};
            if (!b.footprintClear(box, 0.45)) continue;
            b.addObject(spec.label, box);
        }

        b.buildNavGrid(0.0);
        b.addCameras(rng, Vec2(b.width / 2.0, b.height / 2.0));
        // Spread the corner cameras so each added camera contributes coverage.
        b.world.external_cameras[1].pose =
            Pose::lookTowards(Vec3(0.45, 0.45, 2.2),
                              std::atan2(b.height - 0.9, b.width - 0.9), 0.58);
        b.world.external_cameras[2].pose =
            Pose::lookTowards(Vec3(b.width - 0.45, b.height - 0.45, 2.2),
                              std::atan2(-(b.height - 0.9), -(b.width - 0.9)), 0.58);
    }

    validateWorld(b.world);
    return b.world;
}

CompletionPrior benchmarkPrior(WorldFamily family) {
    CompletionPrior prior;
    auto add = [&](const ItemSpec& spec, double rate) {
        prior.vocabulary.push_back(spec.label);
        prior.rates.push_back(rate);
        prior.sizes.push_back(spec.half);
    };
    std::vector<std::pair<std::string, std::string>> boosts;
    if (family == WorldFamily::apartment) {
        for (const auto& f : kAptFurniture) add(f, 0.05);
        for (const auto& s : kAptItems) add(s, 0.03);
        for (const auto& c : kAptClutter) add(c, 0.03);
        boosts = {{"cup", "table"},   {"bowl", "table"},  {"book", "shelf"},
                  {"laptop", "desk"}, {"phone", "desk"},  {"plant", "stand"},
                  {"vase", "cabinet"}, {"lamp", "desk"},  {"bottle", "table"},
                  {"chair", "table"}, {"chair", "desk"},  {"shoe", "cabinet"},
                  {"toy", "basket"},  {"box", "shelf"}};
    } else {
        for (const auto& f : kRoomFurniture) add(f, 0.05);
        for (const auto& c : kRoomClutter) add(c, 0.03);
        boosts = {{"cup", "table"},        {"book", "desk"},   {"lamp", "desk"},
                  {"stool", "table"},      {"plant", "sofa"},  {"floor_lamp", "armchair"},
                  {"basket", "wardrobe"},  {"box", "dresser"}, {"armchair", "sofa"}};
    }
    const size_t n = prior.vocabulary.size();
    prior.cooc.assign(n, std::vector<double>(n, 1.0));
    auto boost = [&](const std::string& a, const std::string& c, double w) {
        const int ia = prior.indexOf(a);
        const int ic = prior.indexOf(c);
        if (ia >= 0 && ic >= 0) prior.cooc[static_cast<size_t>(ia)][static_cast<size_t>(ic)] = w;
    };
    for (const auto& [a, c] : boosts) boost(a, c, 8.0);
    // Same-label affinity: things cluster with their own kind a little.
    for (size_t i = 0; i < n; ++i) prior.cooc[i][i] = 2.0;
    prior.validate();
    return prior;
}

} // namespace asg
