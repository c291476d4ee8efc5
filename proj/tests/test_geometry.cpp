#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "asg/geometry.hpp"
#include "asg/rng.hpp"
#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace asg;
using asg::testing::pointInBoxOracle;
using asg::testing::randomBox;
using asg::testing::randomPoint;
using asg::testing::randomUnit;

namespace {

OrientedBox unitCube() {
    return OrientedBox{Vec3(0, 0, 0), Vec3(0.5, 0.5, 0.5), 0.0};
}

} // namespace

TEST_CASE("obb corners: axis-aligned unit cube") {
    const auto corners = obbCorners(unitCube());
    std::set<std::array<int, 3>> seen;
    for (const auto& c : corners) {
        CHECK(std::abs(std::abs(c.x()) - 0.5) < 1e-12);
        CHECK(std::abs(std::abs(c.y()) - 0.5) < 1e-12);
        CHECK(std::abs(std::abs(c.z()) - 0.5) < 1e-12);
        seen.insert({c.x() > 0 ? 1 : -1, c.y() > 0 ? 1 : -1, c.z() > 0 ? 1 : -1});
    }
    CHECK(seen.size() == 8);
}

TEST_CASE("obb corners: quarter-turn symmetry of a square box") {
    OrientedBox a{Vec3(1, 0, 0), Vec3(0.5, 0.5, 0.5), 0.0};
    OrientedBox b = a;
    b.yaw = M_PI / 2.0;
    auto ca = obbCorners(a);
    auto cb = obbCorners(b);
    for (const auto& p : ca) {
        double best = 1e9;
        for (const auto& q : cb) best = std::min(best, (p - q).norm());
        CHECK(best < 1e-9);
    }
}

TEST_CASE("obb corners: mean reconstructs center (1000 random boxes)") {
    Rng rng(42, 1);
    for (int i = 0; i < 1000; ++i) {
        const auto box = randomBox(rng);
        Vec3 mean(0, 0, 0);
        for (const auto& c : obbCorners(box)) mean += c;
        mean /= 8.0;
        CHECK((mean - box.center).norm() < 1e-9);
    }
}

TEST_CASE("point in obb: trivial cases") {
    Rng rng(7, 2);
    for (int i = 0; i < 50; ++i) {
        const auto box = randomBox(rng);
        CHECK(pointInObb(box.center, box));
        // Just outside the +x face, in the box's own frame.
        const Vec3 outside = box.toWorld(Vec3(box.half_extents.x() + 1e-6, 0, 0));
        CHECK_FALSE(pointInObb(outside, box));
    }
}

TEST_CASE("point in obb agrees with half-space oracle (1000 pairs)") {
    Rng rng(99, 3);
    int checked = 0;
    while (checked < 1000) {
        const auto box = randomBox(rng);
        const Vec3 p = randomPoint(rng);
        // Skip razor-edge cases where fp rounding could legitimately differ.
        if (distanceToSurface(p, box) < 1e-9) continue;
        CHECK(pointInObb(p, box) == pointInBoxOracle(p, box));
        ++checked;
    }
}

TEST_CASE("point in obb invariant under rigid transform of point and box") {
    Rng rng(1234, 4);
    for (int i = 0; i < 1000; ++i) {
        auto box = randomBox(rng);
        Vec3 p = randomPoint(rng);
        if (distanceToSurface(p, box) < 1e-9) continue;
        const bool before = pointInObb(p, box);
        // Rigid transforms that preserve yaw-only orientation: z rotation + shift.
        const double dyaw = rng.uniform(-M_PI, M_PI);
        const Vec3 shift = randomPoint(rng, 2.0);
        const double c = std::cos(dyaw), s = std::sin(dyaw);
        auto rot = [&](const Vec3& v) {
            return Vec3(c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z());
        };
        OrientedBox moved = box;
        moved.center = rot(box.center) + shift;
        moved.yaw = box.yaw + dyaw;
        CHECK(pointInObb(rot(p) + shift, moved) == before);
    }
}

TEST_CASE("footprint overlap: identity, disjoint, analytic half offset") {
    OrientedBox a{Vec3(0, 0, 0), Vec3(0.5, 0.5, 0.5), 0.0};
    CHECK(footprintOverlap(a, a) == doctest::Approx(1.0).epsilon(1e-12));

    OrientedBox far_box{Vec3(10, 0, 0), Vec3(0.5, 0.5, 0.5), 0.0};
    CHECK(footprintOverlap(a, far_box) == doctest::Approx(0.0).epsilon(1e-12));

    OrientedBox shifted{Vec3(0.5, 0, 0), Vec3(0.5, 0.5, 0.5), 0.0};
    CHECK(footprintOverlap(a, shifted) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("footprint overlap cross-checked by Monte Carlo area estimate") {
    Rng rng(5, 5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = randomBox(rng, 1.0, 1.0);
        auto b = randomBox(rng, 1.0, 1.0);
        b.center.x() = a.center.x() + rng.uniform(-1.0, 1.0);
        b.center.y() = a.center.y() + rng.uniform(-1.0, 1.0);
        const double exact = footprintOverlap(a, b);

        // MC: sample points uniformly in a's footprint, count those inside b's.
        const auto pb = footprintPolygon(b);
        const double c = std::cos(b.yaw), s = std::sin(b.yaw);
        int inside = 0;
        const int n = 60000;
        for (int i = 0; i < n; ++i) {
            const double lx = rng.uniform(-a.half_extents.x(), a.half_extents.x());
            const double ly = rng.uniform(-a.half_extents.y(), a.half_extents.y());
            const Vec3 w = a.toWorld(Vec3(lx, ly, 0));
            const double dx = w.x() - b.center.x();
            const double dy = w.y() - b.center.y();
            const double bx = c * dx + s * dy;
            const double by = -s * dx + c * dy;
            if (std::abs(bx) <= b.half_extents.x() && std::abs(by) <= b.half_extents.y()) ++inside;
        }
        (void)pb;
        CHECK(std::abs(exact - static_cast<double>(inside) / n) < 0.01);
    }
}

TEST_CASE("footprint overlap symmetry relation") {
    Rng rng(6, 6);
    for (int i = 0; i < 200; ++i) {
        const auto a = randomBox(rng, 1.0, 1.0);
        auto b = randomBox(rng, 1.0, 1.0);
        b.center.x() = a.center.x() + rng.uniform(-0.8, 0.8);
        b.center.y() = a.center.y() + rng.uniform(-0.8, 0.8);
        const double lhs = footprintOverlap(a, b) * a.footprintArea();
        const double rhs = footprintOverlap(b, a) * b.footprintArea();
        CHECK(std::abs(lhs - rhs) < 1e-9);
    }
}

TEST_CASE("containment ratio: nested, disjoint, half-in") {
    OrientedBox big{Vec3(0, 0, 0), Vec3(1, 1, 1), 0.3};
    OrientedBox small{Vec3(0.1, 0, 0), Vec3(0.2, 0.2, 0.2), 0.3};
    CHECK(containmentRatio(small, big) == 1.0);

    OrientedBox far_box{Vec3(10, 0, 0), Vec3(0.2, 0.2, 0.2), 0.0};
    CHECK(containmentRatio(far_box, big) == 0.0);

    // a straddles b's +x face symmetrically: analytic volume fraction 0.5.
    OrientedBox b{Vec3(0, 0, 0), Vec3(1, 1, 1), 0.0};
    OrientedBox a{Vec3(1.0, 0, 0), Vec3(0.3, 0.3, 0.3), 0.0};
    CHECK(containmentRatio(a, b) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("ray obb intersect: analytic and miss cases") {
    const auto cube = unitCube();
    auto hit = rayObbIntersect(Ray{Vec3(0, 0, -5), Vec3(0, 0, 1)}, cube);
    REQUIRE(hit.has_value());
    CHECK(*hit == doctest::Approx(4.5).epsilon(1e-12));

    CHECK_FALSE(rayObbIntersect(Ray{Vec3(0, 0, -5), Vec3(0, 0, -1)}, cube).has_value());
}

TEST_CASE("ray obb intersect agrees with point-marching oracle (1000 pairs)") {
    Rng rng(17, 7);
    int checked = 0;
    while (checked < 1000) {
        const auto box = randomBox(rng);
        const Ray ray{randomPoint(rng), randomUnit(rng)};
        const auto hit = rayObbIntersect(ray, box);

        // Oracle: march the ray densely and find the first sample inside.
        const double step = 5e-4;
        const double tmax = 20.0;
        double first_inside = -1.0;
        for (double t = 0.0; t <= tmax; t += step) {
            if (pointInBoxOracle(ray.origin + t * ray.direction, box)) {
                first_inside = t;
                break;
            }
        }
        if (hit.has_value()) {
            // Grazing hits thinner than the march step can be missed by the
            // oracle; require agreement whenever the oracle saw the box.
            if (first_inside >= 0.0) {
                const bool origin_inside = pointInBoxOracle(ray.origin, box);
                if (origin_inside) {
                    // Implementation reports the exit; the oracle starts inside.
                    CHECK(first_inside == doctest::Approx(0.0).epsilon(step));
                    CHECK(*hit >= 0.0);
                } else {
                    CHECK(std::abs(*hit - first_inside) < 2.0 * step);
                }
            }
            const Vec3 on_surface = ray.origin + (*hit) * ray.direction;
            CHECK(distanceToSurface(on_surface, box) < 1e-7);
        } else {
            CHECK(first_inside < 0.0);
        }
        ++checked;
    }
}

TEST_CASE("fit obb recovers a known box from its corners") {
    Rng rng(23, 8);
    for (int i = 0; i < 200; ++i) {
        auto box = randomBox(rng, 2.0, 1.0);
        // Distinct x/y extents so the principal axis is unambiguous.
        if (std::abs(box.half_extents.x() - box.half_extents.y()) < 0.05) continue;
        const auto corners = obbCorners(box);
        std::vector<Vec3> pts(corners.begin(), corners.end());
        const auto fit = fitObb(pts, 0.01);
        REQUIRE(fit.has_value());
        CHECK((fit->center - box.center).norm() < 1e-6);

        // Yaw is recovered modulo pi/2; extents may swap when the axis flips.
        double dyaw = std::remainder(fit->yaw - box.yaw, M_PI / 2.0);
        CHECK(std::abs(dyaw) < 1e-6);
        std::array<double, 2> got{fit->half_extents.x(), fit->half_extents.y()};
        std::array<double, 2> want{box.half_extents.x(), box.half_extents.y()};
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        CHECK(std::abs(got[0] - want[0]) < 1e-6);
        CHECK(std::abs(got[1] - want[1]) < 1e-6);
        CHECK(std::abs(fit->half_extents.z() - box.half_extents.z()) < 1e-6);
    }
}

TEST_CASE("fit obb: flat point set gets the minimum z half-extent") {
    std::vector<Vec3> pts = {Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(1, 1, 1), Vec3(0, 1, 1)};
    const auto fit = fitObb(pts, 0.01);
    REQUIRE(fit.has_value());
    CHECK(fit->half_extents.z() == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(fit->center.z() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fit obb: degenerate inputs rejected") {
    std::vector<Vec3> repeated(10, Vec3(1, 2, 3));
    CHECK_FALSE(fitObb(repeated).has_value());
    std::vector<Vec3> few = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    CHECK_FALSE(fitObb(few).has_value());
}

TEST_CASE("fit obb contains all of its input points") {
    Rng rng(31, 9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Vec3> pts;
        const int n = 4 + static_cast<int>(rng.uniformInt(60));
        for (int i = 0; i < n; ++i) pts.push_back(randomPoint(rng, 2.0));
        const auto fit = fitObb(pts);
        REQUIRE(fit.has_value());
        for (const auto& p : pts) CHECK(pointInObb(p, *fit));
    }
}
