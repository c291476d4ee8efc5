#pragma once

#include "asg/geometry.hpp"
#include "asg/rng.hpp"

#include <cmath>

namespace asg::testing {

inline OrientedBox randomBox(Rng& rng, double pos_range = 3.0, double max_half = 1.5) {
    OrientedBox box;
    box.center = Vec3(rng.uniform(-pos_range, pos_range), rng.uniform(-pos_range, pos_range),
                      rng.uniform(-pos_range, pos_range));
    box.half_extents = Vec3(rng.uniform(0.05, max_half), rng.uniform(0.05, max_half),
                            rng.uniform(0.05, max_half));
    box.yaw = rng.uniform(-M_PI, M_PI);
    return box;
}

inline Vec3 randomPoint(Rng& rng, double range = 5.0) {
    return Vec3(rng.uniform(-range, range), rng.uniform(-range, range), rng.uniform(-range, range));
}

inline Vec3 randomUnit(Rng& rng) {
    // Rejection sample inside the unit ball, then normalize.
    for (;;) {
        Vec3 v(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        const double n = v.norm();
        if (n > 1e-3 && n <= 1.0) return v / n;
    }
}

// Independent containment oracle: checks the point against the six face
// half-spaces reconstructed from the corner set, not against the box frame.
inline bool pointInBoxOracle(const Vec3& p, const OrientedBox& box, double tol = 0.0) {
    const auto corners = obbCorners(box);
    // Faces as (corner on face, outward normal from corner geometry).
    struct Face {
        int origin, a, b;
    };
    // For corner order bit0=+x bit1=+y bit2=+z.
    static const Face faces[6] = {
        {0, 4, 2}, // -x face: (z-edge) x (y-edge) points along -x
        {1, 3, 5}, // +x face
        {0, 1, 4}, // -y face
        {2, 6, 3}, // +y face
        {0, 2, 1}, // -z face
        {4, 5, 6}, // +z face
    };
    for (const auto& f : faces) {
        const Vec3 o = corners[f.origin];
        const Vec3 n = (corners[f.a] - o).cross(corners[f.b] - o).normalized();
        if ((p - o).dot(n) > tol) return false;
    }
    return true;
}

} // namespace asg::testing
