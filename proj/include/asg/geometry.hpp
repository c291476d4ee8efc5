#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace asg {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// Rigid transform mapping camera/local frame into the world frame.
struct Pose {
    Eigen::Quaterniond rotation{1.0, 0.0, 0.0, 0.0};
    Vec3 translation{0.0, 0.0, 0.0};

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Vec3 rotate(const Vec3& v) const { return rotation * v; }

    Pose compose(const Pose& other) const {
        return Pose{rotation * other.rotation, rotation * other.translation + translation};
    }

    Pose inverse() const {
        Eigen::Quaterniond qi = rotation.conjugate();
        return Pose{qi, qi * (-translation)};
    }

    static Pose identity() { return Pose{}; }

    /// Camera pose at `position` with the given heading. Camera convention is
    /// x right, y down, z forward; yaw is measured about world +z from +x,
    /// pitch_down tilts the optical axis below the horizon.
    static Pose lookTowards(const Vec3& position, double yaw, double pitch_down);
};

/// Yaw-only oriented box. Orientation is restricted to rotation about world
/// +z, which keeps every footprint computation an exact 2D polygon problem.
struct OrientedBox {
    Vec3 center{0.0, 0.0, 0.0};
    Vec3 half_extents{0.0, 0.0, 0.0};
    double yaw = 0.0;

    double bottomZ() const { return center.z() - half_extents.z(); }
    double topZ() const { return center.z() + half_extents.z(); }
    double volume() const { return 8.0 * half_extents.x() * half_extents.y() * half_extents.z(); }
    double footprintArea() const { return 4.0 * half_extents.x() * half_extents.y(); }

    /// World point expressed in the box frame (center at origin, yaw removed).
    Vec3 toLocal(const Vec3& p) const;
    Vec3 toWorld(const Vec3& local) const;
};

struct Ray {
    Vec3 origin{0.0, 0.0, 0.0};
    Vec3 direction{0.0, 0.0, 1.0};
};

/// Corner order: index bit 0 = +x, bit 1 = +y, bit 2 = +z in the box frame,
/// i.e. corner 0 is (-hx,-hy,-hz) and corner 7 is (+hx,+hy,+hz).
std::array<Vec3, 8> obbCorners(const OrientedBox& box);

/// Closed containment test (boundary counts as inside).
bool pointInObb(const Vec3& p, const OrientedBox& box);

/// xy-projected corners of the box, counter-clockwise.
std::array<Vec2, 4> footprintPolygon(const OrientedBox& box);

/// Area of the xy intersection of the two footprints divided by the area of
/// a's footprint. Exact convex polygon clipping, result in [0, 1].
double footprintOverlap(const OrientedBox& a, const OrientedBox& b);

/// Minimal horizontal distance between the two footprint polygons
/// (0 when they touch or overlap).
double footprintGap(const OrientedBox& a, const OrientedBox& b);

/// Fraction of a's volume inside b, estimated on a fixed 8x8x8 lattice of
/// cell centers in a. Returns exactly 1.0 when all corners of a are in b.
double containmentRatio(const OrientedBox& a, const OrientedBox& b);

/// Nearest non-negative boundary crossing of the ray with the box (slab test
/// in the box frame). If the origin is inside, this is the exit distance.
std::optional<double> rayObbIntersect(const Ray& ray, const OrientedBox& box);

/// Unsigned distance from a point to the box surface (0 on the boundary).
double distanceToSurface(const Vec3& p, const OrientedBox& box);

/// Fits a yaw-oriented box to points: yaw from 2D principal-axis analysis of
/// the xy coordinates, z extent from min/max. Every input point is contained
/// in the result. Half-extents are clamped from below by min_half_extent so
/// flat point sets (tabletops) still yield valid boxes. Returns nullopt for
/// fewer than 4 points or a point set with no spatial spread.
std::optional<OrientedBox> fitObb(std::span<const Vec3> points, double min_half_extent = 0.01);

/// Shoelace area of a convex polygon given in order.
double polygonArea(const std::vector<Vec2>& poly);

/// Sutherland-Hodgman clip of a convex polygon by a convex clip polygon
/// (both counter-clockwise).
std::vector<Vec2> clipConvexPolygon(const std::vector<Vec2>& subject, const std::vector<Vec2>& clip);

} // namespace asg
