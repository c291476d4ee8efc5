#include "asg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace asg {

Pose Pose::lookTowards(const Vec3& position, double yaw, double pitch_down) {
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const double cp = std::cos(pitch_down), sp = std::sin(pitch_down);
    const Vec3 forward(cy * cp, sy * cp, -sp);
    const Vec3 right(sy, -cy, 0.0);
    const Vec3 down = forward.cross(right);
    Eigen::Matrix3d r;
    r.col(0) = right;
    r.col(1) = down;
    r.col(2) = forward;
    return Pose{Eigen::Quaterniond(r), position};
}

Vec3 OrientedBox::toLocal(const Vec3& p) const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    const Vec3 d = p - center;
    return Vec3(c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z());
}

Vec3 OrientedBox::toWorld(const Vec3& local) const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    return Vec3(c * local.x() - s * local.y() + center.x(),
                s * local.x() + c * local.y() + center.y(), local.z() + center.z());
}

std::array<Vec3, 8> obbCorners(const OrientedBox& box) {
    std::array<Vec3, 8> corners;
    for (int i = 0; i < 8; ++i) {
        const double sx = (i & 1) ? 1.0 : -1.0;
        const double sy = (i & 2) ? 1.0 : -1.0;
        const double sz = (i & 4) ? 1.0 : -1.0;
        corners[i] = box.toWorld(Vec3(sx * box.half_extents.x(), sy * box.half_extents.y(),
                                      sz * box.half_extents.z()));
    }
    return corners;
}

bool pointInObb(const Vec3& p, const OrientedBox& box) {
    const Vec3 l = box.toLocal(p);
    return std::abs(l.x()) <= box.half_extents.x() && std::abs(l.y()) <= box.half_extents.y() &&
           std::abs(l.z()) <= box.half_extents.z();
}

std::array<Vec2, 4> footprintPolygon(const OrientedBox& box) {
    const double c = std::cos(box.yaw), s = std::sin(box.yaw);
    const double hx = box.half_extents.x(), hy = box.half_extents.y();
    const Vec2 ex(c * hx, s * hx);
    const Vec2 ey(-s * hy, c * hy);
    const Vec2 o(box.center.x(), box.center.y());
    return {o - ex - ey, o + ex - ey, o + ex + ey, o - ex + ey};
}

double polygonArea(const std::vector<Vec2>& poly) {
    if (poly.size() < 3) return 0.0;
    double twice = 0.0;
    for (size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        twice += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * std::abs(twice);
}

std::vector<Vec2> clipConvexPolygon(const std::vector<Vec2>& subject, const std::vector<Vec2>& clip) {
    std::vector<Vec2> output(subject.begin(), subject.end());
    for (size_t i = 0; i < clip.size() && !output.empty(); ++i) {
        const Vec2 a = clip[i];
        const Vec2 b = clip[(i + 1) % clip.size()];
        // Inside = left of edge a->b for a CCW clip polygon.
        auto side = [&](const Vec2& p) {
            return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
        };
        std::vector<Vec2> input;
        input.swap(output);
        for (size_t j = 0; j < input.size(); ++j) {
            const Vec2 cur = input[j];
            const Vec2 prev = input[(j + input.size() - 1) % input.size()];
            const double sc = side(cur);
            const double sp = side(prev);
            if (sc >= 0.0) {
                if (sp < 0.0) {
                    const double t = sp / (sp - sc);
                    output.push_back(prev + t * (cur - prev));
                }
                output.push_back(cur);
            } else if (sp >= 0.0) {
                const double t = sp / (sp - sc);
                output.push_back(prev + t * (cur - prev));
            }
        }
    }
    return output;
}

double footprintOverlap(const OrientedBox& a, const OrientedBox& b) {
    const auto pa = footprintPolygon(a);
    const auto pb = footprintPolygon(b);
    const std::vector<Vec2> sa(pa.begin(), pa.end());
    const std::vector<Vec2> sb(pb.begin(), pb.end());
    const double inter = polygonArea(clipConvexPolygon(sa, sb));
    const double area = a.footprintArea();
    if (area <= 0.0) return 0.0;
    return std::clamp(inter / area, 0.0, 1.0);
}

namespace {

double segmentPointDistance(const Vec2& a, const Vec2& b, const Vec2& p) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 <= 0.0) return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

} // namespace

double footprintGap(const OrientedBox& a, const OrientedBox& b) {
    const auto pa = footprintPolygon(a);
    const auto pb = footprintPolygon(b);
    const std::vector<Vec2> sa(pa.begin(), pa.end());
    const std::vector<Vec2> sb(pb.begin(), pb.end());
    if (!clipConvexPolygon(sa, sb).empty()) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            best = std::min(best, segmentPointDistance(pa[i], pa[(i + 1) % 4], pb[j]));
            best = std::min(best, segmentPointDistance(pb[i], pb[(i + 1) % 4], pa[j]));
        }
    }
    return best;
}

double containmentRatio(const OrientedBox& a, const OrientedBox& b) {
    const auto corners = obbCorners(a);
    bool all_inside = true;
    for (const auto& c : corners) {
        if (!pointInObb(c, b)) {
            all_inside = false;
            break;
        }
    }
    if (all_inside) return 1.0;

    // Deterministic lattice of cell centers; bit-reproducible by construction.
    constexpr int kN = 8;
    int inside = 0;
    for (int ix = 0; ix < kN; ++ix) {
        const double fx = (2.0 * (ix + 0.5) / kN - 1.0) * a.half_extents.x();
        for (int iy = 0; iy < kN; ++iy) {
            const double fy = (2.0 * (iy + 0.5) / kN - 1.0) * a.half_extents.y();
            for (int iz = 0; iz < kN; ++iz) {
                const double fz = (2.0 * (iz + 0.5) / kN - 1.0) * a.half_extents.z();
                if (pointInObb(a.toWorld(Vec3(fx, fy, fz)), b)) ++inside;
            }
        }
    }
    return static_cast<double>(inside) / (kN * kN * kN);
}

std::optional<double> rayObbIntersect(const Ray& ray, const OrientedBox& box) {
    // Slab test in the box frame. Direction is rotated by -yaw only, so the
    // parameter t keeps its world-frame meaning.
    const Vec3 o = box.toLocal(ray.origin);
    const double c = std::cos(box.yaw), s = std::sin(box.yaw);
    const Vec3 d(c * ray.direction.x() + s * ray.direction.y(),
                 -s * ray.direction.x() + c * ray.direction.y(), ray.direction.z());

    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 3; ++axis) {
        const double h = box.half_extents[axis];
        if (std::abs(d[axis]) < 1e-15) {
            if (o[axis] < -h || o[axis] > h) return std::nullopt;
            continue;
        }
        double t1 = (-h - o[axis]) / d[axis];
        double t2 = (h - o[axis]) / d[axis];
        if (t1 > t2) std::swap(t1, t2);
        tmin = std::max(tmin, t1);
        tmax = std::min(tmax, t2);
        if (tmin > tmax) return std::nullopt;
    }
    if (tmax < 0.0) return std::nullopt;
    return tmin >= 0.0 ? tmin : tmax;
}

double distanceToSurface(const Vec3& p, const OrientedBox& box) {
    const Vec3 l = box.toLocal(p);
    const Vec3 q(std::abs(l.x()) - box.half_extents.x(), std::abs(l.y()) - box.half_extents.y(),
                 std::abs(l.z()) - box.half_extents.z());
    const Vec3 outside(std::max(q.x(), 0.0), std::max(q.y(), 0.0), std::max(q.z(), 0.0));
    const double inside = std::min(std::max({q.x(), q.y(), q.z()}), 0.0);
    return std::abs(outside.norm() + inside);
}

std::optional<OrientedBox> fitObb(std::span<const Vec3> points, double min_half_extent) {
    if (points.size() < 4) return std::nullopt;

    double spread = 0.0;
    for (const auto& p : points) spread = std::max(spread, (p - points[0]).norm());
    if (spread < 1e-9) return std::nullopt;

    Vec2 mean(0.0, 0.0);
    for (const auto& p : points) mean += Vec2(p.x(), p.y());
    mean /= static_cast<double>(points.size());

    double cxx = 0.0, cxy = 0.0, cyy = 0.0;
    for (const auto& p : points) {
        const double dx = p.x() - mean.x();
        const double dy = p.y() - mean.y();
        cxx += dx * dx;
        cxy += dx * dy;
        cyy += dy * dy;
    }
    const double yaw = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);

    const double c = std::cos(yaw), s = std::sin(yaw);
    Vec3 lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const auto& p : points) {
        const Vec3 l(c * p.x() + s * p.y(), -s * p.x() + c * p.y(), p.z());
        lo = lo.cwiseMin(l);
        hi = hi.cwiseMax(l);
    }
    const Vec3 mid = 0.5 * (lo + hi);
    Vec3 half = 0.5 * (hi - lo);
    // Tiny pad so boundary points survive the rotation round trip; clamp keeps
    // flat detections (tabletops) valid.
    for (int i = 0; i < 3; ++i) half[i] = std::max(half[i], min_half_extent) + 1e-12;

    OrientedBox box;
    box.yaw = yaw;
    box.half_extents = half;
    box.center = Vec3(c * mid.x() - s * mid.y(), s * mid.x() + c * mid.y(), mid.z());
    return box;
}

} // namespace asg
