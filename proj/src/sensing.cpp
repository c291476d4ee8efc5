#include "asg/sensing.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace asg {

Vec3 pinholeRayDir(const Intrinsics& intr, const RayGrid& grid, int u, int v) {
    const double px = (u + 0.5) * static_cast<double>(intr.width) / grid.cols;
    const double py = (v + 0.5) * static_cast<double>(intr.height) / grid.rows;
    const Vec3 d((px - intr.cx) / intr.fx, (py - intr.cy) / intr.fy, 1.0);
    return d.normalized();
}

Vec3 SimulatedFrame::rayDirCamera(int u, int v) const {
    return pinholeRayDir(intrinsics, RayGrid{cols, rows}, u, v);
}

int SimulatedFrame::hitCount() const {
    int n = 0;
    for (const auto& p : pixels) n += (p.tag >= 0);
    return n;
}

SimulatedFrame renderObservation(const WorldSpec& world, const Pose& pose, const Intrinsics& intr,
                                 const RayGrid& grid) {
    SimulatedFrame frame;
    frame.camera_pose_true = pose;
    frame.intrinsics = intr;
    frame.cols = grid.cols;
    frame.rows = grid.rows;
    frame.pixels.resize(static_cast<size_t>(grid.cols) * grid.rows);

    // Frame-local tags in first-appearance scan order.
    std::map<std::pair<bool, int>, int> tag_of;
    for (int v = 0; v < grid.rows; ++v) {
        for (int u = 0; u < grid.cols; ++u) {
            const Vec3 dir_world = pose.rotate(frame.rayDirCamera(u, v));
            const auto hit = raycastScene(world, Ray{pose.translation, dir_world});
            auto& px = frame.pixels[static_cast<size_t>(v) * grid.cols + u];
            if (!hit) continue;
            const auto key = std::make_pair(hit->is_wall, hit->index);
            auto it = tag_of.find(key);
            if (it == tag_of.end()) {
                SimulatedFrame::TagInfo info;
                info.label = hit->label(world);
                info.is_structure = hit->is_wall;
                info.true_id = hit->objectId(world);
                it = tag_of.emplace(key, static_cast<int>(frame.tags.size())).first;
                frame.tags.push_back(std::move(info));
            }
            px.tag = it->second;
            px.depth = hit->depth;
        }
    }
    return frame;
}

FactoredGeometryEstimate degradeToEstimate(const SimulatedFrame& frame, const Pose& anchor_pose_true,
                                           const NoiseConfig& noise, Rng& rng) {
    FactoredGeometryEstimate est;
    est.cols = frame.cols;
    est.rows = frame.rows;
    est.ray_dirs.resize(frame.pixels.size());
    est.depth_up_to_scale.resize(frame.pixels.size(), 0.0);

    const double m_true = noise.metric_scale;
    for (int v = 0; v < frame.rows; ++v) {
        for (int u = 0; u < frame.cols; ++u) {
            const size_t i = static_cast<size_t>(v) * frame.cols + u;
            est.ray_dirs[i] = frame.rayDirCamera(u, v);
            if (frame.pixels[i].tag < 0) continue;
            const double eps = noise.sigma_depth_rel == 0.0 ? 0.0 : rng.normal(0.0, noise.sigma_depth_rel);
            est.depth_up_to_scale[i] = frame.pixels[i].depth * (1.0 + eps) / m_true;
        }
    }

    // Rigid perturbation, right-composed (expressed in the camera frame).
    Pose delta;
    if (noise.sigma_rot > 0.0) {
        Vec3 axis(rng.normal(), rng.normal(), rng.normal());
        if (axis.norm() < 1e-12) axis = Vec3(0, 0, 1);
        axis.normalize();
        const double angle = rng.normal(0.0, noise.sigma_rot);
        delta.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis));
    }
    if (noise.sigma_trans > 0.0)
        delta.translation = Vec3(rng.normal(0.0, noise.sigma_trans), rng.normal(0.0, noise.sigma_trans),
                                 rng.normal(0.0, noise.sigma_trans));
    const Pose noisy = frame.camera_pose_true.compose(delta);
    est.pose_est = anchor_pose_true.inverse().compose(noisy);

    est.scale_est = noise.sigma_logscale == 0.0 ? m_true
                                                : m_true * std::exp(rng.normal(0.0, noise.sigma_logscale));
    return est;
}

TaggedPointCloud backproject(const FactoredGeometryEstimate& est, const SimulatedFrame& frame,
                             int source_view) {
    TaggedPointCloud cloud;
    cloud.source_view = source_view;
    cloud.tags.reserve(frame.tags.size());
    for (const auto& t : frame.tags) cloud.tags.push_back({t.label, t.is_structure, t.true_id});
    for (size_t i = 0; i < frame.pixels.size(); ++i) {
        if (frame.pixels[i].tag < 0) continue;
        const Vec3 p_cam = est.scale_est * est.depth_up_to_scale[i] * est.ray_dirs[i];
        cloud.points.push_back(est.pose_est.apply(p_cam));
        cloud.point_tags.push_back(frame.pixels[i].tag);
    }
    return cloud;
}

void anchorFrame(FactoredGeometryEstimate& estimate, const Pose& anchor_pose_world) {
    if (estimate.anchored) return;
    estimate.pose_est = anchor_pose_world.compose(estimate.pose_est);
    estimate.anchored = true;
}

void anchorFrames(std::vector<FactoredGeometryEstimate*> estimates, const Pose& anchor_pose_world) {
    if (estimates.empty()) throw std::invalid_argument("anchorFrames: empty estimate list");
    for (auto* est : estimates) anchorFrame(*est, anchor_pose_world);
}

} // namespace asg
