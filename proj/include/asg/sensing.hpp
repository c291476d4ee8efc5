#pragma once

#include "asg/rng.hpp"
#include "asg/world.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace asg {

/// Noise model applied when degrading a rendered frame into the factored
/// geometry estimate. All deviations are sampled from the stream passed to
/// degradeToEstimate, never from global state.
struct NoiseConfig {
    double sigma_depth_rel = 0.02;   // relative depth noise std
    double sigma_trans = 0.02;       // m
    double sigma_rot = 0.00872664625997164788; // radians (0.5 deg)
    double sigma_logscale = 0.02;    // std of log scale error
    double label_flip_prob = 0.05;   // detection label replaced by another
    double metric_scale = 1.0;       // true global scale factor of the world
    std::uint64_t seed = 0;          // base seed for sensing streams

    static NoiseConfig zero() {
        NoiseConfig n;
        n.sigma_depth_rel = n.sigma_trans = n.sigma_rot = n.sigma_logscale = 0.0;
        n.label_flip_prob = 0.0;
        return n;
    }
};

/// Dimensions of the simulated ray grid. Decoupled from the nominal
/// intrinsics so desk-scale runs stay fast.
struct RayGrid {
    int cols = 64;
    int rows = 48;
};

/// Rendered observation: one ray per grid pixel through the pinhole model.
/// Ground-truth object identities live in the per-frame tag table and are a
/// sealed provenance channel: only the evaluator and the oracle-association
/// test mode may read TagInfo::true_id.
struct SimulatedFrame {
    struct Pixel {
        int tag = -1;      // index into tags, -1 = no hit
        double depth = 0.0; // Euclidean distance along the unit ray
    };
    struct TagInfo {
        std::string label;
        bool is_structure = false; // walls / floor
        std::string true_id;       // sealed
    };

    Pose camera_pose_true;
    Intrinsics intrinsics;
    int cols = 0;
    int rows = 0;
    std::vector<Pixel> pixels; // row-major
    std::vector<TagInfo> tags;

    const Pixel& at(int u, int v) const { return pixels[static_cast<size_t>(v) * cols + u]; }
    /// Unit ray direction in the camera frame for grid pixel (u, v).
    Vec3 rayDirCamera(int u, int v) const;
    int hitCount() const;
};

/// Simulated analog of a feed-forward reconstruction output: exact per-pixel
/// ray directions, up-to-scale depths, a pose relative to the anchor view,
/// and one global metric scale estimate.
struct FactoredGeometryEstimate {
    int cols = 0;
    int rows = 0;
    std::vector<Vec3> ray_dirs;            // camera frame, unit length
    std::vector<double> depth_up_to_scale; // 0 where the pixel has no hit
    Pose pose_est;                          // anchor-relative until anchored
    double scale_est = 1.0;
    bool anchored = false;
};

/// World-frame points tagged with frame-local instance ids.
struct TaggedPointCloud {
    struct TagInfo {
        std::string label;
        bool is_structure = false;
        std::string true_id; // sealed provenance channel
    };
    std::vector<Vec3> points;
    std::vector<int> point_tags;
    std::vector<TagInfo> tags;
    int source_view = 0;
};

/// Unit camera-frame direction for grid pixel (u, v): the grid samples image
/// coordinates ((u+0.5)/cols*width, (v+0.5)/rows*height) of the pinhole model.
Vec3 pinholeRayDir(const Intrinsics& intr, const RayGrid& grid, int u, int v);

/// Renders the ray grid from `pose` against the world.
SimulatedFrame renderObservation(const WorldSpec& world, const Pose& pose, const Intrinsics& intr,
                                 const RayGrid& grid = {});

/// Degrades a frame into the factored estimate. Ray directions are exact;
/// depth gets per-pixel relative noise and division by the true scale; the
/// pose gets a right-composed rigid perturbation and is re-expressed
/// relative to the anchor pose; the scale estimate gets log-normal noise.
FactoredGeometryEstimate degradeToEstimate(const SimulatedFrame& frame, const Pose& anchor_pose_true,
                                           const NoiseConfig& noise, Rng& rng);

/// Composes the factored estimate into a point cloud: one point per hit
/// pixel at pose_est * (scale_est * depth * ray_dir). World-frame iff the
/// estimate has been anchored.
TaggedPointCloud backproject(const FactoredGeometryEstimate& est, const SimulatedFrame& frame,
                             int source_view = 0);

/// Left-composes every estimate with the known world pose of the reference
/// camera. Idempotent: already-anchored estimates are left untouched.
/// Throws std::invalid_argument on an empty list.
void anchorFrames(std::vector<FactoredGeometryEstimate*> estimates, const Pose& anchor_pose_world);
void anchorFrame(FactoredGeometryEstimate& estimate, const Pose& anchor_pose_world);

} // namespace asg
