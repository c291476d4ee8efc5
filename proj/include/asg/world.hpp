#pragma once

#include "asg/geometry.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace asg {

/// Raised for malformed scene/config files; message carries field context.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a parsed file violates a documented invariant.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Intrinsics {
    int width = 640;
    int height = 480;
    double fx = 320.0;
    double fy = 320.0;
    double cx = 319.5;
    double cy = 239.5;
};

struct WorldObject {
    std::string id;
    std::string label;
    OrientedBox box;
};

struct ExternalCamera {
    std::string id;
    Pose pose;
    Intrinsics intrinsics;
};

/// 2D occupancy grid of navigable floor cells. Cell (0,0) spans
/// [origin, origin + resolution) on both axes; rows are indexed by y.
struct NavGrid {
    Vec2 origin{0.0, 0.0};
    double resolution = 0.25;
    int cols = 0;
    int rows = 0;
    std::vector<std::uint8_t> cells; // row-major, 1 = navigable

    bool inBounds(int cx, int cy) const { return cx >= 0 && cx < cols && cy >= 0 && cy < rows; }
    bool navigable(int cx, int cy) const {
        return inBounds(cx, cy) && cells[static_cast<size_t>(cy) * cols + cx] != 0;
    }
    void set(int cx, int cy, bool nav) { cells[static_cast<size_t>(cy) * cols + cx] = nav ? 1 : 0; }
    Vec2 cellCenter(int cx, int cy) const {
        return origin + Vec2((cx + 0.5) * resolution, (cy + 0.5) * resolution);
    }
    std::optional<std::pair<int, int>> cellOf(double x, double y) const {
        const int cx = static_cast<int>(std::floor((x - origin.x()) / resolution));
        const int cy = static_cast<int>(std::floor((y - origin.y()) / resolution));
        if (!inBounds(cx, cy)) return std::nullopt;
        return std::make_pair(cx, cy);
    }
    int freeCellCount() const;
};

struct WorldSpec {
    std::vector<WorldObject> objects;
    std::vector<OrientedBox> walls; // opaque structure, label "wall"
    double floor_z = 0.0;
    NavGrid navigable;
    std::vector<ExternalCamera> external_cameras;

    const WorldObject* findObject(const std::string& id) const;
    const ExternalCamera* findCamera(const std::string& id) const;

    /// Axis-aligned bounds enclosing all geometry plus a small margin.
    void bounds(Vec3& lo, Vec3& hi) const;

    /// Sorted unique object labels (the scene's label vocabulary).
    std::vector<std::string> labelVocabulary() const;
};

struct RaycastHit {
    bool is_wall = false;
    int index = -1;       // into objects or walls
    double depth = 0.0;   // Euclidean distance along the (unit) ray
    std::string objectId(const WorldSpec& world) const;
    const std::string& label(const WorldSpec& world) const;
};

/// Nearest intersection over all objects and walls; nullopt on miss.
std::optional<RaycastHit> raycastScene(const WorldSpec& world, const Ray& ray);

/// Parses and validates a scene file. Throws ParseError / ValidationError.
WorldSpec loadScene(const std::string& path);
WorldSpec sceneFromJsonText(const std::string& text);

/// Serializes a world to the scene schema (stable key order).
std::string sceneToJsonText(const WorldSpec& world);
void saveScene(const WorldSpec& world, const std::string& path);

/// Checks all WorldSpec invariants; throws ValidationError naming the field.
void validateWorld(const WorldSpec& world);

} // namespace asg
