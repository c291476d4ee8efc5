#include "asg/world.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace asg {

using jsonutil::json;
using jsonutil::ordered_json;

int NavGrid::freeCellCount() const {
    int n = 0;
    for (auto c : cells) n += (c != 0);
    return n;
}

const WorldObject* WorldSpec::findObject(const std::string& id) const {
    for (const auto& o : objects)
        if (o.id == id) return &o;
    return nullptr;
}

const ExternalCamera* WorldSpec::findCamera(const std::string& id) const {
    for (const auto& c : external_cameras)
        if (c.id == id) return &c;
    return nullptr;
}

void WorldSpec::bounds(Vec3& lo, Vec3& hi) const {
    lo = Vec3(1e9, 1e9, 1e9);
    hi = Vec3(-1e9, -1e9, -1e9);
    auto extend = [&](const OrientedBox& box) {
        for (const auto& c : obbCorners(box)) {
            lo = lo.cwiseMin(c);
            hi = hi.cwiseMax(c);
        }
    };
    for (const auto& o : objects) extend(o.box);
    for (const auto& w : walls) extend(w);
    const Vec2 nav_lo = navigable.origin;
    const Vec2 nav_hi = navigable.origin + Vec2(navigable.cols * navigable.resolution,
                                                navigable.rows * navigable.resolution);
    lo = lo.cwiseMin(Vec3(nav_lo.x(), nav_lo.y(), floor_z));
    hi = hi.cwiseMax(Vec3(nav_hi.x(), nav_hi.y(), floor_z));
    for (const auto& c : external_cameras) {
        lo = lo.cwiseMin(c.pose.translation);
        hi = hi.cwiseMax(c.pose.translation);
    }
    lo -= Vec3(0.25, 0.25, 0.25);
    hi += Vec3(0.25, 0.25, 0.25);
}

std::vector<std::string> WorldSpec::labelVocabulary() const {
    std::set<std::string> labels;
    for (const auto& o : objects) labels.insert(o.label);
    return {labels.begin(), labels.end()};
}

std::string RaycastHit::objectId(const WorldSpec& world) const {
    if (is_wall) return "wall";
    return world.objects[static_cast<size_t>(index)].id;
}

const std::string& RaycastHit::label(const WorldSpec& world) const {
    static const std::string kWall = "wall";
    if (is_wall) return kWall;
    return world.objects[static_cast<size_t>(index)].label;
}

std::optional<RaycastHit> raycastScene(const WorldSpec& world, const Ray& ray) {
    std::optional<RaycastHit> best;
    for (size_t i = 0; i < world.objects.size(); ++i) {
        if (auto t = rayObbIntersect(ray, world.objects[i].box)) {
            if (!best || *t < best->depth) best = RaycastHit{false, static_cast<int>(i), *t};
        }
    }
    for (size_t i = 0; i < world.walls.size(); ++i) {
        if (auto t = rayObbIntersect(ray, world.walls[i])) {
            if (!best || *t < best->depth) best = RaycastHit{true, static_cast<int>(i), *t};
        }
    }
    return best;
}

void validateWorld(const WorldSpec& world) {
    std::set<std::string> ids;
    for (size_t i = 0; i < world.objects.size(); ++i) {
        const auto& o = world.objects[i];
        const std::string ctx = "objects[" + std::to_string(i) + "]";
        if (o.id.empty()) throw ValidationError(ctx + ": empty id");
        if (!ids.insert(o.id).second) throw ValidationError(ctx + ": duplicate id \"" + o.id + "\"");
        if (o.label.empty()) throw ValidationError(ctx + ": empty label");
        if (o.box.half_extents.minCoeff() <= 0.0)
            throw ValidationError(ctx + ": half_extents must be strictly positive");
        if (o.box.bottomZ() < world.floor_z - 1e-9)
            throw ValidationError(ctx + ": box extends below floor_z");
    }
    for (size_t i = 0; i < world.walls.size(); ++i) {
        if (world.walls[i].half_extents.minCoeff() <= 0.0)
            throw ValidationError("walls[" + std::to_string(i) + "]: half_extents must be strictly positive");
    }
    if (world.navigable.cols <= 0 || world.navigable.rows <= 0 ||
        world.navigable.freeCellCount() == 0)
        throw ValidationError("navigable: region is empty");
    if (world.navigable.resolution <= 0.0)
        throw ValidationError("navigable.resolution: must be positive");
    if (world.navigable.cells.size() !=
        static_cast<size_t>(world.navigable.cols) * world.navigable.rows)
        throw ValidationError("navigable: rows do not match declared dimensions");
    std::set<std::string> cam_ids;
    for (size_t i = 0; i < world.external_cameras.size(); ++i) {
        const auto& cam = world.external_cameras[i];
        const std::string ctx = "external_cameras[" + std::to_string(i) + "]";
        if (cam.id.empty()) throw ValidationError(ctx + ": empty id");
        if (!cam_ids.insert(cam.id).second) throw ValidationError(ctx + ": duplicate id");
        if (std::abs(cam.pose.rotation.norm() - 1.0) > 1e-6)
            throw ValidationError(ctx + ".pose.rotation: not a unit quaternion");
        const auto& k = cam.intrinsics;
        if (k.width <= 0 || k.height <= 0) throw ValidationError(ctx + ".intrinsics: bad image size");
        if (k.fx <= 0.0 || k.fy <= 0.0) throw ValidationError(ctx + ".intrinsics: fx, fy must be positive");
        if (k.cx < 0.0 || k.cx >= k.width || k.cy < 0.0 || k.cy >= k.height)
            throw ValidationError(ctx + ".intrinsics: principal point outside image");
    }
}

namespace {

Intrinsics parseIntrinsics(const json& v, const std::string& ctx) {
    jsonutil::rejectUnknownKeys(v, ctx, {"width", "height", "fx", "fy", "cx", "cy"});
    Intrinsics k;
    k.width = jsonutil::asInt(jsonutil::require(v, ctx, "width"), ctx + ".width");
    k.height = jsonutil::asInt(jsonutil::require(v, ctx, "height"), ctx + ".height");
    k.fx = jsonutil::asNumber(jsonutil::require(v, ctx, "fx"), ctx + ".fx");
    k.fy = jsonutil::asNumber(jsonutil::require(v, ctx, "fy"), ctx + ".fy");
    k.cx = jsonutil::asNumber(jsonutil::require(v, ctx, "cx"), ctx + ".cx");
    k.cy = jsonutil::asNumber(jsonutil::require(v, ctx, "cy"), ctx + ".cy");
    return k;
}

ordered_json intrinsicsToJson(const Intrinsics& k) {
    ordered_json j;
    j["width"] = k.width;
    j["height"] = k.height;
    j["fx"] = k.fx;
    j["fy"] = k.fy;
    j["cx"] = k.cx;
    j["cy"] = k.cy;
    return j;
}

} // namespace

WorldSpec sceneFromJsonText(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scene: ") + e.what());
    }
    if (!root.is_object()) throw ParseError("scene: top level must be an object");
    jsonutil::rejectUnknownKeys(root, "scene",
                                {"objects", "walls", "floor_z", "navigable", "external_cameras"});

    WorldSpec world;
    world.floor_z = jsonutil::asNumber(jsonutil::require(root, "scene", "floor_z"), "floor_z");

    const json& objs = jsonutil::require(root, "scene", "objects");
    if (!objs.is_array()) throw ParseError("objects: expected an array");
    for (size_t i = 0; i < objs.size(); ++i) {
        const std::string ctx = "objects[" + std::to_string(i) + "]";
        const json& o = objs[i];
        if (!o.is_object()) throw ParseError(ctx + ": expected an object");
        jsonutil::rejectUnknownKeys(o, ctx, {"id", "label", "center", "half_extents", "yaw"});
        WorldObject obj;
        obj.id = jsonutil::asString(jsonutil::require(o, ctx, "id"), ctx + ".id");
        obj.label = jsonutil::asString(jsonutil::require(o, ctx, "label"), ctx + ".label");
        obj.box.center = jsonutil::asVec3(jsonutil::require(o, ctx, "center"), ctx + ".center");
        obj.box.half_extents =
            jsonutil::asVec3(jsonutil::require(o, ctx, "half_extents"), ctx + ".half_extents");
        obj.box.yaw = jsonutil::asNumber(jsonutil::require(o, ctx, "yaw"), ctx + ".yaw");
        world.objects.push_back(std::move(obj));
    }

    const json& walls = jsonutil::require(root, "scene", "walls");
    if (!walls.is_array()) throw ParseError("walls: expected an array");
    for (size_t i = 0; i < walls.size(); ++i)
        world.walls.push_back(jsonutil::asBox(walls[i], "walls[" + std::to_string(i) + "]"));

    const json& nav = jsonutil::require(root, "scene", "navigable");
    if (!nav.is_object()) throw ParseError("navigable: expected an object");
    jsonutil::rejectUnknownKeys(nav, "navigable", {"origin", "resolution", "rows"});
    world.navigable.origin = jsonutil::asVec2(jsonutil::require(nav, "navigable", "origin"),
                                              "navigable.origin");
    world.navigable.resolution =
        jsonutil::asNumber(jsonutil::require(nav, "navigable", "resolution"), "navigable.resolution");
    const json& rows = jsonutil::require(nav, "navigable", "rows");
    if (!rows.is_array() || rows.empty()) throw ParseError("navigable.rows: expected a non-empty array");
    world.navigable.rows = static_cast<int>(rows.size());
    for (size_t r = 0; r < rows.size(); ++r) {
        const std::string row = jsonutil::asString(rows[r], "navigable.rows[" + std::to_string(r) + "]");
        if (r == 0) world.navigable.cols = static_cast<int>(row.size());
        if (static_cast<int>(row.size()) != world.navigable.cols)
            throw ParseError("navigable.rows[" + std::to_string(r) + "]: ragged row length");
        for (char c : row) {
            if (c != '.' && c != '#')
                throw ParseError("navigable.rows[" + std::to_string(r) + "]: expected only '.' or '#'");
            world.navigable.cells.push_back(c == '.' ? 1 : 0);
        }
    }

    const json& cams = jsonutil::require(root, "scene", "external_cameras");
    if (!cams.is_array()) throw ParseError("external_cameras: expected an array");
    for (size_t i = 0; i < cams.size(); ++i) {
        const std::string ctx = "external_cameras[" + std::to_string(i) + "]";
        const json& c = cams[i];
        if (!c.is_object()) throw ParseError(ctx + ": expected an object");
        jsonutil::rejectUnknownKeys(c, ctx, {"id", "pose", "intrinsics"});
        ExternalCamera cam;
        cam.id = jsonutil::asString(jsonutil::require(c, ctx, "id"), ctx + ".id");
        cam.pose = jsonutil::asPose(jsonutil::require(c, ctx, "pose"), ctx + ".pose");
        cam.intrinsics = parseIntrinsics(jsonutil::require(c, ctx, "intrinsics"), ctx + ".intrinsics");
        world.external_cameras.push_back(std::move(cam));
    }

    validateWorld(world);
    return world;
}

WorldSpec loadScene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("scene: cannot open \"" + path + "\"");
    std::stringstream buf;
    buf << in.rdbuf();
    return sceneFromJsonText(buf.str());
}

std::string sceneToJsonText(const WorldSpec& world) {
    ordered_json root;
    root["objects"] = ordered_json::array();
    for (const auto& o : world.objects) {
        ordered_json j;
        j["id"] = o.id;
        j["label"] = o.label;
        j["center"] = jsonutil::vec3ToJson(o.box.center);
        j["half_extents"] = jsonutil::vec3ToJson(o.box.half_extents);
        j["yaw"] = o.box.yaw;
        root["objects"].push_back(std::move(j));
    }
    root["walls"] = ordered_json::array();
    for (const auto& w : world.walls) root["walls"].push_back(jsonutil::boxToJson(w));
    root["floor_z"] = world.floor_z;
    ordered_json nav;
    nav["origin"] = ordered_json::array({world.navigable.origin.x(), world.navigable.origin.y()});
    nav["resolution"] = world.navigable.resolution;
    nav["rows"] = ordered_json::array();
    for (int r = 0; r < world.navigable.rows; ++r) {
        std::string row;
        for (int c = 0; c < world.navigable.cols; ++c)
            row.push_back(world.navigable.navigable(c, r) ? '.' : '#');
        nav["rows"].push_back(row);
    }
    root["navigable"] = std::move(nav);
    root["external_cameras"] = ordered_json::array();
    for (const auto& cam : world.external_cameras) {
        ordered_json j;
        j["id"] = cam.id;
        j["pose"] = jsonutil::poseToJson(cam.pose);
        j["intrinsics"] = intrinsicsToJson(cam.intrinsics);
        root["external_cameras"].push_back(std::move(j));
    }
    return root.dump(2) + "\n";
}

void saveScene(const WorldSpec& world, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write \"" + path + "\"");
    out << sceneToJsonText(world);
}

} // namespace asg
