#pragma once

#include "asg/geometry.hpp"
#include "asg/world.hpp"

#include <nlohmann/json.hpp>

#include <initializer_list>
#include <string>

// Internal helpers shared by the scene/graph/config parsers. All parsers are
// strict: unknown keys are rejected so schema drift is caught early.

namespace asg::jsonutil {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline void rejectUnknownKeys(const json& obj, const std::string& ctx,
                              std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ParseError(ctx + ": unknown key \"" + it.key() + "\"");
    }
}

inline const json& require(const json& obj, const std::string& ctx, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(ctx + ": missing key \"" + key + "\"");
    return *it;
}

inline double asNumber(const json& v, const std::string& ctx) {
    if (!v.is_number()) throw ParseError(ctx + ": expected a number");
    return v.get<double>();
}

inline int asInt(const json& v, const std::string& ctx) {
    if (!v.is_number_integer()) throw ParseError(ctx + ": expected an integer");
    return v.get<int>();
}

inline std::string asString(const json& v, const std::string& ctx) {
    if (!v.is_string()) throw ParseError(ctx + ": expected a string");
    return v.get<std::string>();
}

inline bool asBool(const json& v, const std::string& ctx) {
    if (!v.is_boolean()) throw ParseError(ctx + ": expected a boolean");
    return v.get<bool>();
}

inline Vec3 asVec3(const json& v, const std::string& ctx) {
    if (!v.is_array() || v.size() != 3) throw ParseError(ctx + ": expected array of 3 numbers");
    return Vec3(asNumber(v[0], ctx), asNumber(v[1], ctx), asNumber(v[2], ctx));
}

inline Vec2 asVec2(const json& v, const std::string& ctx) {
    if (!v.is_array() || v.size() != 2) throw ParseError(ctx + ": expected array of 2 numbers");
    return Vec2(asNumber(v[0], ctx), asNumber(v[1], ctx));
}

inline ordered_json vec3ToJson(const Vec3& v) {
    return ordered_json::array({v.x(), v.y(), v.z()});
}

inline OrientedBox asBox(const json& v, const std::string& ctx) {
    if (!v.is_object()) throw ParseError(ctx + ": expected an object");
    rejectUnknownKeys(v, ctx, {"center", "half_extents", "yaw"});
    OrientedBox box;
    box.center = asVec3(require(v, ctx, "center"), ctx + ".center");
    box.half_extents = asVec3(require(v, ctx, "half_extents"), ctx + ".half_extents");
    box.yaw = asNumber(require(v, ctx, "yaw"), ctx + ".yaw");
    return box;
}

inline ordered_json boxToJson(const OrientedBox& box) {
    ordered_json j;
    j["center"] = vec3ToJson(box.center);
    j["half_extents"] = vec3ToJson(box.half_extents);
    j["yaw"] = box.yaw;
    return j;
}

/// Pose as {"rotation": [w,x,y,z], "translation": [x,y,z]}.
inline Pose asPose(const json& v, const std::string& ctx) {
    if (!v.is_object()) throw ParseError(ctx + ": expected an object");
    rejectUnknownKeys(v, ctx, {"rotation", "translation"});
    const json& r = require(v, ctx, "rotation");
    if (!r.is_array() || r.size() != 4) throw ParseError(ctx + ".rotation: expected array of 4 numbers");
    Pose pose;
    pose.rotation = Eigen::Quaterniond(asNumber(r[0], ctx), asNumber(r[1], ctx), asNumber(r[2], ctx),
                                       asNumber(r[3], ctx));
    pose.translation = asVec3(require(v, ctx, "translation"), ctx + ".translation");
    return pose;
}

inline ordered_json poseToJson(const Pose& pose) {
    ordered_json j;
    j["rotation"] = ordered_json::array(
        {pose.rotation.w(), pose.rotation.x(), pose.rotation.y(), pose.rotation.z()});
    j["translation"] = vec3ToJson(pose.translation);
    return j;
}

} // namespace asg::jsonutil
