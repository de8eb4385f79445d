#pragma once

#include "deixis/action.hpp"
#include "deixis/fusion.hpp"
#include "deixis/geometry.hpp"
#include "deixis/grammar.hpp"
#include "deixis/workcell.hpp"

#include <json.hpp>

namespace nlohmann {

template <>
struct adl_serializer<deixis::Vec3> {
    static void to_json(json& j, const deixis::Vec3& v) { j = json::array({v.x(), v.y(), v.z()}); }
    static void from_json(const json& j, deixis::Vec3& v) {
        if (!j.is_array() || j.size() != 3) throw json::type_error::create(302, "expected [x, y, z]", &j);
        v = deixis::Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
    }
};

template <>
struct adl_serializer<deixis::Vec2> {
    static void to_json(json& j, const deixis::Vec2& v) { j = json::array({v.x(), v.y()}); }
    static void from_json(const json& j, deixis::Vec2& v) {
        if (!j.is_array() || j.size() != 2) throw json::type_error::create(302, "expected [x, y]", &j);
        v = deixis::Vec2(j[0].get<double>(), j[1].get<double>());
    }
};

}  // namespace nlohmann

namespace deixis {

using nlohmann::json;

void to_json(json& j, const ObjectRecord& o);
void from_json(const json& j, ObjectRecord& o);
void to_json(json& j, const Scene& s);
void from_json(const json& j, Scene& s);
void to_json(json& j, const DeicticRay& r);
void from_json(const json& j, DeicticRay& r);
void to_json(json& j, const Detection& d);
void from_json(const json& j, Detection& d);
void to_json(json& j, const CameraModel& c);
void from_json(const json& j, CameraModel& c);

void to_json(json& j, const Metric& m);
void from_json(const json& j, Metric& m);
void to_json(json& j, const SubCommand& s);
void from_json(const json& j, SubCommand& s);
void to_json(json& j, const Intention& i);
void from_json(const json& j, Intention& i);

void to_json(json& j, const Pose& p);
void from_json(const json& j, Pose& p);
void to_json(json& j, const RobotState& r);
void from_json(const json& j, RobotState& r);
void to_json(json& j, const WorkcellConfig& c);
void from_json(const json& j, WorkcellConfig& c);

void to_json(json& j, const ActionStep& s);
void from_json(const json& j, ActionStep& s);
void to_json(json& j, const ActionSequence& s);

/// Compact form used when comparing intentions: actions, object ids, metrics.
json intention_summary(const Intention& i);

}  // namespace deixis
