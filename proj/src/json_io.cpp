#include "deixis/json_io.hpp"

#include <numbers>

namespace deixis {

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

UnitKind unit_from(const std::string& s) {
    if (s == "degrees") return UnitKind::Degrees;
    if (s == "speed") return UnitKind::SpeedLevel;
    if (s == "spatial") return UnitKind::Spatial;
    throw json::other_error::create(501, "unknown metric unit '" + s + "'", nullptr);
}

}  // namespace

void to_json(json& j, const ObjectRecord& o) {
    j = {{"id", o.id}, {"class", o.class_name}, {"position", o.position},
         {"height_m", o.height_m}, {"width_m", o.width_m}};
}

void from_json(const json& j, ObjectRecord& o) {
    o.id = j.at("id").get<std::string>();
    o.class_name = j.at("class").get<std::string>();
    o.position = j.at("position").get<Vec3>();
    o.height_m = j.at("height_m").get<double>();
    o.width_m = j.at("width_m").get<double>();
}

void to_json(json& j, const Scene& s) { j = {{"objects", s.objects}, {"timestamp", s.timestamp}}; }

void from_json(const json& j, Scene& s) {
    s.objects = j.at("objects").get<std::vector<ObjectRecord>>();
    s.timestamp = j.value("timestamp", 0.0);
}

void to_json(json& j, const DeicticRay& r) { j = {{"r1", r.r1}, {"r2", r.r2}, {"t", r.timestamp}}; }

void from_json(const json& j, DeicticRay& r) {
    r.r1 = j.at("r1").get<Vec3>();
    r.r2 = j.at("r2").get<Vec3>();
    r.timestamp = j.at("t").get<double>();
}

void to_json(json& j, const Detection& d) {
    j = {{"class", d.class_name},
         {"bbox", {d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max}},
         {"depth_m", d.depth_m},
         {"t", d.timestamp},
         {"confidence", d.confidence}};
}

void from_json(const json& j, Detection& d) {
    d.class_name = j.at("class").get<std::string>();
    const auto& b = j.at("bbox");
    if (!b.is_array() || b.size() != 4) throw json::type_error::create(302, "bbox must be [x0, y0, x1, y1]", &b);
    d.bbox = BBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
    d.depth_m = j.at("depth_m").get<double>();
    d.timestamp = j.at("t").get<double>();
    d.confidence = j.value("confidence", 1.0);
}

void to_json(json& j, const CameraModel& c) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) {
        rows.push_back({c.extrinsic.rotation(r, 0), c.extrinsic.rotation(r, 1), c.extrinsic.rotation(r, 2)});
    }
    j = {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width}, {"height", c.height},
         {"extrinsic", {{"rotation", rows}, {"translation", c.extrinsic.translation}}}};
}

void from_json(const json& j, CameraModel& c) {
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.width = j.value("width", 640);
    c.height = j.value("height", 480);
    const auto& ext = j.at("extrinsic");
    const auto& rows = ext.at("rotation");
    if (!rows.is_array() || rows.size() != 3) throw json::type_error::create(302, "rotation must be 3x3", &rows);
    for (int r = 0; r < 3; ++r) {
        const Vec3 row = rows[static_cast<std::size_t>(r)].get<Vec3>();
        c.extrinsic.rotation.row(r) = row.transpose();
    }
    c.extrinsic.translation = ext.at("translation").get<Vec3>();
}

void to_json(json& j, const Metric& m) {
    j = {{"unit", std::string(to_string(m.unit))}, {"value", m.value}};
    if (!m.qualifier.empty()) j["qualifier"] = m.qualifier;
}

void from_json(const json& j, Metric& m) {
    m.unit = unit_from(j.at("unit").get<std::string>());
    m.value = j.value("value", 0.0);
    m.qualifier = j.value("qualifier", std::string{});
}

void to_json(json& j, const SubCommand& s) {
    j = {{"action", s.action}, {"class", optional_json(s.class_name)},
         {"object", optional_json(s.object)}, {"metric", optional_json(s.metric)}};
}

void from_json(const json& j, SubCommand& s) {
    s.action = j.at("action").get<std::string>();
    s.class_name = optional_from<std::string>(j, "class");
    s.object = optional_from<ObjectRecord>(j, "object");
    s.metric = optional_from<Metric>(j, "metric");
}

void to_json(json& j, const Intention& i) {
    j = {{"subcommands", i.subcommands}, {"omega", optional_json(i.omega)},
         {"scene", i.scene}, {"timestamp", i.timestamp}};
}

void from_json(const json& j, Intention& i) {
    i.subcommands = j.at("subcommands").get<std::vector<SubCommand>>();
    i.omega = optional_from<Metric>(j, "omega");
    i.scene = j.at("scene").get<Scene>();
    i.timestamp = j.value("timestamp", 0.0);
}

void to_json(json& j, const Pose& p) { j = {{"position", p.position}, {"rpy", p.rpy}}; }

void from_json(const json& j, Pose& p) {
    p.position = j.at("position").get<Vec3>();
    p.rpy = j.value("rpy", Vec3(Vec3::Zero()));
}

void to_json(json& j, const RobotState& r) {
    j = {{"pose", r.pose},
         {"gripper_angle", r.gripper_angle},
         {"gripper_open", r.gripper_open},
         {"holding", optional_json(r.holding)},
         {"grasp_offset", r.grasp_offset}};
}

void from_json(const json& j, RobotState& r) {
    r.pose = j.at("pose").get<Pose>();
    r.gripper_angle = j.at("gripper_angle").get<double>();
    r.gripper_open = j.at("gripper_open").get<bool>();
    r.holding = optional_from<std::string>(j, "holding");
    r.grasp_offset = j.value("grasp_offset", Vec3(Vec3::Zero()));
}

void to_json(json& j, const WorkcellConfig& c) {
    j = {{"workspace", {{"min", c.workspace.min}, {"max", c.workspace.max}}},
         {"table", {{"min", c.table_min}, {"max", c.table_max}}},
         {"home", {{"position", c.home.position}, {"rpy_deg", Vec3(c.home.rpy * 180.0 / std::numbers::pi)}}},
         {"bin", {{"xy", c.bin_xy}, {"radius", c.bin_radius}}},
         {"near_anchor", c.near_anchor},
         {"flush", {{"xy", c.flush_xy}, {"press_m", c.flush_press_m}}},
         {"clearance_margin", c.clearance_margin},
         {"cruise_height", c.cruise_height},
         {"gripper_width", c.gripper_width},
         {"grasp_tolerance", c.grasp_tolerance},
         {"grasp_vertical_tolerance", c.grasp_vertical_tolerance},
         {"theta_min_deg", c.theta_min_deg},
         {"theta_max_deg", c.theta_max_deg},
         {"width_max", c.width_max},
         {"max_release_drop", c.max_release_drop},
         {"place_gap", c.place_gap},
         {"pour_event_deg", c.pour_event_deg},
         {"push_distance", c.push_distance}};
}

void from_json(const json& j, WorkcellConfig& c) {
    c.workspace.min = j.at("workspace").at("min").get<Vec3>();
    c.workspace.max = j.at("workspace").at("max").get<Vec3>();
    c.table_min = j.at("table").at("min").get<Vec2>();
    c.table_max = j.at("table").at("max").get<Vec2>();
    c.home.position = j.at("home").at("position").get<Vec3>();
    c.home.rpy = j.at("home").value("rpy_deg", Vec3(Vec3::Zero())) * std::numbers::pi / 180.0;
    c.bin_xy = j.at("bin").at("xy").get<Vec2>();
    c.bin_radius = j.at("bin").at("radius").get<double>();
    c.near_anchor = j.at("near_anchor").get<Vec2>();
    c.flush_xy = j.at("flush").at("xy").get<Vec2>();
    c.flush_press_m = j.at("flush").at("press_m").get<double>();
    c.clearance_margin = j.at("clearance_margin").get<double>();
    c.cruise_height = j.at("cruise_height").get<double>();
    c.gripper_width = j.at("gripper_width").get<double>();
    c.grasp_tolerance = j.at("grasp_tolerance").get<double>();
    c.grasp_vertical_tolerance = j.at("grasp_vertical_tolerance").get<double>();
    c.theta_min_deg = j.at("theta_min_deg").get<double>();
    c.theta_max_deg = j.at("theta_max_deg").get<double>();
    c.width_max = j.at("width_max").get<double>();
    c.max_release_drop = j.at("max_release_drop").get<double>();
    c.place_gap = j.at("place_gap").get<double>();
    c.pour_event_deg = j.at("pour_event_deg").get<double>();
    c.push_distance = j.at("push_distance").get<double>();
}

void to_json(json& j, const ActionStep& s) {
    json args = json::array();
    for (const auto& a : s.args) args.push_back({{"name", a.name}, {"value", a.value}});
    j = {{"primitive", s.primitive}, {"args", args}, {"text", format_step(s)}};
}

void from_json(const json& j, ActionStep& s) {
    s.primitive = j.at("primitive").get<std::string>();
    s.args.clear();
    for (const auto& a : j.at("args")) s.args.push_back(Arg{a.at("name").get<std::string>(), a.at("value").get<double>()});
}

void to_json(json& j, const ActionSequence& s) {
    j = {{"provenance", s.provenance.describe()}, {"steps", s.steps}};
}

json intention_summary(const Intention& i) {
    json subs = json::array();
    for (const auto& s : i.subcommands) {
        subs.push_back({{"action", s.action},
                        {"object", s.object ? json(s.object->id) : json(nullptr)},
                        {"metric", optional_json(s.metric)}});
    }
    return {{"subcommands", subs}, {"omega", optional_json(i.omega)}};
}

}  // namespace deixis
