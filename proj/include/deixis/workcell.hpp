#pragma once

#include "deixis/action.hpp"
#include "deixis/error.hpp"
#include "deixis/geometry.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace deixis {

using Vec2 = Eigen::Vector2d;

/// End-effector pose: position in metres, roll/pitch/yaw in radians.
struct Pose {
    Vec3 position = Vec3::Zero();
    Vec3 rpy = Vec3::Zero();

    bool operator==(const Pose&) const = default;
};

struct RobotState {
    Pose pose;
    double gripper_angle = 0.0;  // radians, last commanded finger angle
    bool gripper_open = false;
    std::optional<std::string> holding;
    Vec3 grasp_offset = Vec3::Zero();  // held object position minus end-effector position

    bool operator==(const RobotState&) const = default;
};

struct AxisBox {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();

    bool contains(const Vec3& p) const { return (p.array() >= min.array()).all() && (p.array() <= max.array()).all(); }
};

struct WorkcellConfig {
    AxisBox workspace{Vec3(-0.6, -0.2, 0.0), Vec3(0.6, 0.8, 0.6)};
    Vec2 table_min{-0.6, 0.0};
    Vec2 table_max{0.6, 0.8};
    Pose home{Vec3(0.0, 0.2, 0.4), Vec3::Zero()};
    Vec2 bin_xy{-0.45, -0.12};
    double bin_radius = 0.08;
    Vec2 near_anchor{0.0, 0.75};
    Vec2 flush_xy{0.45, -0.1};
    double flush_press_m = 0.05;
    double clearance_margin = 0.05;
    double cruise_height = 0.25;
    double gripper_width = 0.085;
    double grasp_tolerance = 0.01;
    double grasp_vertical_tolerance = 0.01;
    double theta_min_deg = 5.0;
    double theta_max_deg = 50.0;
    double width_max = 0.12;
    double max_release_drop = 0.05;
    double place_gap = 0.01;
    double pour_event_deg = 45.0;
    double push_distance = 0.15;
    bool check_collisions = true;  // executor-side swept collision test on transits
};

/// Finger angle in degrees for an object of width b:
/// clamp(theta_max * (1 - b / b_max), theta_min, theta_max).
double gripper_angle_from_width(double width_m, const WorkcellConfig& cfg);

struct LogEntry {
    double t = 0.0;
    std::size_t step_index = 0;
    ActionStep step;
    RobotState robot;
    std::optional<Vec3> held_position;
    std::vector<std::string> events;
};

struct WorkcellState {
    RobotState robot;
    Scene scene;
    std::vector<LogEntry> trajectory_log;
    double clock = 0.0;
};

/// Robot at home, gripper closed, nothing held.
RobotState initial_robot(const WorkcellConfig& cfg);

/// Places `held_id` in the gripper: the object is moved to the end-effector.
void attach_held_object(WorkcellState& state, const std::string& held_id);

/// What the clearance rule needs to know about a held object.
struct HeldInfo {
    std::string id;
    double width_m = 0.0;
    double hang_m = 0.0;  // how far the held object's bottom hangs below the end-effector
};

std::optional<HeldInfo> held_info(const RobotState& robot, const Scene& scene);

struct ClearanceVerdict {
    bool ok = true;
    double transit_z = 0.0;
    double required_z = 0.0;
    std::optional<std::string> blocking_id;
};

/// Object boxes are centred on their position: z spans position.z +- height/2.
double object_top(const ObjectRecord& o);
double object_bottom(const ObjectRecord& o);

/// Does the oriented rectangle of half-width `half_width` around segment a-b
/// overlap the axis-aligned rectangle [lo, hi]? Closed sets; touching counts.
bool corridor_intersects_rect(const Vec2& a, const Vec2& b, double half_width, const Vec2& lo, const Vec2& hi);

/// Height an end-effector must keep for the straight transit a -> b:
/// tallest box met by the corridor + margin, plus the held object's hang.
/// Also reports which object sets that height.
ClearanceVerdict required_clearance(const Vec2& a, const Vec2& b, const Scene& scene,
                                    const std::optional<HeldInfo>& held, const WorkcellConfig& cfg);

/// A transit at z = min(from.z, to.z) passes iff z - hang >= max(h) + margin
/// over every box touched by the corridor (held object excluded). Corridor
/// width is gripper width plus held width.
ClearanceVerdict clearance_check(const Pose& from, const Pose& to, const Scene& scene,
                                 const std::optional<HeldInfo>& held, const WorkcellConfig& cfg);

/// Executor-side test of the straight 3D path from -> to: walks the path in
/// 1 mm steps and reports the first object whose box the tool (and held
/// object) cross-section actually enters. No margin.
std::optional<std::string> swept_collision(const Pose& from, const Pose& to, const Scene& scene,
                                           const std::optional<HeldInfo>& held, const WorkcellConfig& cfg);

bool over_table(const Vec2& xy, const WorkcellConfig& cfg);
bool over_bin(const Vec2& xy, const WorkcellConfig& cfg);

/// Top of the tallest object (excluding `exclude`) whose footprint contains
/// xy, or 0 for the bare table.
double support_height(const Vec2& xy, const Scene& scene, const std::optional<std::string>& exclude);

/// The object a close_gripper at the current pose would catch, if any.
std::optional<std::string> graspable_object(const RobotState& robot, const Scene& scene, const WorkcellConfig& cfg);

/// Applies one primitive. Throws GraspMissed, ReleaseOverVoid,
/// CollisionPredicted or UnknownApiCall; `state` is unchanged on error.
WorkcellState execute_step(WorkcellState state, const ActionStep& step, const WorkcellConfig& cfg);

struct ExecutionResult {
    WorkcellState state;
    std::optional<Error> error;  // first failure; state reflects steps before it

    bool ok() const { return !error.has_value(); }
};

ExecutionResult execute_sequence(WorkcellState state, const ActionSequence& seq, const WorkcellConfig& cfg);

nlohmann::json log_entry_json(const LogEntry& e);

/// Line-delimited JSON export of the trajectory log.
std::string trajectory_jsonl(const std::vector<LogEntry>& log);

}  // namespace deixis
