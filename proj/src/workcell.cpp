#include "deixis/workcell.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace deixis {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kClearanceEpsilon = 1e-9;

Vec2 xy(const Vec3& p) { return p.head<2>(); }

void footprint(const ObjectRecord& o, Vec2& lo, Vec2& hi) {
    const double half = 0.5 * o.width_m;
    lo = xy(o.position) - Vec2(half, half);
    hi = xy(o.position) + Vec2(half, half);
}

void sync_held(WorkcellState& s) {
    if (!s.robot.holding) return;
    if (ObjectRecord* o = s.scene.find(*s.robot.holding)) {
        o->position = s.robot.pose.position + s.robot.grasp_offset;
    }
}

double require(const ActionStep& step, const char* name) {
    auto v = step.arg(name);
    if (!v) {
        throw Error(ErrorCode::ArgumentSchemaMismatch, step.primitive + " is missing argument '" + name + "'");
    }
    return *v;
}

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

}  // namespace

double gripper_angle_from_width(double width_m, const WorkcellConfig& cfg) {
    const double theta = cfg.theta_max_deg * (1.0 - width_m / cfg.width_max);
    return std::clamp(theta, cfg.theta_min_deg, cfg.theta_max_deg);
}

RobotState initial_robot(const WorkcellConfig& cfg) {
    RobotState r;
    r.pose = cfg.home;
    r.gripper_angle = cfg.theta_min_deg * kDegToRad;
    r.gripper_open = false;
    return r;
}

void attach_held_object(WorkcellState& state, const std::string& held_id) {
    ObjectRecord* o = state.scene.find(held_id);
    if (o == nullptr) throw Error(ErrorCode::InvalidEpisode, "held object " + held_id + " is not in the scene");
    state.robot.holding = held_id;
    state.robot.gripper_open = false;
    state.robot.grasp_offset = Vec3::Zero();
    sync_held(state);
}

std::optional<HeldInfo> held_info(const RobotState& robot, const Scene& scene) {
    if (!robot.holding) return std::nullopt;
    const ObjectRecord* o = scene.find(*robot.holding);
    if (o == nullptr) return std::nullopt;
    return HeldInfo{o->id, o->width_m, 0.5 * o->height_m - robot.grasp_offset.z()};
}

double object_top(const ObjectRecord& o) { return o.position.z() + 0.5 * o.height_m; }
double object_bottom(const ObjectRecord& o) { return o.position.z() - 0.5 * o.height_m; }

bool corridor_intersects_rect(const Vec2& a, const Vec2& b, double half_width, const Vec2& lo, const Vec2& hi) {
    const Vec2 d = b - a;
    const double len = d.norm();
    if (len < 1e-12) {
        return a.x() + half_width >= lo.x() && a.x() - half_width <= hi.x() &&
               a.y() + half_width >= lo.y() && a.y() - half_width <= hi.y();
    }
    const Vec2 u = d / len;
    const Vec2 n(-u.y(), u.x());
    const Vec2 corners[4] = {a + n * half_width, a - n * half_width, b + n * half_width, b - n * half_width};
    const Vec2 box[4] = {lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())};

    auto overlap_on = [&](const Vec2& axis) {
        double c_min = std::numeric_limits<double>::infinity(), c_max = -c_min;
        double b_min = c_min, b_max = -c_min;
        for (const auto& c : corners) {
            c_min = std::min(c_min, c.dot(axis));
            c_max = std::max(c_max, c.dot(axis));
        }
        for (const auto& c : box) {
            b_min = std::min(b_min, c.dot(axis));
            b_max = std::max(b_max, c.dot(axis));
        }
        return c_max >= b_min && b_max >= c_min;
    };
    return overlap_on(Vec2::UnitX()) && overlap_on(Vec2::UnitY()) && overlap_on(u) && overlap_on(n);
}

ClearanceVerdict required_clearance(const Vec2& a, const Vec2& b, const Scene& scene,
                                    const std::optional<HeldInfo>& held, const WorkcellConfig& cfg) {
    ClearanceVerdict v;
    const double half_width = 0.5 * (cfg.gripper_width + (held ? held->width_m : 0.0));
    double tallest = -std::numeric_limits<double>::infinity();
    for (const auto& o : scene.objects) {
        if (held && o.id == held->id) continue;
        Vec2 lo, hi;
        footprint(o, lo, hi);
        if (!corridor_intersects_rect(a, b, half_width, lo, hi)) continue;
        const double top = object_top(o);
        if (top > tallest || (top == tallest && v.blocking_id && o.id < *v.blocking_id)) {
            tallest = top;
            v.blocking_id = o.id;
        }
    }
    const double hang = held ? held->hang_m : 0.0;
    v.required_z = (v.blocking_id ? tallest + cfg.clearance_margin : 0.0) + hang;
    return v;
}

ClearanceVerdict clearance_check(const Pose& from, const Pose& to, const Scene& scene,
                                 const std::optional<HeldInfo>& held, const WorkcellConfig& cfg) {
    ClearanceVerdict v = required_clearance(xy(from.position), xy(to.position), scene, held, cfg);
    v.transit_z = std::min(from.position.z(), to.position.z());
    v.ok = v.transit_z >= v.required_z - kClearanceEpsilon;
    if (v.ok) v.blocking_id.reset();
    return v;
}

std::optional<std::string> swept_collision(const Pose& from, const Pose& to, const Scene& scene,
                                           const std::optional<HeldInfo>& held, const WorkcellConfig& cfg) {
    const double half_width = 0.5 * (cfg.gripper_width + (held ? held->width_m : 0.0));
    const double hang = held ? held->hang_m : 0.0;
    const Vec3 delta = to.position - from.position;
    const Vec2 d = delta.head<2>();
    const bool vertical = d.norm() < 1e-12;
    const Vec2 n = vertical ? Vec2(Vec2::Zero()) : Vec2(Vec2(-d.y(), d.x()) / d.norm());
    const int steps = std::max(1, static_cast<int>(std::ceil(delta.norm() / 0.001)));

    for (int i = 0; i <= steps; ++i) {
        const Vec3 p = from.position + delta * (static_cast<double>(i) / steps);
        const double tool_bottom = p.z() - hang;
        const Vec2 c = xy(p);
        for (const auto& o : scene.objects) {
            if (held && o.id == held->id) continue;
            if (tool_bottom >= object_top(o)) continue;
            Vec2 lo, hi;
            footprint(o, lo, hi);
            bool hit = false;
            if (vertical) {
                hit = c.x() + half_width >= lo.x() && c.x() - half_width <= hi.x() && c.y() + half_width >= lo.y() &&
                      c.y() - half_width <= hi.y();
            } else {
                // Clip the cross-section segment c + s*n, |s| <= half_width, against the footprint.
                double s0 = -half_width, s1 = half_width;
                for (int k = 0; k < 2 && s0 <= s1; ++k) {
                    if (std::abs(n[k]) < 1e-15) {
                        if (c[k] < lo[k] || c[k] > hi[k]) s0 = 1.0, s1 = 0.0;
                        continue;
                    }
                    double a = (lo[k] - c[k]) / n[k], b = (hi[k] - c[k]) / n[k];
                    if (a > b) std::swap(a, b);
                    s0 = std::max(s0, a);
                    s1 = std::min(s1, b);
                }
                hit = s0 <= s1;
            }
            if (hit) return o.id;
        }
    }
    return std::nullopt;
}

bool over_table(const Vec2& p, const WorkcellConfig& cfg) {
    return p.x() >= cfg.table_min.x() && p.x() <= cfg.table_max.x() && p.y() >= cfg.table_min.y() &&
           p.y() <= cfg.table_max.y();
}

bool over_bin(const Vec2& p, const WorkcellConfig& cfg) { return (p - cfg.bin_xy).norm() <= cfg.bin_radius; }

double support_height(const Vec2& p, const Scene& scene, const std::optional<std::string>& exclude) {
    double top = 0.0;
    for (const auto& o : scene.objects) {
        if (exclude && o.id == *exclude) continue;
        Vec2 lo, hi;
        footprint(o, lo, hi);
        if (p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y()) top = std::max(top, object_top(o));
    }
    return top;
}

std::optional<std::string> graspable_object(const RobotState& robot, const Scene& scene, const WorkcellConfig& cfg) {
    const Vec3& ee = robot.pose.position;
    const ObjectRecord* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& o : scene.objects) {
        if (robot.holding && o.id == *robot.holding) continue;
        const double horizontal = (xy(ee) - xy(o.position)).norm();
        if (horizontal > 0.5 * o.width_m + cfg.grasp_tolerance) continue;
        if (ee.z() < object_bottom(o) - cfg.grasp_vertical_tolerance ||
            ee.z() > object_top(o) + cfg.grasp_vertical_tolerance) {
            continue;
        }
        if (horizontal < best_d || (horizontal == best_d && o.id < best->id)) {
            best = &o;
            best_d = horizontal;
        }
    }
    if (best == nullptr) return std::nullopt;
    return best->id;
}

WorkcellState execute_step(WorkcellState s, const ActionStep& step, const WorkcellConfig& cfg) {
    LogEntry entry;
    entry.step = step;
    RobotState& r = s.robot;
    const std::string& p = step.primitive;

    const Pose before = r.pose;
    if (p == "move_linear") {
        r.pose.position = Vec3(require(step, "x"), require(step, "y"), require(step, "z"));
        r.pose.rpy = Vec3(require(step, "roll"), require(step, "pitch"), require(step, "yaw")) * kDegToRad;
    } else if (p == "move_vertical") {
        r.pose.position.z() += require(step, "dz");
    } else if (p == "go_home") {
        r.pose = cfg.home;
    } else if (p == "rotate_ee") {
        r.pose.rpy.x() += require(step, "angle") * kDegToRad;
    } else if (p == "wait") {
        require(step, "seconds");
    } else if (p == "close_gripper") {
        const double angle = require(step, "angle");
        if (!r.holding) {
            auto target = graspable_object(r, s.scene, cfg);
            if (!target) {
                throw Error(ErrorCode::GraspMissed, "no object within grasp tolerance of the gripper");
            }
            const ObjectRecord* o = s.scene.find(*target);
            r.holding = *target;
            r.grasp_offset = o->position - r.pose.position;
            entry.events.push_back("grasped " + *target);
        }
        r.gripper_open = false;
        r.gripper_angle = angle * kDegToRad;
    } else if (p == "open_gripper") {
        const double angle = require(step, "angle");
        if (r.holding) {
            ObjectRecord* o = s.scene.find(*r.holding);
            const Vec2 at = xy(r.pose.position + r.grasp_offset);
            const bool bin = over_bin(at, cfg);
            if (!bin && !over_table(at, cfg)) {
                throw Error(ErrorCode::ReleaseOverVoid, "released " + *r.holding + " outside the table and bin")
                    .with_object(*r.holding);
            }
            const double floor = bin ? 0.0 : support_height(at, s.scene, r.holding);
            o->position = Vec3(at.x(), at.y(), floor + 0.5 * o->height_m);
            entry.events.push_back((bin ? "binned " : "released ") + o->id);
            r.holding.reset();
            r.grasp_offset = Vec3::Zero();
        }
        r.gripper_open = true;
        r.gripper_angle = angle * kDegToRad;
    } else {
        throw Error(ErrorCode::UnknownApiCall, "unknown primitive '" + p + "'");
    }

    if (cfg.check_collisions && (p == "move_linear" || p == "go_home")) {
        if (auto hit = swept_collision(before, r.pose, s.scene, held_info(r, s.scene), cfg)) {
            throw Error(ErrorCode::CollisionPredicted, "transit runs into " + *hit).with_object(*hit);
        }
    }

    sync_held(s);

    if (p == "rotate_ee" && r.holding && std::abs(r.pose.rpy.x()) >= cfg.pour_event_deg * kDegToRad) {
        const Vec2 ee = xy(r.pose.position);
        const ObjectRecord* target = nullptr;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& o : s.scene.objects) {
            if (o.id == *r.holding) continue;
            const Vec2 d = (ee - xy(o.position)).cwiseAbs();
            if (d.x() > 0.5 * o.width_m || d.y() > 0.5 * o.width_m) continue;
            if (d.norm() < best) {
                best = d.norm();
                target = &o;
            }
        }
        if (target != nullptr) entry.events.push_back("poured " + *r.holding + " into " + target->id);
    }

    s.clock += 1.0;
    entry.t = s.clock;
    entry.robot = r;
    if (r.holding) entry.held_position = s.scene.find(*r.holding)->position;
    entry.step_index = s.trajectory_log.size();
    s.trajectory_log.push_back(std::move(entry));
    return s;
}

ExecutionResult execute_sequence(WorkcellState state, const ActionSequence& seq, const WorkcellConfig& cfg) {
    ExecutionResult result{std::move(state), std::nullopt};
    for (std::size_t i = 0; i < seq.steps.size(); ++i) {
        try {
            result.state = execute_step(result.state, seq.steps[i], cfg);
        } catch (Error& e) {
            e.at_step(i);
            result.error = e;
            return result;
        }
    }
    return result;
}

nlohmann::json log_entry_json(const LogEntry& e) {
    nlohmann::json j = {
        {"t", e.t},
        {"step", e.step_index},
        {"call", format_step(e.step)},
        {"position", vec_json(e.robot.pose.position)},
        {"rpy", vec_json(e.robot.pose.rpy)},
        {"gripper_angle", e.robot.gripper_angle},
        {"gripper_open", e.robot.gripper_open},
        {"holding", e.robot.holding ? nlohmann::json(*e.robot.holding) : nlohmann::json(nullptr)},
        {"events", e.events},
    };
    if (e.held_position) j["held_position"] = vec_json(*e.held_position);
    return j;
}

std::string trajectory_jsonl(const std::vector<LogEntry>& log) {
    std::string out;
    for (const auto& e : log) {
        out += log_entry_json(e).dump();
        out += '\n';
    }
    return out;
}

}  // namespace deixis
