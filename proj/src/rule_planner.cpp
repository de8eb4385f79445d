#include "deixis/planner.hpp"
#include "planner_internal.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace deixis {

double round6(double v) {
    const double r = std::round(v * 1e6) / 1e6;
    return r == 0.0 ? 0.0 : r;
}

double ceil6(double v) {
    const double r = std::ceil(v * 1e6 - 1e-6) / 1e6;
    return r == 0.0 ? 0.0 : r;
}

namespace {

class Expander {
public:
    Expander(const Scene& scene, const RobotState& robot, const ApiSpec& api, const WorkcellConfig& cell,
             const PlannerConfig& planner)
        : api_(api), cell_(cell), planner_(planner) {
        state_.scene = scene;
        state_.robot = robot;
        cell_.check_collisions = false;
    }

    void expand(const SubCommand& sub, const ActionDefinition& def, const std::optional<Metric>& metric) {
        const ObjectRecord* target = nullptr;
        if (def.object_dependent) {
            if (!sub.object) {
                throw Error(ErrorCode::PreconditionViolated, sub.action + " needs a target object");
            }
            target = state_.scene.find(sub.object->id);
            if (target == nullptr) {
                throw Error(ErrorCode::PreconditionViolated, sub.object->id + " is not in the scene")
                    .with_object(sub.object->id);
            }
            target_ = *target;
        }
        check_hold(sub, def);
        metric_ = metric;

        for (const auto& line : def.expansion) {
            if (auto macro = parse_macro(line)) {
                if (macro->first == "transit") {
                    transit(macro->second);
                } else {
                    raster();
                }
                continue;
            }
            emit(substitute(line, sub.action));
        }
    }

    ActionSequence take() { return std::move(seq_); }

private:
    void check_hold(const SubCommand& sub, const ActionDefinition& def) const {
        const auto& holding = state_.robot.holding;
        if (def.hold == HoldRequirement::MustBeEmpty && holding) {
            throw Error(ErrorCode::PreconditionViolated, sub.action + " needs an empty gripper but it holds " + *holding)
                .with_object(*holding);
        }
        if (def.hold == HoldRequirement::MustHold && !holding) {
            throw Error(ErrorCode::PreconditionViolated, sub.action + " needs a held object");
        }
        if (def.hold == HoldRequirement::MustHold && def.object_dependent && *holding == target_.id) {
            throw Error(ErrorCode::PreconditionViolated, sub.action + " targets the object it holds")
                .with_object(target_.id);
        }
    }

    const Vec3& ee() const { return state_.robot.pose.position; }

    void emit(const ActionStep& step) {
        seq_.steps.push_back(step);
        state_ = execute_step(std::move(state_), step, cell_);
    }

    ActionStep call(std::string primitive, std::vector<Arg> args) {
        return ActionStep{std::move(primitive), std::move(args)};
    }

    void require_reachable(const Vec2& p, const std::string& what) const {
        const auto& ws = cell_.workspace;
        if (p.x() < ws.min.x() || p.x() > ws.max.x() || p.y() < ws.min.y() || p.y() > ws.max.y()) {
            throw Error(ErrorCode::Unreachable, what + " lies outside the workspace");
        }
    }

    Vec2 destination(const std::string& dest) const {
        if (dest == "target") return target_.position.head<2>();
        if (dest == "bin") return cell_.bin_xy;
        if (dest == "flush") return cell_.flush_xy;
        if (dest == "home") return cell_.home.position.head<2>();
        return push_goal();
    }

    Vec2 push_goal() const {
        const Vec2 from = target_.position.head<2>();
        Vec2 dir = cell_.near_anchor - from;
        double dist = dir.norm();
        const bool far = metric_ && metric_->unit == UnitKind::Spatial && metric_->qualifier == "far";
        if (dist < 1e-9) {
            dir = Vec2(0.0, -1.0);
            dist = 0.0;
        } else {
            dir /= dist;
        }
        if (far) return from - dir * cell_.push_distance;
        return from + dir * std::min(cell_.push_distance, dist);
    }

    // Lift if needed, then a straight transit at the cleared height.
    void transit(const std::string& dest) {
        const Vec2 to = destination(dest);
        require_reachable(to, dest == "target" ? target_.id : dest);
        const auto held = held_info(state_.robot, state_.scene);
        const ClearanceVerdict need = required_clearance(ee().head<2>(), to, state_.scene, held, cell_);
        double z = ceil6(std::max(cell_.cruise_height, need.required_z));
        if (dest == "home") {
            if (need.required_z > cell_.home.position.z()) {
                throw Error(ErrorCode::Unreachable, "home pose is below the clearance needed to reach it");
            }
            z = std::min(z, cell_.home.position.z());
        }
        if (z > cell_.workspace.max.z()) {
            throw Error(ErrorCode::Unreachable, "clearance height " + format_number(z) + " exceeds the workspace");
        }
        if (ee().z() < z) emit(call("move_vertical", {{"dz", ceil6(z - ee().z())}}));
        if (dest == "home") {
            emit(call("go_home", {}));
        } else {
            emit(call("move_linear", {{"x", round6(to.x())},
                                      {"y", round6(to.y())},
                                      {"z", z},
                                      {"roll", 0.0},
                                      {"pitch", 0.0},
                                      {"yaw", 0.0}}));
        }
        approach_z_ = state_.robot.pose.position.z();
    }

    // Hover passes over the target footprint just above its top.
    void raster() {
        require_reachable(target_.position.head<2>(), target_.id);
        const double half = 0.5 * target_.width_m;
        const Vec2 c = target_.position.head<2>();
        std::vector<Vec2> points;
        for (int k = -1; k <= 1; ++k) {
            const double y = c.y() + k * half / 2.0;
            points.emplace_back(k % 2 == 0 ? c.x() + half : c.x() - half, y);
            points.emplace_back(k % 2 == 0 ? c.x() - half : c.x() + half, y);
        }
        const auto held = held_info(state_.robot, state_.scene);
        double need = object_top(target_) + cell_.clearance_margin + (held ? held->hang_m : 0.0);
        Vec2 prev = ee().head<2>();
        for (const auto& p : points) {
            need = std::max(need, required_clearance(prev, p, state_.scene, held, cell_).required_z);
            prev = p;
        }
        const double z = ceil6(need);
        if (z > cell_.workspace.max.z()) {
            throw Error(ErrorCode::Unreachable, "wipe height " + format_number(z) + " exceeds the workspace");
        }
        if (ee().z() < z) emit(call("move_vertical", {{"dz", ceil6(z - ee().z())}}));
        for (const auto& p : points) {
            emit(call("move_linear", {{"x", round6(p.x())},
                                      {"y", round6(p.y())},
                                      {"z", z},
                                      {"roll", 0.0},
                                      {"pitch", 0.0},
                                      {"yaw", 0.0}}));
        }
        approach_z_ = z;
    }

    double slot(const std::string& name, const std::string& action) const {
        const auto& r = state_.robot;
        if (name == "target.x") return round6(target_.position.x());
        if (name == "target.y") return round6(target_.position.y());
        if (name == "open_angle") return cell_.theta_max_deg;
        if (name == "grip_angle") return round6(gripper_angle_from_width(target_.width_m, cell_));
        if (name == "grasp_dz") return round6(target_.position.z() - ee().z());
        if (name == "lift_dz") return std::max(0.0, ceil6(approach_z_ - ee().z()));
        if (name == "place_dz") {
            const auto held = held_info(r, state_.scene);
            if (!held) throw Error(ErrorCode::PreconditionViolated, action + " has nothing to place");
            const double support = support_height(ee().head<2>(), state_.scene, r.holding);
            return round6(support + cell_.place_gap - (ee().z() - held->hang_m));
        }
        if (name == "pour_angle" || name == "pour_return_angle") {
            double angle = planner_.default_pour_angle_deg;
            if (metric_ && metric_->unit == UnitKind::Degrees) angle = metric_->value;
            return name == "pour_angle" ? round6(angle) : round6(-angle);
        }
        if (name == "press_dz") return round6(-cell_.flush_press_m);
        if (name == "release_dz") return round6(cell_.flush_press_m);
        throw Error(ErrorCode::InvalidConfig, "unknown slot {" + name + "}");
    }

    ActionStep substitute(const std::string& line, const std::string& action) const {
        std::string text;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] != '{') {
                text += line[i];
                continue;
            }
            const auto close = line.find('}', i);
            text += format_number(slot(line.substr(i + 1, close - i - 1), action));
            i = close;
        }
        ActionStep step = parse_call_line(text, 1);
        const PrimitiveSpec* spec = api_.find(step.primitive);
        if (spec == nullptr) throw Error(ErrorCode::InvalidConfig, "template uses unknown primitive " + step.primitive);
        if (auto problem = argument_problem(step, *spec)) {
            throw Error(ErrorCode::Unreachable, action + ": " + *problem);
        }
        return step;
    }

    const ApiSpec& api_;
    WorkcellConfig cell_;
    const PlannerConfig& planner_;
    WorkcellState state_;
    ActionSequence seq_;
    ObjectRecord target_;
    std::optional<Metric> metric_;
    double approach_z_ = 0.0;
};

}  // namespace

ActionSequence plan_rule(const Intention& intent, const Scene& scene, const RobotState& robot,
                         const ActionCatalog& catalog, const ApiSpec& api, const WorkcellConfig& cell,
                         const PlannerConfig& planner) {
    if (intent.subcommands.empty()) throw Error(ErrorCode::PreconditionViolated, "intention has no subcommands");
    for (const auto& sub : intent.subcommands) {
        if (catalog.find(sub.action) == nullptr) {
            throw Error(ErrorCode::UnknownAction, "action '" + sub.action + "' is not in the catalog");
        }
    }
    Expander ex(scene, robot, api, cell, planner);
    for (std::size_t i = 0; i < intent.subcommands.size(); ++i) {
        const SubCommand& sub = intent.subcommands[i];
        std::optional<Metric> metric = sub.metric;
        if (!metric && i + 1 == intent.subcommands.size()) metric = intent.omega;
        try {
            ex.expand(sub, *catalog.find(sub.action), metric);
        } catch (Error& e) {
            if (e.code() == ErrorCode::GraspMissed || e.code() == ErrorCode::ReleaseOverVoid) {
                throw Error(ErrorCode::PreconditionViolated, sub.action + ": " + e.what());
            }
            throw;
        }
    }
    ActionSequence seq = ex.take();
    seq.provenance = Provenance{Provenance::Source::Rule, {}};
    return seq;
}

}  // namespace deixis
