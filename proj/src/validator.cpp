#include "deixis/planner.hpp"
#include "planner_internal.hpp"

#include <cmath>
#include <numbers>

namespace deixis {

namespace {

constexpr double kTol = 1e-9;

[[noreturn]] void violated(std::size_t i, const std::string& what) {
    throw Error(ErrorCode::PreconditionViolated, "step " + std::to_string(i) + ": " + what).at_step(i);
}

void check_api(const ActionSequence& seq, const ApiSpec& api) {
    for (std::size_t i = 0; i < seq.steps.size(); ++i) {
        const ActionStep& step = seq.steps[i];
        const PrimitiveSpec* spec = api.find(step.primitive);
        if (spec == nullptr) {
            throw Error(ErrorCode::UnknownApiCall,
                        "step " + std::to_string(i) + ": '" + step.primitive + "' is not an API call")
                .at_step(i);
        }
        if (auto problem = argument_problem(step, *spec)) {
            throw Error(ErrorCode::ArgumentSchemaMismatch, "step " + std::to_string(i) + ": " + *problem).at_step(i);
        }
    }
}

void check_pose(std::size_t i, const Pose& before, const WorkcellState& s, const WorkcellConfig& cell) {
    const Vec3& p = s.robot.pose.position;
    const auto& ws = cell.workspace;
    if ((p.array() < ws.min.array() - kTol).any() || (p.array() > ws.max.array() + kTol).any()) {
        violated(i, "end-effector leaves the workspace");
    }
    if (std::abs(s.robot.pose.rpy.x()) > std::numbers::pi + kTol) violated(i, "wrist roll beyond 180 degrees");
    if (auto held = held_info(s.robot, s.scene)) {
        if (p.z() < before.position.z() && p.z() - held->hang_m < -kTol) violated(i, "held " + held->id + " would be pushed through the table");
    }
}

void check_release(std::size_t i, const WorkcellState& s, const WorkcellConfig& cell) {
    const auto held = held_info(s.robot, s.scene);
    if (!held) return;
    const Vec3 at = s.robot.pose.position + s.robot.grasp_offset;
    const Vec2 xy = at.head<2>();
    if (over_bin(xy, cell)) return;
    if (!over_table(xy, cell)) violated(i, "release of " + held->id + " over neither table nor bin");
    const double drop = (s.robot.pose.position.z() - held->hang_m) - support_height(xy, s.scene, held->id);
    if (drop > cell.max_release_drop + kTol) {
        violated(i, held->id + " would drop " + format_number(drop) + " m on release");
    }
}

}  // namespace

const ActionSequence& validate_sequence(const ActionSequence& seq, const Scene& scene, const RobotState& robot,
                                        const ApiSpec& api, const WorkcellConfig& cell) {
    if (seq.steps.empty()) throw Error(ErrorCode::PreconditionViolated, "empty action sequence");
    check_api(seq, api);

    WorkcellConfig symbolic = cell;
    symbolic.check_collisions = false;
    WorkcellState state;
    state.scene = scene;
    state.robot = robot;

    struct Transit {
        std::size_t step;
        Pose from, to;
        Scene scene;
        std::optional<HeldInfo> held;
    };
    std::vector<Transit> transits;

    for (std::size_t i = 0; i < seq.steps.size(); ++i) {
        const ActionStep& step = seq.steps[i];
        if (step.primitive == "close_gripper") {
            if (state.robot.holding) violated(i, "close_gripper while already holding " + *state.robot.holding);
            if (!state.robot.gripper_open) violated(i, "close_gripper without a preceding open_gripper");
        } else if (step.primitive == "open_gripper") {
            check_release(i, state, cell);
        }
        const Pose before = state.robot.pose;
        auto held = held_info(state.robot, state.scene);
        Scene scene_before = state.scene;
        try {
            state = execute_step(std::move(state), step, symbolic);
        } catch (const Error& e) {
            violated(i, e.what());
        }
        check_pose(i, before, state, cell);
        if (step.primitive == "move_linear" || step.primitive == "go_home") {
            transits.push_back({i, before, state.robot.pose, std::move(scene_before), std::move(held)});
        }
    }

    for (const auto& t : transits) {
        const ClearanceVerdict v = clearance_check(t.from, t.to, t.scene, t.held, cell);
        if (!v.ok) {
            throw Error(ErrorCode::CollisionPredicted, "step " + std::to_string(t.step) + ": transit at z=" +
                                                           format_number(v.transit_z) + " needs " +
                                                           format_number(v.required_z) + " over " + *v.blocking_id)
                .at_step(t.step)
                .with_object(*v.blocking_id);
        }
    }
    return seq;
}

}  // namespace deixis
