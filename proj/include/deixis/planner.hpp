#pragma once

#include "deixis/action.hpp"
#include "deixis/fusion.hpp"
#include "deixis/workcell.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace deixis {

struct ParamSpec {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    std::string unit;
};

struct PrimitiveSpec {
    std::string name;
    std::vector<ParamSpec> params;
    std::string description;
};

/// The robot API a plan may use. Nothing outside this list executes.
struct ApiSpec {
    std::vector<PrimitiveSpec> primitives;

    const PrimitiveSpec* find(std::string_view name) const;

    /// Throws InvalidConfig on duplicate names or non-finite/inverted ranges.
    void validate() const;

    static ApiSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

enum class HoldRequirement { Any, MustHold, MustBeEmpty };

/// How one action is carried out. `expansion` lines are call templates with
/// {slot} placeholders, or planner macros starting with '@'.
struct ActionDefinition {
    std::string name;
    bool object_dependent = false;
    HoldRequirement hold = HoldRequirement::Any;
    std::string definition;
    std::vector<std::string> expansion;
};

struct ActionCatalog {
    std::map<std::string, ActionDefinition> actions;

    const ActionDefinition* find(const std::string& name) const;
    std::set<std::string> object_dependent_actions() const;

    /// Every template line must name a primitive in `api` or a known macro,
    /// and use only known slots. Throws InvalidConfig.
    void validate(const ApiSpec& api) const;

    static ActionCatalog from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// The three prompt sections plus the serialized planning request.
struct PromptBundle {
    std::string api_constraints;
    std::string action_definitions;
    std::string example_tasks;
    std::string intention_payload;

    std::string system_text() const;
    bool operator==(const PromptBundle&) const = default;
};

struct PlannerConfig {
    double default_pour_angle_deg = 90.0;
};

/// Deterministic text assembly; identical inputs give byte-identical output.
PromptBundle build_prompt(const Intention& intent, const Scene& scene, const RobotState& robot,
                          const ActionCatalog& catalog, const ApiSpec& api, const WorkcellConfig& cell,
                          const PlannerConfig& planner = {});

/// Parses the JSON payload produced by build_prompt.
struct PlanningRequest {
    Intention intention;
    Scene scene;
    RobotState robot;
};
PlanningRequest parse_payload(const std::string& payload);

/// Expands every subcommand through its catalog template, simulating the
/// workcell as it goes so heights and grasp angles follow the current state.
/// Throws UnknownAction, PreconditionViolated or Unreachable.
ActionSequence plan_rule(const Intention& intent, const Scene& scene, const RobotState& robot,
                         const ActionCatalog& catalog, const ApiSpec& api, const WorkcellConfig& cell,
                         const PlannerConfig& planner = {});

/// Strict line grammar: `name(key=value, ...)`, decimal numbers, `#` comment
/// lines, blank lines ignored. Anything else throws SyntaxError,
/// UnknownPrimitive or ArgumentSchemaMismatch with the offending line.
ActionSequence parse_plan(std::string_view text, const ApiSpec& api);

/// The hallucination guard. Runs, in order: API and argument checks,
/// symbolic execution of gripper/holding preconditions, then clearance of
/// every transit. Returns the sequence unchanged or throws UnknownApiCall,
/// ArgumentSchemaMismatch, PreconditionViolated or CollisionPredicted with
/// the step index.
const ActionSequence& validate_sequence(const ActionSequence& seq, const Scene& scene, const RobotState& robot,
                                        const ApiSpec& api, const WorkcellConfig& cell);

}  // namespace deixis
