#include "deixis/json_io.hpp"
#include "deixis/planner.hpp"

#include <numbers>
#include <sstream>

namespace deixis {

namespace {

std::string api_section(const ApiSpec& api) {
    std::ostringstream out;
    out << "You control a robot arm only through the calls below. Reply with the call sequence and nothing else.\n"
        << "Rules:\n"
        << "- one call per line, written name(key=value, ...)\n"
        << "- every listed argument must be given, by name, as a plain decimal number\n"
        << "- values must stay inside the listed ranges\n"
        << "- lines starting with # are comments; no other text is allowed\n"
        << "- open the gripper before closing it on an object; never grasp while already holding\n"
        << "- move over obstacles at a height that clears their tops\n"
        << "Calls:\n";
    for (const auto& p : api.primitives) {
        out << "- " << p.name << "(";
        for (std::size_t i = 0; i < p.params.size(); ++i) {
            const auto& a = p.params[i];
            out << (i ? ", " : "") << a.name << " in [" << format_number(a.min) << ", " << format_number(a.max) << "]";
            if (!a.unit.empty()) out << " " << a.unit;
        }
        out << ")";
        if (!p.description.empty()) out << ": " << p.description;
        out << "\n";
    }
    return out.str();
}

std::string catalog_section(const ActionCatalog& catalog) {
    std::ostringstream out;
    for (const auto& [name, def] : catalog.actions) {
        out << "Action " << name << (def.object_dependent ? " (needs a target object)" : "") << ":\n"
            << "  " << def.definition << "\n"
            << "  steps:\n";
        for (const auto& line : def.expansion) out << "    " << line << "\n";
    }
    return out.str();
}

std::string payload_text(const Intention& intent, const Scene& scene, const RobotState& robot) {
    return json{{"intention", intent}, {"scene", scene}, {"robot", robot}}.dump(2);
}

std::string example_section(const ActionCatalog& catalog, const ApiSpec& api, const WorkcellConfig& cell,
                            const PlannerConfig& planner) {
    Scene scene;
    scene.objects = {
        ObjectRecord{"bowl#1", "bowl", Vec3(-0.15, 0.45, 0.04), 0.08, 0.16},
        ObjectRecord{"cup#1", "cup", Vec3(0.1, 0.4, 0.05), 0.1, 0.07},
    };
    const RobotState robot = initial_robot(cell);

    std::ostringstream out;
    auto example = [&](const std::string& title, Intention intent) {
        intent.scene = scene;
        out << "Task: " << title << "\n"
            << "Request:\n" << payload_text(intent, scene, robot) << "\n"
            << "Reply:\n";
        try {
            out << serialize_plan(plan_rule(intent, scene, robot, catalog, api, cell, planner));
        } catch (const Error&) {
            // A catalog without these actions simply has fewer examples.
            out << "# not available with this catalog\n";
        }
        out << "\n";
    };

    const Metric ninety{UnitKind::Degrees, 90.0, {}};
    Intention pour;
    pour.subcommands = {SubCommand{"pick", "cup", *scene.find("cup#1"), std::nullopt},
                        SubCommand{"pour", "bowl", *scene.find("bowl#1"), ninety}};
    pour.omega = ninety;
    example("pick this cup and pour it into that bowl, 90 degrees", pour);

    Intention home;
    home.subcommands = {SubCommand{"home", std::nullopt, std::nullopt, std::nullopt}};
    example("go home", home);
    return out.str();
}

}  // namespace

std::string PromptBundle::system_text() const {
    return "## API constraints\n" + api_constraints + "\n## Action definitions\n" + action_definitions +
           "\n## Example tasks\n" + example_tasks;
}

PromptBundle build_prompt(const Intention& intent, const Scene& scene, const RobotState& robot,
                          const ActionCatalog& catalog, const ApiSpec& api, const WorkcellConfig& cell,
                          const PlannerConfig& planner) {
    for (const auto& sub : intent.subcommands) {
        if (catalog.find(sub.action) == nullptr) {
            throw Error(ErrorCode::UnknownAction, "action '" + sub.action + "' is not in the catalog");
        }
    }
    PromptBundle b;
    b.api_constraints = api_section(api);
    b.action_definitions = catalog_section(catalog);
    b.example_tasks = example_section(catalog, api, cell, planner);
    b.intention_payload = payload_text(intent, scene, robot);
    return b;
}

PlanningRequest parse_payload(const std::string& payload) {
    try {
        const json j = json::parse(payload);
        return PlanningRequest{j.at("intention").get<Intention>(), j.at("scene").get<Scene>(),
                               j.at("robot").get<RobotState>()};
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedMessage, std::string("planning payload: ") + e.what());
    }
}

}  // namespace deixis
