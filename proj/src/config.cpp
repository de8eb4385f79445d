#include "deixis/config.hpp"

#include "deixis/json_io.hpp"
#include "default_config.hpp"

#include <fstream>

namespace deixis {

const Scene& Config::preset(const std::string& name) const {
    auto it = presets.find(name);
    if (it == presets.end()) throw Error(ErrorCode::UnknownScenePreset, "no scene preset named '" + name + "'");
    return it->second;
}

const nlohmann::json& default_config_json() {
    static const nlohmann::json j = nlohmann::json::parse(kDefaultConfigText);
    return j;
}

Config config_from_json(const nlohmann::json& j) {
    Config c;
    try {
        c.camera = j.at("camera").get<CameraModel>();
        const auto& sel = j.at("selection");
        c.selection.radius_m = sel.at("radius_m").get<double>();
        c.selection.min_skeleton_confidence = sel.at("min_skeleton_confidence").get<double>();
        c.selection.min_detection_confidence = sel.at("min_detection_confidence").get<double>();

        const auto& fu = j.at("fusion");
        c.fusion.alignment_window_s = fu.at("alignment_window_s").get<double>();
        c.fusion.reorder_tolerance_s = fu.at("reorder_tolerance_s").get<double>();
        c.fusion.ray_history_s = fu.at("ray_history_s").get<double>();
        c.fusion.selection_radius_m = c.selection.radius_m;

        c.workcell = j.at("workcell").get<WorkcellConfig>();

        const auto& pl = j.at("planner");
        const std::string source = pl.value("source", std::string("rule"));
        if (source != "rule" && source != "llm") throw Error(ErrorCode::InvalidConfig, "planner.source must be rule or llm");
        c.plan_source = source == "llm" ? PlanSource::Llm : PlanSource::Rule;
        c.fallback_to_rule = pl.value("fallback_to_rule", false);
        c.planner.default_pour_angle_deg = pl.value("default_pour_angle_deg", 90.0);

        const auto& llm = j.at("llm");
        c.llm.base_url = llm.value("base_url", std::string{});
        c.llm.model = llm.value("model", std::string{});
        c.llm.timeout = std::chrono::milliseconds(llm.value("timeout_ms", 20000));
        c.llm.retries = llm.value("retries", 2);
        c.llm.backoff = std::chrono::milliseconds(llm.value("backoff_ms", 500));
        c.llm.offline = llm.value("offline", false);
        c.llm.temperature = llm.value("temperature", 0.0);
        c.llm = LlmConfig::from_environment(c.llm);

        const auto& gw = j.at("gateway");
        c.gateway.host = gw.value("host", c.gateway.host);
        c.gateway.port = gw.value("port", c.gateway.port);
        c.gateway.hover_rate_hz = gw.value("hover_rate_hz", c.gateway.hover_rate_hz);
        c.gateway.outbound_queue = gw.value("outbound_queue", c.gateway.outbound_queue);

        const nlohmann::json presets = j.value("presets", nlohmann::json::object());
        for (const auto& [name, scene] : presets.items()) {
            Scene s = scene.get<Scene>();
            s.validate();
            c.presets.emplace(name, std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    }

    c.camera.validate();
    c.lexicon = Lexicon::from_json(j.at("lexicon"));
    c.api = ApiSpec::from_json(j.at("api"));
    c.catalog = ActionCatalog::from_json(j.at("catalog"));
    c.catalog.validate(c.api);
    for (const auto& action : c.lexicon.action_names()) {
        if (c.catalog.find(action) == nullptr) {
            throw Error(ErrorCode::InvalidConfig, "lexicon action '" + action + "' has no catalog entry");
        }
    }
    c.fusion.object_dependent_actions = c.catalog.object_dependent_actions();
    if (c.fusion.alignment_window_s <= 0 || c.fusion.reorder_tolerance_s < 0 ||
        c.fusion.ray_history_s < c.fusion.alignment_window_s) {
        throw Error(ErrorCode::InvalidConfig, "fusion windows must satisfy 0 < W <= history");
    }
    if (c.gateway.hover_rate_hz <= 0 || c.gateway.outbound_queue == 0) {
        throw Error(ErrorCode::InvalidConfig, "gateway rates and queue size must be positive");
    }
    return c;
}

Config load_config(const nlohmann::json& overrides) {
    nlohmann::json j = default_config_json();
    j.merge_patch(overrides);
    return config_from_json(j);
}

Config load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open " + path.string());
    try {
        return load_config(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
}

}  // namespace deixis
