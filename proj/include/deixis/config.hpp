#pragma once

#include "deixis/fusion.hpp"
#include "deixis/geometry.hpp"
#include "deixis/grammar.hpp"
#include "deixis/llm_client.hpp"
#include "deixis/planner.hpp"
#include "deixis/workcell.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace deixis {

struct GatewayConfig {
    std::string host = "127.0.0.1";
    unsigned short port = 8765;
    double hover_rate_hz = 10.0;
    std::size_t outbound_queue = 256;
};

enum class PlanSource { Rule, Llm };

struct Config {
    CameraModel camera;
    SelectionConfig selection;
    FusionConfig fusion;
    Lexicon lexicon;
    ApiSpec api;
    ActionCatalog catalog;
    WorkcellConfig workcell;
    PlannerConfig planner;
    PlanSource plan_source = PlanSource::Rule;
    bool fallback_to_rule = false;
    LlmConfig llm;
    GatewayConfig gateway;
    std::map<std::string, Scene> presets;

    const Scene& preset(const std::string& name) const;  // throws UnknownScenePreset
};

/// The configuration shipped with the build.
const nlohmann::json& default_config_json();

/// Parses and cross-checks a full configuration. Throws InvalidConfig or
/// InvalidLexicon.
Config config_from_json(const nlohmann::json& j);

/// Default configuration with `overrides` merged on top (JSON merge patch).
Config load_config(const nlohmann::json& overrides = nlohmann::json::object());
Config load_config_file(const std::filesystem::path& path);

}  // namespace deixis
