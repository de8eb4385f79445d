#include <doctest.h>

#include "deixis/config.hpp"

#include <filesystem>
#include <fstream>

using namespace deixis;
using nlohmann::json;

namespace {

ErrorCode load_error(const json& overrides) {
    try {
        load_config(overrides);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected the config to be rejected");
    return ErrorCode::InvalidEpisode;
}

}  // namespace

TEST_CASE("default config loads") {
    const Config c = load_config();
    CHECK(c.camera.fx == 460.0);
    CHECK(c.selection.radius_m == 0.5);
    CHECK(c.fusion.alignment_window_s == doctest::Approx(0.3));
    CHECK(c.fusion.selection_radius_m == 0.5);
    CHECK(c.plan_source == PlanSource::Rule);
    CHECK_FALSE(c.fallback_to_rule);
    CHECK(c.api.primitives.size() == 7);
    CHECK(c.gateway.port == 8765);
    CHECK(c.fusion.object_dependent_actions == std::set<std::string>{"clean", "pick", "pour", "push", "put"});
}

TEST_CASE("presets") {
    const Config c = load_config();
    CHECK(c.preset("two-cups-bowl-plate").objects.size() == 4);
    const Scene& six = c.preset("six-cups");
    REQUIRE(six.objects.size() == 6);
    for (const auto& a : six.objects) {
        CHECK(a.class_name == "cup");
        for (const auto& b : six.objects) {
            if (a.id < b.id) CHECK((a.position - b.position).head<2>().norm() >= 0.25 - 1e-12);
        }
    }
    CHECK_THROWS_AS(c.preset("kitchen"), Error);
    try {
        c.preset("kitchen");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownScenePreset);
    }
}

TEST_CASE("overrides merge over the defaults") {
    const Config c = load_config(json{{"planner", {{"source", "llm"}, {"fallback_to_rule", true}}},
                                      {"selection", {{"radius_m", 0.2}}}});
    CHECK(c.plan_source == PlanSource::Llm);
    CHECK(c.fallback_to_rule);
    CHECK(c.selection.radius_m == 0.2);
    CHECK(c.fusion.selection_radius_m == 0.2);
    CHECK(c.camera.fx == 460.0);
}

TEST_CASE("bad configs are rejected") {
    CHECK(load_error({{"planner", {{"source", "oracle"}}}}) == ErrorCode::InvalidConfig);
    CHECK(load_error({{"camera", {{"fx", -1.0}}}}) == ErrorCode::InvalidConfig);
    CHECK(load_error({{"fusion", {{"alignment_window_s", 0.0}}}}) == ErrorCode::InvalidConfig);
    CHECK(load_error({{"lexicon", {{"action_words", {{"dance", "dance"}}}}}}) == ErrorCode::InvalidConfig);
    CHECK(load_error({{"lexicon", {{"class_words", {{"this", "this"}}}}}}) == ErrorCode::InvalidLexicon);
    CHECK(load_error({{"catalog", {{"home", {{"expansion", json::array({"teleport()"})}}}}}}) ==
          ErrorCode::InvalidConfig);
    CHECK(load_error({{"presets", {{"dup", {{"objects", json::array({
                                                            {{"id", "a#1"}, {"class", "a"}, {"position", {0, 0, 0}},
                                                             {"height_m", 0.1}, {"width_m", 0.1}},
                                                            {{"id", "a#1"}, {"class", "a"}, {"position", {0, 0, 0}},
                                                             {"height_m", 0.1}, {"width_m", 0.1}},
                                                        })}}}}}}) == ErrorCode::InvalidEpisode);
}

TEST_CASE("config file loading") {
    const auto dir = std::filesystem::temp_directory_path() / "deixis_config_test";
    std::filesystem::create_directories(dir);
    const auto good = dir / "good.json";
    std::ofstream(good) << R"({"gateway": {"port": 9000}})";
    CHECK(load_config_file(good).gateway.port == 9000);

    const auto broken = dir / "broken.json";
    std::ofstream(broken) << "{ not json";
    CHECK_THROWS_AS(load_config_file(broken), Error);
    CHECK_THROWS_AS(load_config_file(dir / "missing.json"), Error);
    std::filesystem::remove_all(dir);
}
