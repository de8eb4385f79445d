#include "deixis/planner.hpp"
#include "planner_internal.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace deixis {

const PrimitiveSpec* ApiSpec::find(std::string_view name) const {
    for (const auto& p : primitives) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

void ApiSpec::validate() const {
    std::set<std::string> names;
    for (const auto& p : primitives) {
        if (!names.insert(p.name).second) throw Error(ErrorCode::InvalidConfig, "duplicate API primitive " + p.name);
        std::set<std::string> params;
        for (const auto& a : p.params) {
            if (!params.insert(a.name).second) {
                throw Error(ErrorCode::InvalidConfig, p.name + " declares parameter " + a.name + " twice");
            }
            if (!std::isfinite(a.min) || !std::isfinite(a.max) || a.min > a.max) {
                throw Error(ErrorCode::InvalidConfig, p.name + "." + a.name + " needs a finite closed range");
            }
        }
    }
}

ApiSpec ApiSpec::from_json(const nlohmann::json& j) {
    ApiSpec api;
    try {
        for (const auto& p : j.at("primitives")) {
            PrimitiveSpec spec;
            spec.name = p.at("name").get<std::string>();
            spec.description = p.value("description", std::string{});
            for (const auto& a : p.value("params", nlohmann::json::array())) {
                spec.params.push_back(ParamSpec{a.at("name").get<std::string>(), a.at("min").get<double>(),
                                                a.at("max").get<double>(), a.value("unit", std::string{})});
            }
            api.primitives.push_back(std::move(spec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("api: ") + e.what());
    }
    api.validate();
    return api;
}

nlohmann::json ApiSpec::to_json() const {
    nlohmann::json prims = nlohmann::json::array();
    for (const auto& p : primitives) {
        nlohmann::json params = nlohmann::json::array();
        for (const auto& a : p.params) {
            params.push_back({{"name", a.name}, {"min", a.min}, {"max", a.max}, {"unit", a.unit}});
        }
        prims.push_back({{"name", p.name}, {"description", p.description}, {"params", params}});
    }
    return {{"primitives", prims}};
}

std::optional<std::pair<std::string, std::string>> parse_macro(std::string_view line) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] != '@') return std::nullopt;
    const auto open = line.find('(', first);
    const auto close = line.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        return std::make_pair(std::string(line.substr(first + 1)), std::string{});
    }
    return std::make_pair(std::string(line.substr(first + 1, open - first - 1)),
                          std::string(line.substr(open + 1, close - open - 1)));
}

const ActionDefinition* ActionCatalog::find(const std::string& name) const {
    auto it = actions.find(name);
    return it == actions.end() ? nullptr : &it->second;
}

std::set<std::string> ActionCatalog::object_dependent_actions() const {
    std::set<std::string> out;
    for (const auto& [name, def] : actions) {
        if (def.object_dependent) out.insert(name);
    }
    return out;
}

void ActionCatalog::validate(const ApiSpec& api) const {
    for (const auto& [name, def] : actions) {
        if (def.expansion.empty()) throw Error(ErrorCode::InvalidConfig, "action " + name + " has an empty expansion");
        for (const auto& line : def.expansion) {
            if (auto macro = parse_macro(line)) {
                const auto& [mname, marg] = *macro;
                const bool ok =
                    (mname == "transit" && std::find(std::begin(kTransitDestinations), std::end(kTransitDestinations),
                                                     marg) != std::end(kTransitDestinations)) ||
                    (mname == "raster" && marg == "target");
                if (!ok) throw Error(ErrorCode::InvalidConfig, "action " + name + ": unknown macro '" + line + "'");
                if ((marg == "target" || marg == "push_goal") && !def.object_dependent) {
                    throw Error(ErrorCode::InvalidConfig, "action " + name + " uses the target but needs no object");
                }
                continue;
            }
            // Replace each {slot} with 0 and check the call shape against the API.
            std::string probe;
            for (std::size_t i = 0; i < line.size(); ++i) {
                if (line[i] != '{') {
                    probe += line[i];
                    continue;
                }
                const auto close = line.find('}', i);
                if (close == std::string::npos) {
                    throw Error(ErrorCode::InvalidConfig, "action " + name + ": unterminated slot in '" + line + "'");
                }
                const std::string slot = line.substr(i + 1, close - i - 1);
                if (std::find(std::begin(kSlots), std::end(kSlots), slot) == std::end(kSlots)) {
                    throw Error(ErrorCode::InvalidConfig, "action " + name + ": unknown slot {" + slot + "}");
                }
                probe += "0";
                i = close;
            }
            ActionStep step;
            try {
                step = parse_call_line(probe, 1);
            } catch (const Error& e) {
                throw Error(ErrorCode::InvalidConfig, "action " + name + ": " + e.what());
            }
            const PrimitiveSpec* spec = api.find(step.primitive);
            if (spec == nullptr) {
                throw Error(ErrorCode::InvalidConfig, "action " + name + " uses unknown primitive " + step.primitive);
            }
            std::set<std::string> given, wanted;
            for (const auto& a : step.args) given.insert(a.name);
            for (const auto& p : spec->params) wanted.insert(p.name);
            if (given != wanted || given.size() != step.args.size()) {
                throw Error(ErrorCode::InvalidConfig, "action " + name + ": arguments of '" + line +
                                                          "' do not match the API schema");
            }
        }
    }
}

namespace {

HoldRequirement hold_from(const std::string& s) {
    if (s == "any") return HoldRequirement::Any;
    if (s == "must_hold") return HoldRequirement::MustHold;
    if (s == "must_be_empty") return HoldRequirement::MustBeEmpty;
    throw Error(ErrorCode::InvalidConfig, "unknown hold requirement '" + s + "'");
}

std::string hold_name(HoldRequirement h) {
    switch (h) {
        case HoldRequirement::Any: return "any";
        case HoldRequirement::MustHold: return "must_hold";
        case HoldRequirement::MustBeEmpty: return "must_be_empty";
    }
    return "any";
}

}  // namespace

ActionCatalog ActionCatalog::from_json(const nlohmann::json& j) {
    ActionCatalog cat;
    try {
        for (const auto& [name, a] : j.items()) {
            ActionDefinition def;
            def.name = name;
            def.object_dependent = a.at("object_dependent").get<bool>();
            def.hold = hold_from(a.value("hold", std::string("any")));
            def.definition = a.at("definition").get<std::string>();
            def.expansion = a.at("expansion").get<std::vector<std::string>>();
            cat.actions.emplace(name, std::move(def));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("catalog: ") + e.what());
    }
    return cat;
}

nlohmann::json ActionCatalog::to_json() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [name, def] : actions) {
        out[name] = {{"object_dependent", def.object_dependent}, {"hold", hold_name(def.hold)},
                     {"definition", def.definition}, {"expansion", def.expansion}};
    }
    return out;
}

}  // namespace deixis
