#pragma once

#include "deixis/planner.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace deixis {

/// Why step's arguments do not fit spec, or nullopt when they do.
std::optional<std::string> argument_problem(const ActionStep& step, const PrimitiveSpec& spec);

/// Grammar check of a single call line; no API lookup.
ActionStep parse_call_line(std::string_view line, std::size_t line_no);

inline constexpr std::string_view kSlots[] = {
    "target.x", "target.y", "open_angle", "grip_angle", "grasp_dz", "place_dz",
    "lift_dz", "pour_angle", "pour_return_angle", "press_dz", "release_dz",
};

inline constexpr std::string_view kTransitDestinations[] = {"target", "bin", "push_goal", "flush", "home"};

/// Rounds to the micrometre; ceil6 rounds up so lifted heights never fall short.
double round6(double v);
double ceil6(double v);

/// Splits "@name(arg)" into name and arg; nullopt if the line is not a macro.
std::optional<std::pair<std::string, std::string>> parse_macro(std::string_view line);

}  // namespace deixis
