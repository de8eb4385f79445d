#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace deixis {

struct Arg {
    std::string name;
    double value = 0.0;

    bool operator==(const Arg&) const = default;
};

/// One robot API call. Arguments keep their source order so a plan
/// serialises back to the text it was parsed from.
struct ActionStep {
    std::string primitive;
    std::vector<Arg> args;

    std::optional<double> arg(const std::string& name) const {
        for (const auto& a : args) {
            if (a.name == name) return a.value;
        }
        return std::nullopt;
    }
    double arg_or(const std::string& name, double fallback) const { return arg(name).value_or(fallback); }

    bool operator==(const ActionStep&) const = default;
};

struct Provenance {
    enum class Source { Rule, Llm } source = Source::Rule;
    std::string model_id;  // for Llm

    std::string describe() const { return source == Source::Rule ? "rule" : "llm(" + model_id + ")"; }
    bool operator==(const Provenance&) const = default;
};

struct ActionSequence {
    std::vector<ActionStep> steps;
    Provenance provenance;

    bool operator==(const ActionSequence&) const = default;
};

/// Canonical text of one step, e.g. "move_vertical(dz=-0.15)".
std::string format_step(const ActionStep& step);

/// One call per line, newline terminated.
std::string serialize_plan(const ActionSequence& seq);

/// Shortest decimal (no exponent) that round-trips to the same double.
std::string format_number(double v);

}  // namespace deixis
