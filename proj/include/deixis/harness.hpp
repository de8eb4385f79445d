#pragma once

#include "deixis/config.hpp"
#include "deixis/error.hpp"
#include "deixis/fusion.hpp"
#include "deixis/geometry.hpp"
#include "deixis/grammar.hpp"
#include "deixis/llm_client.hpp"
#include "deixis/workcell.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace deixis {

struct TouchEvent {
    double u = 0.0;
    double v = 0.0;
    double timestamp = 0.0;

    bool operator==(const TouchEvent&) const = default;
};

/// One timestamped record of a multimodal trace.
struct EpisodeEvent {
    std::variant<Detection, SkeletonFrame, DeicticRay, TouchEvent, WordToken> body;

    /// Replay order key: words count from their end time.
    double t() const;
    /// Tie-break at equal t: detections, then pointing, then words.
    int priority() const;
    const char* stream() const;
};

/// A final-state check on the workcell after execution.
struct Predicate {
    enum class Kind { Holding, AtHome, ObjectOver, InBin, Event, Displaced };
    Kind kind = Kind::Holding;
    std::optional<std::string> object;  // Holding: nullopt means empty gripper
    std::string target;                 // ObjectOver
    std::string text;                   // Event: exact log event; Displaced: near or far

    bool operator==(const Predicate&) const = default;
};

std::string describe(const Predicate& p);

struct Expectation {
    std::optional<nlohmann::json> intention;  // intention_summary form
    std::optional<ErrorCode> rejection;       // the episode must fail with this code
    std::vector<Predicate> predicates;
};

struct Episode {
    std::string name;
    std::string task;
    std::optional<std::string> initial_holding;
    std::optional<Vec3> initial_position;
    std::vector<EpisodeEvent> events;  // stored order; replay sorts
    Expectation expected;

    /// Throws InvalidEpisode when a stream goes backwards in time or the
    /// expectation names a class that never appears in the events.
    void validate() const;
};

/// Line-delimited JSON. The first record is {"stream": "meta", ...}; every
/// other record carries "stream" set to detection, skeleton, ray, touch or word.
Episode parse_episode(const std::string& text);
std::string serialize_episode(const Episode& e);
Episode load_episode(const std::filesystem::path& path);
void save_episode(const Episode& e, const std::filesystem::path& path);

/// Every *.jsonl file directly inside `dir`, sorted by file name.
std::vector<Episode> load_episodes(const std::filesystem::path& dir);

/// Events in replay order: stable sort by (t, priority).
std::vector<EpisodeEvent> replay_order(const std::vector<EpisodeEvent>& events);

struct Verdict {
    std::string stage;  // input, fusion, plan, validate, execute, predicate
    std::optional<ErrorCode> code;
    std::string message;
    bool hard = true;

    bool operator==(const Verdict&) const = default;
};

/// Result of running the events through grammar and fusion only.
struct Encoding {
    std::optional<Intention> intention;
    std::optional<Error> error;
    std::vector<std::string> bindings;  // object bound by each pronoun, in order
    std::vector<double> pronoun_ends;
    std::vector<Verdict> notes;         // soft issues: dropped frames, stray words
    Scene scene;                        // latest detection frame
};

Encoding encode(const Episode& episode, const Config& config);

/// Scene of the first detection frame; empty if there is none.
Scene episode_scene(const Episode& episode, const Config& config);

/// Rule or model plan per config.plan_source. A model failure falls back to
/// the rule planner when the config allows it, noting a soft verdict.
ActionSequence make_plan(const Intention& intent, const WorkcellState& state, const Config& config, ChatClient* llm,
                         std::vector<Verdict>& verdicts);

struct StageTiming {
    double fusion_ms = 0.0;
    double planning_ms = 0.0;
    double validation_ms = 0.0;
    double execution_ms = 0.0;

    StageTiming& operator+=(const StageTiming& o);
};

struct ReplayResult {
    std::string name;
    std::string task;
    std::optional<Intention> intention;
    std::optional<ActionSequence> plan;
    WorkcellState initial;
    WorkcellState final_state;
    std::vector<Verdict> verdicts;
    bool executed = false;       // plan ran to the end and every predicate holds
    bool intent_correct = false;
    bool has_expectation = false;
    StageTiming timing;

    bool hard_failure() const;
};

/// fusion -> planner -> validator -> executor. Pipeline errors become
/// verdicts. `llm` is used when the config selects the model planner; when
/// null an HTTP client is built from the config.
ReplayResult replay(const Episode& episode, const Config& config, ChatClient* llm = nullptr);

bool holds(const Predicate& p, const WorkcellState& initial, const WorkcellState& final_state,
           const WorkcellConfig& cell);

struct TaskTally {
    int n_trials = 0;
    int n_executed = 0;
    int n_total = 0;
    int n_correct = 0;

    double accuracy() const { return n_trials ? 100.0 * n_executed / n_trials : 0.0; }
    double robustness() const { return n_total ? 100.0 * n_correct / n_total : 0.0; }
};

struct EpisodeSummary {
    std::string name;
    std::string task;
    bool executed = false;
    bool intent_correct = false;
    std::optional<nlohmann::json> intention;
    std::string plan;
    std::vector<Verdict> verdicts;
};

struct MetricsReport {
    TaskTally totals;
    std::map<std::string, TaskTally> per_task;
    std::vector<EpisodeSummary> episodes;
    StageTiming timing;
    double wall_ms = 0.0;

    double accuracy() const { return totals.accuracy(); }
    double robustness() const { return totals.robustness(); }
};

/// Throws InvalidEpisode on an empty set.
MetricsReport evaluate(const std::vector<Episode>& episodes, const Config& config, ChatClient* llm = nullptr);

nlohmann::json report_json(const MetricsReport& r, bool include_timing = true);
std::string report_text(const MetricsReport& r, bool include_timing = true);

void to_json(nlohmann::json& j, const Verdict& v);

}  // namespace deixis
