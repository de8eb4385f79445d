#pragma once

#include "deixis/geometry.hpp"
#include "deixis/grammar.hpp"

#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace deixis {

/// One (action, object, metric) unit of an intention.
struct SubCommand {
    std::string action;
    std::optional<std::string> class_name;  // spoken class command, if any
    std::optional<ObjectRecord> object;     // bound at pronoun time
    std::optional<Metric> metric;

    bool operator==(const SubCommand&) const = default;
};

/// A fully encoded intention: one or two subcommands plus the flattened
/// metric slot (last metric spoken wins), and the scene the bindings refer to.
struct Intention {
    std::vector<SubCommand> subcommands;
    std::optional<Metric> omega;
    Scene scene;
    double timestamp = 0.0;

    bool operator==(const Intention&) const = default;
};

enum class Phase { AwaitAction, AwaitClass, AwaitPronoun, AwaitMetricOrNext };

std::string_view to_string(Phase phase);

struct FusionConfig {
    double alignment_window_s = 0.3;
    double reorder_tolerance_s = 0.1;
    double ray_history_s = 5.0;
    double selection_radius_m = 0.5;
    std::set<std::string> object_dependent_actions;
};

/// Non-fatal things worth recording: ignored tokens, rebinding, etc.
struct FusionNote {
    double t = 0.0;
    std::string kind;
    std::string detail;
};

struct EncoderState {
    Phase phase = Phase::AwaitAction;
    std::vector<SubCommand> pending;
    std::optional<DeicticRay> latest_ray;
    Scene scene_snapshot;
    double last_command_t = -1e300;
};

/// Temporal fusion of command tokens and pointing rays. One engine per
/// session; not internally synchronised.
///
/// Pronouns bind immediately against the latest ray whose timestamp lies in
/// [t_end - W, t_end], so rays that arrive afterwards cannot change the
/// binding. Every operation either completes or throws with the state left
/// untouched.
class FusionEngine {
public:
    explicit FusionEngine(FusionConfig config);

    /// Rays may arrive up to reorder_tolerance_s out of order; older ones
    /// throw OutOfOrderEvent.
    void feed_ray(const DeicticRay& ray);

    /// Advances the protocol. Returns the intention on a finish token.
    std::optional<Intention> feed_command(const CommandToken& cmd, const Scene& scene);

    /// Drops the partial intention; keeps ray history and scene snapshot.
    void reset();

    const EncoderState& state() const { return state_; }
    const FusionConfig& config() const { return config_; }
    const std::vector<FusionNote>& notes() const { return notes_; }

    /// Class filter of the open subcommand, if one has been spoken.
    std::optional<std::string> active_class() const;

    /// Ray used for binding a pronoun ending at t_end, if any.
    std::optional<DeicticRay> alignment_ray(double t_end) const;

    bool is_object_dependent(const std::string& action) const {
        return config_.object_dependent_actions.count(action) != 0;
    }

private:
    void prune_history();

    FusionConfig config_;
    EncoderState state_;
    std::deque<DeicticRay> history_;  // sorted by timestamp
    std::vector<FusionNote> notes_;
};

}  // namespace deixis
