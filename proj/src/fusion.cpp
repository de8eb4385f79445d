#include "deixis/fusion.hpp"

#include "deixis/error.hpp"

#include <algorithm>

namespace deixis {

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::AwaitAction: return "await_action";
        case Phase::AwaitClass: return "await_class";
        case Phase::AwaitPronoun: return "await_pronoun";
        case Phase::AwaitMetricOrNext: return "await_metric_or_next";
    }
    return "?";
}

FusionEngine::FusionEngine(FusionConfig config) : config_(std::move(config)) {}

void FusionEngine::feed_ray(const DeicticRay& ray) {
    if ((ray.r2 - ray.r1).norm() <= kMinRayLength) {
        throw Error(ErrorCode::DegenerateRay, "ray anchor points coincide");
    }
    if (state_.latest_ray && ray.timestamp < state_.latest_ray->timestamp - config_.reorder_tolerance_s) {
        throw Error(ErrorCode::OutOfOrderEvent,
                    "ray at t=" + std::to_string(ray.timestamp) + " arrived after t=" +
                        std::to_string(state_.latest_ray->timestamp));
    }
    // Insert after any equal timestamps so arrival order breaks ties.
    auto pos = std::upper_bound(history_.begin(), history_.end(), ray.timestamp,
                                [](double t, const DeicticRay& r) { return t < r.timestamp; });
    history_.insert(pos, ray);
    state_.latest_ray = history_.back();
    prune_history();
}

void FusionEngine::prune_history() {
    const double horizon = history_.back().timestamp - config_.ray_history_s;
    while (history_.size() > 1 && history_.front().timestamp < horizon) history_.pop_front();
}

std::optional<DeicticRay> FusionEngine::alignment_ray(double t_end) const {
    for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
        if (it->timestamp > t_end) continue;
        if (it->timestamp < t_end - config_.alignment_window_s) break;
        return *it;
    }
    return std::nullopt;
}

std::optional<std::string> FusionEngine::active_class() const {
    if (state_.pending.empty()) return std::nullopt;
    return state_.pending.back().class_name;
}

void FusionEngine::reset() {
    state_.phase = Phase::AwaitAction;
    state_.pending.clear();
}

std::optional<Intention> FusionEngine::feed_command(const CommandToken& cmd, const Scene& scene) {
    const double t = cmd.t_end();
    if (cmd.kind == TokenKind::Unknown) {
        notes_.push_back({t, "ignored", cmd.source.empty() ? "" : cmd.source.front().text});
        return std::nullopt;
    }
    if (t < state_.last_command_t - config_.reorder_tolerance_s) {
        throw Error(ErrorCode::OutOfOrderEvent, "command at t=" + std::to_string(t) + " is out of order");
    }

    EncoderState next = state_;
    next.last_command_t = std::max(state_.last_command_t, t);
    std::optional<Intention> emitted;

    auto open_unbound_dependent = [this](const EncoderState& s) {
        return !s.pending.empty() && is_object_dependent(s.pending.back().action) &&
               !s.pending.back().object.has_value();
    };

    switch (cmd.kind) {
        case TokenKind::Action: {
            if (open_unbound_dependent(next)) {
                throw Error(ErrorCode::IncompleteIntention,
                            "'" + next.pending.back().action + "' still needs an object before the next action");
            }
            if (next.pending.size() >= 2) {
                throw Error(ErrorCode::TooManySubcommands, "an intention holds at most two subcommands");
            }
            next.pending.push_back(SubCommand{cmd.name, std::nullopt, std::nullopt, std::nullopt});
            next.phase = is_object_dependent(cmd.name) ? Phase::AwaitClass : Phase::AwaitMetricOrNext;
            break;
        }
        case TokenKind::Class: {
            if (next.pending.empty()) {
                notes_.push_back({t, "ignored", "class '" + cmd.name + "' before any action"});
                return std::nullopt;
            }
            next.pending.back().class_name = cmd.name;
            next.phase = Phase::AwaitPronoun;
            break;
        }
        case TokenKind::Pronoun: {
            if (next.pending.empty() || !next.pending.back().class_name) {
                throw Error(ErrorCode::PronounBeforeClass, "pronoun spoken before a class command");
            }
            auto ray = alignment_ray(t);
            if (!ray) {
                throw Error(ErrorCode::NoRecentRay, "no pointing ray within the alignment window");
            }
            SubCommand& open = next.pending.back();
            Selection sel;
            try {
                sel = select_object(*ray, scene, *open.class_name, config_.selection_radius_m);
            } catch (const Error& e) {
                Error wrapped(ErrorCode::ObjectBindingFailed, e.what());
                wrapped.caused_by(e.code());
                if (e.object_id) wrapped.with_object(*e.object_id);
                throw wrapped;
            }
            if (open.object) {
                notes_.push_back({t, "rebind", open.object->id + " -> " + sel.object.id});
            }
            open.object = sel.object;
            next.scene_snapshot = scene;
            next.phase = Phase::AwaitMetricOrNext;
            break;
        }
        case TokenKind::Metric: {
            if (next.pending.empty()) {
                notes_.push_back({t, "ignored", "metric before any action"});
                return std::nullopt;
            }
            next.pending.back().metric = cmd.metric;
            break;
        }
        case TokenKind::MetricUnit:
            notes_.push_back({t, "ignored", "unit word without a number"});
            return std::nullopt;
        case TokenKind::Finish: {
            if (next.pending.empty()) {
                throw Error(ErrorCode::IncompleteIntention, "finish with no action spoken");
            }
            for (const auto& sc : next.pending) {
                if (is_object_dependent(sc.action) && !sc.object) {
                    throw Error(ErrorCode::IncompleteIntention, "'" + sc.action + "' has no bound object");
                }
            }
            Intention intent;
            intent.subcommands = next.pending;
            for (const auto& sc : next.pending) {
                if (sc.metric) intent.omega = sc.metric;
            }
            const bool any_bound = std::any_of(next.pending.begin(), next.pending.end(),
                                               [](const SubCommand& s) { return s.object.has_value(); });
            intent.scene = any_bound ? next.scene_snapshot : scene;
            intent.timestamp = t;
            emitted = std::move(intent);
            next.phase = Phase::AwaitAction;
            next.pending.clear();
            break;
        }
        case TokenKind::Unknown:
            break;
    }
    state_ = std::move(next);
    return emitted;
}

}  // namespace deixis
