#include "deixis/harness.hpp"
#include "deixis/json_io.hpp"

#include <chrono>
#include <iomanip>
#include <memory>
#include <sstream>

namespace deixis {

namespace {

constexpr double kPoseTol = 1e-6;
constexpr double kDisplaceMin = 0.01;

const char* const kProxyNote =
    "sensor robustness is modelled by detection and skeleton confidence only; no lighting simulation";

class Stopwatch {
public:
    explicit Stopwatch(double& sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
    ~Stopwatch() {
        sink_ += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    double& sink_;
    std::chrono::steady_clock::time_point start_;
};

Verdict hard(std::string stage, const Error& e) { return Verdict{std::move(stage), e.code(), e.what(), true}; }

Vec2 xy(const Vec3& v) { return v.head<2>(); }

json tally_json(const TaskTally& t) {
    return {{"n_trials", t.n_trials},   {"n_executed", t.n_executed}, {"n_total", t.n_total},
            {"n_correct", t.n_correct}, {"accuracy", t.accuracy()},   {"robustness", t.robustness()}};
}

std::string percent(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << v << " %";
    return out.str();
}

}  // namespace

StageTiming& StageTiming::operator+=(const StageTiming& o) {
    fusion_ms += o.fusion_ms;
    planning_ms += o.planning_ms;
    validation_ms += o.validation_ms;
    execution_ms += o.execution_ms;
    return *this;
}

bool ReplayResult::hard_failure() const {
    for (const auto& v : verdicts) {
        if (v.hard) return true;
    }
    return false;
}

void to_json(nlohmann::json& j, const Verdict& v) {
    j = {{"stage", v.stage},
         {"code", v.code ? json(std::string(to_string(*v.code))) : json(nullptr)},
         {"message", v.message},
         {"hard", v.hard}};
}

ActionSequence make_plan(const Intention& intent, const WorkcellState& s, const Config& cfg, ChatClient* llm,
                         std::vector<Verdict>& verdicts) {
    if (cfg.plan_source == PlanSource::Rule) {
        return plan_rule(intent, s.scene, s.robot, cfg.catalog, cfg.api, cfg.workcell, cfg.planner);
    }
    std::unique_ptr<HttpChatClient> own;
    if (llm == nullptr) {
        own = std::make_unique<HttpChatClient>(cfg.llm);
        llm = own.get();
    }
    try {
        const PromptBundle bundle =
            build_prompt(intent, s.scene, s.robot, cfg.catalog, cfg.api, cfg.workcell, cfg.planner);
        return plan_with_llm(bundle, *llm, s.scene, s.robot, cfg.api, cfg.workcell);
    } catch (const Error& e) {
        if (!cfg.fallback_to_rule) throw;
        verdicts.push_back({"plan", e.code(), std::string("model planner failed, using rule planner: ") + e.what(),
                            false});
        return plan_rule(intent, s.scene, s.robot, cfg.catalog, cfg.api, cfg.workcell, cfg.planner);
    }
}

Scene episode_scene(const Episode& episode, const Config& cfg) {
    std::vector<Detection> frame;
    for (const auto& ev : replay_order(episode.events)) {
        const auto* d = std::get_if<Detection>(&ev.body);
        if (d == nullptr) continue;
        if (!frame.empty() && d->timestamp != frame.front().timestamp) break;
        frame.push_back(*d);
    }
    if (frame.empty()) return {};
    return scene_from_detections(frame, cfg.camera, cfg.selection.min_detection_confidence, frame.front().timestamp);
}

Encoding encode(const Episode& episode, const Config& cfg) {
    Encoding out;
    FusionEngine fusion(cfg.fusion);
    CommandStream words(cfg.lexicon);
    std::vector<Detection> frame;

    auto flush_frame = [&] {
        if (frame.empty()) return;
        out.scene = scene_from_detections(frame, cfg.camera, cfg.selection.min_detection_confidence,
                                          frame.front().timestamp);
        frame.clear();
    };
    auto note_diagnostics = [&](const std::vector<Error>& diags) {
        for (const auto& d : diags) out.notes.push_back({"input", d.code(), d.what(), false});
    };
    auto finish_notes = [&] {
        for (const auto& n : fusion.notes()) {
            out.notes.push_back({"fusion", std::nullopt, n.kind + " at t=" + format_number(n.t) + ": " + n.detail, false});
        }
    };

    try {
        for (const auto& ev : replay_order(episode.events)) {
            if (const auto* d = std::get_if<Detection>(&ev.body)) {
                if (!frame.empty() && d->timestamp != frame.front().timestamp) flush_frame();
                frame.push_back(*d);
                continue;
            }
            flush_frame();
            if (const auto* w = std::get_if<WordToken>(&ev.body)) {
                const CommandStream::Output o = words.push(*w);
                note_diagnostics(o.diagnostics);
                for (const auto& tok : o.tokens) {
                    auto emitted = fusion.feed_command(tok, out.scene);
                    if (tok.kind == TokenKind::Pronoun) {
                        out.pronoun_ends.push_back(tok.t_end());
                        out.bindings.push_back(fusion.state().pending.back().object->id);
                    }
                    if (emitted) {
                        out.intention = std::move(emitted);
                        finish_notes();
                        return out;
                    }
                }
                continue;
            }
            try {
                if (const auto* s = std::get_if<SkeletonFrame>(&ev.body)) {
                    fusion.feed_ray(forearm_ray(*s, cfg.selection.min_skeleton_confidence));
                } else if (const auto* r = std::get_if<DeicticRay>(&ev.body)) {
                    fusion.feed_ray(*r);
                } else if (const auto* t = std::get_if<TouchEvent>(&ev.body)) {
                    fusion.feed_ray(touch_ray(t->u, t->v, t->timestamp, cfg.camera));
                }
            } catch (const Error& e) {
                out.notes.push_back({"input", e.code(), std::string("pointing sample dropped: ") + e.what(), false});
            }
        }
        flush_frame();
        note_diagnostics(words.flush().diagnostics);
        throw Error(ErrorCode::IncompleteIntention, "episode ended without a finish command");
    } catch (const Error& e) {
        out.error = e;
    }
    finish_notes();
    return out;
}

bool holds(const Predicate& p, const WorkcellState& initial, const WorkcellState& fin, const WorkcellConfig& cell) {
    const RobotState& r = fin.robot;
    auto resting = [&](const std::string& id) -> const ObjectRecord* {
        if (r.holding && *r.holding == id) return nullptr;
        return fin.scene.find(id);
    };
    switch (p.kind) {
        case Predicate::Kind::Holding: return r.holding == p.object;
        case Predicate::Kind::AtHome: return (r.pose.position - cell.home.position).norm() <= kPoseTol;
        case Predicate::Kind::ObjectOver: {
            const ObjectRecord* o = resting(*p.object);
            const ObjectRecord* t = fin.scene.find(p.target);
            if (o == nullptr || t == nullptr) return false;
            const Vec2 d = (xy(o->position) - xy(t->position)).cwiseAbs();
            return d.maxCoeff() <= 0.5 * t->width_m && object_bottom(*o) >= object_top(*t) - kPoseTol;
        }
        case Predicate::Kind::InBin: {
            const ObjectRecord* o = resting(*p.object);
            return o != nullptr && over_bin(xy(o->position), cell);
        }
        case Predicate::Kind::Event:
            for (const auto& e : fin.trajectory_log) {
                for (const auto& text : e.events) {
                    if (text == p.text) return true;
                }
            }
            return false;
        case Predicate::Kind::Displaced: {
            const ObjectRecord* before = initial.scene.find(*p.object);
            const ObjectRecord* after = resting(*p.object);
            if (before == nullptr || after == nullptr) return false;
            const double d0 = (xy(before->position) - cell.near_anchor).norm();
            const double d1 = (xy(after->position) - cell.near_anchor).norm();
            return p.text == "near" ? d1 <= d0 - kDisplaceMin : d1 >= d0 + kDisplaceMin;
        }
    }
    return false;
}

ReplayResult replay(const Episode& episode, const Config& cfg, ChatClient* llm) {
    ReplayResult res;
    res.name = episode.name;
    res.task = episode.task;
    res.has_expectation = episode.expected.intention.has_value() || episode.expected.rejection.has_value();

    auto fail = [&](std::string stage, const Error& e) {
        res.verdicts.push_back(hard(std::move(stage), e));
        if (episode.expected.rejection && *episode.expected.rejection == e.code()) res.intent_correct = true;
    };

    Encoding enc;
    {
        Stopwatch sw(res.timing.fusion_ms);
        enc = encode(episode, cfg);
    }
    res.verdicts = enc.notes;
    WorkcellState state;
    state.scene = enc.scene;
    state.robot = initial_robot(cfg.workcell);
    res.initial = state;
    res.final_state = state;
    if (enc.error) {
        fail("fusion", *enc.error);
        return res;
    }
    res.intention = enc.intention;
    if (episode.expected.intention && !episode.expected.rejection) {
        res.intent_correct = intention_summary(*res.intention) == *episode.expected.intention;
    }

    if (episode.initial_position) state.robot.pose.position = *episode.initial_position;
    if (episode.initial_holding) {
        if (state.scene.find(*episode.initial_holding) == nullptr) {
            fail("input", Error(ErrorCode::InvalidEpisode, "initial_holding " + *episode.initial_holding +
                                                               " is not in the scene"));
            return res;
        }
        attach_held_object(state, *episode.initial_holding);
    }
    res.initial = state;
    res.final_state = state;

    try {
        Stopwatch sw(res.timing.planning_ms);
        res.plan = make_plan(*res.intention, state, cfg, llm, res.verdicts);
    } catch (const Error& e) {
        fail("plan", e);
        return res;
    }
    try {
        Stopwatch sw(res.timing.validation_ms);
        validate_sequence(*res.plan, state.scene, state.robot, cfg.api, cfg.workcell);
    } catch (const Error& e) {
        fail("validate", e);
        return res;
    }
    ExecutionResult run;
    {
        Stopwatch sw(res.timing.execution_ms);
        run = execute_sequence(state, *res.plan, cfg.workcell);
    }
    res.final_state = run.state;
    if (run.error) {
        fail("execute", *run.error);
        return res;
    }
    bool all = true;
    for (const auto& p : episode.expected.predicates) {
        if (!holds(p, res.initial, res.final_state, cfg.workcell)) {
            res.verdicts.push_back({"predicate", std::nullopt, "final state fails: " + describe(p), true});
            all = false;
        }
    }
    res.executed = all;
    return res;
}

MetricsReport evaluate(const std::vector<Episode>& episodes, const Config& cfg, ChatClient* llm) {
    if (episodes.empty()) throw Error(ErrorCode::InvalidEpisode, "evaluate needs at least one episode");
    MetricsReport report;
    const auto start = std::chrono::steady_clock::now();
    for (const auto& ep : episodes) {
        const ReplayResult r = replay(ep, cfg, llm);
        for (TaskTally* t : {&report.totals, &report.per_task[ep.task.empty() ? ep.name : ep.task]}) {
            ++t->n_trials;
            if (r.executed) ++t->n_executed;
            if (r.has_expectation) {
                ++t->n_total;
                if (r.intent_correct) ++t->n_correct;
            }
        }
        EpisodeSummary s{r.name, r.task, r.executed, r.intent_correct, std::nullopt, {}, r.verdicts};
        if (r.intention) s.intention = intention_summary(*r.intention);
        if (r.plan) s.plan = serialize_plan(*r.plan);
        report.episodes.push_back(std::move(s));
        report.timing += r.timing;
    }
    report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

json report_json(const MetricsReport& r, bool include_timing) {
    json j = tally_json(r.totals);
    j["note"] = kProxyNote;
    json tasks = json::object();
    for (const auto& [name, t] : r.per_task) tasks[name] = tally_json(t);
    j["per_task"] = tasks;
    json eps = json::array();
    for (const auto& e : r.episodes) {
        eps.push_back({{"name", e.name},
                       {"task", e.task},
                       {"executed", e.executed},
                       {"intent_correct", e.intent_correct},
                       {"intention", e.intention ? *e.intention : json(nullptr)},
                       {"plan", e.plan},
                       {"verdicts", e.verdicts}});
    }
    j["episodes"] = eps;
    if (include_timing) {
        j["timing_ms"] = {{"fusion", r.timing.fusion_ms},         {"planning", r.timing.planning_ms},
                          {"validation", r.timing.validation_ms}, {"execution", r.timing.execution_ms},
                          {"wall", r.wall_ms}};
    }
    return j;
}

std::string report_text(const MetricsReport& r, bool include_timing) {
    std::ostringstream out;
    out << "# " << kProxyNote << "\n";
    out << std::left << std::setw(28) << "episode" << std::setw(30) << "task" << std::setw(8) << "intent"
        << std::setw(6) << "exec"
        << "first hard verdict\n";
    for (const auto& e : r.episodes) {
        std::string first;
        for (const auto& v : e.verdicts) {
            if (!v.hard) continue;
            first = v.stage + ": " + (v.code ? std::string(to_string(*v.code)) : std::string("predicate"));
            break;
        }
        out << std::setw(28) << e.name << std::setw(30) << e.task << std::setw(8) << (e.intent_correct ? "ok" : "-")
            << std::setw(6) << (e.executed ? "ok" : "-") << first << "\n";
    }
    out << "\nper task\n";
    for (const auto& [name, t] : r.per_task) {
        out << "  " << std::setw(30) << name << " accuracy " << std::setw(9) << percent(t.accuracy())
            << " robustness " << percent(t.robustness()) << "\n";
    }
    out << "\naccuracy   " << percent(r.accuracy()) << "  (" << r.totals.n_executed << "/" << r.totals.n_trials
        << " executed)\n";
    out << "robustness " << percent(r.robustness()) << "  (" << r.totals.n_correct << "/" << r.totals.n_total
        << " intents correct)\n";
    if (include_timing) {
        out << std::fixed << std::setprecision(2) << "\ntiming ms: fusion " << r.timing.fusion_ms << ", planning "
            << r.timing.planning_ms << ", validation " << r.timing.validation_ms << ", execution "
            << r.timing.execution_ms << ", wall " << r.wall_ms << "\n";
    }
    return out.str();
}

}  // namespace deixis
