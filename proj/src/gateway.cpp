#include "deixis/gateway.hpp"
#include "deixis/json_io.hpp"
#include "deixis/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace deixis {

using json = nlohmann::json;

namespace {

const std::set<std::string> kInbound = {"word", "ray", "touch", "scene_request"};
const std::set<std::string> kOutbound = {"state_update", "selection_feedback", "intention_emitted", "plan",
                                         "verdict",      "trajectory_frame",   "error"};

Error malformed(const std::string& what) { return Error(ErrorCode::MalformedMessage, what); }

json error_payload(const Error& e, const std::string& stage) {
    json j = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"stage", stage}};
    if (e.object_id) j["object"] = *e.object_id;
    if (e.step) j["step"] = *e.step;
    return j;
}

template <class T>
T field(const json& payload, const char* name) {
    if (!payload.contains(name)) throw malformed(std::string("payload is missing '") + name + "'");
    try {
        return payload.at(name).get<T>();
    } catch (const json::exception&) {
        throw malformed(std::string("payload field '") + name + "' has the wrong type");
    }
}

json verdict_payload(const std::string& stage, const std::optional<Error>& e) {
    if (!e) return {{"stage", stage}, {"accepted", true}, {"code", nullptr}, {"message", ""}};
    json j = error_payload(*e, stage);
    j["accepted"] = false;
    return j;
}

std::optional<Selection> nearest_any(const DeicticRay& ray, const Scene& scene, double radius) {
    std::optional<Selection> best;
    for (const auto& o : scene.objects) {
        const double d = point_line_distance(ray, o.position);
        if (d > radius) continue;
        if (!best || d < best->distance_m || (d == best->distance_m && o.id < best->object.id)) {
            best = Selection{o, d};
        }
    }
    return best;
}

}  // namespace

void to_json(json& j, const Envelope& e) {
    j = {{"v", kProtocolVersion}, {"kind", e.kind},      {"session_id", e.session_id},
         {"timestamp", e.timestamp}, {"seq", e.seq}, {"payload", e.payload}};
    if (e.reply_to) j["reply_to"] = *e.reply_to;
}

bool is_inbound(const std::string& kind) { return kInbound.count(kind) != 0; }

Envelope parse_envelope(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception&) {
        throw malformed("message is not valid JSON");
    }
    if (!j.is_object()) throw malformed("message must be an object");
    if (!j.contains("v") || !j["v"].is_number_integer() || j["v"].get<int>() != kProtocolVersion) {
        throw malformed("unsupported protocol version");
    }
    Envelope e;
    if (!j.contains("kind") || !j["kind"].is_string()) throw malformed("message has no kind");
    e.kind = j["kind"].get<std::string>();
    if (!kInbound.count(e.kind) && !kOutbound.count(e.kind)) throw malformed("unknown kind '" + e.kind + "'");
    if (j.contains("session_id")) {
        if (!j["session_id"].is_string()) throw malformed("session_id must be a string");
        e.session_id = j["session_id"].get<std::string>();
    }
    if (!j.contains("timestamp") || !j["timestamp"].is_number()) throw malformed("message has no timestamp");
    e.timestamp = j["timestamp"].get<double>();
    if (!std::isfinite(e.timestamp)) throw malformed("timestamp must be finite");
    if (j.contains("seq")) {
        if (!j["seq"].is_number_unsigned()) throw malformed("seq must be a non-negative integer");
        e.seq = j["seq"].get<std::uint64_t>();
    }
    if (j.contains("reply_to")) {
        if (!j["reply_to"].is_number_unsigned()) throw malformed("reply_to must be a non-negative integer");
        e.reply_to = j["reply_to"].get<std::uint64_t>();
    }
    if (j.contains("payload")) {
        if (!j["payload"].is_object()) throw malformed("payload must be an object");
        e.payload = j["payload"];
    }
    return e;
}

Session::Session(std::string id, const Config& config, WorkcellState initial, ChatClient* llm)
    : id_(std::move(id)),
      config_(config),
      llm_(llm),
      fusion_(config_.fusion),
      words_(config_.lexicon),
      state_(std::move(initial)) {}

Envelope Session::reply(const Envelope& in, std::string kind, json payload) {
    Envelope e;
    e.kind = std::move(kind);
    e.session_id = id_;
    e.timestamp = in.timestamp;
    e.seq = ++seq_;
    e.reply_to = in.seq;
    e.payload = std::move(payload);
    return e;
}

Envelope Session::error_reply(const Envelope& in, const Error& e, const std::string& stage) {
    return reply(in, "error", error_payload(e, stage));
}

json Session::fusion_json() const {
    const EncoderState& s = fusion_.state();
    json pending = json::array();
    for (const auto& sc : s.pending) {
        pending.push_back({{"action", sc.action},
                           {"class", sc.class_name ? json(*sc.class_name) : json(nullptr)},
                           {"object", sc.object ? json(sc.object->id) : json(nullptr)},
                           {"metric", sc.metric ? json(*sc.metric) : json(nullptr)}});
    }
    return {{"phase", std::string(to_string(s.phase))}, {"pending", pending}};
}

Envelope Session::snapshot(const Envelope& in) {
    json p = fusion_json();
    p["scene"] = state_.scene;
    p["robot"] = state_.robot;
    return reply(in, "state_update", std::move(p));
}

std::vector<Envelope> Session::handle(const Envelope& in) {
    std::vector<Envelope> out;
    try {
        if (in.kind == "word") {
            on_word(in, out);
        } else if (in.kind == "ray") {
            DeicticRay ray;
            if (in.payload.contains("elbow")) {
                const SkeletonFrame frame{in.timestamp, field<Vec3>(in.payload, "elbow"), field<Vec3>(in.payload, "wrist"),
                                          in.payload.value("confidence", 1.0)};
                ray = forearm_ray(frame, config_.selection.min_skeleton_confidence);
            } else {
                ray = DeicticRay{field<Vec3>(in.payload, "r1"), field<Vec3>(in.payload, "r2"), in.timestamp};
            }
            on_pointing(in, ray, out);
        } else if (in.kind == "touch") {
            const DeicticRay ray =
                touch_ray(field<double>(in.payload, "u"), field<double>(in.payload, "v"), in.timestamp, config_.camera);
            on_pointing(in, ray, out);
        } else if (in.kind == "scene_request") {
            out.push_back(snapshot(in));
        } else {
            throw malformed("'" + in.kind + "' is sent by the server only");
        }
    } catch (const Error& e) {
        out.push_back(error_reply(in, e, e.code() == ErrorCode::MalformedMessage ? "gateway" : "input"));
    }
    return out;
}

void Session::on_word(const Envelope& in, std::vector<Envelope>& out) {
    const WordToken word{field<std::string>(in.payload, "text"), field<double>(in.payload, "t_start"),
                         field<double>(in.payload, "t_end"), in.payload.value("confidence", 1.0)};
    if (word.t_end < word.t_start) throw malformed("word ends before it starts");
    const CommandStream::Output o = words_.push(word);
    for (const auto& d : o.diagnostics) out.push_back(error_reply(in, d, "grammar"));
    for (const auto& tok : o.tokens) {
        std::optional<Intention> emitted;
        const std::size_t notes_before = fusion_.notes().size();
        try {
            emitted = fusion_.feed_command(tok, state_.scene);
        } catch (const Error& e) {
            out.push_back(error_reply(in, e, "fusion"));
            continue;
        }
        json update = fusion_json();
        update["token"] = {{"kind", std::string(to_string(tok.kind))}, {"name", tok.name}, {"t_end", tok.t_end()}};
        json notes = json::array();
        for (std::size_t k = notes_before; k < fusion_.notes().size(); ++k) {
            const FusionNote& n = fusion_.notes()[k];
            notes.push_back({{"kind", n.kind}, {"detail", n.detail}});
        }
        update["notes"] = notes;
        if (tok.kind == TokenKind::Pronoun) {
            const SubCommand& bound = fusion_.state().pending.back();
            const auto ray = fusion_.alignment_ray(tok.t_end());
            json fb = {{"object", bound.object->id},
                       {"class", bound.object->class_name},
                       {"bound", true},
                       {"t_end", tok.t_end()}};
            fb["distance_m"] = ray ? json(point_line_distance(*ray, bound.object->position)) : json(nullptr);
            out.push_back(reply(in, "selection_feedback", std::move(fb)));
        }
        out.push_back(reply(in, "state_update", std::move(update)));
        if (emitted) run_pipeline(in, *emitted, out);
    }
}

void Session::on_pointing(const Envelope& in, const DeicticRay& ray, std::vector<Envelope>& out) {
    try {
        fusion_.feed_ray(ray);
    } catch (const Error& e) {
        out.push_back(error_reply(in, e, "fusion"));
        return;
    }
    const double period = 1.0 / config_.gateway.hover_rate_hz;
    if (last_hover_t_ && in.timestamp - *last_hover_t_ < period - 1e-9) return;

    std::optional<Selection> sel;
    const auto cls = fusion_.active_class();
    if (cls) {
        try {
            sel = select_object(ray, state_.scene, *cls, config_.fusion.selection_radius_m);
        } catch (const Error&) {
        }
    } else {
        sel = nearest_any(ray, state_.scene, config_.fusion.selection_radius_m);
    }
    last_hover_t_ = in.timestamp;
    json fb = {{"object", sel ? json(sel->object.id) : json(nullptr)},
               {"class", cls ? json(*cls) : json(nullptr)},
               {"bound", false}};
    fb["distance_m"] = sel ? json(sel->distance_m) : json(nullptr);
    out.push_back(reply(in, "selection_feedback", std::move(fb)));
}

void Session::run_pipeline(const Envelope& in, const Intention& intent, std::vector<Envelope>& out) {
    out.push_back(reply(in, "intention_emitted", {{"intention", intention_summary(intent)}, {"t", intent.timestamp}}));

    std::vector<Verdict> notes;
    ActionSequence plan;
    try {
        plan = make_plan(intent, state_, config_, llm_, notes);
    } catch (const Error& e) {
        out.push_back(reply(in, "verdict", verdict_payload("plan", e)));
        return;
    }
    json steps = json::array();
    for (const auto& s : plan.steps) steps.push_back(format_step(s));
    json notes_json = json::array();
    for (const auto& n : notes) notes_json.push_back(n);
    out.push_back(reply(in, "plan", {{"provenance", plan.provenance.describe()}, {"steps", steps}, {"notes", notes_json}}));

    try {
        validate_sequence(plan, state_.scene, state_.robot, config_.api, config_.workcell);
    } catch (const Error& e) {
        out.push_back(reply(in, "verdict", verdict_payload("validate", e)));
        return;
    }
    out.push_back(reply(in, "verdict", verdict_payload("validate", std::nullopt)));

    const std::size_t first = state_.trajectory_log.size();
    ExecutionResult run = execute_sequence(state_, plan, config_.workcell);
    const std::size_t total = run.state.trajectory_log.size() - first;
    for (std::size_t k = first; k < run.state.trajectory_log.size(); ++k) {
        json frame = log_entry_json(run.state.trajectory_log[k]);
        frame["index"] = k - first;
        frame["of"] = total;
        out.push_back(reply(in, "trajectory_frame", std::move(frame)));
    }
    state_ = std::move(run.state);
    out.push_back(reply(in, "verdict", verdict_payload("execute", run.error)));
    out.push_back(snapshot(in));
}

SessionManager::SessionManager(Config config, ChatClient* llm) : config_(std::move(config)), llm_(llm) {}

std::string SessionManager::add(WorkcellState initial) {
    std::lock_guard lock(mutex_);
    const std::string id = "s" + std::to_string(next_id_++);
    auto s = std::make_shared<Slot>();
    s->session = std::make_unique<Session>(id, config_, std::move(initial), llm_);
    sessions_.emplace(id, std::move(s));
    return id;
}

std::string SessionManager::open_session(const std::string& preset) {
    WorkcellState state;
    state.scene = config_.preset(preset);
    state.robot = initial_robot(config_.workcell);
    return add(std::move(state));
}

std::string SessionManager::open_session(const Episode& seed) {
    WorkcellState state;
    state.scene = episode_scene(seed, config_);
    state.robot = initial_robot(config_.workcell);
    if (seed.initial_position) state.robot.pose.position = *seed.initial_position;
    if (seed.initial_holding) {
        if (state.scene.find(*seed.initial_holding) == nullptr) {
            throw Error(ErrorCode::InvalidEpisode, "initial_holding " + *seed.initial_holding + " is not in the scene");
        }
        attach_held_object(state, *seed.initial_holding);
    }
    return add(std::move(state));
}

std::shared_ptr<SessionManager::Slot> SessionManager::slot(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

void SessionManager::close_session(const std::string& id) {
    std::shared_ptr<Slot> s;
    {
        std::lock_guard lock(mutex_);
        const auto it = sessions_.find(id);
        if (it == sessions_.end()) return;
        s = it->second;
        sessions_.erase(it);
    }
    std::lock_guard lock(s->mutex);
    s->session.reset();
}

bool SessionManager::is_open(const std::string& id) const { return slot(id) != nullptr; }

std::size_t SessionManager::size() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

std::vector<Envelope> SessionManager::scene_request(const Envelope& in, std::set<std::string>* owned) {
    if (in.session_id.empty()) {
        std::string id;
        if (in.payload.contains("episode")) {
            id = open_session(parse_episode(field<std::string>(in.payload, "episode")));
        } else {
            id = open_session(field<std::string>(in.payload, "preset"));
        }
        if (owned) owned->insert(id);
        auto s = slot(id);
        std::lock_guard lock(s->mutex);
        return {s->session->snapshot(in)};
    }
    if (in.payload.value("close", false)) {
        if (owned) owned->erase(in.session_id);
        close_session(in.session_id);
        Envelope e;
        e.kind = "state_update";
        e.session_id = in.session_id;
        e.timestamp = in.timestamp;
        e.reply_to = in.seq;
        e.payload = {{"closed", true}};
        return {e};
    }
    auto s = slot(in.session_id);
    if (!s) throw Error(ErrorCode::SessionClosed, "session " + in.session_id + " is not open");
    std::lock_guard lock(s->mutex);
    if (!s->session) throw Error(ErrorCode::SessionClosed, "session " + in.session_id + " is not open");
    return {s->session->snapshot(in)};
}

std::vector<Envelope> SessionManager::handle_text(const std::string& text, std::set<std::string>* owned) {
    Envelope in;
    auto fail = [&](const Error& e) {
        Envelope out;
        out.kind = "error";
        out.session_id = in.session_id;
        out.timestamp = in.timestamp;
        if (in.seq) out.reply_to = in.seq;
        out.payload = error_payload(e, "gateway");
        return std::vector<Envelope>{out};
    };
    try {
        in = parse_envelope(text);
    } catch (const Error& e) {
        try {
            const json j = json::parse(text);
            if (j.is_object() && j.contains("session_id") && j["session_id"].is_string()) {
                in.session_id = j["session_id"].get<std::string>();
            }
        } catch (const json::exception&) {
        }
        return fail(e);
    }
    try {
        if (!is_inbound(in.kind)) throw malformed("'" + in.kind + "' is sent by the server only");
        if (!in.session_id.empty() && owned && !owned->count(in.session_id)) {
            throw Error(ErrorCode::SessionClosed, "session " + in.session_id + " is not open on this connection");
        }
        if (in.kind == "scene_request") return scene_request(in, owned);
        if (in.session_id.empty()) throw malformed("'" + in.kind + "' needs a session_id");
        auto s = slot(in.session_id);
        if (!s) throw Error(ErrorCode::SessionClosed, "session " + in.session_id + " is not open");
        std::lock_guard lock(s->mutex);
        if (!s->session) throw Error(ErrorCode::SessionClosed, "session " + in.session_id + " is not open");
        return s->session->handle(in);
    } catch (const Error& e) {
        return fail(e);
    } catch (const std::exception& e) {
        return fail(Error(ErrorCode::MalformedMessage, std::string("request failed: ") + e.what()));
    }
}

void OutboundQueue::push(const Envelope& e) {
    const bool droppable = e.kind == "trajectory_frame";
    if (items_.size() >= capacity_) {
        const auto oldest = std::find_if(items_.begin(), items_.end(), [](const Item& i) { return i.droppable; });
        if (oldest != items_.end()) {
            items_.erase(oldest);
            ++dropped_;
        } else if (droppable) {
            ++dropped_;
            return;
        }
    }
    items_.push_back({json(e).dump(), droppable});
}

std::optional<std::string> OutboundQueue::pop() {
    if (items_.empty()) return std::nullopt;
    std::string text = std::move(items_.front().text);
    items_.pop_front();
    return text;
}

std::vector<Envelope> episode_messages(const Episode& episode, const std::string& session_id) {
    std::vector<Envelope> out;
    std::uint64_t seq = 0;
    for (const auto& ev : replay_order(episode.events)) {
        Envelope e;
        e.session_id = session_id;
        e.timestamp = ev.t();
        if (const auto* s = std::get_if<SkeletonFrame>(&ev.body)) {
            e.kind = "ray";
            e.payload = {{"elbow", s->right_elbow}, {"wrist", s->right_wrist}, {"confidence", s->confidence}};
        } else if (const auto* r = std::get_if<DeicticRay>(&ev.body)) {
            e.kind = "ray";
            e.payload = {{"r1", r->r1}, {"r2", r->r2}};
        } else if (const auto* t = std::get_if<TouchEvent>(&ev.body)) {
            e.kind = "touch";
            e.payload = {{"u", t->u}, {"v", t->v}};
        } else if (const auto* w = std::get_if<WordToken>(&ev.body)) {
            e.kind = "word";
            e.payload = {{"text", w->text}, {"t_start", w->t_start}, {"t_end", w->t_end}, {"confidence", w->confidence}};
        } else {
            continue;
        }
        e.seq = ++seq;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace deixis
