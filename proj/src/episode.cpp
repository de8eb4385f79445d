#include "deixis/harness.hpp"
#include "deixis/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace deixis {

namespace {

template <class... F>
struct overloaded : F... {
    using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

constexpr const char* kKindNames[] = {"holding", "at_home", "object_over", "in_bin", "event", "displaced"};

Predicate::Kind kind_from(const std::string& s) {
    for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
        if (s == kKindNames[i]) return static_cast<Predicate::Kind>(i);
    }
    throw Error(ErrorCode::InvalidEpisode, "unknown predicate kind '" + s + "'");
}

json predicate_json(const Predicate& p) {
    json j = {{"kind", kKindNames[static_cast<int>(p.kind)]}};
    switch (p.kind) {
        case Predicate::Kind::Holding: j["object"] = p.object ? json(*p.object) : json(nullptr); break;
        case Predicate::Kind::AtHome: break;
        case Predicate::Kind::ObjectOver: j["object"] = *p.object; j["target"] = p.target; break;
        case Predicate::Kind::InBin: j["object"] = *p.object; break;
        case Predicate::Kind::Event: j["event"] = p.text; break;
        case Predicate::Kind::Displaced: j["object"] = *p.object; j["toward"] = p.text; break;
    }
    return j;
}

Predicate predicate_from(const json& j) {
    Predicate p;
    p.kind = kind_from(j.at("kind").get<std::string>());
    auto need_object = [&] {
        if (!j.contains("object") || !j["object"].is_string()) {
            throw Error(ErrorCode::InvalidEpisode, std::string("predicate ") + kKindNames[static_cast<int>(p.kind)] +
                                                       " needs an object");
        }
        p.object = j["object"].get<std::string>();
    };
    switch (p.kind) {
        case Predicate::Kind::Holding:
            if (j.contains("object") && !j["object"].is_null()) p.object = j["object"].get<std::string>();
            break;
        case Predicate::Kind::AtHome: break;
        case Predicate::Kind::ObjectOver:
            need_object();
            p.target = j.at("target").get<std::string>();
            break;
        case Predicate::Kind::InBin: need_object(); break;
        case Predicate::Kind::Event: p.text = j.at("event").get<std::string>(); break;
        case Predicate::Kind::Displaced:
            need_object();
            p.text = j.at("toward").get<std::string>();
            if (p.text != "near" && p.text != "far") {
                throw Error(ErrorCode::InvalidEpisode, "displaced predicate needs toward near or far");
            }
            break;
    }
    return p;
}

// Missing metric/omega entries default to null so fixtures can leave them out.
json normalize_summary(json j) {
    if (!j.contains("omega")) j["omega"] = nullptr;
    for (auto& s : j.at("subcommands")) {
        if (!s.contains("object")) s["object"] = nullptr;
        if (!s.contains("metric")) s["metric"] = nullptr;
    }
    return j;
}

json event_json(const EpisodeEvent& e) {
    return std::visit(
        overloaded{
            [](const Detection& d) {
                json j = d;
                j["stream"] = "detection";
                return j;
            },
            [](const SkeletonFrame& s) {
                return json{{"stream", "skeleton"}, {"t", s.timestamp}, {"elbow", s.right_elbow},
                            {"wrist", s.right_wrist}, {"confidence", s.confidence}};
            },
            [](const DeicticRay& r) {
                json j = r;
                j["stream"] = "ray";
                return j;
            },
            [](const TouchEvent& t) { return json{{"stream", "touch"}, {"t", t.timestamp}, {"u", t.u}, {"v", t.v}}; },
            [](const WordToken& w) {
                json j = {{"stream", "word"}, {"text", w.text}, {"t_start", w.t_start}, {"t_end", w.t_end}};
                if (w.confidence != 1.0) j["confidence"] = w.confidence;
                return j;
            },
        },
        e.body);
}

EpisodeEvent event_from(const json& j) {
    const std::string stream = j.at("stream").get<std::string>();
    if (stream == "detection") return {j.get<Detection>()};
    if (stream == "skeleton") {
        return {SkeletonFrame{j.at("t").get<double>(), j.at("elbow").get<Vec3>(), j.at("wrist").get<Vec3>(),
                              j.value("confidence", 1.0)}};
    }
    if (stream == "ray") return {j.get<DeicticRay>()};
    if (stream == "touch") return {TouchEvent{j.at("u").get<double>(), j.at("v").get<double>(), j.at("t").get<double>()}};
    if (stream == "word") {
        return {WordToken{j.at("text").get<std::string>(), j.at("t_start").get<double>(), j.at("t_end").get<double>(),
                          j.value("confidence", 1.0)}};
    }
    throw Error(ErrorCode::InvalidEpisode, "unknown stream '" + stream + "'");
}

}  // namespace

double EpisodeEvent::t() const {
    return std::visit(overloaded{
                          [](const Detection& d) { return d.timestamp; },
                          [](const SkeletonFrame& s) { return s.timestamp; },
                          [](const DeicticRay& r) { return r.timestamp; },
                          [](const TouchEvent& t) { return t.timestamp; },
                          [](const WordToken& w) { return w.t_end; },
                      },
                      body);
}

int EpisodeEvent::priority() const {
    if (std::holds_alternative<Detection>(body)) return 0;
    if (std::holds_alternative<WordToken>(body)) return 2;
    return 1;
}

const char* EpisodeEvent::stream() const {
    static constexpr const char* names[] = {"detection", "skeleton", "ray", "touch", "word"};
    return names[body.index()];
}

std::string describe(const Predicate& p) {
    switch (p.kind) {
        case Predicate::Kind::Holding: return "holding " + p.object.value_or("nothing");
        case Predicate::Kind::AtHome: return "at home";
        case Predicate::Kind::ObjectOver: return *p.object + " over " + p.target;
        case Predicate::Kind::InBin: return *p.object + " in bin";
        case Predicate::Kind::Event: return "event '" + p.text + "'";
        case Predicate::Kind::Displaced: return *p.object + " displaced " + p.text;
    }
    return "?";
}

void Episode::validate() const {
    std::map<std::string, double> last;
    std::set<std::string> classes;
    for (const auto& e : events) {
        const std::string stream = e.stream();
        const double t = std::holds_alternative<WordToken>(e.body) ? std::get<WordToken>(e.body).t_start : e.t();
        if (!std::isfinite(t)) throw Error(ErrorCode::InvalidEpisode, name + ": non-finite timestamp");
        auto it = last.find(stream);
        if (it != last.end() && t < it->second) {
            throw Error(ErrorCode::InvalidEpisode, name + ": " + stream + " timestamps go backwards at t=" +
                                                       format_number(t));
        }
        last[stream] = t;
        if (const auto* w = std::get_if<WordToken>(&e.body)) {
            if (w->t_end < w->t_start) throw Error(ErrorCode::InvalidEpisode, name + ": word '" + w->text + "' ends before it starts");
        }
        if (const auto* d = std::get_if<Detection>(&e.body)) classes.insert(d->class_name);
    }
    if (expected.intention) {
        for (const auto& s : expected.intention->at("subcommands")) {
            auto obj = s.find("object");
            if (obj == s.end() || !obj->is_string()) continue;
            const std::string id = obj->get<std::string>();
            const std::string cls = id.substr(0, id.find('#'));
            if (!classes.count(cls)) {
                throw Error(ErrorCode::InvalidEpisode, name + ": expected object " + id + " has no detection");
            }
        }
    }
}

Episode parse_episode(const std::string& text) {
    Episode ep;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    bool have_meta = false;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            const std::string stream = j.at("stream").get<std::string>();
            if (stream == "meta") {
                if (have_meta) throw Error(ErrorCode::InvalidEpisode, "second meta record");
                have_meta = true;
                ep.name = j.at("name").get<std::string>();
                ep.task = j.value("task", std::string{});
                if (j.contains("initial_holding") && !j["initial_holding"].is_null()) {
                    ep.initial_holding = j["initial_holding"].get<std::string>();
                }
                if (j.contains("initial_position")) ep.initial_position = j["initial_position"].get<Vec3>();
                if (j.contains("expected")) {
                    const json& x = j["expected"];
                    if (x.contains("intention")) ep.expected.intention = normalize_summary(x["intention"]);
                    if (x.contains("rejection")) {
                        const std::string code = x["rejection"].get<std::string>();
                        ep.expected.rejection = error_code_from_string(code);
                        if (!ep.expected.rejection) throw Error(ErrorCode::InvalidEpisode, "unknown error class " + code);
                    }
                    for (const auto& p : x.value("predicates", json::array())) {
                        ep.expected.predicates.push_back(predicate_from(p));
                    }
                }
                continue;
            }
            if (!have_meta) throw Error(ErrorCode::InvalidEpisode, "the first record must be meta");
            ep.events.push_back(event_from(j));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidEpisode, "line " + std::to_string(n) + ": " + e.what()).at_line(n);
        } catch (Error& e) {
            if (e.code() != ErrorCode::InvalidEpisode) throw;
            if (!e.line) e.at_line(n);
            throw;
        }
    }
    if (!have_meta) throw Error(ErrorCode::InvalidEpisode, "episode has no meta record");
    ep.validate();
    return ep;
}

std::string serialize_episode(const Episode& e) {
    json meta = {{"stream", "meta"}, {"name", e.name}, {"task", e.task}};
    if (e.initial_holding) meta["initial_holding"] = *e.initial_holding;
    if (e.initial_position) meta["initial_position"] = *e.initial_position;
    json expected = json::object();
    if (e.expected.intention) expected["intention"] = *e.expected.intention;
    if (e.expected.rejection) expected["rejection"] = std::string(to_string(*e.expected.rejection));
    if (!e.expected.predicates.empty()) {
        json preds = json::array();
        for (const auto& p : e.expected.predicates) preds.push_back(predicate_json(p));
        expected["predicates"] = preds;
    }
    meta["expected"] = expected;

    std::string out = meta.dump() + "\n";
    for (const auto& ev : e.events) out += event_json(ev).dump() + "\n";
    return out;
}

Episode load_episode(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidEpisode, "cannot open " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_episode(text.str());
    } catch (const Error& e) {
        Error wrapped(e.code(), path.filename().string() + ": " + e.what());
        if (e.line) wrapped.at_line(*e.line);
        throw wrapped;
    }
}

void save_episode(const Episode& e, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidEpisode, "cannot write " + path.string());
    out << serialize_episode(e);
}

std::vector<Episode> load_episodes(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Episode> out;
    for (const auto& f : files) out.push_back(load_episode(f));
    return out;
}

std::vector<EpisodeEvent> replay_order(const std::vector<EpisodeEvent>& events) {
    std::vector<EpisodeEvent> sorted = events;
    std::stable_sort(sorted.begin(), sorted.end(), [](const EpisodeEvent& a, const EpisodeEvent& b) {
        if (a.t() != b.t()) return a.t() < b.t();
        return a.priority() < b.priority();
    });
    return sorted;
}

}  // namespace deixis
