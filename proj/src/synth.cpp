#include "deixis/synth.hpp"
#include "deixis/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <set>
#include <sstream>

namespace deixis {

namespace {

// Decimal rounding that prints back in its short form.
double round_to(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return std::strtod(buf, nullptr);
}

Vec3 round_vec(const Vec3& v) { return Vec3(round_to(v.x(), 6), round_to(v.y(), 6), round_to(v.z(), 6)); }

struct Shape {
    const char* cls;
    double h;
    double w;
};

constexpr Shape kShapes[] = {{"cup", 0.1, 0.07}, {"bowl", 0.08, 0.16}, {"plate", 0.025, 0.2}, {"bottle", 0.25, 0.08}};

json sub_json(const std::string& action, const std::optional<std::string>& object,
              const std::optional<Metric>& metric = std::nullopt) {
    return {{"action", action},
            {"object", object ? json(*object) : json(nullptr)},
            {"metric", metric ? json(*metric) : json(nullptr)}};
}

json summary(std::vector<json> subs, const std::optional<Metric>& omega) {
    return {{"subcommands", subs}, {"omega", omega ? json(*omega) : json(nullptr)}};
}

Predicate pred(Predicate::Kind k, std::optional<std::string> object = std::nullopt, std::string target = {},
               std::string text = {}) {
    return Predicate{k, std::move(object), std::move(target), std::move(text)};
}

// Pointing segments that cover each pronoun of the word list, in order.
std::vector<PointingSegment> point_at_pronouns(const std::vector<WordToken>& words, const Lexicon& lex,
                                               const std::vector<std::string>& targets, double lead, double tail) {
    std::vector<PointingSegment> out;
    std::size_t k = 0;
    for (const auto& w : words) {
        if (!lex.pronoun_words.count(lowercase(w.text)) || k >= targets.size()) continue;
        out.push_back({std::max(0.0, w.t_end - lead), w.t_end + tail, targets[k++]});
    }
    return out;
}

void renumber(Scene& scene) {
    std::map<std::string, int> n;
    for (auto& o : scene.objects) o.id = o.class_name + "#" + std::to_string(++n[o.class_name]);
}

template <typename T>
const T& pick_one(const std::vector<T>& v, std::mt19937_64& rng) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 v;
    do {
        v = Vec3(n(rng), n(rng), n(rng));
    } while (v.norm() < 1e-6);
    return v.normalized();
}

}  // namespace

std::vector<WordToken> timed_words(const std::string& text, double t0, double len, double gap) {
    std::vector<WordToken> out;
    std::istringstream in(text);
    std::string w;
    double t = t0;
    while (in >> w) {
        out.push_back(WordToken{w, round_to(t, 6), round_to(t + len, 6), 1.0});
        t += len + gap;
    }
    return out;
}

Detection project(const ObjectRecord& o, const CameraModel& cam, double timestamp, double confidence) {
    const Vec3 pc = cam.extrinsic.rotation.transpose() * (o.position - cam.extrinsic.translation);
    if (!(pc.z() > 0.0)) throw Error(ErrorCode::NonPositiveDepth, o.id + " is behind the camera");
    const double u = cam.fx * pc.x() / pc.z() + cam.cx;
    const double v = cam.fy * pc.y() / pc.z() + cam.cy;
    const double bw = o.width_m * cam.fx / pc.z();
    const double bh = o.height_m * cam.fy / pc.z();
    constexpr int px = 4;
    Detection d;
    d.class_name = o.class_name;
    d.bbox = BBox{round_to(u - 0.5 * bw, px), round_to(v - 0.5 * bh, px), round_to(u + 0.5 * bw, px),
                  round_to(v + 0.5 * bh, px)};
    d.depth_m = round_to(pc.z(), 7);
    d.timestamp = timestamp;
    d.confidence = confidence;
    return d;
}

Vec3 perturb_direction(const Vec3& dir, double sigma_deg, std::mt19937_64& rng) {
    const Vec3 d = dir.normalized();
    if (sigma_deg <= 0.0) return d;
    const Vec3 helper = std::abs(d.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    const Vec3 a = d.cross(helper).normalized();
    const Vec3 b = d.cross(a);
    std::normal_distribution<double> n(0.0, sigma_deg * std::numbers::pi / 180.0);
    return (d + std::tan(n(rng)) * a + std::tan(n(rng)) * b).normalized();
}

Episode synthesize(const EpisodeScript& s, const CameraModel& cam) {
    Episode ep;
    ep.name = s.name;
    ep.task = s.task;
    ep.initial_holding = s.initial_holding;
    ep.initial_position = s.initial_position;
    ep.expected = s.expected;

    std::vector<EpisodeEvent> events;
    for (const auto& o : s.scene.objects) events.push_back({project(o, cam, 0.0, s.detection_confidence)});

    double end = s.duration;
    if (end <= 0.0) {
        for (const auto& w : s.words) end = std::max(end, w.t_end);
        end += 0.5;
    }
    std::mt19937_64 rng(s.seed);
    const Vec3 rest = Vec3(0.0, -0.3, -1.0).normalized();
    const auto frames = static_cast<int>(std::floor(end * s.frame_rate + 1e-9));
    for (int k = 0; k <= frames; ++k) {
        const double t = round_to(k / s.frame_rate, 6);
        const PointingSegment* seg = nullptr;
        for (const auto& p : s.pointing) {
            if (t >= p.t0 && t <= p.t1 && (seg == nullptr || p.t0 >= seg->t0)) seg = &p;
        }
        Vec3 dir = rest;
        if (seg != nullptr) {
            const ObjectRecord* o = s.scene.find(seg->target_id);
            if (o == nullptr) throw Error(ErrorCode::InvalidEpisode, s.name + ": pointing target " + seg->target_id + " is not in the scene");
            dir = o->position - s.elbow;
        }
        dir = perturb_direction(dir, s.noise_deg, rng);
        events.push_back({SkeletonFrame{t, round_vec(s.elbow), round_vec(s.elbow + s.forearm_m * dir),
                                        s.skeleton_confidence}});
    }
    for (const auto& w : s.words) events.push_back({w});
    ep.events = replay_order(events);
    ep.validate();
    return ep;
}

std::vector<EpisodeScript> scenario_scripts(const Config& cfg) {
    const Scene scene = cfg.preset("two-cups-bowl-plate");
    const Metric ninety{UnitKind::Degrees, 90.0, {}};
    const Metric near{UnitKind::Spatial, 0.0, "near"};
    std::vector<EpisodeScript> out;

    auto add = [&](std::string name, std::string task, const std::string& text, std::vector<std::string> targets,
                   json intention, std::vector<Predicate> predicates) {
        EpisodeScript s;
        s.name = std::move(name);
        s.task = std::move(task);
        s.scene = scene;
        s.words = timed_words(text, 0.5);
        s.pointing = point_at_pronouns(s.words, cfg.lexicon, targets, 0.8, 0.4);
        s.expected.intention = std::move(intention);
        s.expected.predicates = std::move(predicates);
        s.seed = out.size() + 1;
        out.push_back(std::move(s));
        return &out.back();
    };
    using K = Predicate::Kind;

    add("home", "home", "home finish", {}, summary({sub_json("home", std::nullopt)}, std::nullopt),
        {pred(K::AtHome), pred(K::Holding)})
        ->initial_position = Vec3(0.2, 0.45, 0.3);

    EpisodeScript* thr = add("throw", "throw", "throw finish", {}, summary({sub_json("throw", std::nullopt)}, std::nullopt),
                             {pred(K::InBin, "cup#1"), pred(K::Holding)});
    thr->initial_holding = "cup#1";
    thr->scene.find("cup#1")->position = cfg.workcell.home.position;

    add("pick-cup", "pick,cup", "pick cup this finish", {"cup#1"}, summary({sub_json("pick", "cup#1")}, std::nullopt),
        {pred(K::Holding, "cup#1")});

    add("push-plate-near", "push,plate,near", "push plate this near finish", {"plate#1"},
        summary({sub_json("push", "plate#1", near)}, near),
        {pred(K::Displaced, "plate#1", {}, "near"), pred(K::Holding)});

    add("pick-cup-put-bowl", "pick,cup,put,bowl", "pick cup this put bowl that finish", {"cup#1", "bowl#1"},
        summary({sub_json("pick", "cup#1"), sub_json("put", "bowl#1")}, std::nullopt),
        {pred(K::ObjectOver, "cup#1", "bowl#1"), pred(K::Holding)});

    add("pick-cup-pour-cup", "pick,cup,pour,cup", "pick cup this pour cup that finish", {"cup#1", "cup#2"},
        summary({sub_json("pick", "cup#1"), sub_json("pour", "cup#2")}, std::nullopt),
        {pred(K::Event, std::nullopt, {}, "poured cup#1 into cup#2"), pred(K::Holding, "cup#1")});

    add("pour-90", "pick,cup,pour,bowl,90", "pick cup this pour bowl that ninety degrees finish", {"cup#1", "bowl#1"},
        summary({sub_json("pick", "cup#1"), sub_json("pour", "bowl#1", ninety)}, ninety),
        {pred(K::Event, std::nullopt, {}, "poured cup#1 into bowl#1"), pred(K::Holding, "cup#1")});

    EpisodeScript* fault = add("pronoun-before-class", "fault", "pick this cup finish", {"cup#1"}, nullptr, {});
    fault->expected.intention.reset();
    fault->expected.rejection = ErrorCode::PronounBeforeClass;
    return out;
}

Scene random_scene(std::mt19937_64& rng, int min_objects, int max_objects) {
    std::uniform_int_distribution<int> count(min_objects, max_objects);
    std::uniform_int_distribution<std::size_t> shape(0, std::size(kShapes) - 1);
    std::uniform_real_distribution<double> ux(-0.4, 0.4), uy(0.15, 0.65);
    for (;;) {
        Scene scene;
        const int n = count(rng);
        std::set<std::string> classes;
        int attempts = 0;
        while (static_cast<int>(scene.objects.size()) < n && attempts++ < 500) {
            const Shape& sh = kShapes[shape(rng)];
            const Vec3 p(ux(rng), uy(rng), sh.h / 2);
            bool clear = true;
            for (const auto& o : scene.objects) {
                const double gap = 0.5 * (o.width_m + sh.w) + 0.1;
                if (std::max(std::abs(o.position.x() - p.x()), std::abs(o.position.y() - p.y())) < gap) clear = false;
            }
            if (!clear) continue;
            scene.objects.push_back(ObjectRecord{"", sh.cls, round_vec(p), sh.h, sh.w});
            classes.insert(sh.cls);
        }
        if (static_cast<int>(scene.objects.size()) == n && classes.size() >= 2) {
            renumber(scene);
            return scene;
        }
    }
}

EpisodeScript random_script(std::mt19937_64& rng, const Config& cfg, double noise_deg, int index) {
    EpisodeScript s;
    s.scene = random_scene(rng, 2, 6);
    s.noise_deg = noise_deg;
    s.seed = rng();
    std::uniform_real_distribution<double> len(0.25, 0.4), gap(0.1, 0.3), lead(0.35, 0.8), tail(0.05, 0.6);
    using K = Predicate::Kind;

    std::vector<std::string> ids;
    for (const auto& o : s.scene.objects) ids.push_back(o.id);
    const std::string x = pick_one(ids, rng);
    std::string y = pick_one(ids, rng);
    while (y == x) y = pick_one(ids, rng);
    const auto cls = [&](const std::string& id) { return s.scene.find(id)->class_name; };

    std::vector<std::string> text;
    std::vector<std::string> targets;
    std::vector<json> subs;
    std::optional<Metric> omega;
    const int kind = std::uniform_int_distribution<int>(0, 6)(rng);
    switch (kind) {
        case 0:
            s.task = "home";
            text = {"home"};
            subs = {sub_json("home", std::nullopt)};
            s.initial_position = round_vec(Vec3(std::uniform_real_distribution<double>(-0.3, 0.3)(rng),
                                                std::uniform_real_distribution<double>(0.2, 0.6)(rng), 0.45));
            s.expected.predicates = {pred(K::AtHome)};
            break;
        case 1:
            s.task = "throw";
            text = {"throw"};
            subs = {sub_json("throw", std::nullopt)};
            s.initial_holding = x;
            s.scene.find(x)->position = cfg.workcell.home.position;
            s.expected.predicates = {pred(K::InBin, x), pred(K::Holding)};
            break;
        case 2:
            s.task = "pick," + cls(x);
            text = {"pick", cls(x), "this"};
            targets = {x};
            subs = {sub_json("pick", x)};
            s.expected.predicates = {pred(K::Holding, x)};
            break;
        case 3: {
            const std::string q = std::bernoulli_distribution(0.5)(rng) ? "near" : "far";
            const Metric m{UnitKind::Spatial, 0.0, q};
            s.task = "push," + cls(x) + "," + q;
            text = {"push", cls(x), "that", q};
            targets = {x};
            subs = {sub_json("push", x, m)};
            omega = m;
            s.expected.predicates = {pred(K::Displaced, x, {}, q), pred(K::Holding)};
            break;
        }
        case 4:
            s.task = "pick," + cls(x) + ",put," + cls(y);
            text = {"pick", cls(x), "this", "put", cls(y), "there"};
            targets = {x, y};
            subs = {sub_json("pick", x), sub_json("put", y)};
            s.expected.predicates = {pred(K::ObjectOver, x, y), pred(K::Holding)};
            break;
        default: {
            s.task = "pick," + cls(x) + ",pour," + cls(y);
            text = {"pick", cls(x), "this", "pour", cls(y), "that"};
            targets = {x, y};
            std::optional<Metric> m;
            if (kind == 6) {
                const int deg = 30 + 15 * std::uniform_int_distribution<int>(0, 6)(rng);
                m = Metric{UnitKind::Degrees, static_cast<double>(deg), {}};
                s.task += "," + std::to_string(deg);
                text.push_back(std::to_string(deg));
                text.push_back("degrees");
                omega = m;
            }
            subs = {sub_json("pick", x), sub_json("pour", y, m)};
            s.expected.predicates = {pred(K::Event, std::nullopt, {}, "poured " + x + " into " + y), pred(K::Holding, x)};
            break;
        }
    }
    text.push_back("finish");
    s.name = "random-" + std::to_string(index) + "-" + s.task;
    s.expected.intention = summary(subs, omega);

    double t = 0.4 + gap(rng);
    for (const auto& w : text) {
        const double l = len(rng);
        s.words.push_back(WordToken{w, round_to(t, 6), round_to(t + l, 6), 1.0});
        t += l + gap(rng);
    }

    // Point at each target around its pronoun, then drift to a distractor.
    std::size_t k = 0;
    for (const auto& w : s.words) {
        if (!cfg.lexicon.pronoun_words.count(w.text) || k >= targets.size()) continue;
        const double end = w.t_end + tail(rng);
        s.pointing.push_back({std::max(0.0, w.t_end - lead(rng)), end, targets[k++]});
        s.pointing.push_back({end + 1e-3, end + 0.8, pick_one(ids, rng)});
    }
    return s;
}

EpisodeScript clutter_script(std::mt19937_64& rng, const Config& cfg, double noise_deg, int index) {
    EpisodeScript s;
    s.scene = cfg.preset("six-cups");
    const std::string target = s.scene.objects[std::uniform_int_distribution<std::size_t>(0, 5)(rng)].id;
    s.name = "clutter-" + std::to_string(index);
    s.task = "pick,cup";
    s.words = timed_words("pick cup this finish", 0.5);
    s.pointing = point_at_pronouns(s.words, cfg.lexicon, {target}, 0.6, 0.3);
    s.noise_deg = noise_deg;
    s.seed = rng();
    s.expected.intention = summary({sub_json("pick", target)}, std::nullopt);
    s.expected.predicates = {pred(Predicate::Kind::Holding, target)};
    return s;
}

std::vector<NoisePoint> clutter_sweep(const Config& cfg, const std::vector<double>& levels, int trials,
                                      std::uint64_t seed) {
    std::vector<NoisePoint> out;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        std::mt19937_64 rng(seed + i);
        NoisePoint p{levels[i], 0, 0};
        for (int k = 0; k < trials; ++k) {
            const EpisodeScript s = clutter_script(rng, cfg, levels[i], k);
            const Encoding enc = encode(synthesize(s, cfg.camera), cfg);
            ++p.trials;
            const std::string want = (*s.expected.intention)["subcommands"][0]["object"].get<std::string>();
            if (enc.intention && enc.bindings.size() == 1 && enc.bindings[0] == want) ++p.correct;
        }
        out.push_back(p);
    }
    return out;
}

TemporalCheck check_temporal_invariant(const Episode& episode, const Config& cfg, std::mt19937_64& rng) {
    TemporalCheck out;
    const Encoding base = encode(episode, cfg);
    std::uniform_real_distribution<double> pix(0.0, 640.0);

    for (std::size_t k = 0; k < base.pronoun_ends.size(); ++k) {
        const double cut = base.pronoun_ends[k];
        Episode changed = episode;
        for (auto& ev : changed.events) {
            if (!(ev.t() > cut)) continue;
            if (auto* s = std::get_if<SkeletonFrame>(&ev.body)) {
                s->right_wrist = s->right_elbow + 0.28 * random_unit(rng);
            } else if (auto* r = std::get_if<DeicticRay>(&ev.body)) {
                r->r2 = r->r1 + random_unit(rng);
            } else if (auto* t = std::get_if<TouchEvent>(&ev.body)) {
                t->u = pix(rng);
                t->v = pix(rng) * 0.75;
            }
        }
        const Encoding enc = encode(changed, cfg);
        ++out.perturbations;
        const std::size_t n = k + 1;
        if (enc.bindings.size() < n || !std::equal(base.bindings.begin(), base.bindings.begin() + n, enc.bindings.begin())) {
            out.ok = false;
            out.detail = episode.name + ": binding of pronoun " + std::to_string(k) + " changed";
            return out;
        }
        if (k + 1 == base.pronoun_ends.size() && base.intention) {
            if (!enc.intention || !(*enc.intention == *base.intention)) {
                out.ok = false;
                out.detail = episode.name + ": emitted intention changed after the last pronoun";
                return out;
            }
        }
    }
    return out;
}

}  // namespace deixis
