#include "deixis/config.hpp"
#include "deixis/harness.hpp"
#include "deixis/json_io.hpp"
#include "deixis/synth.hpp"
#ifdef DEIXIS_WITH_GATEWAY
#include "deixis/gateway.hpp"
#endif

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace deixis;
namespace fs = std::filesystem;

namespace {

Config config_for(const std::string& path) { return path.empty() ? load_config() : load_config_file(path); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
    out << text;
}

int run_replay(const Config& cfg, const std::string& path, const std::string& log_path) {
    const ReplayResult r = replay(load_episode(path), cfg);
    std::cout << "episode  " << r.name << "\n";
    if (r.intention) std::cout << "intention " << intention_summary(*r.intention).dump() << "\n";
    if (r.plan) std::cout << "plan (" << r.plan->provenance.describe() << ")\n" << serialize_plan(*r.plan);
    for (const auto& v : r.verdicts) {
        std::cout << (v.hard ? "FAIL " : "note ") << v.stage << ": "
                  << (v.code ? std::string(to_string(*v.code)) + " " : std::string()) << v.message << "\n";
    }
    std::cout << "executed " << (r.executed ? "yes" : "no") << "\n";
    if (!log_path.empty()) write_text(log_path, trajectory_jsonl(r.final_state.trajectory_log));
    return r.hard_failure() ? 1 : 0;
}

int run_evaluate(const Config& cfg, const std::string& dir, const std::string& json_out, bool no_timing) {
    const MetricsReport report = evaluate(load_episodes(dir), cfg);
    std::cout << report_text(report, !no_timing);
    if (!json_out.empty()) write_text(json_out, report_json(report, !no_timing).dump(2) + "\n");
    return 0;
}

int run_generate(const Config& cfg, int n, double noise, std::uint64_t seed, const std::string& out_dir,
                 bool scenarios, bool clutter) {
    fs::create_directories(out_dir);
    std::mt19937_64 rng(seed);
    int written = 0;
    auto save = [&](const EpisodeScript& s) {
        fs::path dir = out_dir;
        if (s.expected.rejection) {
            dir /= "faults";
            fs::create_directories(dir);
        }
        save_episode(synthesize(s, cfg.camera), dir / (s.name + ".jsonl"));
        ++written;
    };
    if (scenarios) {
        for (const auto& s : scenario_scripts(cfg)) save(s);
    } else {
        for (int i = 0; i < n; ++i) save(clutter ? clutter_script(rng, cfg, noise, i) : random_script(rng, cfg, noise, i));
    }
    std::cout << "wrote " << written << " episodes to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deictic command pipeline: replay, evaluation and live sessions"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config merged over the built-in defaults")->check(CLI::ExistingFile);

    auto* replay_cmd = app.add_subcommand("replay", "Replay one episode through the full pipeline");
    std::string episode_path, log_path;
    replay_cmd->add_option("episode", episode_path, "Episode file (.jsonl)")->required()->check(CLI::ExistingFile);
    replay_cmd->add_option("--trajectory", log_path, "Write the trajectory log here");

    auto* eval_cmd = app.add_subcommand("evaluate", "Replay every episode in a directory and report metrics");
    std::string eval_dir, json_out;
    bool no_timing = false;
    eval_cmd->add_option("dir", eval_dir, "Directory of .jsonl episodes")->required()->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--json", json_out, "Write the machine-readable report here");
    eval_cmd->add_flag("--no-timing", no_timing, "Leave wall-clock fields out of the report");

    auto* gen_cmd = app.add_subcommand("generate", "Write synthetic episodes");
    int n = 10;
    double noise = 0.0;
    std::uint64_t seed = 1;
    std::string out_dir = "generated";
    bool scenarios = false, clutter = false;
    gen_cmd->add_option("--n", n, "Number of episodes")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--noise-deg", noise, "Angular pointing noise (standard deviation, degrees)")
        ->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--seed", seed, "Random seed");
    gen_cmd->add_option("--out", out_dir, "Output directory");
    gen_cmd->add_flag("--scenarios", scenarios, "Write the bundled scenario episodes instead");
    gen_cmd->add_flag("--clutter", clutter, "Six-cups pick episodes instead of mixed commands");

#ifdef DEIXIS_WITH_GATEWAY
    auto* serve_cmd = app.add_subcommand("serve", "Run the websocket session gateway");
    std::string host;
    int port = -1;
    serve_cmd->add_option("--host", host, "Listen address");
    serve_cmd->add_option("--port", port, "Listen port (0 picks a free one)")->check(CLI::Range(0, 65535));
#endif

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = config_for(config_path);
        if (*replay_cmd) return run_replay(cfg, episode_path, log_path);
        if (*eval_cmd) return run_evaluate(cfg, eval_dir, json_out, no_timing);
        if (*gen_cmd) return run_generate(cfg, n, noise, seed, out_dir, scenarios, clutter);
#ifdef DEIXIS_WITH_GATEWAY
        if (*serve_cmd) {
            if (!host.empty()) cfg.gateway.host = host;
            if (port >= 0) cfg.gateway.port = static_cast<unsigned short>(port);
            return serve(cfg);
        }
#endif
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
