#pragma once

#include "deixis/harness.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace deixis {

/// Where the operator points between t0 and t1.
struct PointingSegment {
    double t0 = 0.0;
    double t1 = 0.0;
    std::string target_id;
};

/// Ground truth from which an episode is rendered: the scene is forward
/// projected into one detection frame and the pointing segments become
/// 30 Hz skeleton frames.
struct EpisodeScript {
    std::string name;
    std::string task;
    Scene scene;  // ids must be <class>#<n> numbered per class in order
    std::vector<WordToken> words;
    std::vector<PointingSegment> pointing;
    std::optional<std::string> initial_holding;
    std::optional<Vec3> initial_position;
    Expectation expected;

    double duration = 0.0;    // 0: last word end + 0.5 s
    double noise_deg = 0.0;   // per-axis angular noise on every frame
    double frame_rate = 30.0;
    std::uint64_t seed = 1;
    Vec3 elbow{0.0, 1.0, 0.65};
    double forearm_m = 0.28;
    double detection_confidence = 0.95;
    double skeleton_confidence = 0.9;
};

/// Words of `text` spaced evenly from t0: each lasts `len`, with `gap`
/// between words.
std::vector<WordToken> timed_words(const std::string& text, double t0, double len = 0.3, double gap = 0.15);

/// Pixel box and depth at which `o` is seen; inverse of back_project.
Detection project(const ObjectRecord& o, const CameraModel& cam, double timestamp, double confidence = 1.0);

/// Perturbs a unit direction by independent N(0, sigma) angles about two
/// axes perpendicular to it.
Vec3 perturb_direction(const Vec3& dir, double sigma_deg, std::mt19937_64& rng);

Episode synthesize(const EpisodeScript& script, const CameraModel& cam);

/// The bundled scenarios on the two-cups-bowl-plate preset plus the
/// pronoun-before-class fault fixture (last).
std::vector<EpisodeScript> scenario_scripts(const Config& config);

/// A random tabletop scene of 2..max_objects objects with at least two
/// classes, footprints kept apart so the gripper fits between them.
Scene random_scene(std::mt19937_64& rng, int min_objects = 2, int max_objects = 6);

/// A random command on a random scene, drawn from the scenario tuples.
EpisodeScript random_script(std::mt19937_64& rng, const Config& config, double noise_deg, int index);

/// "pick cup this finish" on the six-cups preset with the intended cup drawn
/// at random.
EpisodeScript clutter_script(std::mt19937_64& rng, const Config& config, double noise_deg, int index);

struct NoisePoint {
    double noise_deg = 0.0;
    int trials = 0;
    int correct = 0;

    double rate() const { return trials ? static_cast<double>(correct) / trials : 0.0; }
};

/// Intended-cup selection rate for each noise level.
std::vector<NoisePoint> clutter_sweep(const Config& config, const std::vector<double>& noise_levels, int trials,
                                      std::uint64_t seed);

struct TemporalCheck {
    bool ok = true;
    int perturbations = 0;
    std::string detail;
};

/// Re-encodes the episode with every pointing sample strictly after each
/// pronoun's end replaced by a random one, and checks that the bindings up
/// to that pronoun and, for the last pronoun, the whole outcome are
/// unchanged.
TemporalCheck check_temporal_invariant(const Episode& episode, const Config& config, std::mt19937_64& rng);

}  // namespace deixis
