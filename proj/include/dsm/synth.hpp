#pragma once

// Synthetic keypoint session generator. Reproduces the acquisition protocol
// of the target deployment: 20 subjects (18 train / 2 test), 9 sessions each
// (3 states x 3 lighting conditions), 2.5 minutes at 30 fps, 640x480.
//
// Lighting is modelled at the keypoint level as observation noise plus
// missing detections; the sudden condition alternates between the light and
// dark regimes every 15 seconds.
//
// Two designated nodes support the explainability oracles:
//   * node 10 (right wrist) carries a 6 Hz oscillation whenever the state is
//     pathological (reduced to a residual amplitude once a slump completes):
//     the trajectory statistic that uniquely identifies that state;
//   * node 21 (oval_forehead_left) is rigidly fixed relative to the nose in
//     every state, so it carries no class information at all.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dsm/dataset.hpp"
#include "dsm/graph.hpp"
#include "dsm/keypoint_io.hpp"
#include "dsm/rng.hpp"

namespace dsm {

struct GeneratorConfig {
    int n_train_subjects = 18;
    int n_test_subjects = 2;
    int session_frames = 4500;  // 150 s at 30 fps
    double fps = 30.0;
    int image_width = 640;
    int image_height = 480;

    double noise_sigma_light = 1.0;  // px
    double noise_sigma_dark = 3.0;
    double missing_prob_light = 0.01;
    double missing_prob_dark = 0.08;
    int sudden_period_frames = 450;  // 15 s

    double subject_scale_min = 0.86;
    double subject_scale_max = 1.14;
    double subject_offset_px = 25.0;

    // pathological behaviour knobs
    double signal_freq_hz = 6.0;
    double signal_amp_px = 8.0;       // planted wrist signal while the event is active
    double signal_residual_px = 3.5;  // what remains after a slump settles
    double tremor_amp_arm_px = 5.0;
    double tremor_amp_shoulder_px = 1.8;
    double tremor_amp_face_px = 1.2;

    std::uint64_t seed = 0;

    int total_subjects() const { return n_train_subjects + n_test_subjects; }
};

inline constexpr int kSignalNode = 10;   // right wrist
inline constexpr int kNullNode = 21;     // oval_forehead_left, rigid w.r.t. nose

namespace synth_detail {

/// Neutral pose offsets relative to the nose, pixels, y down.
inline const std::array<std::pair<double, double>, kWholeBodyNodes>& base_offsets() {
    static const std::array<std::pair<double, double>, kWholeBodyNodes> k = {{
        {0, 0},       // nose
        {-28, -10},   // left eye
        {28, -10},    // right eye
        {-52, -2},    // left ear
        {52, -2},     // right ear
        {-85, 112},   // left shoulder
        {85, 112},    // right shoulder
        {-110, 182},  // left elbow
        {110, 182},   // right elbow
        {-120, 238},  // left wrist
        {120, 238},   // right wrist
        // face oval
        {-55, -40}, {-60, 5}, {-48, 45}, {-20, 72}, {0, 78}, {20, 72}, {48, 45}, {60, 5},
        {55, -40}, {34, -62}, {-34, -62},
        // brows
        {-42, -30}, {-32, -36}, {-22, -38}, {-12, -34},
        {42, -30}, {32, -36}, {22, -38}, {12, -34},
        // eyelids (upper/lower pairs carry the aperture)
        {-36, -12}, {-27, -17}, {-27, -7}, {-18, -12},
        {36, -12}, {27, -17}, {27, -7}, {18, -12},
        // mouth ring
        {-22, 38}, {-11, 33}, {0, 31}, {11, 33}, {22, 38}, {11, 45}, {0, 47}, {-11, 45},
    }};
    return k;
}

inline bool is_face_local(int id) { return id >= 11 || (id >= 1 && id <= 4); }
inline bool is_left_eye_lid(int id) { return id == 31 || id == 32; }
inline bool is_right_eye_lid(int id) { return id == 35 || id == 36; }
inline bool is_mouth(int id) { return id >= 38; }

struct SubjectParams {
    double scale = 1.0;
    double ox = 0.0, oy = 0.0;  // seat offset
    std::array<std::pair<double, double>, kWholeBodyNodes> jitter{};  // anthropometric detail
};

inline SubjectParams make_subject(std::uint64_t dataset_seed, int subject_index) {
    Rng rng(derive_seed(dataset_seed, "subject", static_cast<std::uint64_t>(subject_index)));
    SubjectParams p;
    p.scale = rng.uniform(0.86, 1.14);
    p.ox = rng.uniform(-25.0, 25.0);
    p.oy = rng.uniform(-25.0, 25.0);
    for (auto& j : p.jitter) {
        j.first = rng.uniform(-2.0, 2.0);
        j.second = rng.uniform(-2.0, 2.0);
    }
    return p;
}

enum class PathologicalMode { Tremor = 0, Slump = 1, Tilt = 2 };

/// Per-session behaviour state advanced one frame at a time.
struct BehaviorSim {
    StateLabel state;
    SubjectParams subj;
    Rng rng;
    const GeneratorConfig* cfg;

    // head pose
    double yaw_amp = 0, yaw_period = 300, yaw_phase = 0;
    double pitch_amp = 0, pitch_period = 400, pitch_phase = 0;
    double pitch_target = 0, pitch_tau = 250;

    // blinks / eyes
    double aperture_base = 1.0;
    std::int64_t next_blink = 1e9, blink_end = -1;

    // arm reach events (alert)
    struct Arm {
        std::int64_t event_start = -1, event_end = -1;
        double dx = 0, dy = 0;
        std::int64_t next_event = 0;
    };
    Arm left_arm, right_arm;

    // pathological
    PathologicalMode mode = PathologicalMode::Tremor;
    std::int64_t slump_start = 0, slump_dur = 45;
    double tremor_freq = 6.0, signal_phase = 0;
    std::array<double, kWholeBodyNodes> tremor_phase{};

    // slow wander per node
    std::array<std::pair<double, double>, kWholeBodyNodes> ou{};
    double ou_sigma = 0.1, ou_decay = 0.97, ou_clamp = 2.5;

    BehaviorSim(StateLabel s, const SubjectParams& sp, const GeneratorConfig& c,
                std::uint64_t behaviour_seed)
        : state(s), subj(sp), rng(behaviour_seed), cfg(&c) {
        for (auto& ph : tremor_phase) ph = rng.uniform(0.0, 6.2831853);
        signal_phase = rng.uniform(0.0, 6.2831853);
        switch (state) {
            case StateLabel::Alert:
                yaw_amp = rng.uniform(0.35, 0.6);
                yaw_period = rng.uniform(240.0, 420.0);
                yaw_phase = rng.uniform(0.0, 6.2831853);
                pitch_amp = rng.uniform(0.04, 0.08);
                pitch_period = rng.uniform(300.0, 600.0);
                pitch_phase = rng.uniform(0.0, 6.2831853);
                next_blink = static_cast<std::int64_t>(rng.uniform(20.0, 120.0));
                left_arm.next_event = static_cast<std::int64_t>(rng.uniform(120.0, 600.0));
                right_arm.next_event = static_cast<std::int64_t>(rng.uniform(120.0, 600.0));
                ou_sigma = 0.35;
                ou_clamp = 6.0;
                break;
            case StateLabel::NotAlert:
                pitch_target = rng.uniform(0.3, 0.5);
                pitch_tau = rng.uniform(150.0, 400.0);
                yaw_amp = 0.04;
                yaw_period = rng.uniform(500.0, 900.0);
                yaw_phase = rng.uniform(0.0, 6.2831853);
                ou_sigma = 0.1;
                ou_clamp = 2.5;
                break;
            case StateLabel::Pathological: {
                const double u = rng.uniform();
                mode = u < 1.0 / 3.0   ? PathologicalMode::Tremor
                       : u < 2.0 / 3.0 ? PathologicalMode::Slump
                                       : PathologicalMode::Tilt;
                tremor_freq = rng.uniform(5.0, 7.5);
                slump_start = static_cast<std::int64_t>(rng.uniform(60.0, 240.0));
                slump_dur = static_cast<std::int64_t>(rng.uniform(30.0, 60.0));
                ou_sigma = mode == PathologicalMode::Tremor ? 0.2 : 0.12;
                ou_clamp = 3.0;
                break;
            }
        }
    }

    static double smoothstep(double p) {
        p = std::min(1.0, std::max(0.0, p));
        return p * p * (3.0 - 2.0 * p);
    }

    /// True (noise-free) keypoint positions for frame t, written to pos[46].
    void frame(std::int64_t t, std::array<std::pair<double, double>, kWholeBodyNodes>& pos) {
        const double fps = cfg->fps;
        double yaw = yaw_amp * std::sin(6.2831853 * static_cast<double>(t) / yaw_period + yaw_phase);
        double pitch = 0.0;
        double aperture = 1.0;
        double mouth = 1.0;
        double body_drop = 0.0;
        double signal_amp = 0.0;
        double tremor_arm = 0.0, tremor_shoulder = 0.0, tremor_face = 0.0;
        double arm_rest_dx = 0.0, arm_rest_dy = 0.0;

        switch (state) {
            case StateLabel::Alert: {
                pitch = pitch_amp *
                        std::sin(6.2831853 * static_cast<double>(t) / pitch_period + pitch_phase);
                if (t >= next_blink && blink_end < 0) {
                    blink_end = t + static_cast<std::int64_t>(rng.uniform(3.0, 8.0));
                    next_blink = blink_end + static_cast<std::int64_t>(rng.uniform(45.0, 150.0));
                }
                if (blink_end >= 0 && t >= blink_end) blink_end = -1;
                aperture = blink_end >= 0 ? 0.08 : 1.0 + 0.03 * rng.normal();
                advance_arm(left_arm, t);
                advance_arm(right_arm, t);
                break;
            }
            case StateLabel::NotAlert: {
                pitch = pitch_target * (1.0 - std::exp(-static_cast<double>(t) / pitch_tau)) +
                        0.03 * std::sin(6.2831853 * static_cast<double>(t) / 420.0 + yaw_phase);
                aperture = 0.05;
                arm_rest_dx = 0.0;
                arm_rest_dy = 28.0 * smoothstep(static_cast<double>(t) / 100.0);
                break;
            }
            case StateLabel::Pathological: {
                switch (mode) {
                    case PathologicalMode::Tremor:
                        pitch = 0.05;
                        aperture = 0.75;
                        signal_amp = cfg->signal_amp_px;
                        tremor_arm = cfg->tremor_amp_arm_px;
                        tremor_shoulder = cfg->tremor_amp_shoulder_px;
                        tremor_face = cfg->tremor_amp_face_px;
                        break;
                    case PathologicalMode::Slump: {
                        if (t < slump_start) {  // malaise before the event
                            pitch = 0.12;
                            aperture = 0.6;
                            signal_amp = cfg->signal_amp_px;
                        } else if (t < slump_start + slump_dur) {
                            const double p = smoothstep(static_cast<double>(t - slump_start) /
                                                        static_cast<double>(slump_dur));
                            pitch = 0.12 + p * (0.5 - 0.12);
                            aperture = 0.6 + p * (0.05 - 0.6);
                            body_drop = 28.0 * p;
                            signal_amp = cfg->signal_amp_px;
                            arm_rest_dy = 20.0 * p;
                        } else {  // settled
                            pitch = 0.5;
                            aperture = 0.05;
                            body_drop = 28.0;
                            signal_amp = cfg->signal_residual_px;
                            arm_rest_dx = 5.0;
                            arm_rest_dy = 38.0;
                        }
                        break;
                    }
                    case PathologicalMode::Tilt: {
                        const double p = smoothstep(static_cast<double>(t) / 60.0);
                        pitch = -0.28 * p + 0.02 * std::sin(6.2831853 * static_cast<double>(t) / 200.0);
                        aperture = 0.5;
                        mouth = 1.0 + 0.5 * p;
                        signal_amp = cfg->signal_amp_px;
                        break;
                    }
                }
                break;
            }
        }

        // slow per-node wander
        for (int v = 0; v < kWholeBodyNodes; ++v) {
            auto& o = ou[static_cast<std::size_t>(v)];
            const double sigma = is_face_local(v) ? ou_sigma * 0.4 : ou_sigma;
            o.first = std::clamp(o.first * ou_decay + sigma * rng.normal(), -ou_clamp, ou_clamp);
            o.second = std::clamp(o.second * ou_decay + sigma * rng.normal(), -ou_clamp, ou_clamp);
        }

        const auto& base = base_offsets();
        const double s = subj.scale;
        const double anchor_x = 320.0 + subj.ox;
        const double anchor_y = 190.0 + subj.oy;
        const double nose_x = anchor_x + 10.0 * std::sin(yaw);
        const double nose_y = anchor_y + 55.0 * std::sin(pitch) + body_drop;
        const double cy = std::cos(yaw), cp = std::cos(pitch), sp = std::sin(pitch);

        for (int v = 0; v < kWholeBodyNodes; ++v) {
            const auto& b = base[static_cast<std::size_t>(v)];
            const auto& j = subj.jitter[static_cast<std::size_t>(v)];
            double ox = (b.first + j.first) * s;
            double oy = (b.second + j.second) * s;
            double x, y;
            if (v == kNullNode) {
                // rigid reference point: follows the nose exactly
                pos[static_cast<std::size_t>(v)] = {nose_x + ox, nose_y + oy};
                continue;
            }
            if (is_face_local(v) || v == 0) {
                // eye aperture / mouth opening act on the lid and lip offsets
                if (is_left_eye_lid(v) || is_right_eye_lid(v)) {
                    const double center = -12.0 * s;
                    oy = center + (oy - center) * aperture;
                }
                if (is_mouth(v) && v != 38 && v != 42) {
                    const double center = 39.0 * s;
                    oy = center + (oy - center) * mouth;
                }
                x = nose_x + ox * cy + 12.0 * std::sin(yaw);
                y = nose_y + oy * cp + 22.0 * sp;
                if (tremor_face > 0 && v != 0)
                    x += tremor_face * std::sin(6.2831853 * tremor_freq * static_cast<double>(t) / fps +
                                                tremor_phase[static_cast<std::size_t>(v)]);
            } else {
                // body nodes hang off the seat anchor, not the head
                x = anchor_x + ox;
                y = anchor_y + oy + body_drop;
                if (v >= 7) {  // elbows and wrists
                    const Arm& arm = (v % 2 == 1) ? left_arm : right_arm;
                    const double reach = arm_profile(arm, t);
                    const double f = (v <= 8) ? 0.45 : 1.0;
                    x += f * reach * arm.dx + arm_rest_dx * (v % 2 == 1 ? -1.0 : 1.0);
                    y += f * reach * arm.dy + arm_rest_dy;
                }
                double amp = 0.0;
                if (v == 5 || v == 6) amp = tremor_shoulder;
                else if (v >= 7) amp = tremor_arm;
                if (amp > 0)
                    y += amp * std::sin(6.2831853 * tremor_freq * static_cast<double>(t) / fps +
                                        tremor_phase[static_cast<std::size_t>(v)]);
            }
            x += ou[static_cast<std::size_t>(v)].first;
            y += ou[static_cast<std::size_t>(v)].second;
            if (v == kSignalNode && signal_amp > 0) {
                const double ph = 6.2831853 * cfg->signal_freq_hz * static_cast<double>(t) / fps +
                                  signal_phase;
                x += signal_amp * std::sin(ph);
                y += 0.8 * signal_amp * std::sin(ph + 1.3);
            }
            pos[static_cast<std::size_t>(v)] = {x, y};
        }
    }

  private:
    void advance_arm(Arm& arm, std::int64_t t) {
        if (arm.event_start < 0 && t >= arm.next_event) {
            arm.event_start = t;
            arm.event_end = t + 65;  // 25 out, 15 hold, 25 back
            arm.dx = rng.uniform(-70.0, 70.0);
            arm.dy = rng.uniform(-80.0, -10.0);
            arm.next_event = arm.event_end + static_cast<std::int64_t>(rng.uniform(180.0, 720.0));
        }
        if (arm.event_start >= 0 && t >= arm.event_end) arm.event_start = -1;
    }

    static double arm_profile(const Arm& arm, std::int64_t t) {
        if (arm.event_start < 0 || t < arm.event_start || t >= arm.event_end) return 0.0;
        const std::int64_t rel = t - arm.event_start;
        if (rel < 25) return smoothstep(static_cast<double>(rel) / 25.0);
        if (rel < 40) return 1.0;
        return smoothstep(static_cast<double>(65 - rel) / 25.0);
    }
};

}  // namespace synth_detail

/// Observation regime (noise sigma, missing probability) for a frame.
inline std::pair<double, double> lighting_regime(const GeneratorConfig& cfg, Lighting lighting,
                                                 std::int64_t frame) {
    switch (lighting) {
        case Lighting::Light: return {cfg.noise_sigma_light, cfg.missing_prob_light};
        case Lighting::Dark: return {cfg.noise_sigma_dark, cfg.missing_prob_dark};
        case Lighting::SuddenLightDark: {
            const bool lit = (frame / cfg.sudden_period_frames) % 2 == 0;
            return lit ? std::pair<double, double>{cfg.noise_sigma_light, cfg.missing_prob_light}
                       : std::pair<double, double>{cfg.noise_sigma_dark, cfg.missing_prob_dark};
        }
    }
    return {cfg.noise_sigma_light, cfg.missing_prob_light};
}

/// Raw (pixel-space) session with missing keypoints marked, frames at 30 fps.
inline SessionRecording generate_session(const GeneratorConfig& cfg, int subject_index,
                                         StateLabel state, Lighting lighting) {
    char sid[8];
    std::snprintf(sid, sizeof sid, "s%02d", subject_index);
    const int session_ordinal = static_cast<int>(state) * 3 + static_cast<int>(lighting);
    const std::uint64_t session_seed =
        derive_seed(cfg.seed, "session",
                    static_cast<std::uint64_t>(subject_index) * 9 +
                        static_cast<std::uint64_t>(session_ordinal));

    SessionRecording s;
    s.subject_id = sid;
    s.state_label = state;
    s.lighting_label = lighting;
    s.config = GraphConfig::WholeBody;
    s.image_width = cfg.image_width;
    s.image_height = cfg.image_height;
    s.fps = cfg.fps;

    synth_detail::SubjectParams subj = synth_detail::make_subject(cfg.seed, subject_index);
    synth_detail::BehaviorSim sim(state, subj, cfg, derive_seed(session_seed, "behaviour"));
    Rng obs(derive_seed(session_seed, "observation"));

    std::array<std::pair<double, double>, kWholeBodyNodes> pos;
    s.frames.resize(static_cast<std::size_t>(cfg.session_frames));
    for (std::int64_t t = 0; t < cfg.session_frames; ++t) {
        sim.frame(t, pos);
        const auto [sigma, p_miss] = lighting_regime(cfg, lighting, t);
        KeypointFrame& frame = s.frames[static_cast<std::size_t>(t)];
        frame.frame_idx = t;
        frame.timestamp_ms = 1000.0 * static_cast<double>(t) / cfg.fps;
        frame.keypoints.resize(kWholeBodyNodes);
        for (int v = 0; v < kWholeBodyNodes; ++v) {
            Keypoint& kp = frame.keypoints[static_cast<std::size_t>(v)];
            const bool miss = obs.bernoulli(p_miss);
            const double nx = obs.normal(0.0, sigma);
            const double ny = obs.normal(0.0, sigma);
            if (miss) {
                kp.x = 0.0f;
                kp.y = 0.0f;
                kp.confidence = static_cast<float>(obs.uniform(0.0, 0.25));
                kp.present = false;
            } else {
                const auto& p = pos[static_cast<std::size_t>(v)];
                kp.x = static_cast<float>(std::clamp(p.first + nx, 1.0,
                                                     static_cast<double>(cfg.image_width - 2)));
                kp.y = static_cast<float>(std::clamp(p.second + ny, 1.0,
                                                     static_cast<double>(cfg.image_height - 2)));
                kp.confidence = static_cast<float>(obs.uniform(0.55, 0.99));
                kp.present = true;
            }
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Dataset emission
// ---------------------------------------------------------------------------

struct DatasetManifestEntry {
    std::string file;
    std::string subject_id;
    StateLabel state;
    Lighting lighting;
    bool train_split = true;
};

/// Writes total_subjects x 9 session files plus manifest.json to out_dir.
inline std::vector<DatasetManifestEntry> generate_dataset(const GeneratorConfig& cfg,
                                                          const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<DatasetManifestEntry> manifest;
    for (int subj = 0; subj < cfg.total_subjects(); ++subj) {
        for (int st = 0; st < 3; ++st) {
            for (int li = 0; li < 3; ++li) {
                const auto state = static_cast<StateLabel>(st);
                const auto lighting = static_cast<Lighting>(li);
                SessionRecording s = generate_session(cfg, subj, state, lighting);
                char name[96];
                std::snprintf(name, sizeof name, "%s_%s_%s.jsonl", s.subject_id.c_str(),
                              to_string(state), to_string(lighting));
                const std::string path = (fs::path(out_dir) / name).string();
                std::ofstream out(path);
                if (!out) throw std::runtime_error("cannot write session file: " + path);
                write_session(out, s);
                manifest.push_back({name, s.subject_id, state, lighting,
                                    subj < cfg.n_train_subjects});
            }
        }
    }
    std::ofstream mf(fs::path(out_dir) / "manifest.json");
    if (!mf) throw std::runtime_error("cannot write manifest.json");
    mf << "{\"seed\":" << cfg.seed << ",\"sessions\":[";
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto& e = manifest[i];
        mf << (i ? "," : "") << "{\"file\":\"" << e.file << "\",\"subject_id\":\"" << e.subject_id
           << "\",\"state\":\"" << to_string(e.state) << "\",\"lighting\":\""
           << to_string(e.lighting) << "\",\"split\":\"" << (e.train_split ? "train" : "test")
           << "\"}";
    }
    mf << "]}\n";
    return manifest;
}

// ---------------------------------------------------------------------------
// Reference rule-based classifier. Deliberately simple: three window
// statistics with fixed thresholds. Establishes that the generated classes
// are separable before any network training, and serves as the floor the
// network must comfortably beat.
// ---------------------------------------------------------------------------

struct RuleFeatures {
    double aperture = 0.0;  // mean eyelid gap, normalized units
    double drift = 0.0;     // mean per-node drift across the window
    double tremor = 0.0;    // second-difference power of the signal wrist
};

/// Features over a normalized whole-body window [2, T, 46].
inline RuleFeatures rule_features(const Tensor& nodes) {
    DSM_CHECK(nodes.rank() == 3 && nodes.dim(0) == 2 && nodes.dim(2) == kWholeBodyNodes,
              "rule_features: expected [2, T, 46] whole-body window");
    const std::int64_t t = nodes.dim(1), v = nodes.dim(2);
    auto at = [&](int ch, std::int64_t tt, int vv) {
        return nodes[static_cast<std::size_t>((ch * t + tt) * v + vv)];
    };
    RuleFeatures f;
    for (std::int64_t tt = 0; tt < t; ++tt)
        f.aperture += 0.5 * (std::abs(at(1, tt, 31) - at(1, tt, 32)) +
                             std::abs(at(1, tt, 35) - at(1, tt, 36)));
    f.aperture /= static_cast<double>(t);

    // drift: first third vs last third of the window, averaged over nodes
    const std::int64_t third = std::max<std::int64_t>(1, t / 3);
    for (int vv = 0; vv < v; ++vv) {
        double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
        for (std::int64_t tt = 0; tt < third; ++tt) {
            x0 += at(0, tt, vv);
            y0 += at(1, tt, vv);
            x1 += at(0, t - 1 - tt, vv);
            y1 += at(1, t - 1 - tt, vv);
        }
        const double dx = (x1 - x0) / static_cast<double>(third);
        const double dy = (y1 - y0) / static_cast<double>(third);
        f.drift += std::sqrt(dx * dx + dy * dy);
    }
    f.drift /= static_cast<double>(v);

    for (std::int64_t tt = 2; tt < t; ++tt)
        for (int ch = 0; ch < 2; ++ch) {
            const double d = at(ch, tt, kSignalNode) - 2.0 * at(ch, tt - 1, kSignalNode) +
                             at(ch, tt - 2, kSignalNode);
            f.tremor += d * d;
        }
    f.tremor /= static_cast<double>(2 * (t - 2));
    return f;
}

struct RuleThresholds {
    double tremor = 5.2e-5;   // ~12 px^2 at 480 px image height
    double drift = 2.7e-3;    // ~1.3 px
    double aperture = 1.1e-2; // ~5.3 px
};

inline int rule_classify(const RuleFeatures& f, const RuleThresholds& th = {}) {
    if (f.tremor > th.tremor) return static_cast<int>(StateLabel::Pathological);
    if (f.drift > th.drift) return static_cast<int>(StateLabel::Alert);
    if (f.aperture < th.aperture) return static_cast<int>(StateLabel::NotAlert);
    return static_cast<int>(StateLabel::Alert);
}

}  // namespace dsm
