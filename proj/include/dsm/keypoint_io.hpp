#pragma once

// Keypoint stream parsing, imputation of missing detections, and
// nose-relative normalization. The on-disk format is line-delimited JSON:
// a header record followed by one record per frame (docs/file_formats.md).

#include <nlohmann/json.hpp>

#include <cstdint>
#include <deque>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dsm/common.hpp"
#include "dsm/graph.hpp"

namespace dsm {

enum class StateLabel { Alert = 0, NotAlert = 1, Pathological = 2 };
enum class Lighting { Light = 0, Dark = 1, SuddenLightDark = 2 };

inline const char* to_string(StateLabel s) {
    switch (s) {
        case StateLabel::Alert: return "alert";
        case StateLabel::NotAlert: return "not_alert";
        case StateLabel::Pathological: return "pathological";
    }
    return "?";
}

inline const char* to_string(Lighting l) {
    switch (l) {
        case Lighting::Light: return "light";
        case Lighting::Dark: return "dark";
        case Lighting::SuddenLightDark: return "sudden_light_dark";
    }
    return "?";
}

inline StateLabel state_from_string(const std::string& s) {
    if (s == "alert") return StateLabel::Alert;
    if (s == "not_alert") return StateLabel::NotAlert;
    if (s == "pathological") return StateLabel::Pathological;
    throw SchemaError("unknown state label: " + s);
}

inline Lighting lighting_from_string(const std::string& s) {
    if (s == "light") return Lighting::Light;
    if (s == "dark") return Lighting::Dark;
    if (s == "sudden_light_dark") return Lighting::SuddenLightDark;
    throw SchemaError("unknown lighting label: " + s);
}

struct Keypoint {
    float x = 0.0f;
    float y = 0.0f;
    float confidence = 0.0f;
    bool present = false;
    bool imputed_cold = false;  // imputed with no history at all (frame-0 gap)
};

struct KeypointFrame {
    std::int64_t frame_idx = 0;
    double timestamp_ms = 0.0;
    std::vector<Keypoint> keypoints;
};

struct SessionRecording {
    std::string subject_id;
    StateLabel state_label = StateLabel::Alert;
    Lighting lighting_label = Lighting::Light;
    GraphConfig config = GraphConfig::WholeBody;
    int image_width = 640;
    int image_height = 480;
    double fps = 30.0;
    std::vector<KeypointFrame> frames;
    bool imputed = false;
    bool normalized = false;

    int keypoint_count() const { return node_count(config); }
    double duration_seconds() const {
        return fps > 0 ? static_cast<double>(frames.size()) / fps : 0.0;
    }
};

struct ParseOptions {
    double confidence_threshold = 0.3;  // below this a detection counts as missing
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

inline SessionRecording parse_session(std::istream& in, const ParseOptions& opt = {}) {
    SessionRecording session;
    std::string line;
    std::int64_t line_no = 0;

    auto fail = [&](const std::string& what) -> ParseError {
        return ParseError("line " + std::to_string(line_no) + ": " + what);
    };

    if (!std::getline(in, line)) throw ParseError("empty stream: missing header record");
    line_no = 1;
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw fail(std::string("bad header: ") + e.what());
    }
    try {
        const int version = header.at("format_version").get<int>();
        if (version != 1) throw SchemaError("unsupported format_version " + std::to_string(version));
        session.subject_id = header.at("subject_id").get<std::string>();
        session.state_label = state_from_string(header.at("state_label").get<std::string>());
        session.lighting_label = lighting_from_string(header.at("lighting_label").get<std::string>());
        session.config = graph_config_from_string(header.at("config").get<std::string>());
        session.image_width = header.at("image_width").get<int>();
        session.image_height = header.at("image_height").get<int>();
        session.fps = header.at("fps").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw fail(std::string("bad header field: ") + e.what());
    }
    DSM_CHECK(session.image_width > 0 && session.image_height > 0, "non-positive image size");

    const int expect = session.keypoint_count();
    std::int64_t last_idx = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw fail(std::string("bad frame record: ") + e.what());
        }
        KeypointFrame frame;
        try {
            frame.frame_idx = rec.at("frame_idx").get<std::int64_t>();
            frame.timestamp_ms = rec.at("timestamp_ms").get<double>();
            const auto& kps = rec.at("keypoints");
            if (!kps.is_array())
                throw fail("keypoints must be an array");
            if (static_cast<int>(kps.size()) != expect)
                throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(expect) + " keypoints for config '" +
                                  to_string(session.config) + "', got " +
                                  std::to_string(kps.size()));
            frame.keypoints.resize(kps.size());
            for (std::size_t i = 0; i < kps.size(); ++i) {
                const auto& arr = kps[i];
                if (!arr.is_array() || arr.size() != 4)
                    throw fail("keypoint " + std::to_string(i) + " must be [x, y, confidence, present]");
                Keypoint& kp = frame.keypoints[i];
                kp.x = arr[0].get<float>();
                kp.y = arr[1].get<float>();
                kp.confidence = arr[2].get<float>();
                const bool present_flag =
                    arr[3].is_boolean() ? arr[3].get<bool>() : arr[3].get<int>() != 0;
                kp.present = present_flag && kp.confidence >= opt.confidence_threshold;
            }
        } catch (const nlohmann::json::exception& e) {
            throw fail(std::string("bad frame field: ") + e.what());
        }
        if (frame.frame_idx <= last_idx)
            throw SequenceError("line " + std::to_string(line_no) + ": frame_idx " +
                                std::to_string(frame.frame_idx) +
                                " not strictly increasing (previous " +
                                std::to_string(last_idx) + ")");
        last_idx = frame.frame_idx;
        session.frames.push_back(std::move(frame));
    }
    return session;
}

inline void write_session(std::ostream& out, const SessionRecording& s) {
    nlohmann::json header = {
        {"format_version", 1},
        {"subject_id", s.subject_id},
        {"state_label", to_string(s.state_label)},
        {"lighting_label", to_string(s.lighting_label)},
        {"config", to_string(s.config)},
        {"image_width", s.image_width},
        {"image_height", s.image_height},
        {"fps", s.fps},
    };
    out << header.dump() << '\n';
    // Frames are written by hand: nlohmann serialization is the bottleneck
    // for 4500-frame sessions.
    char buf[64];
    for (const auto& f : s.frames) {
        out << "{\"frame_idx\":" << f.frame_idx << ",\"timestamp_ms\":";
        std::snprintf(buf, sizeof buf, "%.3f", f.timestamp_ms);
        out << buf << ",\"keypoints\":[";
        for (std::size_t i = 0; i < f.keypoints.size(); ++i) {
            const Keypoint& kp = f.keypoints[i];
            std::snprintf(buf, sizeof buf, "[%.3f,%.3f,%.3f,%d]", kp.x, kp.y, kp.confidence,
                          kp.present ? 1 : 0);
            out << (i ? "," : "") << buf;
        }
        out << "]}\n";
    }
}

// ---------------------------------------------------------------------------
// Imputation: a missing keypoint takes the mean of its most recent
// `history_len` post-imputation values, so imputed values feed later gaps.
// A gap with no history at all becomes (0, 0) and is flagged imputed_cold.
// ---------------------------------------------------------------------------

inline SessionRecording impute_missing(SessionRecording session, int history_len = 10) {
    DSM_CHECK(history_len >= 1, "impute_missing: history_len must be >= 1");
    const int k = session.keypoint_count();
    std::vector<std::deque<std::pair<float, float>>> history(static_cast<std::size_t>(k));
    for (auto& frame : session.frames) {
        for (int i = 0; i < k; ++i) {
            Keypoint& kp = frame.keypoints[static_cast<std::size_t>(i)];
            auto& h = history[static_cast<std::size_t>(i)];
            if (!kp.present) {
                if (h.empty()) {
                    kp.x = 0.0f;
                    kp.y = 0.0f;
                    kp.imputed_cold = true;
                } else {
                    double sx = 0.0, sy = 0.0;
                    for (const auto& [hx, hy] : h) {
                        sx += hx;
                        sy += hy;
                    }
                    kp.x = static_cast<float>(sx / static_cast<double>(h.size()));
                    kp.y = static_cast<float>(sy / static_cast<double>(h.size()));
                }
                kp.present = true;
            }
            h.emplace_back(kp.x, kp.y);
            if (static_cast<int>(h.size()) > history_len) h.pop_front();
        }
    }
    session.imputed = true;
    return session;
}

// ---------------------------------------------------------------------------
// Normalization: coordinates become nose-relative and are divided by the
// image height, making streams resolution independent. Applied exactly once.
// ---------------------------------------------------------------------------

inline SessionRecording normalize_to_nose(SessionRecording session) {
    DSM_CHECK(session.imputed, "normalize_to_nose: session must be imputed first");
    DSM_CHECK(!session.normalized, "normalize_to_nose: session already normalized");
    const float h = static_cast<float>(session.image_height);
    for (auto& frame : session.frames) {
        const float nx = frame.keypoints[0].x;
        const float ny = frame.keypoints[0].y;
        for (auto& kp : frame.keypoints) {
            kp.x = (kp.x - nx) / h;
            kp.y = (kp.y - ny) / h;
        }
    }
    session.normalized = true;
    return session;
}

}  // namespace dsm
