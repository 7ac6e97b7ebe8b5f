#pragma once

// Window extraction and batch assembly. Sessions are stored once in a
// compact normalized form; face-only / skeleton-only variants are projections
// of the same store, so the ablation study never duplicates data.

#include <cstdint>
#include <string>
#include <vector>

#include "dsm/graph.hpp"
#include "dsm/keypoint_io.hpp"
#include "dsm/parallel.hpp"
#include "dsm/tensor.hpp"

namespace dsm {

/// Flat frame store for a fully imputed, normalized session.
struct NormalizedSession {
    std::string subject_id;
    StateLabel state = StateLabel::Alert;
    Lighting lighting = Lighting::Light;
    int node_count = 0;
    std::int64_t frame_count = 0;
    std::vector<float> coords;        // [F, node_count, 2]
    std::vector<std::uint64_t> cold;  // per frame, bit v set when node v was cold-imputed

    float x(std::int64_t f, int v) const {
        return coords[static_cast<std::size_t>((f * node_count + v) * 2)];
    }
    float y(std::int64_t f, int v) const {
        return coords[static_cast<std::size_t>((f * node_count + v) * 2 + 1)];
    }
    bool any_cold(std::int64_t f, std::uint64_t node_mask) const {
        return (cold[static_cast<std::size_t>(f)] & node_mask) != 0;
    }
};

inline NormalizedSession compact_session(const SessionRecording& s) {
    DSM_CHECK(s.imputed && s.normalized, "compact_session: session must be imputed + normalized");
    DSM_CHECK(s.keypoint_count() <= 64, "compact_session: too many nodes for the cold bitmask");
    NormalizedSession ns;
    ns.subject_id = s.subject_id;
    ns.state = s.state_label;
    ns.lighting = s.lighting_label;
    ns.node_count = s.keypoint_count();
    ns.frame_count = static_cast<std::int64_t>(s.frames.size());
    ns.coords.resize(static_cast<std::size_t>(ns.frame_count * ns.node_count * 2));
    ns.cold.assign(static_cast<std::size_t>(ns.frame_count), 0);
    for (std::int64_t f = 0; f < ns.frame_count; ++f) {
        const auto& fr = s.frames[static_cast<std::size_t>(f)];
        for (int v = 0; v < ns.node_count; ++v) {
            const Keypoint& kp = fr.keypoints[static_cast<std::size_t>(v)];
            ns.coords[static_cast<std::size_t>((f * ns.node_count + v) * 2)] = kp.x;
            ns.coords[static_cast<std::size_t>((f * ns.node_count + v) * 2 + 1)] = kp.y;
            if (kp.imputed_cold) ns.cold[static_cast<std::size_t>(f)] |= 1ULL << v;
        }
    }
    return ns;
}

/// One classification window: lookback frames of node features plus the
/// matching bone features, with its label and provenance.
struct SampleWindow {
    Tensor nodes;  // [2, T, V]
    Tensor edges;  // [2, T, E]
    int label = 0;
    std::string subject_id;
    Lighting lighting = Lighting::Light;
    int session_index = 0;
    std::int64_t start_frame = 0;
    bool has_cold = false;
};

struct WindowRef {
    std::int32_t session = 0;
    std::int32_t start = 0;
};

inline std::int64_t window_count(std::int64_t frames, int lookback, int stride) {
    if (frames < lookback) return 0;
    return (frames - lookback) / stride + 1;
}

/// Bitmask over canonical node ids kept by a projection.
inline std::uint64_t projection_mask(const GraphSpec& spec) {
    std::uint64_t m = 0;
    for (int id : spec.canonical_ids) m |= 1ULL << id;
    return m;
}

/// Lists window references for a set of sessions. Windows touching a
/// cold-imputed frame of a projected node are skipped when `drop_cold`.
inline std::vector<WindowRef> list_windows(const std::vector<NormalizedSession>& sessions,
                                           const GraphSpec& spec, int lookback, int stride,
                                           bool drop_cold) {
    const std::uint64_t mask = projection_mask(spec);
    std::vector<WindowRef> refs;
    for (std::size_t si = 0; si < sessions.size(); ++si) {
        const auto& s = sessions[si];
        const std::int64_t n = window_count(s.frame_count, lookback, stride);
        for (std::int64_t w = 0; w < n; ++w) {
            const std::int64_t start = w * stride;
            if (drop_cold) {
                bool cold = false;
                for (std::int64_t f = start; f < start + lookback && !cold; ++f)
                    cold = s.any_cold(f, mask);
                if (cold) continue;
            }
            refs.push_back({static_cast<std::int32_t>(si), static_cast<std::int32_t>(start)});
        }
    }
    return refs;
}

namespace detail {
inline void fill_window(const NormalizedSession& s, const GraphSpec& spec, std::int64_t start,
                        int lookback, double* nodes, double* edges) {
    const int v = spec.node_count;
    const int e = spec.edge_count();
    // nodes laid out [2, T, V]
    for (int t = 0; t < lookback; ++t) {
        const std::int64_t f = start + t;
        for (int i = 0; i < v; ++i) {
            const int cid = spec.canonical_ids[static_cast<std::size_t>(i)];
            nodes[0 * lookback * v + t * v + i] = s.x(f, cid);
            nodes[1 * lookback * v + t * v + i] = s.y(f, cid);
        }
        for (int j = 0; j < e; ++j) {
            const auto [src, tgt] = spec.edges[static_cast<std::size_t>(j)];
            edges[0 * lookback * e + t * e + j] =
                nodes[0 * lookback * v + t * v + tgt] - nodes[0 * lookback * v + t * v + src];
            edges[1 * lookback * e + t * e + j] =
                nodes[1 * lookback * v + t * v + tgt] - nodes[1 * lookback * v + t * v + src];
        }
    }
}
}  // namespace detail

/// Materialized sliding windows for one session (test- and tool-friendly
/// path; the training loop assembles batches directly from references).
inline std::vector<SampleWindow> extract_windows(const NormalizedSession& s,
                                                 const GraphSpec& spec, int lookback = 15,
                                                 int stride = 1) {
    DSM_CHECK(lookback >= 1 && stride >= 1, "extract_windows: bad lookback/stride");
    std::vector<SampleWindow> out;
    const std::int64_t n = window_count(s.frame_count, lookback, stride);
    const std::uint64_t mask = projection_mask(spec);
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t w = 0; w < n; ++w) {
        SampleWindow sw;
        sw.nodes.resize({2, lookback, spec.node_count});
        sw.edges.resize({2, lookback, spec.edge_count()});
        const std::int64_t start = w * stride;
        detail::fill_window(s, spec, start, lookback, sw.nodes.ptr(), sw.edges.ptr());
        sw.label = static_cast<int>(s.state);
        sw.subject_id = s.subject_id;
        sw.lighting = s.lighting;
        sw.start_frame = start;
        for (std::int64_t f = start; f < start + lookback && !sw.has_cold; ++f)
            sw.has_cold = s.any_cold(f, mask);
        out.push_back(std::move(sw));
    }
    return out;
}

/// Assembles a batch [N,2,T,V] / [N,2,T,E] from window references.
inline void assemble_batch(const std::vector<NormalizedSession>& sessions, const GraphSpec& spec,
                           const WindowRef* refs, std::int64_t n, int lookback, Tensor& nodes,
                           Tensor& edges, ParallelPool* pool = nullptr) {
    const std::int64_t v = spec.node_count, e = spec.edge_count();
    nodes.resize({n, 2, lookback, v});
    edges.resize({n, 2, lookback, e});
    const std::int64_t nstride = 2 * lookback * v, estride = 2 * lookback * e;
    nn::serial_or_pool(pool, n, [&](int, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            const WindowRef& r = refs[i];
            detail::fill_window(sessions[static_cast<std::size_t>(r.session)], spec, r.start,
                                lookback, nodes.ptr() + i * nstride, edges.ptr() + i * estride);
        }
    });
}

/// Window label under a 2- or 3-class scheme. For the binary model only
/// alert / not-alert sessions are admitted.
inline int window_label(StateLabel s, int num_classes) {
    const int v = static_cast<int>(s);
    DSM_CHECK(v < num_classes, "window_label: state outside the class scheme");
    return v;
}

}  // namespace dsm
