#pragma once

// Directed keypoint graphs. Each configuration is a spanning arborescence
// rooted at the nose (node 0): every node is reachable from the root and has
// exactly one incoming edge, so E = V - 1.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dsm/common.hpp"
#include "dsm/tensor.hpp"

namespace dsm {

enum class GraphConfig { WholeBody, FaceOnly, SkeletonOnly };

inline const char* to_string(GraphConfig c) {
    switch (c) {
        case GraphConfig::WholeBody: return "wholebody";
        case GraphConfig::FaceOnly: return "face";
        case GraphConfig::SkeletonOnly: return "skeleton";
    }
    return "?";
}

inline GraphConfig graph_config_from_string(const std::string& s) {
    if (s == "wholebody") return GraphConfig::WholeBody;
    if (s == "face") return GraphConfig::FaceOnly;
    if (s == "skeleton") return GraphConfig::SkeletonOnly;
    throw SchemaError("unknown graph config: " + s);
}

inline constexpr int kWholeBodyNodes = 46;
inline constexpr int kSkeletonNodes = 11;
inline constexpr int kFaceNodes = 36;  // nose + 35 face landmarks

// Canonical node table. Ids 0-10 follow the YOLO upper-body convention; ids
// 11-45 are the face landmarks grouped by region (see docs/landmarks.md).
inline const std::array<const char*, kWholeBodyNodes>& node_names() {
    static const std::array<const char*, kWholeBodyNodes> names = {
        "nose",            // 0
        "left_eye",        // 1
        "right_eye",       // 2
        "left_ear",        // 3
        "right_ear",       // 4
        "left_shoulder",   // 5
        "right_shoulder",  // 6
        "left_elbow",      // 7
        "right_elbow",     // 8
        "left_wrist",      // 9
        "right_wrist",     // 10
        // face oval, left temple around the chin to the forehead
        "oval_temple_left",    // 11
        "oval_cheek_left",     // 12
        "oval_jaw_left",       // 13
        "oval_chin_left",      // 14
        "oval_chin_mid",       // 15
        "oval_chin_right",     // 16
        "oval_jaw_right",      // 17
        "oval_cheek_right",    // 18
        "oval_temple_right",   // 19
        "oval_forehead_right", // 20
        "oval_forehead_left",  // 21
        // eyebrows, outer to inner
        "brow_left_outer",   // 22
        "brow_left_mid_out", // 23
        "brow_left_mid_in",  // 24
        "brow_left_inner",   // 25
        "brow_right_outer",  // 26
        "brow_right_mid_out",// 27
        "brow_right_mid_in", // 28
        "brow_right_inner",  // 29
        // eyelid landmarks; aperture = |upper - lower|
        "eye_left_outer",  // 30
        "eye_left_upper",  // 31
        "eye_left_lower",  // 32
        "eye_left_inner",  // 33
        "eye_right_outer", // 34
        "eye_right_upper", // 35
        "eye_right_lower", // 36
        "eye_right_inner", // 37
        // mouth ring
        "mouth_corner_left",  // 38
        "mouth_upper_left",   // 39
        "mouth_upper_mid",    // 40
        "mouth_upper_right",  // 41
        "mouth_corner_right", // 42
        "mouth_lower_right",  // 43
        "mouth_lower_mid",    // 44
        "mouth_lower_left",   // 45
    };
    return names;
}

inline int node_count(GraphConfig c) {
    switch (c) {
        case GraphConfig::WholeBody: return kWholeBodyNodes;
        case GraphConfig::FaceOnly: return kFaceNodes;
        case GraphConfig::SkeletonOnly: return kSkeletonNodes;
    }
    return 0;
}

/// Canonical (whole-body) node ids kept by a configuration, in local order.
/// Local node 0 is always the nose.
inline std::vector<int> config_node_ids(GraphConfig c) {
    std::vector<int> ids;
    switch (c) {
        case GraphConfig::WholeBody:
            for (int i = 0; i < kWholeBodyNodes; ++i) ids.push_back(i);
            break;
        case GraphConfig::FaceOnly:
            ids.push_back(0);
            for (int i = 11; i < kWholeBodyNodes; ++i) ids.push_back(i);
            break;
        case GraphConfig::SkeletonOnly:
            for (int i = 0; i < kSkeletonNodes; ++i) ids.push_back(i);
            break;
    }
    return ids;
}

struct GraphSpec {
    GraphConfig config = GraphConfig::WholeBody;
    int node_count = 0;
    std::vector<int> canonical_ids;                 // local -> canonical id
    std::vector<std::pair<int, int>> edges;         // (source, target), local ids
    Tensor a_source;       // [V, E] binary incidence
    Tensor a_target;       // [V, E]
    Tensor a_source_norm;  // entries divided by node out-degree
    Tensor a_target_norm;  // entries divided by node in-degree
    std::vector<double> source_weight;  // a_source_norm[src(e), e], per edge
    std::vector<double> target_weight;  // a_target_norm[tgt(e), e], per edge

    int edge_count() const { return static_cast<int>(edges.size()); }

    /// Local index of a canonical node id, or -1 if the configuration drops it.
    int local_of_canonical(int canonical) const {
        for (std::size_t i = 0; i < canonical_ids.size(); ++i)
            if (canonical_ids[i] == canonical) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

inline void finalize_incidence(GraphSpec& g) {
    const int v = g.node_count;
    const int e = g.edge_count();
    g.a_source.resize({v, e});
    g.a_target.resize({v, e});
    std::vector<int> out_deg(static_cast<std::size_t>(v), 0), in_deg(static_cast<std::size_t>(v), 0);
    for (int j = 0; j < e; ++j) {
        const auto [s, t] = g.edges[static_cast<std::size_t>(j)];
        DSM_CHECK(s >= 0 && s < v && t >= 0 && t < v && s != t, "graph: bad edge endpoint");
        g.a_source[static_cast<std::size_t>(s * e + j)] = 1.0;
        g.a_target[static_cast<std::size_t>(t * e + j)] = 1.0;
        out_deg[static_cast<std::size_t>(s)]++;
        in_deg[static_cast<std::size_t>(t)]++;
    }
    g.a_source_norm = g.a_source;
    g.a_target_norm = g.a_target;
    for (int j = 0; j < e; ++j) {
        const auto [s, t] = g.edges[static_cast<std::size_t>(j)];
        g.a_source_norm[static_cast<std::size_t>(s * e + j)] /= out_deg[static_cast<std::size_t>(s)];
        g.a_target_norm[static_cast<std::size_t>(t * e + j)] /= in_deg[static_cast<std::size_t>(t)];
    }
    g.source_weight.resize(static_cast<std::size_t>(e));
    g.target_weight.resize(static_cast<std::size_t>(e));
    for (int j = 0; j < e; ++j) {
        const auto [s, t] = g.edges[static_cast<std::size_t>(j)];
        g.source_weight[static_cast<std::size_t>(j)] = g.a_source_norm[static_cast<std::size_t>(s * e + j)];
        g.target_weight[static_cast<std::size_t>(j)] = g.a_target_norm[static_cast<std::size_t>(t * e + j)];
    }
}

/// Edge lists in canonical ids. Skeleton chains first, then the face region
/// chains, each fed from the nose.
inline std::vector<std::pair<int, int>> canonical_edges(GraphConfig c) {
    std::vector<std::pair<int, int>> skel = {
        {0, 1}, {1, 3},  // nose -> left eye -> left ear
        {0, 2}, {2, 4},  // nose -> right eye -> right ear
        {0, 5}, {5, 7}, {7, 9},   // nose -> left shoulder -> elbow -> wrist
        {0, 6}, {6, 8}, {8, 10},  // nose -> right shoulder -> elbow -> wrist
    };
    std::vector<std::pair<int, int>> face;
    auto chain = [&face](int first, int last) {
        face.emplace_back(0, first);
        for (int i = first; i < last; ++i) face.emplace_back(i, i + 1);
    };
    chain(11, 21);  // face oval
    chain(22, 25);  // left brow
    chain(26, 29);  // right brow
    chain(30, 33);  // left eye
    chain(34, 37);  // right eye
    chain(38, 45);  // mouth

    switch (c) {
        case GraphConfig::SkeletonOnly: return skel;
        case GraphConfig::FaceOnly: return face;
        case GraphConfig::WholeBody: {
            auto all = skel;
            all.insert(all.end(), face.begin(), face.end());
            return all;
        }
    }
    return {};
}

}  // namespace detail

/// Fixed graph for a configuration; deterministic across runs.
inline GraphSpec build_graph(GraphConfig config) {
    GraphSpec g;
    g.config = config;
    g.canonical_ids = config_node_ids(config);
    g.node_count = static_cast<int>(g.canonical_ids.size());
    for (auto [cs, ct] : detail::canonical_edges(config)) {
        int ls = -1, lt = -1;
        for (std::size_t i = 0; i < g.canonical_ids.size(); ++i) {
            if (g.canonical_ids[i] == cs) ls = static_cast<int>(i);
            if (g.canonical_ids[i] == ct) lt = static_cast<int>(i);
        }
        DSM_CHECK(ls >= 0 && lt >= 0, "graph: edge endpoint missing from configuration");
        g.edges.emplace_back(ls, lt);
    }
    detail::finalize_incidence(g);
    return g;
}

/// Arbitrary edge list (used by tests for small synthetic graphs).
inline GraphSpec graph_from_edges(int nodes, std::vector<std::pair<int, int>> edges) {
    GraphSpec g;
    g.node_count = nodes;
    g.canonical_ids.resize(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) g.canonical_ids[static_cast<std::size_t>(i)] = i;
    g.edges = std::move(edges);
    detail::finalize_incidence(g);
    return g;
}

/// Bone features: per edge, target coordinates minus source coordinates.
/// coords is [V, 2] row-major; output [E, 2].
template <class Real>
void bone_features(const GraphSpec& g, const Real* coords, Real* bones) {
    const int e = g.edge_count();
    for (int j = 0; j < e; ++j) {
        const auto [s, t] = g.edges[static_cast<std::size_t>(j)];
        bones[2 * j + 0] = coords[2 * t + 0] - coords[2 * s + 0];
        bones[2 * j + 1] = coords[2 * t + 1] - coords[2 * s + 1];
    }
}

/// True when every node is reachable from node 0 along directed edges.
inline bool all_reachable_from_root(const GraphSpec& g) {
    std::vector<char> seen(static_cast<std::size_t>(g.node_count), 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (const auto& [s, t] : g.edges)
            if (s == u && !seen[static_cast<std::size_t>(t)]) {
                seen[static_cast<std::size_t>(t)] = 1;
                stack.push_back(t);
            }
    }
    for (char c : seen)
        if (!c) return false;
    return true;
}

}  // namespace dsm
