#pragma once

// Occlusion sensitivity analysis and the three-configuration ablation
// runner. Occlusion zeroes one node's features (and the bones touching it)
// across the whole window — zero is the neutral value in nose-relative
// coordinates — and measures how much the model's predictions degrade.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "dsm/dataset.hpp"
#include "dsm/metrics.hpp"
#include "dsm/model.hpp"
#include "dsm/train.hpp"

namespace dsm {

/// Zeroes node `node_id` and all incident bones in a window, in place.
/// Node 0 is the normalization origin and cannot be occluded.
inline void occlude_node_in_batch(Tensor& nodes, Tensor& edges, int node_id,
                                  const GraphSpec& spec) {
    DSM_CHECK(node_id != 0, "occlude: node 0 (nose) is the coordinate origin");
    DSM_CHECK(node_id > 0 && node_id < spec.node_count, "occlude: node id out of range");
    const std::int64_t n = nodes.dim(0), c = nodes.dim(1), t = nodes.dim(2), v = nodes.dim(3);
    const std::int64_t e = edges.dim(3);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t cc = 0; cc < c; ++cc)
            for (std::int64_t tt = 0; tt < t; ++tt) {
                nodes.ptr()[((i * c + cc) * t + tt) * v + node_id] = 0.0;
                double* erow = edges.ptr() + ((i * c + cc) * t + tt) * e;
                for (std::int64_t j = 0; j < e; ++j) {
                    const auto& ed = spec.edges[static_cast<std::size_t>(j)];
                    if (ed.first == node_id || ed.second == node_id) erow[j] = 0.0;
                }
            }
}

/// Single-window occlusion (copy, leaves the input untouched).
inline SampleWindow occlude_keypoint(const SampleWindow& w, int node_id, const GraphSpec& spec) {
    SampleWindow out = w;
    Tensor nodes4({1, out.nodes.dim(0), out.nodes.dim(1), out.nodes.dim(2)});
    Tensor edges4({1, out.edges.dim(0), out.edges.dim(1), out.edges.dim(2)});
    std::copy(out.nodes.data.begin(), out.nodes.data.end(), nodes4.data.begin());
    std::copy(out.edges.data.begin(), out.edges.data.end(), edges4.data.begin());
    occlude_node_in_batch(nodes4, edges4, node_id, spec);
    std::copy(nodes4.data.begin(), nodes4.data.end(), out.nodes.data.begin());
    std::copy(edges4.data.begin(), edges4.data.end(), out.edges.data.begin());
    return out;
}

struct NodeImportance {
    int node_id = 0;             // local id in the model's graph
    int canonical_id = 0;
    std::string name;
    double importance_acc = 0.0;   // baseline accuracy - occluded accuracy (points)
    double importance_prob = 0.0;  // mean drop of the true-class probability
    std::vector<double> per_class_acc;
    std::vector<double> per_class_prob;
};

struct OcclusionReport {
    double baseline_accuracy = 0.0;
    std::vector<double> baseline_class_accuracy;
    std::vector<NodeImportance> nodes;  // every occludable node, id order

    /// Node ids sorted by descending importance_prob.
    std::vector<int> ranking_by_prob() const {
        std::vector<int> order;
        for (const auto& n : nodes) order.push_back(n.node_id);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const auto& na = nodes[static_cast<std::size_t>(a - 1)];
            const auto& nb = nodes[static_cast<std::size_t>(b - 1)];
            if (na.importance_prob != nb.importance_prob)
                return na.importance_prob > nb.importance_prob;
            return a < b;
        });
        return order;
    }
};

/// Evaluates every occludable node against the given test sessions.
inline OcclusionReport occlusion_sensitivity(DgnnModel& model,
                                             const std::vector<NormalizedSession>& sessions,
                                             int lookback, int stride,
                                             ParallelPool* pool = nullptr, int batch_size = 1024) {
    const GraphSpec& spec = model.graph;
    const int k = model.cfg.num_classes;
    auto usable = filter_by_classes(sessions, k);
    auto refs = list_windows(usable, spec, lookback, stride, /*drop_cold=*/false);
    DSM_CHECK(!refs.empty(), "occlusion_sensitivity: no windows");
    const std::int64_t w_total = static_cast<std::int64_t>(refs.size());

    std::vector<int> labels(static_cast<std::size_t>(w_total));
    for (std::int64_t i = 0; i < w_total; ++i)
        labels[static_cast<std::size_t>(i)] =
            window_label(usable[static_cast<std::size_t>(refs[static_cast<std::size_t>(i)].session)].state, k);

    OcclusionReport rep;
    std::vector<double> base_ptrue(static_cast<std::size_t>(w_total));
    std::vector<char> base_correct(static_cast<std::size_t>(w_total));

    Activations acts;
    Tensor nodes, edges, nodes_occ, edges_occ;
    // occluded evaluations share batch assembly with the baseline pass
    std::vector<std::vector<double>> occ_ptrue_drop(static_cast<std::size_t>(spec.node_count));
    std::vector<std::vector<char>> occ_correct(static_cast<std::size_t>(spec.node_count));
    for (int v = 1; v < spec.node_count; ++v) {
        occ_ptrue_drop[static_cast<std::size_t>(v)].resize(static_cast<std::size_t>(w_total));
        occ_correct[static_cast<std::size_t>(v)].resize(static_cast<std::size_t>(w_total));
    }

    for (std::int64_t off = 0; off < w_total; off += batch_size) {
        const std::int64_t n = std::min<std::int64_t>(batch_size, w_total - off);
        assemble_batch(usable, spec, refs.data() + off, n, lookback, nodes, edges, pool);
        model.forward(nodes, edges, nn::Mode::Eval, acts, pool);
        for (std::int64_t i = 0; i < n; ++i) {
            const Prediction p = predict(acts.logits.ptr() + i * k, k);
            const int y = labels[static_cast<std::size_t>(off + i)];
            base_ptrue[static_cast<std::size_t>(off + i)] = p.probs[static_cast<std::size_t>(y)];
            base_correct[static_cast<std::size_t>(off + i)] = p.cls == y;
        }
        for (int v = 1; v < spec.node_count; ++v) {
            nodes_occ = nodes;
            edges_occ = edges;
            occlude_node_in_batch(nodes_occ, edges_occ, v, spec);
            model.forward(nodes_occ, edges_occ, nn::Mode::Eval, acts, pool);
            for (std::int64_t i = 0; i < n; ++i) {
                const Prediction p = predict(acts.logits.ptr() + i * k, k);
                const int y = labels[static_cast<std::size_t>(off + i)];
                occ_ptrue_drop[static_cast<std::size_t>(v)][static_cast<std::size_t>(off + i)] =
                    base_ptrue[static_cast<std::size_t>(off + i)] -
                    p.probs[static_cast<std::size_t>(y)];
                occ_correct[static_cast<std::size_t>(v)][static_cast<std::size_t>(off + i)] =
                    p.cls == y;
            }
        }
    }

    auto pct = [](std::int64_t num, std::int64_t den) {
        return den ? 100.0 * static_cast<double>(num) / static_cast<double>(den) : 0.0;
    };
    std::vector<std::int64_t> class_total(static_cast<std::size_t>(k), 0);
    std::vector<std::int64_t> class_base_correct(static_cast<std::size_t>(k), 0);
    std::int64_t base_ok = 0;
    for (std::int64_t i = 0; i < w_total; ++i) {
        class_total[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])]++;
        if (base_correct[static_cast<std::size_t>(i)]) {
            ++base_ok;
            class_base_correct[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])]++;
        }
    }
    rep.baseline_accuracy = pct(base_ok, w_total);
    for (int c = 0; c < k; ++c)
        rep.baseline_class_accuracy.push_back(
            pct(class_base_correct[static_cast<std::size_t>(c)], class_total[static_cast<std::size_t>(c)]));

    for (int v = 1; v < spec.node_count; ++v) {
        NodeImportance ni;
        ni.node_id = v;
        ni.canonical_id = spec.canonical_ids[static_cast<std::size_t>(v)];
        ni.name = node_names()[static_cast<std::size_t>(ni.canonical_id)];
        std::int64_t ok = 0;
        double drop_sum = 0.0;
        std::vector<std::int64_t> c_ok(static_cast<std::size_t>(k), 0);
        std::vector<double> c_drop(static_cast<std::size_t>(k), 0.0);
        for (std::int64_t i = 0; i < w_total; ++i) {
            const int y = labels[static_cast<std::size_t>(i)];
            const double d = occ_ptrue_drop[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)];
            drop_sum += d;
            c_drop[static_cast<std::size_t>(y)] += d;
            if (occ_correct[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)]) {
                ++ok;
                c_ok[static_cast<std::size_t>(y)]++;
            }
        }
        ni.importance_acc = rep.baseline_accuracy - pct(ok, w_total);
        ni.importance_prob = drop_sum / static_cast<double>(w_total);
        for (int c = 0; c < k; ++c) {
            ni.per_class_acc.push_back(rep.baseline_class_accuracy[static_cast<std::size_t>(c)] -
                                       pct(c_ok[static_cast<std::size_t>(c)],
                                           class_total[static_cast<std::size_t>(c)]));
            ni.per_class_prob.push_back(
                class_total[static_cast<std::size_t>(c)]
                    ? c_drop[static_cast<std::size_t>(c)] /
                          static_cast<double>(class_total[static_cast<std::size_t>(c)])
                    : 0.0);
        }
        rep.nodes.push_back(std::move(ni));
    }
    return rep;
}

inline void write_occlusion_csv(std::ostream& out, const OcclusionReport& rep, int num_classes) {
    out << "node_id,canonical_id,name,importance_acc,importance_prob";
    for (int c = 0; c < num_classes; ++c)
        out << ",acc_drop_" << class_name(c, num_classes) << ",prob_drop_"
            << class_name(c, num_classes);
    out << "\n";
    char buf[64];
    for (const auto& n : rep.nodes) {
        out << n.node_id << "," << n.canonical_id << "," << n.name;
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f", n.importance_acc, n.importance_prob);
        out << buf;
        for (int c = 0; c < num_classes; ++c) {
            std::snprintf(buf, sizeof buf, ",%.6f,%.6f", n.per_class_acc[static_cast<std::size_t>(c)],
                          n.per_class_prob[static_cast<std::size_t>(c)]);
            out << buf;
        }
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// Ablation: one independently trained model per graph configuration,
// evaluated per lighting condition.
// ---------------------------------------------------------------------------

struct AblationReport {
    // accuracy[config][lighting]
    std::map<GraphConfig, std::map<Lighting, double>> accuracy;
    std::map<GraphConfig, MetricsReport> reports;
};

inline AblationReport run_ablation(const std::vector<NormalizedSession>& train_sessions,
                                   const std::vector<NormalizedSession>& test_sessions,
                                   ModelConfig base_mc, const TrainConfig& tc, int eval_stride,
                                   ParallelPool* pool = nullptr, std::ostream* console = nullptr) {
    AblationReport rep;
    for (GraphConfig gc :
         {GraphConfig::FaceOnly, GraphConfig::SkeletonOnly, GraphConfig::WholeBody}) {
        ModelConfig mc = base_mc;
        mc.graph = gc;
        if (console) *console << "[ablation] training " << to_string(gc) << "\n";
        auto model = train(train_sessions, mc, tc, nullptr, pool, nullptr);
        MetricsReport mr = evaluate(*model, test_sessions, tc.lookback, eval_stride, pool);
        for (const auto& [cond, acc] : mr.lighting_accuracy) rep.accuracy[gc][cond] = acc;
        rep.reports[gc] = std::move(mr);
    }
    return rep;
}

inline void write_ablation_csv(std::ostream& out, const AblationReport& rep) {
    out << "config,light,dark,sudden_light_dark,overall\n";
    char buf[64];
    for (const auto& [gc, by_light] : rep.accuracy) {
        out << to_string(gc);
        for (Lighting li : {Lighting::Light, Lighting::Dark, Lighting::SuddenLightDark}) {
            auto it = by_light.find(li);
            if (it == by_light.end()) out << ",";
            else {
                std::snprintf(buf, sizeof buf, ",%.4f", it->second);
                out << buf;
            }
        }
        std::snprintf(buf, sizeof buf, ",%.4f\n", rep.reports.at(gc).overall_accuracy);
        out << buf;
    }
}

}  // namespace dsm
