#pragma once

// The directed graph-temporal classifier. Two GTC blocks, each a DGN stage
// (joint node/edge update over the directed graph) followed by a BiTC stage
// (paired temporal convolutions over the node and edge streams), then global
// average pooling and a fully connected head.
//
// Channel mixing order inside a DGN stage is fixed as [self, incoming,
// outgoing] for nodes and [self, source-gather, target-gather] for edges.

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dsm/graph.hpp"
#include "dsm/ops.hpp"
#include "dsm/rng.hpp"
#include "dsm/tensor.hpp"

namespace dsm {

struct ModelConfig {
    int num_classes = 3;  // 2 or 3
    GraphConfig graph = GraphConfig::WholeBody;
    int in_channels = 2;
    int hidden1 = 32;
    int hidden2 = 64;
    int temporal_kernel = 5;
    int stride_block2 = 2;
    double dropout_p = 0.7;
    double leaky_slope = 0.01;
    int lookback = 15;

    std::int64_t temporal_out() const {
        const std::int64_t pad = temporal_kernel / 2;
        return nn::conv_out_len(nn::conv_out_len(lookback, temporal_kernel, 1, pad),
                                temporal_kernel, stride_block2, pad);
    }
};

// ---------------------------------------------------------------------------
// Graph aggregation primitives (forward + adjoints)
// ---------------------------------------------------------------------------

namespace graph_ops {

/// out[n,c,t,v] = sum over edges e with role(e) == v of w_e * edges[n,c,t,e].
/// `role` is the edge's source or target node, `w` the matching normalized
/// incidence weight; together this computes edges (x) A_norm^T.
template <class Real>
void edge_to_node(const TensorT<Real>& edges, const std::vector<std::pair<int, int>>& edge_list,
                  bool use_target, const std::vector<double>& w, std::int64_t v_count,
                  TensorT<Real>& out, ParallelPool* pool = nullptr) {
    const std::int64_t n = edges.dim(0), c = edges.dim(1), t = edges.dim(2), e = edges.dim(3);
    out.resize({n, c, t, v_count});
    nn::serial_or_pool(pool, n, [&](int, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i)
            for (std::int64_t ct = 0; ct < c * t; ++ct) {
                const Real* src = edges.ptr() + (i * c * t + ct) * e;
                Real* dst = out.ptr() + (i * c * t + ct) * v_count;
                std::fill(dst, dst + v_count, Real(0));
                for (std::int64_t j = 0; j < e; ++j) {
                    const auto& ed = edge_list[static_cast<std::size_t>(j)];
                    const int node = use_target ? ed.second : ed.first;
                    dst[node] += static_cast<Real>(w[static_cast<std::size_t>(j)]) * src[j];
                }
            }
    });
}

/// Adjoint of edge_to_node: g_edges[n,c,t,e] = w_e * g_nodes[n,c,t,role(e)].
inline void edge_to_node_backward(const Tensor& g_nodes,
                                  const std::vector<std::pair<int, int>>& edge_list,
                                  bool use_target, const std::vector<double>& w,
                                  std::int64_t e_count, Tensor& g_edges_accum,
                                  ParallelPool* pool = nullptr) {
    const std::int64_t n = g_nodes.dim(0), c = g_nodes.dim(1), t = g_nodes.dim(2),
                       v = g_nodes.dim(3);
    nn::serial_or_pool(pool, n, [&](int, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i)
            for (std::int64_t ct = 0; ct < c * t; ++ct) {
                const double* src = g_nodes.ptr() + (i * c * t + ct) * v;
                double* dst = g_edges_accum.ptr() + (i * c * t + ct) * e_count;
                for (std::int64_t j = 0; j < e_count; ++j) {
                    const auto& ed = edge_list[static_cast<std::size_t>(j)];
                    const int node = use_target ? ed.second : ed.first;
                    dst[j] += w[static_cast<std::size_t>(j)] * src[node];
                }
            }
    });
}

/// out[n,c,t,e] = nodes[n,c,t,endpoint(e)]
template <class Real>
void gather_nodes(const TensorT<Real>& nodes, const std::vector<std::pair<int, int>>& edge_list,
                  bool use_target, TensorT<Real>& out, ParallelPool* pool = nullptr) {
    const std::int64_t n = nodes.dim(0), c = nodes.dim(1), t = nodes.dim(2), v = nodes.dim(3);
    const std::int64_t e = static_cast<std::int64_t>(edge_list.size());
    out.resize({n, c, t, e});
    nn::serial_or_pool(pool, n, [&](int, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i)
            for (std::int64_t ct = 0; ct < c * t; ++ct) {
                const Real* src = nodes.ptr() + (i * c * t + ct) * v;
                Real* dst = out.ptr() + (i * c * t + ct) * e;
                for (std::int64_t j = 0; j < e; ++j) {
                    const auto& ed = edge_list[static_cast<std::size_t>(j)];
                    dst[j] = src[use_target ? ed.second : ed.first];
                }
            }
    });
}

/// Adjoint of gather_nodes: scatter-add into the node gradient.
inline void gather_nodes_backward(const Tensor& g_out,
                                  const std::vector<std::pair<int, int>>& edge_list,
                                  bool use_target, std::int64_t v_count, Tensor& g_nodes_accum,
                                  ParallelPool* pool = nullptr) {
    const std::int64_t n = g_out.dim(0), c = g_out.dim(1), t = g_out.dim(2), e = g_out.dim(3);
    nn::serial_or_pool(pool, n, [&](int, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i)
            for (std::int64_t ct = 0; ct < c * t; ++ct) {
                const double* src = g_out.ptr() + (i * c * t + ct) * e;
                double* dst = g_nodes_accum.ptr() + (i * c * t + ct) * v_count;
                for (std::int64_t j = 0; j < e; ++j) {
                    const auto& ed = edge_list[static_cast<std::size_t>(j)];
                    dst[use_target ? ed.second : ed.first] += src[j];
                }
            }
    });
}

}  // namespace graph_ops

// ---------------------------------------------------------------------------
// Blocks
// ---------------------------------------------------------------------------

struct DgnStage {
    Parameter node_w, node_b;
    nn::BatchNorm node_bn;
    Parameter edge_w, edge_b;
    nn::BatchNorm edge_bn;

    DgnStage() = default;
    DgnStage(const std::string& prefix, std::int64_t c_in, std::int64_t c_out)
        : node_w(prefix + ".node_linear.weight", {c_out, 3 * c_in}),
          node_b(prefix + ".node_linear.bias", {c_out}),
          node_bn(prefix + ".node_bn", c_out),
          edge_w(prefix + ".edge_linear.weight", {c_out, c_in + 2 * c_out}),
          edge_b(prefix + ".edge_linear.bias", {c_out}),
          edge_bn(prefix + ".edge_bn", c_out) {}
};

struct BitcStage {
    Parameter node_w, node_b;
    nn::BatchNorm node_bn;
    Parameter edge_w, edge_b;
    nn::BatchNorm edge_bn;
    std::int64_t stride = 1;

    BitcStage() = default;
    BitcStage(const std::string& prefix, std::int64_t c, std::int64_t k, std::int64_t s)
        : node_w(prefix + ".node_conv.weight", {c, c, k}),
          node_b(prefix + ".node_conv.bias", {c}),
          node_bn(prefix + ".node_bn", c),
          edge_w(prefix + ".edge_conv.weight", {c, c, k}),
          edge_b(prefix + ".edge_conv.bias", {c}),
          edge_bn(prefix + ".edge_bn", c),
          stride(s) {}
};

/// Every intermediate needed by the backward pass for one forward call.
struct Activations {
    // inputs (owned copies are not kept; backward takes them again)
    Tensor bn_n0, bn_e0;
    nn::BatchNormCache c_n0, c_e0;

    struct GtcActs {
        Tensor agg_in, agg_out;          // DGN node-side aggregates
        Tensor nlin;                     // node linear output (pre-BN)
        nn::BatchNormCache c_nbn;
        Tensor h_n;                      // node features after BN + LReLU
        Tensor gath_s, gath_t;           // per-edge gathers of h_n
        Tensor elin;                     // edge linear output (pre-BN)
        nn::BatchNormCache c_ebn;
        Tensor h_e;                      // edge features after BN + LReLU
        Tensor ncv, ecv;                 // BiTC conv outputs (pre-BN)
        nn::BatchNormCache c_tn, c_te;
        Tensor t_n, t_e;                 // BiTC outputs after BN + LReLU (+ dropout)
        nn::DropoutMask m_n, m_e;
    };
    GtcActs g1, g2;

    Tensor pooled;  // [N, 2*hidden2]
    Tensor logits;  // [N, K]

    // gradient scratch, reused across steps
    Tensor gb_n0, gb_e0;
    GtcActs grad;  // reuses the same field layout for gradient buffers
};

struct DgnnModel {
    ModelConfig cfg;
    GraphSpec graph;

    nn::BatchNorm in_bn_nodes, in_bn_edges;
    DgnStage dgn1, dgn2;
    BitcStage bitc1, bitc2;
    Parameter head_w, head_b;

    explicit DgnnModel(const ModelConfig& c)
        : cfg(c),
          graph(build_graph(c.graph)),
          in_bn_nodes("input_bn.nodes", c.in_channels),
          in_bn_edges("input_bn.edges", c.in_channels),
          dgn1("gtc1.dgn", c.in_channels, c.hidden1),
          dgn2("gtc2.dgn", c.hidden1, c.hidden2),
          bitc1("gtc1.bitc", c.hidden1, c.temporal_kernel, 1),
          bitc2("gtc2.bitc", c.hidden2, c.temporal_kernel, c.stride_block2),
          head_w("head.weight", {c.num_classes, 2 * static_cast<std::int64_t>(c.hidden2)}),
          head_b("head.bias", {c.num_classes}) {
        DSM_CHECK(c.num_classes == 2 || c.num_classes == 3, "model: 2 or 3 classes");
        DSM_CHECK(c.lookback >= c.temporal_kernel, "model: lookback shorter than kernel");
        DSM_CHECK(cfg.temporal_out() >= 1, "model: temporal stack collapses below one step");
    }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> ps;
        auto bn = [&ps](nn::BatchNorm& b) {
            ps.push_back(&b.gamma);
            ps.push_back(&b.beta);
        };
        bn(in_bn_nodes);
        bn(in_bn_edges);
        for (DgnStage* d : {&dgn1, &dgn2}) {
            ps.push_back(&d->node_w);
            ps.push_back(&d->node_b);
            bn(d->node_bn);
            ps.push_back(&d->edge_w);
            ps.push_back(&d->edge_b);
            bn(d->edge_bn);
        }
        for (BitcStage* b : {&bitc1, &bitc2}) {
            ps.push_back(&b->node_w);
            ps.push_back(&b->node_b);
            bn(b->node_bn);
            ps.push_back(&b->edge_w);
            ps.push_back(&b->edge_b);
            bn(b->edge_bn);
        }
        ps.push_back(&head_w);
        ps.push_back(&head_b);
        return ps;
    }

    std::int64_t parameter_count() {
        std::int64_t n = 0;
        for (auto* p : parameters()) n += p->value.numel();
        return n;
    }

    /// Kaiming-uniform init scaled for the LeakyReLU slope; biases zero,
    /// batch-norm affine at identity.
    void init_parameters(std::uint64_t seed) {
        Rng rng(derive_seed(seed, "model_init"));
        const double gain = std::sqrt(2.0 / (1.0 + cfg.leaky_slope * cfg.leaky_slope));
        auto fill = [&](Parameter& w, std::int64_t fan_in) {
            const double bound = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
            for (auto& v : w.value.data) v = rng.uniform(-bound, bound);
        };
        for (DgnStage* d : {&dgn1, &dgn2}) {
            fill(d->node_w, d->node_w.value.dim(1));
            fill(d->edge_w, d->edge_w.value.dim(1));
        }
        for (BitcStage* b : {&bitc1, &bitc2}) {
            fill(b->node_w, b->node_w.value.dim(1) * b->node_w.value.dim(2));
            fill(b->edge_w, b->edge_w.value.dim(1) * b->edge_w.value.dim(2));
        }
        fill(head_w, head_w.value.dim(1));
    }

    void zero_grad() {
        for (auto* p : parameters()) p->zero_grad();
    }

    // -- forward ------------------------------------------------------------

    /// nodes [N, C_in, T, V], edges [N, C_in, T, E] -> logits [N, K] in
    /// acts.logits. `step` seeds the dropout substream in train mode.
    void forward(const Tensor& nodes, const Tensor& edges, nn::Mode mode, Activations& acts,
                 ParallelPool* pool = nullptr, std::uint64_t dropout_seed = 0,
                 std::uint64_t step = 0) {
        const std::int64_t v = graph.node_count, e = graph.edge_count();
        DSM_CHECK(nodes.rank() == 4 && nodes.dim(1) == cfg.in_channels &&
                      nodes.dim(2) == cfg.lookback && nodes.dim(3) == v,
                  "forward: node tensor shape mismatch for this graph config");
        DSM_CHECK(edges.rank() == 4 && edges.dim(1) == cfg.in_channels &&
                      edges.dim(2) == cfg.lookback && edges.dim(3) == e,
                  "forward: edge tensor shape mismatch for this graph config");

        nn::batch_norm_forward(nodes, in_bn_nodes, mode, acts.c_n0, acts.bn_n0, pool);
        nn::batch_norm_forward(edges, in_bn_edges, mode, acts.c_e0, acts.bn_e0, pool);

        gtc_forward(dgn1, bitc1, acts.bn_n0, acts.bn_e0, mode, acts.g1, pool, dropout_seed,
                    step * 2 + 0);
        gtc_forward(dgn2, bitc2, acts.g1.t_n, acts.g1.t_e, mode, acts.g2, pool, dropout_seed,
                    step * 2 + 1);

        // global average pooling over (T, X), node and edge streams pooled
        // separately, then concatenated
        const std::int64_t n = nodes.dim(0);
        const std::int64_t h2 = cfg.hidden2;
        Tensor pn, pe;
        nn::global_avg_pool_forward(acts.g2.t_n, pn);
        nn::global_avg_pool_forward(acts.g2.t_e, pe);
        acts.pooled.resize({n, 2 * h2});
        for (std::int64_t i = 0; i < n; ++i) {
            std::copy(pn.ptr() + i * h2, pn.ptr() + (i + 1) * h2, acts.pooled.ptr() + i * 2 * h2);
            std::copy(pe.ptr() + i * h2, pe.ptr() + (i + 1) * h2,
                      acts.pooled.ptr() + i * 2 * h2 + h2);
        }
        nn::fc_forward(acts.pooled, head_w.value, head_b.value, acts.logits);
    }

    // -- backward -----------------------------------------------------------

    /// Accumulates parameter gradients for d(loss)/d(logits). Must follow a
    /// train-mode forward on the same inputs/acts.
    void backward(const Tensor& nodes, const Tensor& edges, const Tensor& dlogits,
                  Activations& acts, ParallelPool* pool = nullptr) {
        const std::int64_t n = nodes.dim(0);
        const std::int64_t h2 = cfg.hidden2;

        Tensor gpooled;
        nn::fc_backward(acts.pooled, head_w.value, dlogits, gpooled, head_w.grad, head_b.grad);

        Tensor gpn({n, h2}), gpe({n, h2});
        for (std::int64_t i = 0; i < n; ++i) {
            std::copy(gpooled.ptr() + i * 2 * h2, gpooled.ptr() + i * 2 * h2 + h2,
                      gpn.ptr() + i * h2);
            std::copy(gpooled.ptr() + i * 2 * h2 + h2, gpooled.ptr() + (i + 1) * 2 * h2,
                      gpe.ptr() + i * h2);
        }
        Tensor g_tn, g_te;
        nn::global_avg_pool_backward(acts.g2.t_n.shape, gpn, g_tn);
        nn::global_avg_pool_backward(acts.g2.t_e.shape, gpe, g_te);

        Tensor g_in_n, g_in_e;  // gradients w.r.t. a GTC block's inputs
        gtc_backward(dgn2, bitc2, acts.g1.t_n, acts.g1.t_e, acts.g2, g_tn, g_te, g_in_n, g_in_e,
                     pool);
        gtc_backward(dgn1, bitc1, acts.bn_n0, acts.bn_e0, acts.g1, g_in_n, g_in_e, g_tn, g_te,
                     pool);

        Tensor gdummy;
        nn::batch_norm_backward(nodes, in_bn_nodes, acts.c_n0, g_tn, gdummy, pool);
        nn::batch_norm_backward(edges, in_bn_edges, acts.c_e0, g_te, gdummy, pool);
    }

  private:
    void gtc_forward(DgnStage& dgn, BitcStage& bitc, const Tensor& in_n, const Tensor& in_e,
                     nn::Mode mode, Activations::GtcActs& a, ParallelPool* pool,
                     std::uint64_t dropout_seed, std::uint64_t drop_step) {
        const auto& edges_list = graph.edges;
        const std::int64_t v = graph.node_count;
        const std::int64_t pad = cfg.temporal_kernel / 2;

        // DGN: node update from [self, incoming, outgoing]
        graph_ops::edge_to_node(in_e, edges_list, true, graph.target_weight, v, a.agg_in, pool);
        graph_ops::edge_to_node(in_e, edges_list, false, graph.source_weight, v, a.agg_out, pool);
        {
            const Tensor* ins[3] = {&in_n, &a.agg_in, &a.agg_out};
            nn::linear1x1_forward(std::span<const Tensor* const>(ins, 3), dgn.node_w.value,
                                  dgn.node_b.value, a.nlin, pool);
        }
        nn::batch_norm_forward(a.nlin, dgn.node_bn, mode, a.c_nbn, a.h_n, pool);
        nn::leaky_relu_forward(a.h_n, cfg.leaky_slope);

        // DGN: edge update from [self, source endpoint, target endpoint]
        graph_ops::gather_nodes(a.h_n, edges_list, false, a.gath_s, pool);
        graph_ops::gather_nodes(a.h_n, edges_list, true, a.gath_t, pool);
        {
            const Tensor* ins[3] = {&in_e, &a.gath_s, &a.gath_t};
            nn::linear1x1_forward(std::span<const Tensor* const>(ins, 3), dgn.edge_w.value,
                                  dgn.edge_b.value, a.elin, pool);
        }
        nn::batch_norm_forward(a.elin, dgn.edge_bn, mode, a.c_ebn, a.h_e, pool);
        nn::leaky_relu_forward(a.h_e, cfg.leaky_slope);

        // BiTC: parallel temporal convolutions on both streams
        nn::temporal_conv_forward(a.h_n, bitc.node_w.value, bitc.node_b.value, bitc.stride, pad,
                                  a.ncv, pool);
        nn::batch_norm_forward(a.ncv, bitc.node_bn, mode, a.c_tn, a.t_n, pool);
        nn::leaky_relu_forward(a.t_n, cfg.leaky_slope);
        nn::temporal_conv_forward(a.h_e, bitc.edge_w.value, bitc.edge_b.value, bitc.stride, pad,
                                  a.ecv, pool);
        nn::batch_norm_forward(a.ecv, bitc.edge_bn, mode, a.c_te, a.t_e, pool);
        nn::leaky_relu_forward(a.t_e, cfg.leaky_slope);

        nn::dropout_forward(a.t_n, cfg.dropout_p, mode, dropout_seed, drop_step * 2 + 0, a.m_n,
                            pool);
        nn::dropout_forward(a.t_e, cfg.dropout_p, mode, dropout_seed, drop_step * 2 + 1, a.m_e,
                            pool);
    }

    void gtc_backward(DgnStage& dgn, BitcStage& bitc, const Tensor& in_n, const Tensor& in_e,
                      Activations::GtcActs& a, const Tensor& g_tn_in, const Tensor& g_te_in,
                      Tensor& g_in_n, Tensor& g_in_e, ParallelPool* pool) {
        const auto& edges_list = graph.edges;
        const std::int64_t v = graph.node_count;
        const std::int64_t e = graph.edge_count();
        const std::int64_t pad = cfg.temporal_kernel / 2;

        Tensor g = g_tn_in;  // working copy: dropout, LReLU act in place
        nn::dropout_backward(a.m_n, g, pool);
        Tensor g2;
        nn::leaky_relu_backward(a.t_n, g, g2, cfg.leaky_slope);
        Tensor g_ncv;
        nn::batch_norm_backward(a.ncv, bitc.node_bn, a.c_tn, g2, g_ncv, pool);
        Tensor g_hn;
        nn::temporal_conv_backward(a.h_n, bitc.node_w.value, g_ncv, bitc.stride, pad, &g_hn,
                                   bitc.node_w.grad, bitc.node_b.grad, pool);

        g = g_te_in;
        nn::dropout_backward(a.m_e, g, pool);
        nn::leaky_relu_backward(a.t_e, g, g2, cfg.leaky_slope);
        Tensor g_ecv;
        nn::batch_norm_backward(a.ecv, bitc.edge_bn, a.c_te, g2, g_ecv, pool);
        Tensor g_he;
        nn::temporal_conv_backward(a.h_e, bitc.edge_w.value, g_ecv, bitc.stride, pad, &g_he,
                                   bitc.edge_w.grad, bitc.edge_b.grad, pool);

        // edge update backward
        nn::leaky_relu_backward(a.h_e, g_he, g2, cfg.leaky_slope);
        Tensor g_elin;
        nn::batch_norm_backward(a.elin, dgn.edge_bn, a.c_ebn, g2, g_elin, pool);
        Tensor g_gs, g_gt;
        {
            const Tensor* ins[3] = {&in_e, &a.gath_s, &a.gath_t};
            Tensor* gins[3] = {&g_in_e, &g_gs, &g_gt};
            nn::linear1x1_backward(std::span<const Tensor* const>(ins, 3), dgn.edge_w.value,
                                   g_elin, std::span<Tensor* const>(gins, 3), dgn.edge_w.grad,
                                   dgn.edge_b.grad, pool);
        }
        // h_n collects gradient from the node conv and both gathers
        graph_ops::gather_nodes_backward(g_gs, edges_list, false, v, g_hn, pool);
        graph_ops::gather_nodes_backward(g_gt, edges_list, true, v, g_hn, pool);

        // node update backward
        nn::leaky_relu_backward(a.h_n, g_hn, g2, cfg.leaky_slope);
        Tensor g_nlin;
        nn::batch_norm_backward(a.nlin, dgn.node_bn, a.c_nbn, g2, g_nlin, pool);
        Tensor g_agg_in, g_agg_out;
        {
            const Tensor* ins[3] = {&in_n, &a.agg_in, &a.agg_out};
            Tensor* gins[3] = {&g_in_n, &g_agg_in, &g_agg_out};
            nn::linear1x1_backward(std::span<const Tensor* const>(ins, 3), dgn.node_w.value,
                                   g_nlin, std::span<Tensor* const>(gins, 3), dgn.node_w.grad,
                                   dgn.node_b.grad, pool);
        }
        // aggregates pull gradient back onto the edge stream
        graph_ops::edge_to_node_backward(g_agg_in, edges_list, true, graph.target_weight, e,
                                         g_in_e, pool);
        graph_ops::edge_to_node_backward(g_agg_out, edges_list, false, graph.source_weight, e,
                                         g_in_e, pool);
    }
};

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

struct Prediction {
    int cls = 0;
    std::vector<double> probs;
};

/// Softmax + argmax; ties break toward the lowest class index.
inline Prediction predict(const double* logits, int k) {
    Prediction p;
    p.probs.resize(static_cast<std::size_t>(k));
    double mx = logits[0];
    for (int i = 0; i < k; ++i) {
        if (!std::isfinite(logits[i])) throw ContractError("predict: non-finite logit");
        mx = std::max(mx, logits[i]);
    }
    double se = 0.0;
    for (int i = 0; i < k; ++i) se += std::exp(logits[i] - mx);
    for (int i = 0; i < k; ++i) p.probs[static_cast<std::size_t>(i)] = std::exp(logits[i] - mx) / se;
    p.cls = 0;
    for (int i = 1; i < k; ++i)
        if (p.probs[static_cast<std::size_t>(i)] > p.probs[static_cast<std::size_t>(p.cls)]) p.cls = i;
    return p;
}

inline std::vector<Prediction> predict(const Tensor& logits) {
    const std::int64_t n = logits.dim(0), k = logits.dim(1);
    std::vector<Prediction> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        out.push_back(predict(logits.ptr() + i * k, static_cast<int>(k)));
    return out;
}

}  // namespace dsm
