#pragma once

// Online inference: a 15-frame sliding window re-classified on every
// incoming frame, with the same imputation and normalization pipeline as the
// offline path. The InferenceNet is an eval-mode-only copy of a trained
// model with batch norm folded into per-channel affine maps; it is
// instantiated for double (bitwise-identical to offline evaluation) and
// float (reduced-precision fast path).

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "dsm/dataset.hpp"
#include "dsm/keypoint_io.hpp"
#include "dsm/model.hpp"

namespace dsm {

template <class Real>
struct InferenceNet {
    ModelConfig cfg;
    GraphSpec graph;

    struct Affine {
        std::vector<Real> scale, shift;
    };
    struct Stage {
        TensorT<Real> node_w, node_b, edge_w, edge_b;
        Affine node_bn, edge_bn;
    };
    Affine in_bn_nodes, in_bn_edges;
    Stage dgn1, dgn2, bitc1, bitc2;
    TensorT<Real> head_w, head_b;

    explicit InferenceNet(DgnnModel& m) : cfg(m.cfg), graph(m.graph) {
        auto fold = [](const nn::BatchNorm& bn) {
            Affine a;
            const std::int64_t c = bn.channels();
            a.scale.resize(static_cast<std::size_t>(c));
            a.shift.resize(static_cast<std::size_t>(c));
            for (std::int64_t i = 0; i < c; ++i) {
                const double is = 1.0 / std::sqrt(bn.running_var[static_cast<std::size_t>(i)] + bn.eps);
                const double scale = bn.gamma.value[static_cast<std::size_t>(i)] * is;
                const double shift = bn.beta.value[static_cast<std::size_t>(i)] -
                                     bn.running_mean[static_cast<std::size_t>(i)] * scale;
                a.scale[static_cast<std::size_t>(i)] = static_cast<Real>(scale);
                a.shift[static_cast<std::size_t>(i)] = static_cast<Real>(shift);
            }
            return a;
        };
        in_bn_nodes = fold(m.in_bn_nodes);
        in_bn_edges = fold(m.in_bn_edges);
        auto stage_dgn = [&](const DgnStage& d, Stage& s) {
            s.node_w = d.node_w.value.cast<Real>();
            s.node_b = d.node_b.value.cast<Real>();
            s.edge_w = d.edge_w.value.cast<Real>();
            s.edge_b = d.edge_b.value.cast<Real>();
            s.node_bn = fold(d.node_bn);
            s.edge_bn = fold(d.edge_bn);
        };
        auto stage_bitc = [&](const BitcStage& b, Stage& s) {
            s.node_w = b.node_w.value.cast<Real>();
            s.node_b = b.node_b.value.cast<Real>();
            s.edge_w = b.edge_w.value.cast<Real>();
            s.edge_b = b.edge_b.value.cast<Real>();
            s.node_bn = fold(b.node_bn);
            s.edge_bn = fold(b.edge_bn);
        };
        stage_dgn(m.dgn1, dgn1);
        stage_dgn(m.dgn2, dgn2);
        stage_bitc(m.bitc1, bitc1);
        stage_bitc(m.bitc2, bitc2);
        head_w = m.head_w.value.cast<Real>();
        head_b = m.head_b.value.cast<Real>();
    }

    static void affine(TensorT<Real>& x, const Affine& a) {
        const std::int64_t n = x.dim(0), c = x.dim(1), tx = x.dim(2) * x.dim(3);
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t cc = 0; cc < c; ++cc) {
                Real* p = x.ptr() + (i * c + cc) * tx;
                const Real s = a.scale[static_cast<std::size_t>(cc)];
                const Real b = a.shift[static_cast<std::size_t>(cc)];
                for (std::int64_t j = 0; j < tx; ++j) p[j] = p[j] * s + b;
            }
    }

    /// nodes [N,2,T,V], edges [N,2,T,E] -> logits [N,K]
    void forward(const TensorT<Real>& nodes_in, const TensorT<Real>& edges_in,
                 TensorT<Real>& logits) {
        const std::int64_t pad = cfg.temporal_kernel / 2;
        TensorT<Real> n0 = nodes_in, e0 = edges_in;
        affine(n0, in_bn_nodes);
        affine(e0, in_bn_edges);

        TensorT<Real> agg_in, agg_out, h_n, gs, gt, h_e, tmp;
        auto gtc = [&](const Stage& dgn, const Stage& bitc, std::int64_t stride, TensorT<Real>& xn,
                       TensorT<Real>& xe) {
            graph_ops::edge_to_node(xe, graph.edges, true, graph.target_weight, graph.node_count,
                                    agg_in);
            graph_ops::edge_to_node(xe, graph.edges, false, graph.source_weight, graph.node_count,
                                    agg_out);
            {
                const TensorT<Real>* ins[3] = {&xn, &agg_in, &agg_out};
                nn::linear1x1_forward(std::span<const TensorT<Real>* const>(ins, 3), dgn.node_w,
                                      dgn.node_b, h_n, nullptr);
            }
            affine(h_n, dgn.node_bn);
            nn::leaky_relu_forward(h_n, cfg.leaky_slope);
            graph_ops::gather_nodes(h_n, graph.edges, false, gs);
            graph_ops::gather_nodes(h_n, graph.edges, true, gt);
            {
                const TensorT<Real>* ins[3] = {&xe, &gs, &gt};
                nn::linear1x1_forward(std::span<const TensorT<Real>* const>(ins, 3), dgn.edge_w,
                                      dgn.edge_b, h_e, nullptr);
            }
            affine(h_e, dgn.edge_bn);
            nn::leaky_relu_forward(h_e, cfg.leaky_slope);

            nn::temporal_conv_forward(h_n, bitc.node_w, bitc.node_b, stride, pad, xn);
            affine(xn, bitc.node_bn);
            nn::leaky_relu_forward(xn, cfg.leaky_slope);
            nn::temporal_conv_forward(h_e, bitc.edge_w, bitc.edge_b, stride, pad, xe);
            affine(xe, bitc.edge_bn);
            nn::leaky_relu_forward(xe, cfg.leaky_slope);
        };
        gtc(dgn1, bitc1, 1, n0, e0);
        gtc(dgn2, bitc2, cfg.stride_block2, n0, e0);

        TensorT<Real> pn, pe, pooled;
        nn::global_avg_pool_forward(n0, pn);
        nn::global_avg_pool_forward(e0, pe);
        const std::int64_t n = pn.dim(0), h2 = cfg.hidden2;
        pooled.resize({n, 2 * h2});
        for (std::int64_t i = 0; i < n; ++i) {
            std::copy(pn.ptr() + i * h2, pn.ptr() + (i + 1) * h2, pooled.ptr() + i * 2 * h2);
            std::copy(pe.ptr() + i * h2, pe.ptr() + (i + 1) * h2, pooled.ptr() + i * 2 * h2 + h2);
        }
        nn::fc_forward(pooled, head_w, head_b, logits);
    }
};

// ---------------------------------------------------------------------------
// Frame-by-frame classifier
// ---------------------------------------------------------------------------

template <class Real>
class StreamingClassifier {
  public:
    StreamingClassifier(DgnnModel& model, int stream_nodes, int image_height,
                        double confidence_threshold = 0.3, int history_len = 10)
        : net_(model),
          lookback_(model.cfg.lookback),
          stream_nodes_(stream_nodes),
          image_height_(image_height),
          conf_thr_(confidence_threshold),
          history_len_(history_len) {
        // the stream must carry at least the nodes the model's graph uses
        if (stream_nodes == net_.graph.node_count) {
            for (int i = 0; i < net_.graph.node_count; ++i) local_src_.push_back(i);
        } else if (stream_nodes == kWholeBodyNodes) {
            local_src_ = net_.graph.canonical_ids;
        } else {
            throw SchemaError("stream keypoint count does not match the model's graph");
        }
        history_.resize(static_cast<std::size_t>(stream_nodes));
        ring_.assign(static_cast<std::size_t>(lookback_) *
                         static_cast<std::size_t>(stream_nodes) * 2,
                     0.0f);
        nodes_.resize({1, 2, lookback_, net_.graph.node_count});
        edges_.resize({1, 2, lookback_, net_.graph.edge_count()});
    }

    int lookback() const { return lookback_; }

    /// Pushes one raw frame; returns a prediction once the window is full.
    std::optional<Prediction> feed(const std::vector<Keypoint>& raw) {
        DSM_CHECK(static_cast<int>(raw.size()) == stream_nodes_,
                  "streaming: wrong keypoint count");
        // impute on raw pixel coordinates
        imputed_.resize(raw.size());
        for (int v = 0; v < stream_nodes_; ++v) {
            Keypoint kp = raw[static_cast<std::size_t>(v)];
            if (!kp.present || kp.confidence < conf_thr_) {
                auto& h = history_[static_cast<std::size_t>(v)];
                if (h.empty()) {
                    kp.x = 0.0f;
                    kp.y = 0.0f;
                } else {
                    double sx = 0, sy = 0;
                    for (const auto& p : h) {
                        sx += p.first;
                        sy += p.second;
                    }
                    kp.x = static_cast<float>(sx / static_cast<double>(h.size()));
                    kp.y = static_cast<float>(sy / static_cast<double>(h.size()));
                }
            }
            auto& h = history_[static_cast<std::size_t>(v)];
            h.emplace_back(kp.x, kp.y);
            if (static_cast<int>(h.size()) > history_len_) h.pop_front();
            imputed_[static_cast<std::size_t>(v)] = kp;
        }
        // normalize and store into the ring
        const float nx = imputed_[0].x, ny = imputed_[0].y;
        const float ih = static_cast<float>(image_height_);
        float* slot = ring_.data() +
                      static_cast<std::size_t>(ring_pos_) * static_cast<std::size_t>(stream_nodes_) * 2;
        for (int v = 0; v < stream_nodes_; ++v) {
            slot[2 * v + 0] = (imputed_[static_cast<std::size_t>(v)].x - nx) / ih;
            slot[2 * v + 1] = (imputed_[static_cast<std::size_t>(v)].y - ny) / ih;
        }
        ring_pos_ = (ring_pos_ + 1) % lookback_;
        if (frames_seen_ < lookback_) ++frames_seen_;
        if (frames_seen_ < lookback_) return std::nullopt;

        // assemble [1,2,T,V] / [1,2,T,E] oldest-first
        const std::int64_t v_cnt = net_.graph.node_count;
        const std::int64_t e_cnt = net_.graph.edge_count();
        for (std::int64_t t = 0; t < lookback_; ++t) {
            const int src_frame = (ring_pos_ + static_cast<int>(t)) % lookback_;
            const float* f = ring_.data() + static_cast<std::size_t>(src_frame) *
                                                static_cast<std::size_t>(stream_nodes_) * 2;
            for (std::int64_t i = 0; i < v_cnt; ++i) {
                const int src = local_src_[static_cast<std::size_t>(i)];
                nodes_.ptr()[(0 * lookback_ + t) * v_cnt + i] = static_cast<Real>(f[2 * src + 0]);
                nodes_.ptr()[(1 * lookback_ + t) * v_cnt + i] = static_cast<Real>(f[2 * src + 1]);
            }
            for (std::int64_t j = 0; j < e_cnt; ++j) {
                const auto [s, tt] = net_.graph.edges[static_cast<std::size_t>(j)];
                edges_.ptr()[(0 * lookback_ + t) * e_cnt + j] =
                    nodes_.ptr()[(0 * lookback_ + t) * v_cnt + tt] -
                    nodes_.ptr()[(0 * lookback_ + t) * v_cnt + s];
                edges_.ptr()[(1 * lookback_ + t) * e_cnt + j] =
                    nodes_.ptr()[(1 * lookback_ + t) * v_cnt + tt] -
                    nodes_.ptr()[(1 * lookback_ + t) * v_cnt + s];
            }
        }
        net_.forward(nodes_, edges_, logits_);
        if constexpr (std::is_same_v<Real, double>) {
            return predict(logits_.ptr(), net_.cfg.num_classes);
        } else {
            double tmp[8];
            for (int k = 0; k < net_.cfg.num_classes; ++k)
                tmp[k] = static_cast<double>(logits_.ptr()[k]);
            return predict(tmp, net_.cfg.num_classes);
        }
    }

  private:
    InferenceNet<Real> net_;
    int lookback_;
    int stream_nodes_;
    int image_height_;
    double conf_thr_;
    int history_len_;
    std::vector<int> local_src_;
    std::vector<std::deque<std::pair<float, float>>> history_;
    std::vector<float> ring_;  // [lookback][stream_nodes][2], circular
    int ring_pos_ = 0;
    int frames_seen_ = 0;
    std::vector<Keypoint> imputed_;
    TensorT<Real> nodes_, edges_, logits_;
};

}  // namespace dsm
