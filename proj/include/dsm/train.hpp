#pragma once

// Training loop and windowed evaluation. One epoch is one pass over every
// extracted window, in a seeded shuffle order; no early stopping and no
// learning-rate schedule.

#include <algorithm>
#include <chrono>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "dsm/dataset.hpp"
#include "dsm/metrics.hpp"
#include "dsm/model.hpp"
#include "dsm/ops.hpp"

namespace dsm {

struct TrainConfig {
    double learning_rate = 0.001;
    int epochs = 60;
    int batch_size = 1024;
    int lookback = 15;
    int window_stride = 1;
    double label_smoothing_eps = 0.1;
    std::uint64_t seed = 0;
    bool deterministic = false;
    std::vector<std::string> train_subjects;
    std::vector<std::string> test_subjects;
};

struct EpochLog {
    int epoch = 0;
    double loss = 0.0;
    double train_acc = 0.0;
    double wall_ms = 0.0;
};

/// Splits sessions by the configured subject lists; both lists must be
/// disjoint and non-empty on the train side.
inline std::pair<std::vector<NormalizedSession>, std::vector<NormalizedSession>> split_by_subject(
    const std::vector<NormalizedSession>& all, const std::vector<std::string>& train_subjects,
    const std::vector<std::string>& test_subjects) {
    std::set<std::string> tr(train_subjects.begin(), train_subjects.end());
    std::set<std::string> te(test_subjects.begin(), test_subjects.end());
    for (const auto& s : tr)
        if (te.count(s)) throw ConfigError("subject '" + s + "' appears in both splits");
    std::pair<std::vector<NormalizedSession>, std::vector<NormalizedSession>> out;
    for (const auto& s : all) {
        if (tr.count(s.subject_id)) out.first.push_back(s);
        else if (te.count(s.subject_id)) out.second.push_back(s);
    }
    return out;
}

/// Sessions usable under a class scheme (the binary model sees only
/// alert / not-alert recordings).
inline std::vector<NormalizedSession> filter_by_classes(const std::vector<NormalizedSession>& in,
                                                        int num_classes) {
    std::vector<NormalizedSession> out;
    for (const auto& s : in)
        if (static_cast<int>(s.state) < num_classes) out.push_back(s);
    return out;
}

inline std::unique_ptr<DgnnModel> train(const std::vector<NormalizedSession>& train_sessions,
                                        const ModelConfig& mc, const TrainConfig& tc,
                                        std::vector<EpochLog>* log = nullptr,
                                        ParallelPool* pool = nullptr,
                                        std::ostream* console = nullptr) {
    auto model = std::make_unique<DgnnModel>(mc);
    model->init_parameters(tc.seed);
    const GraphSpec& spec = model->graph;

    auto usable = filter_by_classes(train_sessions, mc.num_classes);
    if (usable.empty()) throw ConfigError("train: no usable training sessions");
    // windows overlapping cold-imputed frames never enter training
    auto refs = list_windows(usable, spec, tc.lookback, tc.window_stride, /*drop_cold=*/true);
    if (refs.empty()) throw ConfigError("train: training sessions yield no windows");

    auto params = model->parameters();
    nn::AdamConfig adam;
    adam.lr = tc.learning_rate;

    Activations acts;
    Tensor nodes, edges;
    std::vector<int> batch_labels;
    std::uint64_t global_step = 0;
    const std::uint64_t dropout_seed = derive_seed(tc.seed, "dropout_master");

    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng shuffle_rng(derive_seed(tc.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(refs);

        double loss_sum = 0.0;
        std::int64_t correct = 0, seen = 0;
        for (std::size_t off = 0; off < refs.size(); off += static_cast<std::size_t>(tc.batch_size)) {
            const std::int64_t n = std::min<std::int64_t>(
                tc.batch_size, static_cast<std::int64_t>(refs.size() - off));
            assemble_batch(usable, spec, refs.data() + off, n, tc.lookback, nodes, edges, pool);
            batch_labels.resize(static_cast<std::size_t>(n));
            for (std::int64_t i = 0; i < n; ++i) {
                const auto& r = refs[off + static_cast<std::size_t>(i)];
                batch_labels[static_cast<std::size_t>(i)] = window_label(
                    usable[static_cast<std::size_t>(r.session)].state, mc.num_classes);
            }

            model->forward(nodes, edges, nn::Mode::Train, acts, pool, dropout_seed, global_step);
            auto loss = nn::label_smoothing_loss(acts.logits, batch_labels, tc.label_smoothing_eps);
            model->zero_grad();
            model->backward(nodes, edges, loss.dlogits, acts, pool);
            nn::adam_step(params, adam);

            loss_sum += loss.loss * static_cast<double>(n);
            for (std::int64_t i = 0; i < n; ++i) {
                const double* l = acts.logits.ptr() + i * mc.num_classes;
                int am = 0;
                for (int k = 1; k < mc.num_classes; ++k)
                    if (l[k] > l[am]) am = k;
                if (am == batch_labels[static_cast<std::size_t>(i)]) ++correct;
            }
            seen += n;
            ++global_step;
        }
        const auto t1 = std::chrono::steady_clock::now();
        EpochLog el;
        el.epoch = epoch;
        el.loss = loss_sum / static_cast<double>(seen);
        el.train_acc = 100.0 * static_cast<double>(correct) / static_cast<double>(seen);
        el.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        if (log) log->push_back(el);
        if (console)
            *console << "epoch " << epoch << " loss " << el.loss << " train_acc " << el.train_acc
                     << " wall_ms " << static_cast<std::int64_t>(el.wall_ms) << "\n";
    }
    return model;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct WindowEval {
    std::vector<int> predictions;
    std::vector<int> labels;
    std::vector<Lighting> lighting;
    std::vector<double> p_true;  // probability assigned to the true class
};

/// Runs eval-mode inference over sliding windows of the given sessions.
/// Windows with cold-imputed frames are kept.
inline WindowEval eval_windows(DgnnModel& model, const std::vector<NormalizedSession>& sessions,
                               int lookback, int stride, ParallelPool* pool = nullptr,
                               int batch_size = 1024) {
    const GraphSpec& spec = model.graph;
    auto usable = filter_by_classes(sessions, model.cfg.num_classes);
    auto refs = list_windows(usable, spec, lookback, stride, /*drop_cold=*/false);
    WindowEval ev;
    ev.predictions.reserve(refs.size());
    ev.labels.reserve(refs.size());
    ev.lighting.reserve(refs.size());
    ev.p_true.reserve(refs.size());

    Activations acts;
    Tensor nodes, edges;
    const int k = model.cfg.num_classes;
    for (std::size_t off = 0; off < refs.size(); off += static_cast<std::size_t>(batch_size)) {
        const std::int64_t n =
            std::min<std::int64_t>(batch_size, static_cast<std::int64_t>(refs.size() - off));
        assemble_batch(usable, spec, refs.data() + off, n, lookback, nodes, edges, pool);
        model.forward(nodes, edges, nn::Mode::Eval, acts, pool);
        for (std::int64_t i = 0; i < n; ++i) {
            const auto& r = refs[off + static_cast<std::size_t>(i)];
            const auto& sess = usable[static_cast<std::size_t>(r.session)];
            const int label = window_label(sess.state, k);
            const Prediction p = predict(acts.logits.ptr() + i * k, k);
            ev.predictions.push_back(p.cls);
            ev.labels.push_back(label);
            ev.lighting.push_back(sess.lighting);
            ev.p_true.push_back(p.probs[static_cast<std::size_t>(label)]);
        }
    }
    return ev;
}

inline MetricsReport evaluate(DgnnModel& model, const std::vector<NormalizedSession>& sessions,
                              int lookback, int stride, ParallelPool* pool = nullptr) {
    WindowEval ev = eval_windows(model, sessions, lookback, stride, pool);
    DSM_CHECK(!ev.labels.empty(), "evaluate: no evaluation windows");
    return build_report(ev.predictions, ev.labels, ev.lighting, model.cfg.num_classes);
}

inline void write_training_log_csv(std::ostream& out, const std::vector<EpochLog>& log,
                                   bool zero_wall) {
    out << "epoch,loss,train_acc,wall_ms\n";
    char buf[128];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof buf, "%d,%.9f,%.6f,%.0f\n", e.epoch, e.loss, e.train_acc,
                      zero_wall ? 0.0 : e.wall_ms);
        out << buf;
    }
}

}  // namespace dsm
