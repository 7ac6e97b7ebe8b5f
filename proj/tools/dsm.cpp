// dsm: driver state monitoring from keypoint streams.
//
// Subcommands cover the full pipeline: synthetic dataset generation, model
// training, evaluation, the ablation study, occlusion sensitivity analysis,
// streaming inference and graph export. Every run writes a manifest next to
// its outputs.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dsm/checkpoint.hpp"
#include "dsm/explain.hpp"
#include "dsm/infer.hpp"
#include "dsm/manifest.hpp"
#include "dsm/model.hpp"
#include "dsm/pipeline.hpp"
#include "dsm/synth.hpp"
#include "dsm/train.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct CommonFlags {
    std::uint64_t seed = 0;
    bool deterministic = false;
    int threads = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--seed", seed, "master random seed");
        cmd->add_flag("--deterministic", deterministic,
                      "bitwise-reproducible mode (timings zeroed in logs)");
        cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
    }
};

struct TrainFlags {
    std::string data_dir;
    std::string out_dir = "run";
    std::string graph_config = "wholebody";
    int classes = 3;
    int epochs = 60;
    double lr = 0.001;
    int batch_size = 1024;
    int lookback = 15;
    int window_stride = 1;
    double label_smoothing = 0.1;
    int hidden1 = 32;
    int hidden2 = 64;

    void attach(CLI::App* cmd, bool with_config = true) {
        cmd->add_option("--data", data_dir, "dataset directory (with manifest.json)")->required();
        cmd->add_option("--out", out_dir, "output directory");
        if (with_config)
            cmd->add_option("--config", graph_config, "graph configuration")
                ->check(CLI::IsMember({"wholebody", "face", "skeleton"}));
        cmd->add_option("--classes", classes, "2 or 3 class model")->check(CLI::IsMember({2, 3}));
        cmd->add_option("--epochs", epochs, "training epochs");
        cmd->add_option("--lr", lr, "learning rate");
        cmd->add_option("--batch-size", batch_size, "mini-batch size");
        cmd->add_option("--lookback", lookback, "window length in frames");
        cmd->add_option("--stride", window_stride, "training window stride");
        cmd->add_option("--label-smoothing", label_smoothing, "label smoothing epsilon");
        cmd->add_option("--hidden1", hidden1, "channels of the first GTC block");
        cmd->add_option("--hidden2", hidden2, "channels of the second GTC block");
    }

    ModelConfig model_config() const {
        ModelConfig mc;
        mc.num_classes = classes;
        mc.graph = dsm::graph_config_from_string(graph_config);
        mc.hidden1 = hidden1;
        mc.hidden2 = hidden2;
        mc.lookback = lookback;
        return mc;
    }

    dsm::TrainConfig train_config(const CommonFlags& common) const {
        dsm::TrainConfig tc;
        tc.learning_rate = lr;
        tc.epochs = epochs;
        tc.batch_size = batch_size;
        tc.lookback = lookback;
        tc.window_stride = window_stride;
        tc.label_smoothing_eps = label_smoothing;
        tc.seed = common.seed;
        tc.deterministic = common.deterministic;
        return tc;
    }

    nlohmann::json snapshot() const {
        return {{"data", data_dir},       {"out", out_dir},
                {"config", graph_config}, {"classes", classes},
                {"epochs", epochs},       {"lr", lr},
                {"batch_size", batch_size},
                {"lookback", lookback},   {"stride", window_stride},
                {"label_smoothing", label_smoothing},
                {"hidden1", hidden1},     {"hidden2", hidden2}};
    }
};

dsm::ModelConfig apply_overrides(const dsm::ModelConfig& from_ckpt) { return from_ckpt; }

int cmd_synth(const CommonFlags& common, const dsm::GeneratorConfig& gc_in,
              const std::string& out_dir) {
    const auto t0 = Clock::now();
    dsm::GeneratorConfig gc = gc_in;
    gc.seed = common.seed;
    auto manifest = dsm::generate_dataset(gc, out_dir);
    std::cout << "wrote " << manifest.size() << " sessions to " << out_dir << "\n";

    dsm::RunManifest rm;
    rm.command = "synth";
    rm.seed = common.seed;
    rm.deterministic = common.deterministic;
    rm.threads = common.threads;
    rm.config = {{"train_subjects", gc.n_train_subjects},
                 {"test_subjects", gc.n_test_subjects},
                 {"session_frames", gc.session_frames},
                 {"noise_sigma_light", gc.noise_sigma_light},
                 {"noise_sigma_dark", gc.noise_sigma_dark},
                 {"missing_prob_light", gc.missing_prob_light},
                 {"missing_prob_dark", gc.missing_prob_dark},
                 {"sudden_period_frames", gc.sudden_period_frames}};
    rm.outputs = {out_dir};
    rm.wall_ms = ms_since(t0);
    rm.write((fs::path(out_dir) / "run_manifest.json").string());
    return 0;
}

int cmd_train(const CommonFlags& common, const TrainFlags& tf) {
    const auto t0 = Clock::now();
    dsm::ParallelPool pool(common.threads);
    fs::create_directories(tf.out_dir);

    auto data = dsm::load_dataset(tf.data_dir, &pool);
    auto [train_sessions, test_sessions] =
        dsm::split_by_subject(data.sessions, data.train_subjects, data.test_subjects);
    if (train_sessions.empty()) throw dsm::ConfigError("no training sessions in dataset");

    dsm::ModelConfig mc = tf.model_config();
    dsm::TrainConfig tc = tf.train_config(common);
    tc.train_subjects = data.train_subjects;
    tc.test_subjects = data.test_subjects;

    std::vector<dsm::EpochLog> log;
    auto model = dsm::train(train_sessions, mc, tc, &log, &pool, &std::cerr);

    const std::string ckpt = (fs::path(tf.out_dir) / "checkpoint.dsm").string();
    dsm::save_checkpoint(*model, ckpt);
    {
        std::ofstream lf(fs::path(tf.out_dir) / "training_log.csv");
        dsm::write_training_log_csv(lf, log, common.deterministic);
    }

    dsm::RunManifest rm;
    rm.command = "train";
    rm.seed = common.seed;
    rm.deterministic = common.deterministic;
    rm.threads = pool.threads();
    rm.config = tf.snapshot();
    rm.inputs = {tf.data_dir};
    rm.outputs = {ckpt, (fs::path(tf.out_dir) / "training_log.csv").string()};
    rm.wall_ms = ms_since(t0);
    rm.write((fs::path(tf.out_dir) / "run_manifest.json").string());
    std::cout << "checkpoint: " << ckpt << "\n";
    return 0;
}

int cmd_eval(const CommonFlags& common, const std::string& ckpt_path, const std::string& data_dir,
             const std::string& out_dir, int eval_stride, bool by_lighting, int expect_classes) {
    const auto t0 = Clock::now();
    dsm::ParallelPool pool(common.threads);
    fs::create_directories(out_dir);

    auto model = dsm::load_checkpoint(ckpt_path);
    if (expect_classes != 0 && model->cfg.num_classes != expect_classes)
        throw dsm::ConfigError("checkpoint is a " + std::to_string(model->cfg.num_classes) +
                               "-class model, requested " + std::to_string(expect_classes) +
                               "-class evaluation");

    auto data = dsm::load_dataset(data_dir, &pool);
    auto test_sessions = dsm::sessions_for_subjects(data.sessions, data.test_subjects);
    if (test_sessions.empty()) throw dsm::ConfigError("no test sessions in dataset");

    dsm::MetricsReport mr =
        dsm::evaluate(*model, test_sessions, model->cfg.lookback, eval_stride, &pool);

    {
        std::ofstream out(fs::path(out_dir) / "metrics.txt");
        dsm::write_report_text(out, mr);
    }
    {
        std::ofstream out(fs::path(out_dir) / "metrics.json");
        out << dsm::report_to_json(mr) << "\n";
    }
    {
        std::ofstream out(fs::path(out_dir) / "confusion.csv");
        dsm::write_confusion_csv(out, mr.confusion, mr.num_classes);
    }
    if (by_lighting) {
        for (const auto& [cond, m] : mr.lighting_confusion) {
            std::ofstream out(fs::path(out_dir) /
                              (std::string("confusion_") + dsm::to_string(cond) + ".csv"));
            dsm::write_confusion_csv(out, m, mr.num_classes);
        }
    }
    dsm::write_report_text(std::cout, mr);

    dsm::RunManifest rm;
    rm.command = "eval";
    rm.seed = common.seed;
    rm.deterministic = common.deterministic;
    rm.threads = pool.threads();
    rm.config = {{"checkpoint", ckpt_path},
                 {"data", data_dir},
                 {"eval_stride", eval_stride},
                 {"by_lighting", by_lighting}};
    rm.inputs = {ckpt_path, data_dir};
    rm.outputs = {(fs::path(out_dir) / "metrics.txt").string(),
                  (fs::path(out_dir) / "metrics.json").string()};
    rm.wall_ms = ms_since(t0);
    rm.write((fs::path(out_dir) / "run_manifest.json").string());
    return 0;
}

int cmd_ablate(const CommonFlags& common, const TrainFlags& tf, int eval_stride) {
    const auto t0 = Clock::now();
    dsm::ParallelPool pool(common.threads);
    fs::create_directories(tf.out_dir);

    auto data = dsm::load_dataset(tf.data_dir, &pool);
    auto [train_sessions, test_sessions] =
        dsm::split_by_subject(data.sessions, data.train_subjects, data.test_subjects);

    dsm::ModelConfig mc = tf.model_config();
    dsm::TrainConfig tc = tf.train_config(common);

    dsm::AblationReport rep =
        dsm::run_ablation(train_sessions, test_sessions, mc, tc, eval_stride, &pool, &std::cerr);

    {
        std::ofstream out(fs::path(tf.out_dir) / "ablation.csv");
        dsm::write_ablation_csv(out, rep);
    }
    for (const auto& [gc, mr] : rep.reports) {
        std::ofstream out(fs::path(tf.out_dir) /
                          (std::string("metrics_") + dsm::to_string(gc) + ".txt"));
        dsm::write_report_text(out, mr);
        std::ofstream cj(fs::path(tf.out_dir) /
                         (std::string("confusion_") + dsm::to_string(gc) + ".csv"));
        dsm::write_confusion_csv(cj, mr.confusion, mr.num_classes);
    }
    {
        std::ofstream out(fs::path(tf.out_dir) / "ablation.csv", std::ios::app);
    }
    std::cout << "ablation table written to " << (fs::path(tf.out_dir) / "ablation.csv").string()
              << "\n";

    dsm::RunManifest rm;
    rm.command = "ablate";
    rm.seed = common.seed;
    rm.deterministic = common.deterministic;
    rm.threads = pool.threads();
    rm.config = tf.snapshot();
    rm.config["eval_stride"] = eval_stride;
    rm.inputs = {tf.data_dir};
    rm.outputs = {(fs::path(tf.out_dir) / "ablation.csv").string()};
    rm.wall_ms = ms_since(t0);
    rm.write((fs::path(tf.out_dir) / "run_manifest.json").string());
    return 0;
}

int cmd_occlude(const CommonFlags& common, const std::string& ckpt_path,
                const std::string& data_dir, const std::string& out_dir, int eval_stride,
                const std::string& lighting_filter) {
    const auto t0 = Clock::now();
    dsm::ParallelPool pool(common.threads);
    fs::create_directories(out_dir);

    auto model = dsm::load_checkpoint(ckpt_path);
    auto data = dsm::load_dataset(data_dir, &pool);
    auto test_sessions = dsm::sessions_for_subjects(data.sessions, data.test_subjects);
    if (!lighting_filter.empty()) {
        const dsm::Lighting want = dsm::lighting_from_string(lighting_filter);
        std::vector<dsm::NormalizedSession> filtered;
        for (auto& s : test_sessions)
            if (s.lighting == want) filtered.push_back(std::move(s));
        test_sessions = std::move(filtered);
    }
    if (test_sessions.empty()) throw dsm::ConfigError("no matching test sessions");

    dsm::OcclusionReport rep = dsm::occlusion_sensitivity(*model, test_sessions,
                                                          model->cfg.lookback, eval_stride, &pool);
    const std::string csv = (fs::path(out_dir) / "occlusion.csv").string();
    {
        std::ofstream out(csv);
        dsm::write_occlusion_csv(out, rep, model->cfg.num_classes);
    }
    auto order = rep.ranking_by_prob();
    std::cout << "baseline accuracy " << rep.baseline_accuracy << "\n";
    std::cout << "top nodes by probability drop:\n";
    for (std::size_t i = 0; i < order.size() && i < 5; ++i) {
        const auto& n = rep.nodes[static_cast<std::size_t>(order[i] - 1)];
        std::cout << "  " << n.node_id << " " << n.name << " " << n.importance_prob << "\n";
    }

    dsm::RunManifest rm;
    rm.command = "occlude";
    rm.seed = common.seed;
    rm.deterministic = common.deterministic;
    rm.threads = pool.threads();
    rm.config = {{"checkpoint", ckpt_path},
                 {"data", data_dir},
                 {"eval_stride", eval_stride},
                 {"lighting", lighting_filter}};
    rm.inputs = {ckpt_path, data_dir};
    rm.outputs = {csv};
    rm.wall_ms = ms_since(t0);
    rm.write((fs::path(out_dir) / "run_manifest.json").string());
    return 0;
}

template <class Real>
int run_infer_stream(dsm::DgnnModel& model, std::istream& in, std::ostream& out,
                     const std::string& summary_path) {
    std::string line;
    if (!std::getline(in, line)) throw dsm::ParseError("empty stream: missing header");
    nlohmann::json header = nlohmann::json::parse(line);
    const auto stream_config =
        dsm::graph_config_from_string(header.at("config").get<std::string>());
    const int stream_nodes = dsm::node_count(stream_config);
    const int image_height = header.at("image_height").get<int>();

    dsm::StreamingClassifier<Real> clf(model, stream_nodes, image_height);
    std::vector<double> latencies;
    std::vector<dsm::Keypoint> kps(static_cast<std::size_t>(stream_nodes));
    char buf[256];
    std::int64_t classified = 0, warmups = 0;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto t0 = Clock::now();
        nlohmann::json rec = nlohmann::json::parse(line);
        const std::int64_t frame_idx = rec.at("frame_idx").get<std::int64_t>();
        const auto& arr = rec.at("keypoints");
        if (static_cast<int>(arr.size()) != stream_nodes)
            throw dsm::SchemaError("frame " + std::to_string(frame_idx) +
                                   ": wrong keypoint count");
        for (int i = 0; i < stream_nodes; ++i) {
            const auto& a = arr[static_cast<std::size_t>(i)];
            kps[static_cast<std::size_t>(i)].x = a[0].get<float>();
            kps[static_cast<std::size_t>(i)].y = a[1].get<float>();
            kps[static_cast<std::size_t>(i)].confidence = a[2].get<float>();
            kps[static_cast<std::size_t>(i)].present =
                a[3].is_boolean() ? a[3].get<bool>() : a[3].get<int>() != 0;
        }
        auto pred = clf.feed(kps);
        const double ms = ms_since(t0);
        if (!pred) {
            ++warmups;
            out << "{\"frame_idx\":" << frame_idx << ",\"state\":\"warming_up\"}\n";
            continue;
        }
        ++classified;
        latencies.push_back(ms);
        const auto& pr = *pred;
        const double p_alert = pr.probs[0];
        const double p_notalert = pr.probs.size() > 1 ? pr.probs[1] : 0.0;
        const double p_path = pr.probs.size() > 2 ? pr.probs[2] : 0.0;
        std::snprintf(buf, sizeof buf,
                      "{\"frame_idx\":%lld,\"state\":\"%s\",\"p_alert\":%.6f,"
                      "\"p_notalert\":%.6f,\"p_pathological\":%.6f,\"latency_ms\":%.3f}\n",
                      static_cast<long long>(frame_idx),
                      dsm::class_name(pr.cls, static_cast<int>(pr.probs.size())), p_alert,
                      p_notalert, p_path, ms);
        out << buf;
    }

    if (!latencies.empty()) {
        auto sorted = latencies;
        std::sort(sorted.begin(), sorted.end());
        auto q = [&](double p) {
            return sorted[static_cast<std::size_t>(p * (static_cast<double>(sorted.size()) - 1))];
        };
        std::cerr << "frames classified " << classified << ", warm-up " << warmups << ", p50 "
                  << q(0.5) << " ms, p99 " << q(0.99) << " ms, max " << sorted.back() << " ms\n";
        if (!summary_path.empty()) {
            std::ofstream sf(summary_path);
            char sbuf[256];
            std::snprintf(sbuf, sizeof sbuf,
                          "{\"classified\":%lld,\"warmup\":%lld,\"p50_ms\":%.3f,\"p99_ms\":%.3f,"
                          "\"max_ms\":%.3f}\n",
                          static_cast<long long>(classified), static_cast<long long>(warmups),
                          q(0.5), q(0.99), sorted.back());
            sf << sbuf;
        }
    }
    return 0;
}

int cmd_graph_export(const std::string& config) {
    const dsm::GraphSpec g = dsm::build_graph(dsm::graph_config_from_string(config));
    std::cout << "config " << dsm::to_string(g.config) << "\n";
    std::cout << "nodes " << g.node_count << "\n";
    for (int i = 0; i < g.node_count; ++i)
        std::cout << i << " " << dsm::node_names()[static_cast<std::size_t>(
                         g.canonical_ids[static_cast<std::size_t>(i)])]
                  << "\n";
    std::cout << "edges " << g.edge_count() << "\n";
    for (const auto& [s, t] : g.edges) std::cout << s << " -> " << t << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"driver state monitoring from facial and skeletal keypoint streams"};
    app.require_subcommand(1);
    app.set_config("--config-file", "", "read flags from a configuration file");

    CommonFlags common;

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic labelled dataset");
    dsm::GeneratorConfig gc;
    std::string synth_out = "data";
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--train-subjects", gc.n_train_subjects, "training subjects");
    synth->add_option("--test-subjects", gc.n_test_subjects, "held-out subjects");
    synth->add_option("--frames", gc.session_frames, "frames per session");
    synth->add_option("--noise-light", gc.noise_sigma_light, "light-condition pixel noise");
    synth->add_option("--noise-dark", gc.noise_sigma_dark, "dark-condition pixel noise");
    synth->add_option("--missing-light", gc.missing_prob_light, "light-condition missing rate");
    synth->add_option("--missing-dark", gc.missing_prob_dark, "dark-condition missing rate");
    common.attach(synth);

    // train
    auto* train_cmd = app.add_subcommand("train", "train a classifier on a dataset");
    TrainFlags tf;
    tf.attach(train_cmd);
    common.attach(train_cmd);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on held-out subjects");
    std::string ckpt_path, eval_data, eval_out = "eval";
    int eval_stride = 15, expect_classes = 0;
    bool by_lighting = false;
    eval_cmd->add_option("--checkpoint", ckpt_path)->required();
    eval_cmd->add_option("--data", eval_data)->required();
    eval_cmd->add_option("--out", eval_out);
    eval_cmd->add_option("--eval-stride", eval_stride, "window stride for evaluation");
    eval_cmd->add_option("--classes", expect_classes, "require this class count");
    eval_cmd->add_flag("--by-lighting", by_lighting, "emit per-lighting confusion matrices");
    common.attach(eval_cmd);

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "train and compare all three graph configs");
    TrainFlags af;
    af.out_dir = "ablation";
    af.attach(ablate_cmd, /*with_config=*/false);
    int ablate_eval_stride = 15;
    ablate_cmd->add_option("--eval-stride", ablate_eval_stride);
    common.attach(ablate_cmd);

    // occlude
    auto* occl_cmd = app.add_subcommand("occlude", "occlusion sensitivity analysis");
    std::string occl_ckpt, occl_data, occl_out = "occlusion", occl_lighting;
    int occl_stride = 15;
    occl_cmd->add_option("--checkpoint", occl_ckpt)->required();
    occl_cmd->add_option("--data", occl_data)->required();
    occl_cmd->add_option("--out", occl_out);
    occl_cmd->add_option("--eval-stride", occl_stride);
    occl_cmd->add_option("--lighting", occl_lighting, "restrict to one lighting condition");
    common.attach(occl_cmd);

    // infer
    auto* infer_cmd = app.add_subcommand("infer", "stream classification frame by frame");
    std::string infer_ckpt, infer_input, infer_summary, precision = "f64";
    infer_cmd->add_option("--checkpoint", infer_ckpt)->required();
    infer_cmd->add_option("--input", infer_input, "keypoint stream file (default: stdin)");
    infer_cmd->add_option("--summary", infer_summary, "write latency summary JSON here");
    infer_cmd->add_option("--precision", precision)->check(CLI::IsMember({"f64", "f32"}));
    common.attach(infer_cmd);

    // graph
    auto* graph_cmd = app.add_subcommand("graph", "inspect graph definitions");
    auto* graph_export = graph_cmd->add_subcommand("export", "print node table and edge list");
    std::string graph_config = "wholebody";
    graph_export->add_option("--config", graph_config)
        ->check(CLI::IsMember({"wholebody", "face", "skeleton"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) return cmd_synth(common, gc, synth_out);
        if (*train_cmd) return cmd_train(common, tf);
        if (*eval_cmd)
            return cmd_eval(common, ckpt_path, eval_data, eval_out, eval_stride, by_lighting,
                            expect_classes);
        if (*ablate_cmd) return cmd_ablate(common, af, ablate_eval_stride);
        if (*occl_cmd)
            return cmd_occlude(common, occl_ckpt, occl_data, occl_out, occl_stride, occl_lighting);
        if (*infer_cmd) {
            auto model = dsm::load_checkpoint(infer_ckpt);
            std::ifstream file;
            std::istream* in = &std::cin;
            if (!infer_input.empty()) {
                file.open(infer_input);
                if (!file) throw std::runtime_error("cannot open " + infer_input);
                in = &file;
            }
            if (precision == "f32")
                return run_infer_stream<float>(*model, *in, std::cout, infer_summary);
            return run_infer_stream<double>(*model, *in, std::cout, infer_summary);
        }
        if (*graph_cmd) {
            if (*graph_export) return cmd_graph_export(graph_config);
            std::cerr << "error: graph requires a subcommand (export)\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
