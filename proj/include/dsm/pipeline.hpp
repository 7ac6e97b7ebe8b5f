#pragma once

// Dataset-directory loading: manifest + session files -> compact normalized
// sessions ready for window extraction.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "dsm/dataset.hpp"
#include "dsm/keypoint_io.hpp"
#include "dsm/parallel.hpp"

namespace dsm {

struct LoadedDataset {
    std::vector<NormalizedSession> sessions;
    std::vector<std::string> train_subjects;
    std::vector<std::string> test_subjects;
};

/// Reads manifest.json and every session file, runs impute + normalize, and
/// compacts the frames. Files are parsed in parallel; the output order is
/// the manifest order.
inline LoadedDataset load_dataset(const std::string& dir, ParallelPool* pool = nullptr,
                                  int impute_history = 10) {
    namespace fs = std::filesystem;
    const fs::path mpath = fs::path(dir) / "manifest.json";
    std::ifstream mf(mpath);
    if (!mf) throw std::runtime_error("cannot open dataset manifest: " + mpath.string());
    nlohmann::json manifest = nlohmann::json::parse(mf);

    struct Entry {
        std::string file;
        std::string subject;
        bool train = true;
    };
    std::vector<Entry> entries;
    std::set<std::string> train_set, test_set;
    for (const auto& s : manifest.at("sessions")) {
        Entry e;
        e.file = s.at("file").get<std::string>();
        e.subject = s.at("subject_id").get<std::string>();
        e.train = s.at("split").get<std::string>() == "train";
        (e.train ? train_set : test_set).insert(e.subject);
        entries.push_back(std::move(e));
    }

    LoadedDataset out;
    out.sessions.resize(entries.size());
    out.train_subjects.assign(train_set.begin(), train_set.end());
    out.test_subjects.assign(test_set.begin(), test_set.end());

    std::vector<std::string> errors(entries.size());
    nn::serial_or_pool(pool, static_cast<std::int64_t>(entries.size()),
                       [&](int, std::int64_t lo, std::int64_t hi) {
                           for (std::int64_t i = lo; i < hi; ++i) {
                               const auto& e = entries[static_cast<std::size_t>(i)];
                               try {
                                   std::ifstream in(fs::path(dir) / e.file);
                                   if (!in) throw std::runtime_error("cannot open " + e.file);
                                   SessionRecording s = parse_session(in);
                                   s = impute_missing(std::move(s), impute_history);
                                   s = normalize_to_nose(std::move(s));
                                   out.sessions[static_cast<std::size_t>(i)] = compact_session(s);
                               } catch (const std::exception& ex) {
                                   errors[static_cast<std::size_t>(i)] =
                                       e.file + ": " + ex.what();
                               }
                           }
                       });
    for (const auto& err : errors)
        if (!err.empty()) throw std::runtime_error("dataset load failed: " + err);
    return out;
}

inline std::vector<NormalizedSession> sessions_for_subjects(
    const std::vector<NormalizedSession>& all, const std::vector<std::string>& subjects) {
    std::set<std::string> keep(subjects.begin(), subjects.end());
    std::vector<NormalizedSession> out;
    for (const auto& s : all)
        if (keep.count(s.subject_id)) out.push_back(s);
    return out;
}

}  // namespace dsm
