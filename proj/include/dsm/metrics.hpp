#pragma once

#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dsm/common.hpp"
#include "dsm/keypoint_io.hpp"

namespace dsm {

/// Percentage of exact matches: 100 * correct / total.
inline double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
    DSM_CHECK(predictions.size() == labels.size(), "accuracy: length mismatch");
    DSM_CHECK(!predictions.empty(), "accuracy: empty input");
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == labels[i]) ++correct;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(predictions.size());
}

/// counts[i][j] = number of samples with true class i predicted as j.
inline std::vector<std::vector<std::int64_t>> confusion_matrix(const std::vector<int>& predictions,
                                                               const std::vector<int>& labels,
                                                               int k) {
    DSM_CHECK(predictions.size() == labels.size(), "confusion_matrix: length mismatch");
    std::vector<std::vector<std::int64_t>> m(static_cast<std::size_t>(k),
                                             std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int t = labels[i], p = predictions[i];
        DSM_CHECK(t >= 0 && t < k, "confusion_matrix: label out of range");
        DSM_CHECK(p >= 0 && p < k, "confusion_matrix: prediction out of range");
        m[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]++;
    }
    return m;
}

struct ClassStats {
    double precision = 0.0;
    double recall = 0.0;
};

struct MetricsReport {
    int num_classes = 0;
    double overall_accuracy = 0.0;
    std::vector<std::vector<std::int64_t>> confusion;
    std::vector<ClassStats> per_class;
    // per-lighting breakdown (only conditions that occur in the data)
    std::map<Lighting, double> lighting_accuracy;
    std::map<Lighting, std::vector<std::vector<std::int64_t>>> lighting_confusion;
    std::int64_t total_windows = 0;
};

inline MetricsReport build_report(const std::vector<int>& predictions,
                                  const std::vector<int>& labels,
                                  const std::vector<Lighting>& lighting, int k) {
    MetricsReport r;
    r.num_classes = k;
    r.total_windows = static_cast<std::int64_t>(labels.size());
    r.overall_accuracy = accuracy(predictions, labels);
    r.confusion = confusion_matrix(predictions, labels, k);
    r.per_class.resize(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        std::int64_t tp = r.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        std::int64_t row = 0, col = 0;
        for (int j = 0; j < k; ++j) {
            row += r.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
            col += r.confusion[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
        }
        r.per_class[static_cast<std::size_t>(c)].recall =
            row ? 100.0 * static_cast<double>(tp) / static_cast<double>(row) : 0.0;
        r.per_class[static_cast<std::size_t>(c)].precision =
            col ? 100.0 * static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    }
    if (!lighting.empty()) {
        DSM_CHECK(lighting.size() == labels.size(), "build_report: lighting length mismatch");
        std::map<Lighting, std::pair<std::vector<int>, std::vector<int>>> split;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            auto& bucket = split[lighting[i]];
            bucket.first.push_back(predictions[i]);
            bucket.second.push_back(labels[i]);
        }
        for (auto& [cond, pl] : split) {
            r.lighting_accuracy[cond] = accuracy(pl.first, pl.second);
            r.lighting_confusion[cond] = confusion_matrix(pl.first, pl.second, k);
        }
    }
    return r;
}

inline const char* class_name(int cls, int num_classes) {
    static const char* three[] = {"alert", "not_alert", "pathological"};
    (void)num_classes;
    return cls >= 0 && cls < 3 ? three[cls] : "?";
}

inline void write_confusion_csv(std::ostream& out,
                                const std::vector<std::vector<std::int64_t>>& m, int k) {
    out << "true\\pred";
    for (int j = 0; j < k; ++j) out << "," << class_name(j, k);
    out << "\n";
    for (int i = 0; i < k; ++i) {
        out << class_name(i, k);
        for (int j = 0; j < k; ++j)
            out << "," << m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        out << "\n";
    }
}

inline void write_report_text(std::ostream& out, const MetricsReport& r) {
    out << std::fixed << std::setprecision(4);
    out << "windows: " << r.total_windows << "\n";
    out << "overall_accuracy: " << r.overall_accuracy << "\n";
    out << "confusion (rows = true, cols = predicted):\n";
    for (int i = 0; i < r.num_classes; ++i) {
        out << "  " << std::setw(13) << class_name(i, r.num_classes) << " |";
        for (int j = 0; j < r.num_classes; ++j)
            out << std::setw(9)
                << r.confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        out << "\n";
    }
    for (int c = 0; c < r.num_classes; ++c)
        out << "class " << class_name(c, r.num_classes)
            << ": precision " << r.per_class[static_cast<std::size_t>(c)].precision
            << " recall " << r.per_class[static_cast<std::size_t>(c)].recall << "\n";
    for (const auto& [cond, acc] : r.lighting_accuracy)
        out << "lighting " << to_string(cond) << ": accuracy " << acc << "\n";
}

inline std::string report_to_json(const MetricsReport& r) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6);
    os << "{\"windows\":" << r.total_windows << ",\"overall_accuracy\":" << r.overall_accuracy;
    os << ",\"confusion\":[";
    for (int i = 0; i < r.num_classes; ++i) {
        os << (i ? ",[" : "[");
        for (int j = 0; j < r.num_classes; ++j)
            os << (j ? "," : "")
               << r.confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        os << "]";
    }
    os << "],\"lighting\":{";
    bool first = true;
    for (const auto& [cond, acc] : r.lighting_accuracy) {
        os << (first ? "" : ",") << "\"" << to_string(cond) << "\":" << acc;
        first = false;
    }
    os << "}}";
    return os.str();
}

}  // namespace dsm
