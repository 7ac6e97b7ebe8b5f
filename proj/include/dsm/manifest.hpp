#pragma once

// Every CLI run drops a manifest next to its outputs: the resolved
// configuration, seed, paths and timings needed to reproduce the run.

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "dsm/common.hpp"

namespace dsm {

struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    bool deterministic = false;
    int threads = 0;
    nlohmann::json config = nlohmann::json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double wall_ms = 0.0;

    void write(const std::string& path) const {
        nlohmann::json j = {
            {"tool", "dsm"},
            {"tool_version", kVersion},
            {"command", command},
            {"seed", seed},
            {"deterministic", deterministic},
            {"threads", threads},
            {"config", config},
            {"inputs", inputs},
            {"outputs", outputs},
            {"wall_ms", wall_ms},
        };
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write manifest: " + path);
        out << j.dump(2) << "\n";
    }
};

}  // namespace dsm
