#pragma once

// Versioned binary checkpoint container:
//   magic "DSMCKPT1" | u32 version | u8 dtype | u32 len + config text |
//   u32 array count | { u16 name_len, name, u64 count, raw values } ...
// Values are little-endian; dtype 0 stores 64-bit floats (exact round trip
// of a trained model), dtype 1 stores 32-bit floats for compact inference
// checkpoints. The config block is human-readable key=value text.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "dsm/model.hpp"

namespace dsm {

namespace detail {

inline std::string model_config_text(const ModelConfig& c) {
    std::ostringstream os;
    char fp[64];
    os << "num_classes=" << c.num_classes << "\n";
    os << "graph=" << to_string(c.graph) << "\n";
    os << "in_channels=" << c.in_channels << "\n";
    os << "hidden1=" << c.hidden1 << "\n";
    os << "hidden2=" << c.hidden2 << "\n";
    os << "temporal_kernel=" << c.temporal_kernel << "\n";
    os << "stride_block2=" << c.stride_block2 << "\n";
    std::snprintf(fp, sizeof fp, "%.17g", c.dropout_p);
    os << "dropout_p=" << fp << "\n";
    std::snprintf(fp, sizeof fp, "%.17g", c.leaky_slope);
    os << "leaky_slope=" << fp << "\n";
    os << "lookback=" << c.lookback << "\n";
    return os.str();
}

inline ModelConfig model_config_from_text(const std::string& text) {
    ModelConfig c;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "num_classes") c.num_classes = std::stoi(val);
        else if (key == "graph") c.graph = graph_config_from_string(val);
        else if (key == "in_channels") c.in_channels = std::stoi(val);
        else if (key == "hidden1") c.hidden1 = std::stoi(val);
        else if (key == "hidden2") c.hidden2 = std::stoi(val);
        else if (key == "temporal_kernel") c.temporal_kernel = std::stoi(val);
        else if (key == "stride_block2") c.stride_block2 = std::stoi(val);
        else if (key == "dropout_p") c.dropout_p = std::stod(val);
        else if (key == "leaky_slope") c.leaky_slope = std::stod(val);
        else if (key == "lookback") c.lookback = std::stoi(val);
        else throw CheckpointError("unknown config key in checkpoint: " + key);
    }
    return c;
}

inline std::string bn_prefix(const nn::BatchNorm& bn) {
    const std::string& g = bn.gamma.name;
    return g.substr(0, g.size() - std::strlen(".gamma"));
}

/// name -> tensor for everything a checkpoint persists: parameter values and
/// batch-norm running statistics.
inline std::map<std::string, Tensor*> named_arrays(DgnnModel& m) {
    std::map<std::string, Tensor*> arr;
    for (Parameter* p : m.parameters()) arr[p->name] = &p->value;
    for (nn::BatchNorm* bn : {&m.in_bn_nodes, &m.in_bn_edges, &m.dgn1.node_bn, &m.dgn1.edge_bn,
                              &m.dgn2.node_bn, &m.dgn2.edge_bn, &m.bitc1.node_bn,
                              &m.bitc1.edge_bn, &m.bitc2.node_bn, &m.bitc2.edge_bn}) {
        arr[bn_prefix(*bn) + ".running_mean"] = &bn->running_mean;
        arr[bn_prefix(*bn) + ".running_var"] = &bn->running_var;
    }
    return arr;
}

template <class T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void read_pod(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw CheckpointError("checkpoint truncated");
}

}  // namespace detail

inline constexpr char kCheckpointMagic[8] = {'D', 'S', 'M', 'C', 'K', 'P', 'T', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class CheckpointDtype : std::uint8_t { F64 = 0, F32 = 1 };

inline void save_checkpoint(DgnnModel& model, const std::string& path,
                            CheckpointDtype dtype = CheckpointDtype::F64) {
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint writer assumes a little-endian host");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    detail::write_pod(out, kCheckpointVersion);
    detail::write_pod(out, static_cast<std::uint8_t>(dtype));
    const std::string cfg = detail::model_config_text(model.cfg);
    detail::write_pod(out, static_cast<std::uint32_t>(cfg.size()));
    out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));

    auto arrays = detail::named_arrays(model);
    detail::write_pod(out, static_cast<std::uint32_t>(arrays.size()));
    for (const auto& [name, tensor] : arrays) {
        detail::write_pod(out, static_cast<std::uint16_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::write_pod(out, static_cast<std::uint64_t>(tensor->numel()));
        if (dtype == CheckpointDtype::F64) {
            out.write(reinterpret_cast<const char*>(tensor->ptr()),
                      static_cast<std::streamsize>(tensor->numel() * 8));
        } else {
            for (double v : tensor->data) {
                const float f = static_cast<float>(v);
                detail::write_pod(out, f);
            }
        }
    }
    if (!out) throw CheckpointError("checkpoint write failed: " + path);
}

inline std::unique_ptr<DgnnModel> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
        throw CheckpointError("bad checkpoint magic: " + path);
    std::uint32_t version = 0;
    detail::read_pod(in, version);
    if (version != kCheckpointVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    std::uint8_t dtype = 0;
    detail::read_pod(in, dtype);
    if (dtype > 1) throw CheckpointError("unknown checkpoint dtype");
    std::uint32_t cfg_len = 0;
    detail::read_pod(in, cfg_len);
    std::string cfg_text(cfg_len, '\0');
    in.read(cfg_text.data(), cfg_len);
    if (!in) throw CheckpointError("checkpoint truncated");

    auto model = std::make_unique<DgnnModel>(detail::model_config_from_text(cfg_text));
    auto arrays = detail::named_arrays(*model);
    std::uint32_t count = 0;
    detail::read_pod(in, count);
    if (count != arrays.size())
        throw CheckpointError("checkpoint array count mismatch (model structure differs)");
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint16_t name_len = 0;
        detail::read_pod(in, name_len);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in) throw CheckpointError("checkpoint truncated");
        auto it = arrays.find(name);
        if (it == arrays.end()) throw CheckpointError("unexpected array in checkpoint: " + name);
        std::uint64_t numel = 0;
        detail::read_pod(in, numel);
        if (numel != static_cast<std::uint64_t>(it->second->numel()))
            throw CheckpointError("array size mismatch for " + name);
        if (dtype == 0) {
            in.read(reinterpret_cast<char*>(it->second->ptr()),
                    static_cast<std::streamsize>(numel * 8));
            if (!in) throw CheckpointError("checkpoint truncated in " + name);
        } else {
            for (std::uint64_t j = 0; j < numel; ++j) {
                float f = 0.0f;
                detail::read_pod(in, f);
                (*it->second)[static_cast<std::size_t>(j)] = static_cast<double>(f);
            }
        }
    }
    return model;
}

}  // namespace dsm
