#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpadapter/model.hpp"

namespace dpadapter {

// Checkpoint layout (little-endian):
//   magic "DPADCKPT", u32 version, u64 config hash,
//   u32 layer count, u32 dims[layer count + 1],
//   f64 params[dim] in flatten() order.
inline constexpr char kCheckpointMagic[8] = {'D', 'P', 'A', 'D', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {
template <class T>
void write_pod(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T read_pod(std::istream& in, const std::string& what) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
        throw std::runtime_error("checkpoint: truncated while reading " + what);
    return v;
}
}  // namespace detail

inline void save_checkpoint(const std::string& path, const ModelParams& model,
                            std::uint64_t config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    out.write(kCheckpointMagic, 8);
    detail::write_pod(out, kCheckpointVersion);
    detail::write_pod(out, config_hash);
    auto dims = model.dims();
    detail::write_pod(out, static_cast<std::uint32_t>(model.layers.size()));
    for (std::size_t d : dims) detail::write_pod(out, static_cast<std::uint32_t>(d));
    for (double v : model.flatten()) detail::write_pod(out, v);
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

struct LoadedCheckpoint {
    ModelParams model;
    std::uint64_t config_hash = 0;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    auto version = detail::read_pod<std::uint32_t>(in, "version");
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    LoadedCheckpoint lc;
    lc.config_hash = detail::read_pod<std::uint64_t>(in, "config hash");
    auto n_layers = detail::read_pod<std::uint32_t>(in, "layer count");
    std::vector<std::size_t> dims(n_layers + 1);
    for (auto& d : dims) d = detail::read_pod<std::uint32_t>(in, "dims");
    lc.model = ModelParams::make(dims);
    std::vector<double> flat(lc.model.dim());
    for (double& v : flat) v = detail::read_pod<double>(in, "params");
    lc.model.unflatten(flat);
    return lc;
}

}  // namespace dpadapter
