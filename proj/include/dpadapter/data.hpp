#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpadapter/rng.hpp"
#include "dpadapter/tensor.hpp"

namespace dpadapter {

struct Dataset {
    Tensor features;  // [n, d_in]
    std::vector<int> labels;
    std::string name;
    std::vector<double> norm_mean;  // per feature, from the training split
    std::vector<double> norm_std;

    std::size_t size() const { return features.rows(); }
    std::size_t input_dim() const { return features.cols(); }
    int num_classes() const {
        int k = 0;
        for (int y : labels) k = std::max(k, y + 1);
        return k;
    }

    Tensor rows_of(const std::vector<std::size_t>& idx) const {
        Tensor out({idx.size(), features.cols()});
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < features.cols(); ++j)
                out.at(i, j) = features.at(idx[i], j);
        return out;
    }
    std::vector<int> labels_of(const std::vector<std::size_t>& idx) const {
        std::vector<int> out(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) out[i] = labels[idx[i]];
        return out;
    }
};

enum class TransferRelation { IidSplit, ShiftedDistribution };

struct TransferTask {
    Dataset upstream;
    Dataset downstream_train;
    Dataset downstream_test;
    TransferRelation relation = TransferRelation::IidSplit;
};

struct SyntheticConfig {
    std::size_t n_up = 2700;
    std::size_t n_down = 150;   // downstream train size; test set same size
    std::size_t d_in = 20;
    int k = 5;
    double class_sep = 3.0;     // class mean separation in units of sigma
    double shift_magnitude = 1.0;   // mean offset for shifted mode
    double cov_scale = 1.1;         // covariance scaling for shifted mode
};

namespace detail {

// k class means at pairwise distance ~ class_sep, unit spherical covariance
inline std::vector<std::vector<double>> class_means(Rng& rng, int k, std::size_t d,
                                                    double sep) {
    std::vector<std::vector<double>> means(k, std::vector<double>(d));
    for (auto& m : means) {
        for (double& x : m) x = normal(rng);
        double n = l2_norm(m);
        for (double& x : m) x *= sep / (n > 0 ? n : 1.0);
    }
    return means;
}

inline Dataset sample_mixture(Rng& rng, const std::vector<std::vector<double>>& means,
                              double sigma, std::size_t n, const std::string& name) {
    std::size_t d = means.front().size();
    int k = static_cast<int>(means.size());
    Dataset ds;
    ds.name = name;
    ds.features = Tensor({n, d});
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        int y = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(k)));
        ds.labels[i] = y;
        for (std::size_t j = 0; j < d; ++j)
            ds.features.at(i, j) = means[y][j] + sigma * normal(rng);
    }
    return ds;
}

inline void normalize_with(Dataset& ds, const std::vector<double>& mean,
                           const std::vector<double>& std) {
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = 0; j < ds.input_dim(); ++j)
            ds.features.at(i, j) = (ds.features.at(i, j) - mean[j]) / std[j];
    ds.norm_mean = mean;
    ds.norm_std = std;
}

inline void compute_norm(const Dataset& train, std::vector<double>& mean,
                         std::vector<double>& std) {
    std::size_t d = train.input_dim(), n = train.size();
    mean.assign(d, 0.0);
    std.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += train.features.at(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double c = train.features.at(i, j) - mean[j];
            std[j] += c * c;
        }
    for (double& s : std) s = std::sqrt(s / static_cast<double>(n)) + 1e-12;
}

}  // namespace detail

// Gaussian-mixture transfer task. IidSplit draws upstream and downstream
// from one pool (disjoint by construction); ShiftedDistribution offsets the
// class means and rescales the covariance for the downstream side.
inline TransferTask make_synthetic_transfer(std::uint64_t seed, TransferRelation mode,
                                            const SyntheticConfig& cfg = {}) {
    if (cfg.k < 2) throw std::invalid_argument("make_synthetic_transfer: k must be >= 2");
    if (cfg.n_up < 10 * static_cast<std::size_t>(cfg.k) ||
        cfg.n_down < 10 * static_cast<std::size_t>(cfg.k))
        throw std::invalid_argument("make_synthetic_transfer: need >= 10*k samples per split");

    Rng rng(derive_seed(seed, 0xDA7A));
    auto means = detail::class_means(rng, cfg.k, cfg.d_in, cfg.class_sep);

    TransferTask task;
    task.relation = mode;

    if (mode == TransferRelation::IidSplit ||
        (cfg.shift_magnitude == 0.0 && cfg.cov_scale == 1.0)) {
        // One pool, split into disjoint upstream / downstream-train / test.
        std::size_t total = cfg.n_up + 2 * cfg.n_down;
        Dataset pool = detail::sample_mixture(rng, means, 1.0, total, "pool");
        auto take = [&](std::size_t lo, std::size_t hi, const std::string& name) {
            std::vector<std::size_t> idx(hi - lo);
            std::iota(idx.begin(), idx.end(), lo);
            Dataset d;
            d.name = name;
            d.features = pool.rows_of(idx);
            d.labels = pool.labels_of(idx);
            return d;
        };
        task.upstream = take(0, cfg.n_up, "upstream");
        task.downstream_train = take(cfg.n_up, cfg.n_up + cfg.n_down, "downstream_train");
        task.downstream_test =
            take(cfg.n_up + cfg.n_down, cfg.n_up + 2 * cfg.n_down, "downstream_test");
    } else {
        task.upstream = detail::sample_mixture(rng, means, 1.0, cfg.n_up, "upstream");
        // bounded per-class mean offset plus mild covariance scaling
        std::vector<std::vector<double>> down_means = means;
        for (auto& m : down_means) {
            std::vector<double> off(cfg.d_in);
            for (double& x : off) x = normal(rng);
            double n = l2_norm(off);
            for (std::size_t j = 0; j < cfg.d_in; ++j)
                m[j] += cfg.shift_magnitude * off[j] / (n > 0 ? n : 1.0);
        }
        task.downstream_train = detail::sample_mixture(rng, down_means, cfg.cov_scale,
                                                       cfg.n_down, "downstream_train");
        task.downstream_test = detail::sample_mixture(rng, down_means, cfg.cov_scale,
                                                      cfg.n_down, "downstream_test");
    }

    std::vector<double> mean, std;
    detail::compute_norm(task.upstream, mean, std);
    detail::normalize_with(task.upstream, mean, std);
    // downstream normalization from the downstream training split only
    std::vector<double> dmean, dstd;
    detail::compute_norm(task.downstream_train, dmean, dstd);
    detail::normalize_with(task.downstream_train, dmean, dstd);
    detail::normalize_with(task.downstream_test, dmean, dstd);
    return task;
}

// ---- IDX binary format (big-endian magic + dims + raw bytes) ----

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const std::string& path, std::size_t offset) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("IDX format error in " + path + ": truncated at byte " +
                                 std::to_string(offset));
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace detail

// Loads an MNIST-style IDX image/label file pair. Pixels are scaled to [0,1]
// and then normalized per feature.
inline Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("cannot open " + images_path);
    std::uint32_t magic = detail::read_be32(img, images_path, 0);
    if (magic != 0x00000803)
        throw std::runtime_error("IDX format error in " + images_path +
                                 ": bad magic at byte 0, expected 0x00000803");
    std::uint32_t n = detail::read_be32(img, images_path, 4);
    std::uint32_t rows = detail::read_be32(img, images_path, 8);
    std::uint32_t cols = detail::read_be32(img, images_path, 12);
    std::size_t d = static_cast<std::size_t>(rows) * cols;
    Dataset ds;
    ds.name = images_path;
    ds.features = Tensor({n, d});
    std::vector<unsigned char> buf(d);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(d)))
            throw std::runtime_error("IDX format error in " + images_path +
                                     ": truncated at byte " + std::to_string(16 + std::size_t(i) * d));
        for (std::size_t j = 0; j < d; ++j)
            ds.features.at(i, j) = static_cast<double>(buf[j]) / 255.0;
    }

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot open " + labels_path);
    std::uint32_t lmagic = detail::read_be32(lab, labels_path, 0);
    if (lmagic != 0x00000801)
        throw std::runtime_error("IDX format error in " + labels_path +
                                 ": bad magic at byte 0, expected 0x00000801");
    std::uint32_t ln = detail::read_be32(lab, labels_path, 4);
    if (ln != n)
        throw std::runtime_error("IDX format error: " + std::to_string(ln) + " labels for " +
                                 std::to_string(n) + " images");
    ds.labels.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        char c;
        if (!lab.get(c))
            throw std::runtime_error("IDX format error in " + labels_path +
                                     ": truncated at byte " + std::to_string(8 + i));
        ds.labels[i] = static_cast<unsigned char>(c);
    }

    std::vector<double> mean, std;
    detail::compute_norm(ds, mean, std);
    detail::normalize_with(ds, mean, std);
    return ds;
}

}  // namespace dpadapter
