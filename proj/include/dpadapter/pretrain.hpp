#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dpadapter/data.hpp"
#include "dpadapter/model.hpp"
#include "dpadapter/rng.hpp"

namespace dpadapter {

struct PretrainConfig {
    std::size_t m1 = 320;       // perturbation batch size
    std::size_t m2 = 32;        // update batch size
    double eta1 = 1.0;          // perturbation step size
    double eta2 = 0.1;          // update learning rate
    double gamma = 2.0;         // norm-ball radius
    std::size_t iterations = 500;  // K
    std::size_t warmup_epochs = 2;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    // step decay: lr divided by 10 after these fractions of K
    std::vector<double> lr_decay_points = {0.5, 0.75};
    bool shared_batch = false;  // B1 == B2 (vanilla SAM mode)

    void validate() const {
        if (gamma < 0.0) throw std::invalid_argument("PretrainConfig: gamma must be >= 0");
        if (m1 < 1 || m2 < 1) throw std::invalid_argument("PretrainConfig: batch sizes >= 1");
    }

    double lr_at(std::size_t k) const {
        double lr = eta2;
        for (double frac : lr_decay_points)
            if (static_cast<double>(k) >= frac * static_cast<double>(iterations)) lr /= 10.0;
        return lr;
    }
};

struct NormBall {
    std::vector<double> center;
    double radius;
    bool contains(const std::vector<double>& theta) const {
        double s = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            double d = theta[i] - center[i];
            s += d * d;
        }
        return std::sqrt(s) <= radius;
    }
};

namespace detail {

// Sampling with replacement when m > |D|, without otherwise.
inline std::vector<std::size_t> draw_batch(Rng& rng, std::size_t n, std::size_t m) {
    std::vector<std::size_t> idx(m);
    if (m > n) {
        for (auto& i : idx) i = uniform_index(rng, n);
        return idx;
    }
    // partial Fisher-Yates over an index pool
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = i + uniform_index(rng, n - i);
        std::swap(pool[i], pool[j]);
        idx[i] = pool[i];
    }
    return idx;
}

}  // namespace detail

// Standard mini-batch SGD with momentum and weight decay.
inline ModelParams warmup(ModelParams model, const Dataset& data, const PretrainConfig& cfg,
                          std::uint64_t seed) {
    cfg.validate();
    if (cfg.warmup_epochs == 0) return model;
    Rng rng(derive_seed(seed, 0x3A41));
    std::vector<double> velocity(model.dim(), 0.0);
    std::size_t steps_per_epoch = std::max<std::size_t>(1, data.size() / cfg.m2);
    for (std::size_t e = 0; e < cfg.warmup_epochs; ++e) {
        for (std::size_t s = 0; s < steps_per_epoch; ++s) {
            auto idx = detail::draw_batch(rng, data.size(), cfg.m2);
            std::vector<double> g;
            loss_and_grad(model, data.rows_of(idx), data.labels_of(idx), g);
            std::vector<double> theta = model.flatten();
            for (std::size_t i = 0; i < g.size(); ++i) {
                double d = g[i] + cfg.weight_decay * theta[i];
                velocity[i] = cfg.momentum * velocity[i] + d;
                theta[i] -= cfg.eta2 * velocity[i];
            }
            model.unflatten(theta);
        }
    }
    return model;
}

// Single ascent step approximating the inner argmax, projected onto the
// gamma-ball: Delta = eta1 * grad, rescaled to norm gamma when it exceeds it.
inline std::vector<double> worst_case_perturbation(const ModelParams& model,
                                                   const Tensor& batch_x,
                                                   const std::vector<int>& batch_y,
                                                   double eta1, double gamma) {
    if (batch_x.rows() == 0) throw std::invalid_argument("worst_case_perturbation: empty batch");
    if (gamma < 0.0) throw std::invalid_argument("worst_case_perturbation: gamma must be >= 0");
    std::vector<double> g;
    loss_and_grad(model, batch_x, batch_y, g);
    // first-order maximizer over the gamma ball is the gamma-scaled gradient
    // direction; eta1 scales that ascent step and the result is capped at the
    // ball radius again
    double gnorm = l2_norm(g);
    if (gnorm == 0.0) return std::vector<double>(g.size(), 0.0);
    double scale = eta1 * gamma / gnorm;
    for (double& x : g) x *= scale;
    double norm = l2_norm(g);
    if (norm > gamma) {
        double s = gamma / norm;
        for (double& x : g) x *= s;
    }
    return g;
}

struct StepState {
    std::vector<double> velocity;  // outer-update momentum buffer
};

// One decoupled-batch iteration: perturb by Delta(B1), take an SGD step on
// B2, revert the perturbation. Composes to theta - eta2 * grad at (theta + Delta).
inline ModelParams dpadapter_step(ModelParams model, const Tensor& b1_x,
                                  const std::vector<int>& b1_y, const Tensor& b2_x,
                                  const std::vector<int>& b2_y, const PretrainConfig& cfg,
                                  double lr, StepState& state) {
    std::vector<double> delta(model.dim(), 0.0);
    if (cfg.gamma > 0.0 && cfg.eta1 != 0.0)
        delta = worst_case_perturbation(model, b1_x, b1_y, cfg.eta1, cfg.gamma);

    // Perturb, step, revert composes to a gradient step taken at theta+Delta.
    // The revert is folded out so that theta survives round-trip free.
    ModelParams perturbed = model;
    perturbed.add_flat(delta, 1.0);
    std::vector<double> g;
    loss_and_grad(perturbed, b2_x, b2_y, g);
    if (state.velocity.empty()) state.velocity.assign(model.dim(), 0.0);
    std::vector<double> theta = model.flatten();
    // weight decay and momentum apply to the outer update only
    for (std::size_t i = 0; i < g.size(); ++i) {
        double d = g[i] + cfg.weight_decay * theta[i];
        state.velocity[i] = cfg.momentum * state.velocity[i] + d;
        theta[i] -= lr * state.velocity[i];
    }
    model.unflatten(theta);
    return model;
}

// Full noise-tolerance pre-training: warmup, then K iterations with fresh
// random B1 (size m1) and B2 (size m2). shared_batch collapses to the
// vanilla SAM trajectory.
inline ModelParams train_dpadapter(const Dataset& data, const PretrainConfig& cfg,
                                   std::uint64_t seed, ModelParams init) {
    cfg.validate();
    ModelParams model = warmup(std::move(init), data, cfg, seed);
    Rng rng(derive_seed(seed, 0xADA7));
    StepState state;
    for (std::size_t k = 0; k < cfg.iterations; ++k) {
        auto idx1 = detail::draw_batch(rng, data.size(), cfg.m1);
        auto idx2 = cfg.shared_batch ? idx1 : detail::draw_batch(rng, data.size(), cfg.m2);
        model = dpadapter_step(std::move(model), data.rows_of(idx1), data.labels_of(idx1),
                               data.rows_of(idx2), data.labels_of(idx2), cfg, cfg.lr_at(k),
                               state);
    }
    return model;
}

// Vanilla SAM baseline: perturbation and update share one batch per iteration.
inline ModelParams train_vanilla_sam(const Dataset& data, PretrainConfig cfg,
                                     std::uint64_t seed, ModelParams init) {
    cfg.shared_batch = true;
    cfg.m1 = cfg.m2;
    return train_dpadapter(data, cfg, seed, std::move(init));
}

// Standard pre-training: gamma = 0 forces Delta = 0 every iteration.
inline ModelParams train_standard(const Dataset& data, PretrainConfig cfg, std::uint64_t seed,
                                  ModelParams init) {
    cfg.gamma = 0.0;
    cfg.shared_batch = true;
    cfg.m1 = cfg.m2;
    return train_dpadapter(data, cfg, seed, std::move(init));
}

}  // namespace dpadapter
