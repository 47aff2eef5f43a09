#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpadapter/data.hpp"
#include "dpadapter/model.hpp"
#include "dpadapter/privacy.hpp"
#include "dpadapter/rng.hpp"

namespace dpadapter {

enum class DpAlgorithm { DpSgd, AdpClip, AdpAlloc, Gep };

inline std::string to_string(DpAlgorithm a) {
    switch (a) {
        case DpAlgorithm::DpSgd: return "dpsgd";
        case DpAlgorithm::AdpClip: return "adpclip";
        case DpAlgorithm::AdpAlloc: return "adpalloc";
        case DpAlgorithm::Gep: return "gep";
    }
    return "?";
}

struct DpSgdConfig {
    double clip_norm = 6.0;
    double sigma = 0.0;      // noise multiplier; 0 only for the flagged non-private ablation
    bool non_private = false;
    std::size_t lot_size = 50;
    std::size_t epochs = 3;
    double lr = 0.22;
    double momentum = 0.7;

    void validate() const {
        if (clip_norm <= 0.0) throw std::invalid_argument("DpSgdConfig: clip_norm must be > 0");
        if (sigma < 0.0) throw std::invalid_argument("DpSgdConfig: sigma must be >= 0");
        if (sigma == 0.0 && !non_private)
            throw std::invalid_argument("DpSgdConfig: sigma == 0 requires the non_private flag");
    }
};

struct AdpClipState {
    double threshold = 6.0;       // C_t
    double eta_c = 0.2;
    double target_quantile = 0.5;  // gamma_q
    double sigma_b = 1.0;  // count-query noise, as a ratio to the gradient sigma
};

struct AdpAllocSchedule {
    double sigma0 = 1.0;
    double decay = 0.0;  // k > 0

    double sigma_at(long t) const {
        if (decay <= 0.0) throw std::invalid_argument("AdpAllocSchedule: decay rate k must be > 0");
        return sigma0 * std::exp(-decay * static_cast<double>(t));
    }
};

inline double adpalloc_sigma(const AdpAllocSchedule& sched, long t) {
    if (t < 0) throw std::invalid_argument("adpalloc_sigma: t must be >= 0");
    return sched.sigma_at(t);
}

struct GepConfig {
    std::size_t subspace_dim = 16;
    std::size_t power_iters = 4;
    std::size_t public_batch = 64;
};

// ---- primitive operations ----

inline std::vector<double> clip_gradient(std::vector<double> g, double clip_norm) {
    if (clip_norm <= 0.0) throw std::invalid_argument("clip_gradient: clip_norm must be > 0");
    double n = l2_norm(g);
    if (n > clip_norm) {
        double s = clip_norm / n;
        for (double& x : g) x *= s;
    }
    return g;
}

// Privatized quantile tracking: C_t = C_{t-1} * exp(-eta_C (b~ - gamma_q))
inline double adpclip_update(AdpClipState& state, const std::vector<double>& per_sample_norms,
                             Rng& rng) {
    if (per_sample_norms.empty()) throw std::invalid_argument("adpclip_update: need >= 1 norm");
    double m = static_cast<double>(per_sample_norms.size());
    double count = 0.0;
    for (double n : per_sample_norms)
        if (n <= state.threshold) count += 1.0;
    double noise = state.sigma_b > 0.0 ? normal(rng, 0.0, state.sigma_b) : 0.0;
    double b_tilde = (count + noise) / m;
    state.threshold *= std::exp(-state.eta_c * (b_tilde - state.target_quantile));
    return state.threshold;
}

// embedding = B^T g, residual = g - B embedding. Basis columns must be orthonormal.
struct GepProjection {
    std::vector<double> embedding;
    std::vector<double> residual;
};

inline void check_orthonormal(const std::vector<std::vector<double>>& basis) {
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = i; j < basis.size(); ++j) {
            double d = dot(basis[i], basis[j]) - (i == j ? 1.0 : 0.0);
            if (std::abs(d) > 1e-8)
                throw std::invalid_argument("gep: basis is not orthonormal");
        }
}

inline GepProjection gep_project(const std::vector<double>& g,
                                 const std::vector<std::vector<double>>& basis) {
    GepProjection p;
    p.embedding.resize(basis.size());
    p.residual = g;
    for (std::size_t r = 0; r < basis.size(); ++r) {
        p.embedding[r] = dot(basis[r], g);
        axpy(-p.embedding[r], basis[r], p.residual);
    }
    return p;
}

// Top principal directions of the public gradient matrix via orthogonal
// iteration with Gram-Schmidt re-orthonormalization.
inline std::vector<std::vector<double>> power_method_basis(
    const std::vector<std::vector<double>>& public_grads, const GepConfig& cfg, Rng& rng) {
    if (cfg.power_iters == 0)
        throw std::invalid_argument("power_method_basis: power_iters must be >= 1");
    if (cfg.subspace_dim > public_grads.size())
        throw std::invalid_argument("power_method_basis: subspace_dim exceeds gradient count");
    double total = 0.0;
    for (const auto& g : public_grads) total += l2_norm(g);
    if (total == 0.0) throw std::invalid_argument("power_method_basis: all-zero gradients");

    std::size_t d = public_grads.front().size();
    std::size_t r = cfg.subspace_dim;
    std::vector<std::vector<double>> basis(r, std::vector<double>(d));
    for (auto& col : basis)
        for (double& x : col) x = normal(rng);

    auto orthonormalize = [&]() {
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < i; ++j) axpy(-dot(basis[j], basis[i]), basis[j], basis[i]);
            double n = l2_norm(basis[i]);
            if (n < 1e-300) {
                for (double& x : basis[i]) x = normal(rng);
                n = l2_norm(basis[i]);
                for (std::size_t j = 0; j < i; ++j)
                    axpy(-dot(basis[j], basis[i]), basis[j], basis[i]);
                n = l2_norm(basis[i]);
            }
            for (double& x : basis[i]) x /= n;
        }
    };
    orthonormalize();
    for (std::size_t it = 0; it < cfg.power_iters; ++it) {
        // basis <- orth(G^T G basis)
        std::vector<std::vector<double>> next(r, std::vector<double>(d, 0.0));
        for (std::size_t i = 0; i < r; ++i)
            for (const auto& g : public_grads) axpy(dot(g, basis[i]), g, next[i]);
        basis = std::move(next);
        orthonormalize();
    }
    return basis;
}

// ---- DP-SGD and friends ----

struct OptimizerState {
    std::vector<double> velocity;
};

// One lot update: clip each per-sample gradient to C, sum, add
// N(0, sigma^2 C^2 I), divide by the (expected) lot size, momentum, step.
inline ModelParams dpsgd_step(ModelParams model, const Tensor& lot_x,
                              const std::vector<int>& lot_y, const DpSgdConfig& cfg, Rng& rng,
                              OptimizerState& state) {
    if (lot_x.rows() == 0) throw std::invalid_argument("dpsgd_step: empty lot");
    cfg.validate();
    auto grads = per_sample_gradients(model, lot_x, lot_y);
    std::vector<double> sum(model.dim(), 0.0);
    for (auto& g : grads) {
        g = clip_gradient(std::move(g), cfg.clip_norm);
        axpy(1.0, g, sum);
    }
    double noise_std = cfg.sigma * cfg.clip_norm;
    if (noise_std > 0.0)
        for (double& x : sum) x += normal(rng, 0.0, noise_std);
    double inv = 1.0 / static_cast<double>(cfg.lot_size);
    for (double& x : sum) x *= inv;

    if (state.velocity.empty()) state.velocity.assign(model.dim(), 0.0);
    std::vector<double> theta = model.flatten();
    for (std::size_t i = 0; i < theta.size(); ++i) {
        state.velocity[i] = cfg.momentum * state.velocity[i] + sum[i];
        theta[i] -= cfg.lr * state.velocity[i];
    }
    model.unflatten(theta);
    return model;
}

struct EpochMetrics {
    std::size_t epoch;
    double train_loss;
    double test_accuracy;
    double clip_threshold;  // C_t where applicable
    double sigma_t;         // current noise multiplier
    double epsilon_spent;
};

struct FinetuneResult {
    ModelParams model;
    AccountantState accountant;
    double final_epsilon = 0.0;
    int conversion_order = 0;
    double target_epsilon = 0.0;
    std::vector<EpochMetrics> history;
};

struct FinetuneSetup {
    DpAlgorithm algorithm = DpAlgorithm::DpSgd;
    DpSgdConfig base;
    AdpClipState adpclip;
    AdpAllocSchedule adpalloc;
    GepConfig gep;
};

namespace detail {

inline double search_noise_scale(const std::function<double(double)>& eps_of_sigma,
                                 double target) {
    double lo = 1e-2, hi = 1e3;
    if (eps_of_sigma(hi) > target)
        throw std::runtime_error("noise calibration: no sigma in [1e-2, 1e3] meets the budget");
    if (eps_of_sigma(lo) <= target) return lo;
    while (hi / lo > 1.0 + 1e-4) {
        double mid = std::sqrt(lo * hi);
        if (eps_of_sigma(mid) <= target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

// Poisson lot: every index included independently with probability q.
inline std::vector<std::size_t> poisson_lot(Rng& rng, std::size_t n, double q) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
        if (uniform(rng) < q) idx.push_back(i);
    return idx;
}

}  // namespace detail

// Calibrates the gradient-noise multiplier for the chosen algorithm so that
// the composed budget meets spec.epsilon, then runs the private fine-tuning
// loop. GEP privatizes embedding and residual separately (two queries per
// step); AdpClip spends one extra count query per step; AdpAlloc fixes
// sigma0 and searches the decay rate instead.
inline FinetuneResult finetune(const ModelParams& pretrained, const Dataset& train,
                               const Dataset& test, const PrivacySpec& spec,
                               FinetuneSetup setup, std::uint64_t seed,
                               const Dataset* public_data = nullptr) {
    const std::size_t n = train.size();
    if (n == 0) throw std::invalid_argument("finetune: empty training set");
    double q = std::min(1.0, static_cast<double>(setup.base.lot_size) / static_cast<double>(n));
    long steps_per_epoch = std::max<long>(1, static_cast<long>(n / setup.base.lot_size));
    long total_steps = steps_per_epoch * static_cast<long>(setup.base.epochs);

    // budget calibration
    if (!setup.base.non_private) {
        switch (setup.algorithm) {
            case DpAlgorithm::DpSgd:
                setup.base.sigma = calibrate_sigma(spec, q, total_steps);
                break;
            case DpAlgorithm::Gep:
                setup.base.sigma = calibrate_sigma(spec, q, 2 * total_steps);
                break;
            case DpAlgorithm::AdpClip: {
                // sigma_b is a ratio to the gradient noise here; both queries
                // scale together so the search always brackets the budget.
                double sb_ratio = setup.adpclip.sigma_b;
                setup.base.sigma = detail::search_noise_scale(
                    [&](double s) {
                        AccountantState st;
                        st.add_step(q, s);
                        st.add_step(q, s * sb_ratio);
                        for (double& v : st.rdp_ledger) v *= static_cast<double>(total_steps);
                        return compose_and_convert(st, spec.delta).epsilon;
                    },
                    spec.epsilon);
                setup.adpclip.sigma_b = setup.base.sigma * sb_ratio;
                break;
            }
            case DpAlgorithm::AdpAlloc: {
                // sigma0 = 2x the constant-sigma calibration guarantees slack
                // at k -> 0; the largest decay rate meeting the budget wins.
                double sconst = calibrate_sigma(spec, q, total_steps);
                setup.adpalloc.sigma0 = 2.0 * sconst;
                auto eps_of_k = [&](double k) {
                    AccountantState st;
                    AdpAllocSchedule sched{setup.adpalloc.sigma0, k};
                    for (long t = 0; t < total_steps; ++t) st.add_step(q, sched.sigma_at(t));
                    return compose_and_convert(st, spec.delta).epsilon;
                };
                double lo = 1e-8, hi = 1.0;
                while (eps_of_k(hi) <= spec.epsilon && hi < 1e4) hi *= 2.0;
                if (eps_of_k(lo) > spec.epsilon)
                    throw std::runtime_error("adpalloc calibration: sigma0 bracket failed");
                for (int it = 0; it < 60; ++it) {
                    double mid = std::sqrt(lo * hi);
                    if (eps_of_k(mid) <= spec.epsilon)
                        lo = mid;
                    else
                        hi = mid;
                }
                setup.adpalloc.decay = lo;
                break;
            }
        }
    }

    Rng rng(derive_seed(seed, 0xF17E));
    ModelParams model = pretrained;
    OptimizerState opt;
    AccountantState accountant;
    accountant.sampling_rate = q;
    FinetuneResult out;
    out.target_epsilon = spec.epsilon;

    std::vector<std::vector<double>> basis;
    long step_index = 0;
    for (std::size_t epoch = 0; epoch < setup.base.epochs; ++epoch) {
        if (setup.algorithm == DpAlgorithm::Gep) {
            if (public_data == nullptr)
                throw std::invalid_argument("finetune: GEP needs a public gradient source");
            // refresh the anchor subspace from public gradients once per epoch
            auto idx = detail::poisson_lot(
                rng, public_data->size(),
                std::min(1.0, static_cast<double>(setup.gep.public_batch) /
                                  static_cast<double>(public_data->size())));
            if (idx.size() < setup.gep.subspace_dim) {
                idx.resize(std::min(public_data->size(),
                                    setup.gep.subspace_dim + setup.gep.public_batch));
                std::iota(idx.begin(), idx.end(), 0);
            }
            auto pg = per_sample_gradients(model, public_data->rows_of(idx),
                                           public_data->labels_of(idx));
            basis = power_method_basis(pg, setup.gep, rng);
        }

        for (long s = 0; s < steps_per_epoch; ++s, ++step_index) {
            auto lot = detail::poisson_lot(rng, n, q);
            if (lot.empty()) continue;
            Tensor lx = train.rows_of(lot);
            std::vector<int> ly = train.labels_of(lot);

            double sigma_now = setup.base.sigma;
            double clip_now = setup.base.clip_norm;
            switch (setup.algorithm) {
                case DpAlgorithm::DpSgd: {
                    DpSgdConfig c = setup.base;
                    model = dpsgd_step(std::move(model), lx, ly, c, rng, opt);
                    if (!c.non_private) accountant.add_step(q, c.sigma);
                    break;
                }
                case DpAlgorithm::AdpAlloc: {
                    DpSgdConfig c = setup.base;
                    if (!c.non_private) {
                        sigma_now = setup.adpalloc.sigma_at(step_index);
                        c.sigma = sigma_now;
                    }
                    model = dpsgd_step(std::move(model), lx, ly, c, rng, opt);
                    if (!c.non_private) accountant.add_step(q, sigma_now);
                    break;
                }
                case DpAlgorithm::AdpClip: {
                    DpSgdConfig c = setup.base;
                    c.clip_norm = setup.adpclip.threshold;
                    clip_now = c.clip_norm;
                    auto grads = per_sample_gradients(model, lx, ly);
                    std::vector<double> norms(grads.size());
                    for (std::size_t i = 0; i < grads.size(); ++i) norms[i] = l2_norm(grads[i]);
                    std::vector<double> sum(model.dim(), 0.0);
                    for (auto& g : grads) axpy(1.0, clip_gradient(std::move(g), c.clip_norm), sum);
                    double noise_std = c.non_private ? 0.0 : c.sigma * c.clip_norm;
                    if (noise_std > 0.0)
                        for (double& x : sum) x += normal(rng, 0.0, noise_std);
                    double inv = 1.0 / static_cast<double>(c.lot_size);
                    for (double& x : sum) x *= inv;
                    if (opt.velocity.empty()) opt.velocity.assign(model.dim(), 0.0);
                    std::vector<double> theta = model.flatten();
                    for (std::size_t i = 0; i < theta.size(); ++i) {
                        opt.velocity[i] = c.momentum * opt.velocity[i] + sum[i];
                        theta[i] -= c.lr * opt.velocity[i];
                    }
                    model.unflatten(theta);
                    adpclip_update(setup.adpclip, norms, rng);
                    if (!c.non_private) {
                        accountant.add_step(q, c.sigma);
                        accountant.add_step(q, setup.adpclip.sigma_b);
                    }
                    break;
                }
                case DpAlgorithm::Gep: {
                    const DpSgdConfig& c = setup.base;
                    auto grads = per_sample_gradients(model, lx, ly);
                    std::size_t r = basis.size(), d = model.dim();
                    std::vector<double> emb_sum(r, 0.0), res_sum(d, 0.0);
                    for (auto& g : grads) {
                        auto clipped = clip_gradient(std::move(g), c.clip_norm);
                        GepProjection p = gep_project(clipped, basis);
                        for (std::size_t i = 0; i < r; ++i) emb_sum[i] += p.embedding[i];
                        axpy(1.0, p.residual, res_sum);
                    }
                    double noise_std = c.non_private ? 0.0 : c.sigma * c.clip_norm;
                    if (noise_std > 0.0) {
                        for (double& x : emb_sum) x += normal(rng, 0.0, noise_std);
                        for (double& x : res_sum) x += normal(rng, 0.0, noise_std);
                    }
                    std::vector<double> g(d, 0.0);
                    for (std::size_t i = 0; i < r; ++i) axpy(emb_sum[i], basis[i], g);
                    axpy(1.0, res_sum, g);
                    double inv = 1.0 / static_cast<double>(c.lot_size);
                    for (double& x : g) x *= inv;
                    if (opt.velocity.empty()) opt.velocity.assign(d, 0.0);
                    std::vector<double> theta = model.flatten();
                    for (std::size_t i = 0; i < theta.size(); ++i) {
                        opt.velocity[i] = c.momentum * opt.velocity[i] + g[i];
                        theta[i] -= c.lr * opt.velocity[i];
                    }
                    model.unflatten(theta);
                    if (!c.non_private) {
                        accountant.add_step(q, c.sigma);
                        accountant.add_step(q, c.sigma);
                    }
                    break;
                }
            }
            (void)clip_now;
        }

        auto conv = setup.base.non_private ? ConversionResult{0.0, 0}
                                           : compose_and_convert(accountant, spec.delta);
        EpochMetrics em;
        em.epoch = epoch;
        em.train_loss = loss_only(model, train.features, train.labels);
        em.test_accuracy = accuracy(model, test.features, test.labels);
        em.clip_threshold = setup.algorithm == DpAlgorithm::AdpClip ? setup.adpclip.threshold
                                                                    : setup.base.clip_norm;
        em.sigma_t = setup.algorithm == DpAlgorithm::AdpAlloc && !setup.base.non_private
                         ? setup.adpalloc.sigma_at(step_index > 0 ? step_index - 1 : 0)
                         : setup.base.sigma;
        em.epsilon_spent = conv.epsilon;
        out.history.push_back(em);
    }

    auto conv = setup.base.non_private ? ConversionResult{0.0, 0}
                                       : compose_and_convert(accountant, spec.delta);
    if (!setup.base.non_private && conv.epsilon > spec.epsilon * (1.0 + 1e-9))
        throw std::runtime_error("finetune: accountant epsilon " + std::to_string(conv.epsilon) +
                                 " exceeds target " + std::to_string(spec.epsilon));
    out.model = std::move(model);
    out.accountant = std::move(accountant);
    out.final_epsilon = conv.epsilon;
    out.conversion_order = conv.order;
    return out;
}

// ---- random-round DP-SGD (utility-analysis variant) ----

struct RandomRoundConfig {
    std::size_t dataset_size = 0;  // |D|
    double rho = 1.0;
    double beta1 = 1.0;
    double beta2 = 1.0;
    double beta = 0.0;
    double delta = 1e-5;
    double epsilon = 1.0;
    double initial_gap = 1.0;  // L_D(theta0) - inf L_D, sets D_f
    long pinned_rounds = -1;   // >= 0 pins R (testing hook)
    bool zero_noise = false;   // testing hook

    double beta_hat() const { return rho * rho * beta2 + beta * beta1; }
    double noise_variance() const {
        double n = static_cast<double>(dataset_size);
        return 4.0 * beta1 * beta1 * rho * rho * std::log(3.0 * n / delta) * std::log(2.0 / delta);
    }
    double step_size() const {
        double n = static_cast<double>(dataset_size);
        double bh = beta_hat();
        double d_f = std::sqrt(2.0 * initial_gap / bh);
        double dim = static_cast<double>(param_dim);
        double sigma = 2.0 * beta1 * rho *
                       std::sqrt(1.0 + dim * std::log(3.0 * n / delta) * std::log(2.0 / delta) /
                                           (epsilon * epsilon));
        return std::min(1.0 / bh, d_f / (sigma * n));
    }
    std::size_t param_dim = 1;
};

// Runs R noisy single-sample steps, R uniform on {1, ..., n^2}.
template <class GradFn>
std::vector<double> random_round_dpsgd(std::vector<double> theta, const RandomRoundConfig& cfg,
                                       GradFn&& grad_i, Rng& rng) {
    std::size_t n = cfg.dataset_size;
    if (n == 0) throw std::invalid_argument("random_round_dpsgd: empty dataset");
    long rounds;
    if (cfg.pinned_rounds >= 0) {
        rounds = cfg.pinned_rounds;
    } else {
        std::uniform_int_distribution<long> d(1, static_cast<long>(n) * static_cast<long>(n));
        rounds = d(rng);
    }
    double eta = cfg.step_size();
    double noise_std = cfg.zero_noise ? 0.0 : std::sqrt(cfg.noise_variance());
    for (long t = 0; t < rounds; ++t) {
        std::size_t i = uniform_index(rng, n);
        std::vector<double> g = grad_i(theta, i);
        for (std::size_t j = 0; j < theta.size(); ++j) {
            double z = noise_std > 0.0 ? normal(rng, 0.0, noise_std) : 0.0;
            theta[j] -= eta * (g[j] + z);
        }
    }
    return theta;
}

}  // namespace dpadapter
