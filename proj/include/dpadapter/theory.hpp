#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dpadapter/finetune.hpp"
#include "dpadapter/pretrain.hpp"
#include "dpadapter/rng.hpp"
#include "dpadapter/stats.hpp"
#include "dpadapter/tensor.hpp"

namespace dpadapter {

struct TheoryParams {
    double beta = 0.0;    // smoothness of f w.r.t. theta
    double beta1 = 1.0;   // Lipschitz constant of ell w.r.t. x
    double beta2 = 1.0;   // smoothness of ell w.r.t. x
    double sigma_hat_sq = 0.0;  // gradient variance bound
    double mu = 0.5;      // PL constant
    double rho = 1.0;     // parameter robustness of the synthetic f

    double beta_hat() const { return rho * rho * beta2 + beta * beta1; }
};

// L_i(theta) = ||theta - a_i||^2 / 2. L_D is quadratic with known minimizer
// (the anchor mean), PL constant 1/2 under ||grad||^2 >= (1/mu)(L - L*),
// per-sample smoothness 1, gradient variance = anchor variance.
struct QuadraticObjective {
    std::vector<std::vector<double>> anchors;
    std::vector<double> anchor_mean;
    double anchor_variance = 0.0;  // (1/n) sum ||a_i - mean||^2

    static QuadraticObjective make(std::size_t n, std::size_t dim, double spread,
                                   std::uint64_t seed) {
        QuadraticObjective obj;
        Rng rng(derive_seed(seed, 0x0B1));
        obj.anchors.assign(n, std::vector<double>(dim));
        obj.anchor_mean.assign(dim, 0.0);
        for (auto& a : obj.anchors) {
            for (double& x : a) x = normal(rng, 0.0, spread);
            axpy(1.0 / static_cast<double>(n), a, obj.anchor_mean);
        }
        for (const auto& a : obj.anchors) {
            double s = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                double d = a[j] - obj.anchor_mean[j];
                s += d * d;
            }
            obj.anchor_variance += s / static_cast<double>(n);
        }
        return obj;
    }

    std::size_t size() const { return anchors.size(); }
    std::size_t dim() const { return anchor_mean.size(); }

    std::vector<double> grad_i(const std::vector<double>& theta, std::size_t i) const {
        std::vector<double> g(theta.size());
        for (std::size_t j = 0; j < theta.size(); ++j) g[j] = theta[j] - anchors[i][j];
        return g;
    }

    std::vector<double> grad_batch(const std::vector<double>& theta,
                                   const std::vector<std::size_t>& idx) const {
        std::vector<double> g(theta.size(), 0.0);
        for (std::size_t i : idx) axpy(1.0 / static_cast<double>(idx.size()), grad_i(theta, i), g);
        return g;
    }

    double loss_full(const std::vector<double>& theta) const {
        double s = 0.0;
        for (const auto& a : anchors) {
            double l = 0.0;
            for (std::size_t j = 0; j < theta.size(); ++j) {
                double d = theta[j] - a[j];
                l += d * d;
            }
            s += 0.5 * l;
        }
        return s / static_cast<double>(anchors.size());
    }

    double inf_loss() const {
        // minimized at the anchor mean
        double s = 0.0;
        for (const auto& a : anchors) {
            double l = 0.0;
            for (std::size_t j = 0; j < a.size(); ++j) {
                double d = anchor_mean[j] - a[j];
                l += d * d;
            }
            s += 0.5 * l;
        }
        return s / static_cast<double>(anchors.size());
    }

    TheoryParams params() const {
        TheoryParams p;
        p.beta = 0.0;   // f is linear in theta here
        p.beta1 = 1.0;
        p.beta2 = 1.0;
        p.rho = 1.0;    // beta_hat = 1, the per-sample smoothness constant
        p.mu = 0.5;     // ||grad L_D||^2 = 2 (L_D - inf)
        p.sigma_hat_sq = anchor_variance;
        return p;
    }
};

// Output-rescaled linear model with pseudo-Huber loss: f_theta(x) = rho x^T theta
// on unit-norm probes, ell(z, y) = sqrt(1 + (z-y)^2) - 1. Then beta1 = beta2 = 1,
// beta = 0, so L_i is rho-Lipschitz and rho^2-smooth, and rho is an exact dial.
struct RescaledLinearObjective {
    double rho = 1.0;
    std::vector<std::vector<double>> probes;  // unit rows
    std::vector<double> targets;
    std::vector<double> minimizer;

    static RescaledLinearObjective make(std::size_t n, std::size_t dim, double rho,
                                        std::uint64_t seed) {
        RescaledLinearObjective obj;
        obj.rho = rho;
        Rng rng(derive_seed(seed, 0x0B2));
        obj.minimizer.assign(dim, 0.0);
        for (double& x : obj.minimizer) x = normal(rng);
        obj.probes.assign(n, std::vector<double>(dim));
        obj.targets.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double nn = 0.0;
            while (nn == 0.0) {
                for (double& x : obj.probes[i]) x = normal(rng);
                nn = l2_norm(obj.probes[i]);
            }
            for (double& x : obj.probes[i]) x /= nn;
            obj.targets[i] = rho * dot(obj.probes[i], obj.minimizer);  // realizable: inf L = 0
        }
        return obj;
    }

    std::size_t size() const { return probes.size(); }
    std::size_t dim() const { return minimizer.size(); }

    double loss_i(const std::vector<double>& theta, std::size_t i) const {
        double z = rho * dot(probes[i], theta) - targets[i];
        return std::sqrt(1.0 + z * z) - 1.0;
    }

    std::vector<double> grad_i(const std::vector<double>& theta, std::size_t i) const {
        double z = rho * dot(probes[i], theta) - targets[i];
        double dl = z / std::sqrt(1.0 + z * z);
        std::vector<double> g(theta.size());
        for (std::size_t j = 0; j < theta.size(); ++j) g[j] = dl * rho * probes[i][j];
        return g;
    }

    double loss_full(const std::vector<double>& theta) const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) s += loss_i(theta, i);
        return s / static_cast<double>(size());
    }

    double inf_loss() const { return 0.0; }

    TheoryParams params() const {
        TheoryParams p;
        p.beta = 0.0;
        p.beta1 = 1.0;
        p.beta2 = 1.0;
        p.rho = rho;
        return p;
    }
};

// ---- Theorem-1-style sweep: decoupled-batch SAM on a PL objective ----

struct DecoupledSweepPoint {
    std::size_t b1_size;
    double mean_suboptimality;  // (1/T) sum_t (L_D(theta_t) - inf L_D), seed-averaged
    double std_suboptimality;
    double analytic_bound;      // mu (L0/T + sigma^2/(16 beta_hat)(1/|B2| + 1/|B1|))
    std::vector<double> per_seed;  // paired-seed trend checks
};

// theta_{t+1} = theta_t - eta2 grad_{B2}(theta_t + eta1 grad_{B1}(theta_t)),
// eta1 = eta2 = 1/(4 beta_hat). Batches are drawn from the dataset without
// replacement, matching how the training algorithm forms B1 and B2.
inline std::vector<DecoupledSweepPoint> run_decoupled_sam_sweep(
    const QuadraticObjective& obj, const std::vector<std::size_t>& b1_sizes, std::size_t b2_size,
    std::size_t T, std::size_t n_seeds, const std::vector<double>& theta0,
    std::uint64_t base_seed) {
    TheoryParams p = obj.params();
    double eta = 1.0 / (4.0 * p.beta_hat());
    double inf = obj.inf_loss();
    double loss0 = obj.loss_full(theta0);  // the bound uses L_D(theta_0) itself

    std::vector<DecoupledSweepPoint> out;
    for (std::size_t b1 : b1_sizes) {
        std::vector<double> subopts;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            Rng rng(derive_seed(base_seed, 0x7E0 + s * 1000 + b1));
            std::vector<double> theta = theta0;
            double acc = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                auto idx1 = detail::draw_batch(rng, obj.size(), b1);
                auto idx2 = detail::draw_batch(rng, obj.size(), b2_size);
                std::vector<double> g1 = obj.grad_batch(theta, idx1);
                std::vector<double> perturbed = theta;
                axpy(eta, g1, perturbed);
                std::vector<double> g2 = obj.grad_batch(perturbed, idx2);
                axpy(-eta, g2, theta);
                acc += obj.loss_full(theta) - inf;
            }
            subopts.push_back(acc / static_cast<double>(T));
        }
        DecoupledSweepPoint pt;
        pt.b1_size = b1;
        pt.mean_suboptimality = mean(subopts);
        pt.std_suboptimality = stddev(subopts);
        pt.per_seed = subopts;
        pt.analytic_bound =
            p.mu * (loss0 / static_cast<double>(T) +
                    p.sigma_hat_sq / (16.0 * p.beta_hat()) *
                        (1.0 / static_cast<double>(b2_size) + 1.0 / static_cast<double>(b1)));
        out.push_back(pt);
    }
    return out;
}

// ---- Theorem-2-style sweep: random-round DP-SGD utility vs rho ----

struct RhoSweepPoint {
    double rho;
    double epsilon;
    double mean_suboptimality;
    double std_suboptimality;
    std::vector<double> per_seed;  // paired-seed trend checks
};

inline RhoSweepPoint run_rho_utility_point(double rho, double epsilon, std::size_t n,
                                           std::size_t dim, std::size_t n_seeds,
                                           std::uint64_t base_seed) {
    RhoSweepPoint pt;
    pt.rho = rho;
    pt.epsilon = epsilon;
    for (std::size_t s = 0; s < n_seeds; ++s) {
        auto obj = RescaledLinearObjective::make(n, dim, rho, base_seed + s);
        std::vector<double> theta0(dim, 0.0);
        RandomRoundConfig cfg;
        cfg.dataset_size = n;
        cfg.rho = rho;
        cfg.beta1 = 1.0;
        cfg.beta2 = 1.0;
        cfg.beta = 0.0;
        cfg.epsilon = epsilon;
        cfg.delta = 1e-5;
        cfg.param_dim = dim;
        cfg.initial_gap = std::max(1e-12, obj.loss_full(theta0) - obj.inf_loss());
        Rng rng(derive_seed(base_seed, 0x44D + s));
        auto theta = random_round_dpsgd(
            theta0, cfg, [&](const std::vector<double>& th, std::size_t i) { return obj.grad_i(th, i); },
            rng);
        pt.per_seed.push_back(obj.loss_full(theta) - obj.inf_loss());
    }
    pt.mean_suboptimality = mean(pt.per_seed);
    pt.std_suboptimality = stddev(pt.per_seed);
    return pt;
}

inline std::vector<RhoSweepPoint> run_rho_utility_sweep(const std::vector<double>& rhos,
                                                        double epsilon, std::size_t n,
                                                        std::size_t dim, std::size_t n_seeds,
                                                        std::uint64_t base_seed) {
    std::vector<RhoSweepPoint> out;
    for (double rho : rhos)
        out.push_back(run_rho_utility_point(rho, epsilon, n, dim, n_seeds, base_seed));
    return out;
}

}  // namespace dpadapter
