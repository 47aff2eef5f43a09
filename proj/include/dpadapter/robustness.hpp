#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dpadapter/data.hpp"
#include "dpadapter/model.hpp"
#include "dpadapter/rng.hpp"

namespace dpadapter {

struct RobustnessReport {
    double clean_accuracy = 0.0;
    double robust_accuracy = 0.0;
    double noise_std = 0.0;
    double rho_estimate = 0.0;       // true-class logit variant
    double rho_estimate_l2 = 0.0;    // logit-vector L2 variant
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

// Mean accuracy over `trials` draws of theta_hat = theta + N(0, noise_std^2 I).
inline RobustnessReport robust_accuracy(const ModelParams& model, const Dataset& test,
                                        double noise_std, std::size_t trials,
                                        std::uint64_t seed) {
    if (test.size() == 0) throw std::invalid_argument("robust_accuracy: empty test set");
    if (noise_std < 0.0) throw std::invalid_argument("robust_accuracy: noise_std must be >= 0");
    if (trials < 1) throw std::invalid_argument("robust_accuracy: trials must be >= 1");
    RobustnessReport rep;
    rep.noise_std = noise_std;
    rep.trials = trials;
    rep.seed = seed;
    rep.clean_accuracy = accuracy(model, test.features, test.labels);
    if (noise_std == 0.0) {
        rep.robust_accuracy = rep.clean_accuracy;
        return rep;
    }
    double acc = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, 0x0B57 + t));
        ModelParams noisy = model;
        std::vector<double> delta(model.dim());
        for (double& x : delta) x = normal(rng, 0.0, noise_std);
        noisy.add_flat(delta);
        acc += accuracy(noisy, test.features, test.labels);
    }
    rep.robust_accuracy = acc / static_cast<double>(trials);
    return rep;
}

// Lower-bound estimate of the worst-case output change per unit parameter
// perturbation: running max over probe inputs, random unit directions and
// radii of |f(x; theta+Delta) - f(x; theta)| / ||Delta||. The scalar output
// is the true-class logit; the L2 logit-vector variant is reported alongside.
struct RhoEstimate {
    double true_class_logit = 0.0;
    double logit_l2 = 0.0;
};

inline RhoEstimate estimate_rho(const ModelParams& model, const Dataset& probes,
                                std::size_t n_directions, const std::vector<double>& radius_grid,
                                std::uint64_t seed) {
    if (n_directions < 1) throw std::invalid_argument("estimate_rho: n_directions must be >= 1");
    if (radius_grid.empty()) throw std::invalid_argument("estimate_rho: need >= 1 radius");
    for (double r : radius_grid)
        if (r <= 0.0) throw std::invalid_argument("estimate_rho: radii must be > 0");
    if (probes.size() == 0) throw std::invalid_argument("estimate_rho: empty probe set");

    ForwardResult base = forward(model, probes.features);
    const Tensor& z0 = base.tape.value(base.logits);

    Rng rng(derive_seed(seed, 0x04D0));
    RhoEstimate est;
    std::size_t d = model.dim();
    for (std::size_t dir = 0; dir < n_directions; ++dir) {
        std::vector<double> u(d);
        double n = 0.0;
        while (n == 0.0) {
            for (double& x : u) x = normal(rng);
            n = l2_norm(u);
        }
        for (double& x : u) x /= n;
        for (double r : radius_grid) {
            ModelParams perturbed = model;
            std::vector<double> delta(d);
            for (std::size_t i = 0; i < d; ++i) delta[i] = r * u[i];
            perturbed.add_flat(delta);
            ForwardResult fr = forward(perturbed, probes.features);
            const Tensor& z1 = fr.tape.value(fr.logits);
            for (std::size_t i = 0; i < probes.size(); ++i) {
                int y = probes.labels[i];
                double diff = std::abs(z1.at(i, static_cast<std::size_t>(y)) -
                                       z0.at(i, static_cast<std::size_t>(y)));
                est.true_class_logit = std::max(est.true_class_logit, diff / r);
                double l2 = 0.0;
                for (std::size_t j = 0; j < z0.cols(); ++j) {
                    double dz = z1.at(i, j) - z0.at(i, j);
                    l2 += dz * dz;
                }
                est.logit_l2 = std::max(est.logit_l2, std::sqrt(l2) / r);
            }
        }
    }
    return est;
}

}  // namespace dpadapter
