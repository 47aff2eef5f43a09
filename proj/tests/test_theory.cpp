#include <catch2/catch_amalgamated.hpp>

#include "dpadapter/stats.hpp"
#include "dpadapter/theory.hpp"

using namespace dpadapter;

TEST_CASE("quadratic family: PL constant, minimizer and variance are analytic") {
    auto obj = QuadraticObjective::make(64, 6, 1.5, 3);
    TheoryParams p = obj.params();
    REQUIRE(p.mu == 0.5);
    REQUIRE(p.beta_hat() == 1.0);

    // gradient of the population loss vanishes at the anchor mean
    std::vector<std::size_t> all(obj.size());
    std::iota(all.begin(), all.end(), 0);
    auto g = obj.grad_batch(obj.anchor_mean, all);
    REQUIRE(l2_norm(g) < 1e-12);

    // PL identity ||grad L||^2 = (1/mu) (L - inf L) holds within 1 percent
    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> theta(6);
        for (double& x : theta) x = normal(rng, 0.0, 2.0);
        double lhs = 0.0;
        auto gr = obj.grad_batch(theta, all);
        for (double x : gr) lhs += x * x;
        double rhs = (obj.loss_full(theta) - obj.inf_loss()) / p.mu;
        REQUIRE(lhs == Catch::Approx(rhs).epsilon(0.01));
    }

    // variance audit: mean squared deviation of per-sample gradients at the
    // minimizer equals the stored anchor variance
    double var = 0.0;
    for (std::size_t i = 0; i < obj.size(); ++i) {
        auto gi = obj.grad_i(obj.anchor_mean, i);
        var += dot(gi, gi) / static_cast<double>(obj.size());
    }
    REQUIRE(var == Catch::Approx(p.sigma_hat_sq).epsilon(1e-10));
}

TEST_CASE("rescaled linear family: rho is an exact smoothness dial") {
    for (double rho : {0.5, 2.0}) {
        auto obj = RescaledLinearObjective::make(32, 5, rho, 7);
        REQUIRE(obj.inf_loss() == 0.0);
        REQUIRE(obj.loss_full(obj.minimizer) < 1e-18);  // realizable targets
        TheoryParams p = obj.params();
        REQUIRE(p.beta_hat() == Catch::Approx(rho * rho).epsilon(1e-12));

        // per-sample gradient norm never exceeds the Lipschitz bound beta1 * rho
        Rng rng(9);
        for (int t = 0; t < 50; ++t) {
            std::vector<double> theta(5);
            for (double& x : theta) x = normal(rng, 0.0, 3.0);
            for (std::size_t i = 0; i < obj.size(); ++i)
                REQUIRE(l2_norm(obj.grad_i(theta, i)) <= rho * (1.0 + 1e-12));
        }

        // finite-difference smoothness audit: ||grad(a) - grad(b)|| <= beta_hat ||a - b||
        for (int t = 0; t < 50; ++t) {
            std::vector<double> a(5), b(5);
            for (double& x : a) x = normal(rng, 0.0, 2.0);
            for (double& x : b) x = normal(rng, 0.0, 2.0);
            for (std::size_t i = 0; i < obj.size(); ++i) {
                auto ga = obj.grad_i(a, i);
                auto gb = obj.grad_i(b, i);
                std::vector<double> diff(5), ab(5);
                for (std::size_t j = 0; j < 5; ++j) {
                    diff[j] = ga[j] - gb[j];
                    ab[j] = a[j] - b[j];
                }
                REQUIRE(l2_norm(diff) <= p.beta_hat() * l2_norm(ab) * 1.05);
            }
        }
    }
}

TEST_CASE("decoupled sweep: measured suboptimality sits under the analytic bound") {
    auto obj = QuadraticObjective::make(256, 8, 2.0, 11);
    std::vector<double> theta0(8, 0.7);
    auto sweep = run_decoupled_sam_sweep(obj, {1, 16, 256}, 128, 2000, 5, theta0, 11);
    REQUIRE(sweep.size() == 3);
    for (const auto& pt : sweep) {
        REQUIRE(pt.per_seed.size() == 5);
        REQUIRE(pt.mean_suboptimality <= pt.analytic_bound * 1.1);
        REQUIRE(pt.mean_suboptimality >= 0.0);
    }
    // the bound itself decreases strictly in |B1|
    REQUIRE(sweep[0].analytic_bound > sweep[1].analytic_bound);
    REQUIRE(sweep[1].analytic_bound > sweep[2].analytic_bound);
}

TEST_CASE("random-round utility sweep is deterministic and reports paired seeds") {
    auto a = run_rho_utility_point(1.0, 1.0, 16, 3, 4, 21);
    auto b = run_rho_utility_point(1.0, 1.0, 16, 3, 4, 21);
    REQUIRE(a.per_seed == b.per_seed);
    REQUIRE(a.per_seed.size() == 4);
    REQUIRE(a.mean_suboptimality == Catch::Approx(mean(b.per_seed)));
}

TEST_CASE("spearman and unimodality helpers behave on known inputs") {
    REQUIRE(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == Catch::Approx(1.0));
    REQUIRE(spearman({1, 2, 3, 4}, {40, 30, 20, 10}) == Catch::Approx(-1.0));
    REQUIRE_THROWS_AS(spearman({1.0}, {2.0}), std::invalid_argument);
    REQUIRE(is_unimodal({0.1, 0.5, 0.9, 0.6, 0.2}));
    REQUIRE_FALSE(is_unimodal({0.9, 0.1, 0.9}));
    REQUIRE(is_unimodal({0.5, 0.495, 0.9, 0.4}, 0.01));  // small dip inside slack
    REQUIRE(is_nonincreasing({3.0, 2.0, 2.0, 1.0}));
    REQUIRE_FALSE(is_nonincreasing({1.0, 2.0}));
}
