#include <catch2/catch_amalgamated.hpp>

#include "dpadapter/data.hpp"
#include "dpadapter/pretrain.hpp"
#include "dpadapter/robustness.hpp"

using namespace dpadapter;

namespace {

Dataset tiny_dataset(std::uint64_t seed) {
    SyntheticConfig cfg;
    cfg.n_up = 200;
    cfg.n_down = 50;
    cfg.d_in = 4;
    cfg.k = 2;
    return make_synthetic_transfer(seed, TransferRelation::IidSplit, cfg).upstream;
}

}  // namespace

TEST_CASE("zero noise makes robust accuracy equal clean accuracy exactly") {
    Dataset data = tiny_dataset(1);
    ModelParams model = ModelParams::init_random({4, 3, 2}, 1);
    auto rep = robust_accuracy(model, data, 0.0, 5, 42);
    REQUIRE(rep.robust_accuracy == rep.clean_accuracy);
}

TEST_CASE("overwhelming noise pushes accuracy toward chance level") {
    Dataset data = tiny_dataset(2);
    ModelParams model = ModelParams::init_random({4, 3, 2}, 2);
    auto rep = robust_accuracy(model, data, 1000.0, 40, 7);
    REQUIRE(rep.robust_accuracy == Catch::Approx(0.5).margin(0.12));  // k = 2
}

TEST_CASE("robust accuracy is deterministic per seed and monotone-ish in noise") {
    Dataset data = tiny_dataset(3);
    ModelParams model = ModelParams::init_random({4, 3, 2}, 3);
    auto a = robust_accuracy(model, data, 0.1, 10, 5);
    auto b = robust_accuracy(model, data, 0.1, 10, 5);
    REQUIRE(a.robust_accuracy == b.robust_accuracy);

    // a trained model loses accuracy under heavy parameter noise
    PretrainConfig pc;
    pc.m1 = 32;
    pc.m2 = 32;
    pc.iterations = 80;
    pc.warmup_epochs = 1;
    ModelParams trained = train_standard(data, pc, 3, model);
    auto mild = robust_accuracy(trained, data, 0.02, 30, 5);
    auto heavy = robust_accuracy(trained, data, 5.0, 30, 5);
    REQUIRE(mild.clean_accuracy > 0.8);
    REQUIRE(heavy.robust_accuracy < mild.robust_accuracy);
}

TEST_CASE("robust accuracy input validation") {
    Dataset data = tiny_dataset(4);
    ModelParams model = ModelParams::init_random({4, 3, 2}, 4);
    Dataset empty;
    empty.features = Tensor({0, 4});
    REQUIRE_THROWS_AS(robust_accuracy(model, empty, 0.1, 5, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(robust_accuracy(model, data, -0.1, 5, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(robust_accuracy(model, data, 0.1, 0, 1), std::invalid_argument);
}

TEST_CASE("parameter-robustness estimate approaches the linear closed form") {
    // single affine layer, k = 2: the true-class logit is x . W_y + b_y, so the
    // worst-case change per unit parameter perturbation is sqrt(||x||^2 + 1).
    ModelParams model = ModelParams::make({1, 2});
    Dataset probes;
    probes.features = Tensor({1, 1}, {2.0});
    probes.labels = {0};
    double expect = std::sqrt(4.0 + 1.0);

    auto est = estimate_rho(model, probes, 4000, {1e-3}, 9);
    REQUIRE(est.true_class_logit <= expect * (1.0 + 1e-6));
    REQUIRE(est.true_class_logit == Catch::Approx(expect).epsilon(0.05));
    // the L2-logit variant dominates the single-logit one
    REQUIRE(est.logit_l2 >= est.true_class_logit);
}

TEST_CASE("more directions can only raise the running max") {
    Dataset data = tiny_dataset(5);
    Dataset probes;
    probes.features = data.rows_of({0, 1, 2});
    probes.labels = data.labels_of({0, 1, 2});
    ModelParams model = ModelParams::init_random({4, 3, 2}, 5);
    // same seed: the first 4 directions of the 8-direction run are identical
    auto few = estimate_rho(model, probes, 4, {0.1, 0.5}, 77);
    auto many = estimate_rho(model, probes, 8, {0.1, 0.5}, 77);
    REQUIRE(many.true_class_logit >= few.true_class_logit);
    REQUIRE(many.logit_l2 >= few.logit_l2);
}

TEST_CASE("rho estimation input validation") {
    Dataset data = tiny_dataset(6);
    Dataset probes;
    probes.features = data.rows_of({0});
    probes.labels = data.labels_of({0});
    ModelParams model = ModelParams::init_random({4, 3, 2}, 6);
    REQUIRE_THROWS_AS(estimate_rho(model, probes, 0, {0.1}, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(estimate_rho(model, probes, 4, {}, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(estimate_rho(model, probes, 4, {-0.1}, 1), std::invalid_argument);
    Dataset empty;
    empty.features = Tensor({0, 4});
    REQUIRE_THROWS_AS(estimate_rho(model, empty, 4, {0.1}, 1), std::invalid_argument);
}
