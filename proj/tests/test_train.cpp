#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace fisherdet;
using namespace fixtures;

namespace {

LabeledDataset four_points() {
    LabeledDataset ds;
    ds.inputs = {Tensor({2}, {0.1, 0.9}), Tensor({2}, {0.9, 0.1}), Tensor({2}, {0.2, 0.8}),
                 Tensor({2}, {0.8, 0.2})};
    ds.labels = {1, 0, 1, 0};
    return ds;
}

// Mean cross-entropy gradient at the network's current parameters, computed
// through the public grad API sample by sample.
ParamVector mean_ce_grad(const Network& net, const LabeledDataset& data) {
    ParamVector g(net.param_count(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        ParamVector gi = net.grad_params(data.inputs[i], Scalar::log_likelihood(data.labels[i]));
        for (std::size_t j = 0; j < g.size(); ++j) g[j] -= gi[j] / data.size();
    }
    return g;
}

} // namespace

TEST_CASE("config validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.momentum = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.momentum = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.epochs = 0;
    CHECK_NOTHROW(cfg.validate()); // zero epochs is a valid no-op request
}

TEST_CASE("zero epochs returns the network unchanged") {
    Network net = frozen_mlp();
    TrainConfig cfg;
    cfg.epochs = 0;
    TrainResult res = sgd_train(net, four_points(), cfg);
    CHECK(res.net.params() == net.params());
    CHECK(res.trace.empty());
}

TEST_CASE("one full-batch step without momentum is plain gradient descent") {
    Network net = seeded_mlp(41, 2, 5, 2);
    LabeledDataset data = four_points();
    ParamVector g = mean_ce_grad(net, data);

    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.momentum = 0.0;
    cfg.batch_size = 100; // one batch covers everything
    cfg.epochs = 1;
    TrainResult res = sgd_train(net, data, cfg);

    for (std::size_t j = 0; j < g.size(); ++j) {
        double want = net.params()[j] - 0.05 * g[j];
        CHECK(std::abs(res.net.params()[j] - want) < 1e-12);
    }
    REQUIRE(res.trace.size() == 1);
    CHECK(res.trace[0].epoch == 0);
    CHECK(std::isnan(res.trace[0].test_acc));
    CHECK(std::abs(res.trace[0].loss - mean_loss(net, data)) < 1e-12); // loss is pre-update
}

TEST_CASE("momentum accumulates the velocity across steps") {
    Network net = seeded_mlp(43, 2, 5, 2);
    LabeledDataset data = four_points();
    const double lr = 0.05, mu = 0.5;

    // independent two-epoch emulation through the public API
    Network emu = net;
    ParamVector u(net.param_count(), 0.0);
    for (int epoch = 0; epoch < 2; ++epoch) {
        ParamVector g = mean_ce_grad(emu, data);
        ParamVector p = emu.params();
        for (std::size_t j = 0; j < p.size(); ++j) {
            u[j] = mu * u[j] + g[j];
            p[j] -= lr * u[j];
        }
        emu.set_params(std::move(p));
    }

    TrainConfig cfg;
    cfg.learning_rate = lr;
    cfg.momentum = mu;
    cfg.batch_size = 100;
    cfg.epochs = 2;
    TrainResult res = sgd_train(net, data, cfg);
    for (std::size_t j = 0; j < emu.params().size(); ++j)
        CHECK(std::abs(res.net.params()[j] - emu.params()[j]) < 1e-10);
}

TEST_CASE("training separable blobs drives the loss down") {
    LabeledDataset data = synthetic_blobs(3, 40, 4, 7);
    Network net({4}, {LayerSpec::dense(4, 16), LayerSpec::relu(), LayerSpec::dense(16, 3),
                      LayerSpec::softmax()});
    net.init_params(3);
    double before = mean_loss(net, data);

    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.seed = 3;
    TrainResult res = sgd_train(net, data, cfg, &data);
    double after = mean_loss(res.net, data);

    CHECK(after < before * 0.2);
    CHECK(accuracy(res.net, data) >= 0.99);
    REQUIRE(res.trace.size() == 30);
    CHECK(res.trace.back().test_acc == res.trace.back().train_acc); // eval set == train set
    // epoch indices are sequential
    for (std::size_t e = 0; e < res.trace.size(); ++e) CHECK(res.trace[e].epoch == e);
}

TEST_CASE("training is deterministic in the seed") {
    LabeledDataset data = synthetic_blobs(2, 20, 3, 9);
    Network net({3}, {LayerSpec::dense(3, 8), LayerSpec::relu(), LayerSpec::dense(8, 2),
                      LayerSpec::softmax()});
    net.init_params(5);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 8;
    cfg.seed = 11;
    TrainResult a = sgd_train(net, data, cfg);
    TrainResult b = sgd_train(net, data, cfg);
    CHECK(a.net.params() == b.net.params()); // bitwise

    cfg.seed = 12; // different shuffle order, different result
    TrainResult c = sgd_train(net, data, cfg);
    CHECK(a.net.params() != c.net.params());
}

TEST_CASE("label outside the class range is rejected") {
    LabeledDataset data = four_points();
    data.labels[2] = 7;
    Network net = seeded_mlp(41, 2, 5, 2);
    TrainConfig cfg;
    CHECK_THROWS_AS(sgd_train(net, data, cfg), DataError);
    CHECK_THROWS_AS(accuracy(net, data), DataError);
    CHECK_THROWS_AS(mean_loss(net, data), DataError);
}

TEST_CASE("accuracy and mean_loss agree with direct evaluation") {
    Network net = frozen_mlp();
    LabeledDataset data = four_points();
    double want_loss = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto probs = frozen_mlp_probs(data.inputs[i].data[0], data.inputs[i].data[1]);
        want_loss -= std::log(probs[data.labels[i]]) / data.size();
        std::size_t pred = probs[1] > probs[0] ? 1 : 0;
        if (pred == data.labels[i]) ++hits;
    }
    CHECK(std::abs(mean_loss(net, data) - want_loss) < 1e-13);
    CHECK(accuracy(net, data) == double(hits) / 4.0);
}
