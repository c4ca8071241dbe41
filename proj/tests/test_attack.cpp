#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace fisherdet;
using namespace fixtures;

namespace {

// 1-D two-class logistic model: logits are w0*x+b0 and w1*x+b1, so the
// cross-entropy gradient in x has the sign of (w1 - w0) for label 0 and the
// FGSM update is known in closed form.
Network logistic_1d(double w0, double w1, double b0, double b1) {
    Network net({1}, {LayerSpec::dense(1, 2), LayerSpec::softmax()});
    net.set_params({w0, w1, b0, b1});
    return net;
}

// Net whose logits ignore the input entirely: zero weights, distinct biases.
Network input_blind() {
    Network net({2}, {LayerSpec::dense(2, 2), LayerSpec::softmax()});
    net.set_params({0.0, 0.0, 0.0, 0.0, 0.3, -0.2});
    return net;
}

} // namespace

TEST_CASE("attack config validation") {
    AttackConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.epsilon = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.steps = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.momentum = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.epsilon = 0.0; // zero budget is legal
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("fgsm input validation") {
    Network net = logistic_1d(1.0, -1.0, 0.0, 0.0);
    CHECK_THROWS_AS(fgsm(net, Tensor({1}, {0.5}), 2, 0.1), ClassIndexError);
    CHECK_THROWS_AS(fgsm(net, Tensor({1}, {1.5}), 0, 0.1), DataError);
    CHECK_THROWS_AS(fgsm(net, Tensor({1}, {-0.1}), 0, 0.1), DataError);
    CHECK_THROWS_AS(fgsm(net, Tensor({1}, {0.5}), 0, -0.5), ConfigError);
}

TEST_CASE("fgsm closed form on the logistic model") {
    // w1 > w0: attacking label 0 pushes x up by exactly eps
    Network net = logistic_1d(0.5, 2.0, 0.1, -0.3);
    Tensor x({1}, {0.4});
    Tensor adv = fgsm(net, x, 0, 0.25);
    CHECK(adv.data[0] == 0.4 + 0.25);
    // the attack reduces the attacked class probability
    CHECK(net.evaluate(adv).probs[0] < net.evaluate(x).probs[0]);

    // attacking label 1 pushes x the other way
    Tensor adv1 = fgsm(net, x, 1, 0.25);
    CHECK(adv1.data[0] == 0.4 - 0.25);

    // clipping at the [0,1] box
    Tensor high({1}, {0.9});
    CHECK(fgsm(net, high, 0, 0.25).data[0] == 1.0);
    Tensor low({1}, {0.1});
    CHECK(fgsm(net, low, 1, 0.25).data[0] == 0.0);

    // w1 < w0 reverses the sign
    Network rev = logistic_1d(2.0, 0.5, 0.0, 0.0);
    CHECK(fgsm(rev, x, 0, 0.25).data[0] == 0.4 - 0.25);
}

TEST_CASE("fgsm leaves gradient-free pixels untouched") {
    Network net = input_blind();
    Tensor x({2}, {0.3, 0.7});
    Tensor adv = fgsm(net, x, 0, 0.2);
    CHECK(adv.data == x.data); // sign(0) = 0 on every pixel
}

TEST_CASE("zero budget is the identity") {
    Network net = tiny_conv();
    Tensor x = random_input({6, 6}, 55);
    CHECK(fgsm(net, x, 1, 0.0).data == x.data);
    AttackConfig cfg;
    cfg.epsilon = 0.0;
    CHECK(mi_fgsm(net, x, 1, cfg).data == x.data);
}

TEST_CASE("mi_fgsm with one step reproduces fgsm exactly") {
    Network net = tiny_conv();
    AttackConfig cfg;
    cfg.steps = 1;
    cfg.epsilon = 0.15;
    for (std::uint64_t s : {70ull, 71ull, 72ull}) {
        Tensor x = random_input({6, 6}, s);
        std::size_t y = s % 3;
        Tensor a = mi_fgsm(net, x, y, cfg);
        Tensor b = fgsm(net, x, y, cfg.epsilon);
        CHECK(a.data == b.data); // bitwise
    }
}

TEST_CASE("attacks respect the budget and the pixel box") {
    Network net = tiny_conv();
    AttackConfig cfg;
    cfg.epsilon = 0.08;
    cfg.steps = 7;
    cfg.momentum = 0.9;
    for (std::uint64_t s = 0; s < 20; ++s) {
        Tensor x = random_input({6, 6}, 1000 + s);
        Tensor adv = mi_fgsm(net, x, s % 3, cfg);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(std::abs(adv.data[i] - x.data[i]) <= cfg.epsilon + 1e-12);
            CHECK(adv.data[i] >= 0.0);
            CHECK(adv.data[i] <= 1.0);
        }
    }
}

TEST_CASE("a larger budget never weakens the logistic attack") {
    Network net = logistic_1d(0.5, 2.0, 0.1, -0.3);
    Tensor x({1}, {0.5});
    double prev = 1.0;
    for (double eps : {0.0, 0.05, 0.1, 0.2, 0.4}) {
        double p0 = net.evaluate(fgsm(net, x, 0, eps)).probs[0];
        CHECK(p0 <= prev + 1e-15);
        prev = p0;
    }
}

TEST_CASE("mi_fgsm on the input-blind net returns x unchanged") {
    Network net = input_blind();
    Tensor x({2}, {0.25, 0.75});
    AttackConfig cfg;
    cfg.steps = 5;
    Tensor adv = mi_fgsm(net, x, 0, cfg);
    CHECK(adv.data == x.data); // every step has ||grad||_1 = 0
}

TEST_CASE("attack_batch bookkeeping") {
    LabeledDataset data = synthetic_blobs(3, 15, 4, 21);
    Network net({4}, {LayerSpec::dense(4, 16), LayerSpec::relu(), LayerSpec::dense(16, 3),
                      LayerSpec::softmax()});
    net.init_params(4);
    TrainConfig tc;
    tc.epochs = 25;
    net = sgd_train(net, data, tc).net;
    REQUIRE(accuracy(net, data) >= 0.95);

    AttackConfig cfg;
    cfg.epsilon = 0.25;
    AttackBatchResult res = attack_batch(net, data, cfg, LabelSource::true_label);
    REQUIRE(res.adversarial.size() == data.size());
    REQUIRE(res.records.size() == data.size());
    CHECK(res.adversarial.labels == data.labels);
    CHECK(res.adversarial.provenance.find("mi_fgsm") != std::string::npos);

    std::size_t flips = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const AttackRecord& r = res.records[i];
        CHECK(r.index == i);
        CHECK(r.clean_pred == net.evaluate(data.inputs[i]).predicted);
        CHECK(r.adv_pred == net.evaluate(res.adversarial.inputs[i]).predicted);
        CHECK(r.success == (r.adv_pred != r.clean_pred));
        flips += r.success;
    }
    CHECK(res.success_count() == flips);
    CHECK(flips > 0); // a 0.25 budget on separable blobs must flip something
    CHECK(accuracy(net, res.adversarial) < accuracy(net, data));
}

TEST_CASE("label source switches between truth and prediction") {
    // force a misclassified sample: attack label differs between the modes
    Network net = logistic_1d(2.0, 0.5, 0.0, 0.0); // predicts 0 for large x
    LabeledDataset ds;
    ds.inputs.push_back(Tensor({1}, {0.9}));
    ds.labels.push_back(1); // model is wrong here
    REQUIRE(net.evaluate(ds.inputs[0]).predicted == 0);

    AttackConfig cfg;
    cfg.method = AttackMethod::fgsm;
    cfg.epsilon = 0.1;
    Tensor via_truth = attack_batch(net, ds, cfg, LabelSource::true_label).adversarial.inputs[0];
    Tensor via_pred =
        attack_batch(net, ds, cfg, LabelSource::predicted_label).adversarial.inputs[0];
    CHECK(via_truth.data[0] != via_pred.data[0]); // opposite directions
}

TEST_CASE("attack_batch wraps per-sample failures with the index") {
    Network net = logistic_1d(1.0, -1.0, 0.0, 0.0);
    LabeledDataset ds;
    ds.inputs.push_back(Tensor({1}, {0.5}));
    ds.labels.push_back(0);
    ds.inputs.push_back(Tensor({1}, {2.0})); // out of the pixel box
    ds.labels.push_back(1);
    AttackConfig cfg;
    try {
        attack_batch(net, ds, cfg, LabelSource::true_label);
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("sample 1") != std::string::npos);
    }
}
