#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "fisherdet/dataset.hpp"
#include "fisherdet/errors.hpp"
#include "fisherdet/network.hpp"
#include "fisherdet/rng.hpp"

namespace fisherdet {

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::size_t batch_size = 32;
    std::size_t epochs = 5;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
        if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0,1)");
        if (batch_size == 0) throw ConfigError("batch_size must be positive");
    }
};

struct EpochStats {
    std::size_t epoch;
    double loss;       // mean cross-entropy over the epoch's minibatches
    double train_acc;  // on the training set, after the epoch's updates
    double test_acc;   // on the eval set if one was given, else NaN
};

struct TrainResult {
    Network net;
    std::vector<EpochStats> trace;
};

/// Fraction of inputs whose predicted class equals the label.
inline double accuracy(const Network& net, const LabeledDataset& data) {
    data.validate(net.num_classes());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (net.evaluate(data.inputs[i]).predicted == data.labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

/// Mean cross-entropy of the dataset under the network.
inline double mean_loss(const Network& net, const LabeledDataset& data) {
    data.validate(net.num_classes());
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        sum -= net.evaluate(data.inputs[i]).log_probs[data.labels[i]];
    return sum / static_cast<double>(data.size());
}

/**
 * Minibatch SGD with classical momentum on mean cross-entropy:
 *   u <- momentum * u + g_batch,  theta <- theta - learning_rate * u.
 *
 * The loss is the batch MEAN, so learning_rate is insensitive to batch size.
 * Data order is a per-epoch Fisher-Yates shuffle driven by a stream derived
 * from (seed, epoch); the whole run is deterministic in the seed. epochs = 0
 * returns the network unchanged. eval_data, when given, is scored after each
 * epoch for the trace only; it never influences the updates.
 */
inline TrainResult sgd_train(const Network& start, const LabeledDataset& data,
                             const TrainConfig& cfg, const LabeledDataset* eval_data = nullptr) {
    cfg.validate();
    data.validate(start.num_classes());

    TrainResult res{start, {}};
    Network& net = res.net;
    ParamVector velocity(net.param_count(), 0.0);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(Rng::substream(cfg.seed, epoch));
        shuffle(order, shuffle_rng);

        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            std::size_t end = std::min(begin + cfg.batch_size, order.size());
            double inv = 1.0 / static_cast<double>(end - begin);
            ParamVector grad(net.param_count(), 0.0);
            for (std::size_t k = begin; k < end; ++k) {
                std::size_t i = order[k];
                GradResult r = net.grad(data.inputs[i], Scalar::log_likelihood(data.labels[i]));
                epoch_loss -= r.eval.log_probs[data.labels[i]];
                for (std::size_t j = 0; j < grad.size(); ++j)
                    grad[j] -= inv * r.g.wrt_params[j]; // d(-log p_y)/dtheta
            }
            ParamVector p = net.params();
            for (std::size_t j = 0; j < p.size(); ++j) {
                velocity[j] = cfg.momentum * velocity[j] + grad[j];
                p[j] -= cfg.learning_rate * velocity[j];
            }
            net.set_params(std::move(p));
        }
        epoch_loss /= static_cast<double>(data.size());
        if (!std::isfinite(epoch_loss)) throw NumericError("training loss diverged");
        double test_acc = eval_data ? accuracy(net, *eval_data)
                                    : std::numeric_limits<double>::quiet_NaN();
        res.trace.push_back({epoch, epoch_loss, accuracy(net, data), test_acc});
    }
    return res;
}

} // namespace fisherdet
