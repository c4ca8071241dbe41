#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fisherdet/dataset.hpp"
#include "fisherdet/errors.hpp"
#include "fisherdet/network.hpp"

namespace fisherdet {

enum class AttackMethod { fgsm, mi_fgsm };

enum class LabelSource { true_label, predicted_label };

struct AttackConfig {
    AttackMethod method = AttackMethod::mi_fgsm;
    double epsilon = 0.1;   // infinity,-norm budget in input units
    std::size_t steps = 10; // T
    double momentum = 1.0;  // mu

    void validate() const {
        if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
        if (steps == 0) throw ConfigError("steps must be >= 1");
        if (!(momentum >= 0.0)) throw ConfigError("momentum must be >= 0");
    }
};

namespace detail {

inline void check_attack_input(const Network& net, const Tensor& x, std::size_t y) {
    if (y >= net.num_classes())
        throw ClassIndexError("attack label " + std::to_string(y) + " out of range for C=" +
                              std::to_string(net.num_classes()));
    for (double v : x.data)
        if (!(v >= 0.0 && v <= 1.0))
            throw DataError("attack input has pixels outside [0,1]");
}

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

} // namespace detail

/// Fast gradient sign method: x_adv = clip_[0,1](x + eps * sign(d/dx of -log p_y)).
/// sign(0) = 0, so pixels the loss does not depend on are left untouched.
inline Tensor fgsm(const Network& net, const Tensor& x, std::size_t y, double eps) {
    if (!(eps >= 0.0)) throw ConfigError("epsilon must be >= 0");
    detail::check_attack_input(net, x, y);
    Tensor g = net.grad_input(x, Scalar::log_likelihood(y)); // d(log p_y)/dx
    Tensor adv = x;
    for (std::size_t i = 0; i < adv.size(); ++i)
        adv.data[i] = std::clamp(adv.data[i] + eps * detail::sgn(-g.data[i]), 0.0, 1.0);
    return adv;
}

/**
 * Momentum-iterative FGSM, step size alpha = eps / T:
 *   g_{t+1} = mu * g_t + grad / ||grad||_1
 *   x_{t+1} = project(x_t + alpha * sign(g_{t+1}))
 * projecting onto [0,1] intersected with the eps-ball around x at every step.
 * A step with ||grad||_1 = 0 contributes the zero vector. T = 1 reproduces
 * fgsm exactly.
 */
inline Tensor mi_fgsm(const Network& net, const Tensor& x, std::size_t y, const AttackConfig& cfg) {
    cfg.validate();
    detail::check_attack_input(net, x, y);
    double alpha = cfg.epsilon / static_cast<double>(cfg.steps);
    Tensor adv = x;
    std::vector<double> g(x.size(), 0.0);
    for (std::size_t t = 0; t < cfg.steps; ++t) {
        Tensor grad = net.grad_input(adv, Scalar::log_likelihood(y));
        for (double& v : grad.data) v = -v; // loss is -log p_y
        double l1 = 0.0;
        for (double v : grad.data) l1 += std::abs(v);
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = cfg.momentum * g[i] + (l1 > 0.0 ? grad.data[i] / l1 : 0.0);
        for (std::size_t i = 0; i < adv.size(); ++i) {
            double v = adv.data[i] + alpha * detail::sgn(g[i]);
            v = std::clamp(v, x.data[i] - cfg.epsilon, x.data[i] + cfg.epsilon);
            adv.data[i] = std::clamp(v, 0.0, 1.0);
        }
    }
    return adv;
}

struct AttackRecord {
    std::size_t index;
    std::size_t clean_pred;
    std::size_t adv_pred;
    bool success; // prediction changed relative to the clean input
};

struct AttackBatchResult {
    LabeledDataset adversarial; // aligned 1:1 with the source; labels copied through
    std::vector<AttackRecord> records;

    std::size_t success_count() const {
        std::size_t n = 0;
        for (const auto& r : records) n += r.success ? 1 : 0;
        return n;
    }
};

/// Attacks every sample; failed attacks are kept. label_source picks the loss
/// label: the dataset's label, or the clean prediction (label-free mode).
inline AttackBatchResult attack_batch(const Network& net, const LabeledDataset& data,
                                      const AttackConfig& cfg, LabelSource label_source) {
    cfg.validate();
    data.validate(net.num_classes());
    AttackBatchResult out;
    out.adversarial.provenance = "attack(" +
        std::string(cfg.method == AttackMethod::fgsm ? "fgsm" : "mi_fgsm") +
        ", eps=" + std::to_string(cfg.epsilon) + ") of " + data.provenance;
    out.adversarial.inputs.reserve(data.size());
    out.adversarial.labels = data.labels;
    out.records.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        try {
            std::size_t clean_pred = net.evaluate(data.inputs[i]).predicted;
            std::size_t y = label_source == LabelSource::true_label ? data.labels[i] : clean_pred;
            Tensor adv = cfg.method == AttackMethod::fgsm
                             ? fgsm(net, data.inputs[i], y, cfg.epsilon)
                             : mi_fgsm(net, data.inputs[i], y, cfg);
            std::size_t adv_pred = net.evaluate(adv).predicted;
            out.adversarial.inputs.push_back(std::move(adv));
            out.records.push_back({i, clean_pred, adv_pred, adv_pred != clean_pred});
        } catch (const Error& e) {
            throw Error("sample " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

} // namespace fisherdet
