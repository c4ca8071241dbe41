#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fisherdet/errors.hpp"
#include "fisherdet/network.hpp"
#include "fisherdet/tensor.hpp"

namespace fisherdet {

/// full_C keeps all C classes; two_class reduces the output to
/// (p_yhat, sum of the rest) before any Fisher quantity is formed.
enum class ClassMode { full_C, two_class };

/// How directional derivatives in theta are obtained: exact backprop, or a
/// forward finite difference at theta + eps' * v.
enum class DerivativeMode { backprop, finite_difference };

struct ScoreConfig {
    ClassMode class_mode = ClassMode::two_class;
    DerivativeMode derivative_mode = DerivativeMode::finite_difference;
    double fd_step = 1e-4; // eps'
    double lambda = 0.01;  // scale of the direction vector

    void validate() const {
        if (!(fd_step > 0.0)) throw ConfigError("fd_step must be > 0");
        if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
    }
};

/// v = lambda * grad_theta log p_yhat(x), optionally normalized to unit length.
struct DirectionVector {
    ParamVector v;
    double scale = 0.0;         // the lambda that built v
    std::size_t label_used = 0; // yhat
    bool normalized = false;
};

/// Reduction of a C-way output to (p_yhat, everything else). The complement
/// is summed rather than taken as 1 - p_yhat, which keeps it accurate when
/// p_yhat is close to one.
inline std::array<double, 2> two_class_reduce(const std::vector<double>& probs, std::size_t yhat) {
    if (yhat >= probs.size())
        throw ClassIndexError("yhat " + std::to_string(yhat) + " out of range for C=" +
                              std::to_string(probs.size()));
    double rest = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c)
        if (c != yhat) rest += probs[c];
    return {probs[yhat], rest};
}

inline DirectionVector direction_v(const Network& net, const Tensor& x, const ScoreConfig& cfg,
                                   bool normalized = false) {
    cfg.validate();
    Eval e = net.evaluate(x);
    ParamVector g = net.grad_params(x, Scalar::log_class_prob(e.predicted));
    DirectionVector dv;
    dv.scale = cfg.lambda;
    dv.label_used = e.predicted;
    dv.normalized = normalized;
    dv.v = std::move(g);
    for (double& c : dv.v) c *= cfg.lambda;
    if (normalized) {
        double n = norm2(dv.v);
        if (n == 0.0)
            throw DegenerateDirectionError("direction vector has zero norm; cannot normalize");
        for (double& c : dv.v) c /= n;
    }
    return dv;
}

namespace detail {

/// q, r and the shared log-prob gradient for the two-class reduction at x.
struct TwoClassState {
    double q, r;
    ParamVector w; // grad_theta log p_yhat
};

inline TwoClassState two_class_state(const Network& net, const Tensor& x) {
    GradResult res = net.grad(x, Scalar::log_class_prob(net.evaluate(x).predicted));
    auto qr = two_class_reduce(res.eval.probs, res.eval.predicted);
    if (qr[1] <= 0.0) throw NumericError("two-class complement probability underflowed to zero");
    return {qr[0], qr[1], std::move(res.g.wrt_params)};
}

} // namespace detail

/**
 * tr F = sum over classes of <grad f^c, grad log f^c>. This is a pure
 * backprop quantity (derivative_mode concerns the directional form and FIS):
 * full_C costs one backward pass per class, two_class collapses to a single
 * backward pass since all four reduced gradients are multiples of
 * grad log p_yhat. Nonnegative by construction.
 */
inline double fisher_trace(const Network& net, const Tensor& x, const ScoreConfig& cfg) {
    cfg.validate();
    double trace = 0.0;
    if (cfg.class_mode == ClassMode::full_C) {
        std::vector<Scalar> targets;
        for (std::size_t c = 0; c < net.num_classes(); ++c)
            targets.push_back(Scalar::log_class_prob(c));
        MultiGradResult r = net.grad_many(x, targets);
        for (std::size_t c = 0; c < targets.size(); ++c) {
            double n2 = dot(r.grads[c].wrt_params, r.grads[c].wrt_params);
            trace += r.eval.probs[c] * n2; // f^c ||grad log f^c||^2
        }
    } else {
        auto st = detail::two_class_state(net, x);
        double n2 = dot(st.w, st.w);
        // q||w||^2 + (q^2/r)||w||^2, the two reduced classes' contributions
        trace = st.q * n2 + (st.q * st.q / st.r) * n2;
    }
    if (!std::isfinite(trace)) throw NumericError("fisher_trace is not finite");
    return trace;
}

/**
 * v^T F v. Backprop mode contracts exact gradients with v; finite-difference
 * mode replaces both directional derivatives by forward differences using a
 * single extra forward pass at theta + eps' * v.
 */
inline double fisher_form(const Network& net, const Tensor& x, const DirectionVector& dv,
                          const ScoreConfig& cfg) {
    cfg.validate();
    if (dv.v.size() != net.param_count())
        throw ShapeError("direction vector has length " + std::to_string(dv.v.size()) +
                         ", network has " + std::to_string(net.param_count()) + " parameters");

    double form = 0.0;
    if (cfg.derivative_mode == DerivativeMode::backprop) {
        if (cfg.class_mode == ClassMode::full_C) {
            std::vector<Scalar> targets;
            for (std::size_t c = 0; c < net.num_classes(); ++c)
                targets.push_back(Scalar::log_class_prob(c));
            MultiGradResult r = net.grad_many(x, targets);
            for (std::size_t c = 0; c < targets.size(); ++c) {
                double d = dot(dv.v, r.grads[c].wrt_params); // v . grad log f^c
                form += r.eval.probs[c] * d * d;
            }
        } else {
            auto st = detail::two_class_state(net, x);
            double d = dot(dv.v, st.w);
            form = st.q * d * d + (st.q * st.q / st.r) * d * d;
        }
    } else {
        double eps = cfg.fd_step;
        Eval base = net.evaluate(x);
        Eval pert = net.perturbed(dv.v, eps).evaluate(x);
        if (cfg.class_mode == ClassMode::full_C) {
            for (std::size_t c = 0; c < base.probs.size(); ++c) {
                double a = (pert.probs[c] - base.probs[c]) / eps;
                double b = (pert.log_probs[c] - base.log_probs[c]) / eps;
                form += a * b;
            }
        } else {
            std::size_t yhat = base.predicted; // frozen at theta
            auto qr0 = two_class_reduce(base.probs, yhat);
            auto qr1 = two_class_reduce(pert.probs, yhat);
            if (qr0[1] <= 0.0 || qr1[1] <= 0.0)
                throw NumericError("two-class complement probability underflowed to zero");
            double a0 = (qr1[0] - qr0[0]) / eps;
            double b0 = (pert.log_probs[yhat] - base.log_probs[yhat]) / eps;
            double a1 = (qr1[1] - qr0[1]) / eps;
            double b1 = (std::log(qr1[1]) - std::log(qr0[1])) / eps;
            form = a0 * b0 + a1 * b1;
        }
    }
    if (!std::isfinite(form)) throw NumericError("fisher_form is not finite");
    return form;
}

/// vbar^T F vbar with vbar = v / ||v||; independent of lambda.
inline double fisher_form_normalized(const Network& net, const Tensor& x, const ScoreConfig& cfg) {
    DirectionVector dv = direction_v(net, x, cfg, /*normalized=*/true);
    return fisher_form(net, x, dv, cfg);
}

/// All three surrogates for one input, sharing the Eq-of-motion direction.
struct ScoreRecord {
    double trace = 0.0;
    double form = 0.0;
    double normalized_form = 0.0;
    std::size_t predicted = 0;
    double max_prob = 0.0;
    ScoreConfig config;
};

inline ScoreRecord score(const Network& net, const Tensor& x, const ScoreConfig& cfg) {
    cfg.validate();
    ScoreRecord rec;
    rec.config = cfg;
    Eval e = net.evaluate(x);
    rec.predicted = e.predicted;
    rec.max_prob = e.probs[e.predicted];
    rec.trace = fisher_trace(net, x, cfg);
    DirectionVector dv = direction_v(net, x, cfg);
    rec.form = fisher_form(net, x, dv, cfg);
    double n = norm2(dv.v);
    if (n == 0.0) {
        // degenerate direction: the form is exactly zero and carries no
        // directional information; report 0 rather than failing the batch
        rec.normalized_form = 0.0;
    } else {
        DirectionVector unit = dv;
        for (double& c : unit.v) c /= n;
        unit.normalized = true;
        rec.normalized_form = fisher_form(net, x, unit, cfg);
    }
    return rec;
}

/// Fisher information sensitivity of each input node.
struct FisMap {
    Tensor values;         // shaped like the input
    double fd_step = 0.0;  // eps' used
    ClassMode class_mode = ClassMode::two_class;
    double lambda = 0.0;
    std::size_t label_used = 0;
    bool normalized_direction = false;
};

namespace detail {

/// The finite-difference gradient pairs FIS and the delta_vF oracle share:
/// a^c = (grad_x f^c at theta+eps'v - at theta)/eps', b^c likewise for log f^c.
/// One backward pass per class group per parameter point; the two-class
/// reduction derives all four reduced gradients from grad_x p_yhat alone.
struct FisComponents {
    std::vector<std::vector<double>> a, b; // [group][input node]
};

inline FisComponents fis_components(const Network& net, const Tensor& x, const DirectionVector& dv,
                                    const ScoreConfig& cfg) {
    cfg.validate();
    if (dv.v.size() != net.param_count())
        throw ShapeError("direction vector has length " + std::to_string(dv.v.size()) +
                         ", network has " + std::to_string(net.param_count()) + " parameters");
    double eps = cfg.fd_step;
    Network pert = net.perturbed(dv.v, eps);
    std::size_t n = x.size();
    FisComponents out;

    if (cfg.class_mode == ClassMode::full_C) {
        std::vector<Scalar> targets;
        for (std::size_t c = 0; c < net.num_classes(); ++c)
            targets.push_back(Scalar::log_class_prob(c));
        MultiGradResult base = net.grad_many(x, targets);
        MultiGradResult plus = pert.grad_many(x, targets);
        out.a.assign(targets.size(), std::vector<double>(n));
        out.b.assign(targets.size(), std::vector<double>(n));
        for (std::size_t c = 0; c < targets.size(); ++c) {
            double f0 = base.eval.probs[c], f1 = plus.eval.probs[c];
            const auto& g0 = base.grads[c].wrt_input.data;  // grad_x log f^c
            const auto& g1 = plus.grads[c].wrt_input.data;
            for (std::size_t i = 0; i < n; ++i) {
                out.a[c][i] = (f1 * g1[i] - f0 * g0[i]) / eps; // grad f = f grad log f
                out.b[c][i] = (g1[i] - g0[i]) / eps;
            }
        }
    } else {
        // yhat frozen from the unperturbed network
        std::size_t yhat = net.evaluate(x).predicted;
        GradResult base = net.grad(x, Scalar::two_class_prob(0, yhat));
        GradResult plus = pert.grad(x, Scalar::two_class_prob(0, yhat));
        auto qr0 = two_class_reduce(base.eval.probs, yhat);
        auto qr1 = two_class_reduce(plus.eval.probs, yhat);
        if (qr0[1] <= 0.0 || qr1[1] <= 0.0)
            throw NumericError("two-class complement probability underflowed to zero");
        const auto& h0 = base.g.wrt_input.data; // grad_x q at theta
        const auto& h1 = plus.g.wrt_input.data;
        out.a.assign(2, std::vector<double>(n));
        out.b.assign(2, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i) {
            out.a[0][i] = (h1[i] - h0[i]) / eps;
            out.a[1][i] = -out.a[0][i]; // grad_x r = -grad_x q
            out.b[0][i] = (h1[i] / qr1[0] - h0[i] / qr0[0]) / eps;
            out.b[1][i] = (-h1[i] / qr1[1] + h0[i] / qr0[1]) / eps;
        }
    }
    return out;
}

} // namespace detail

/// FIS_i = sum over class groups of a_i^c b_i^c, the diagonal of delta_vF.
inline FisMap fis(const Network& net, const Tensor& x, const DirectionVector& dv,
                  const ScoreConfig& cfg) {
    detail::FisComponents cc = detail::fis_components(net, x, dv, cfg);
    FisMap out;
    out.values = Tensor::zeros(x.shape);
    for (std::size_t g = 0; g < cc.a.size(); ++g)
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values.data[i] += cc.a[g][i] * cc.b[g][i];
    out.values.require_finite("FIS map");
    out.fd_step = cfg.fd_step;
    out.class_mode = cfg.class_mode;
    out.lambda = dv.scale;
    out.label_used = dv.label_used;
    out.normalized_direction = dv.normalized;
    return out;
}

} // namespace fisherdet
