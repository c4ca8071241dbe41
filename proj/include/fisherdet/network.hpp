#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "fisherdet/errors.hpp"
#include "fisherdet/layers.hpp"
#include "fisherdet/rng.hpp"
#include "fisherdet/tensor.hpp"

namespace fisherdet {

/// Location of one parameterized layer's block inside the flat parameter vector.
struct ParamBlock {
    std::size_t layer;  // index into the layer list
    std::size_t offset;
    std::size_t count;

    bool operator==(const ParamBlock&) const = default;
};

/**
 * Scalar functional of the softmax output, used as the target of a backward
 * pass. Gradients of these scalars with respect to parameters and input are
 * what every detection quantity is assembled from.
 *
 * Kinds:
 *   class_prob(c)            p_c
 *   log_class_prob(c)        log p_c   (also the log-likelihood of label c)
 *   two_class_prob(s, yhat)    s=0: p_yhat          s=1: sum_{c != yhat} p_c
 *   two_class_log_prob(s, yhat) log of the above
 *
 * The two-class kinds realize the reduction of a C-way output to the binary
 * "predicted class vs rest" output; yhat is fixed by the caller so it can be
 * held constant across parameter perturbations.
 */
struct Scalar {
    enum class Kind { class_prob, log_class_prob, two_class_prob, two_class_log_prob };

    Kind kind;
    std::size_t index = 0;  // class index, or slot 0/1 for two-class kinds
    std::size_t yhat = 0;   // predicted class, two-class kinds only

    static Scalar class_prob(std::size_t c) { return {Kind::class_prob, c, 0}; }
    static Scalar log_class_prob(std::size_t c) { return {Kind::log_class_prob, c, 0}; }
    /// log p(y | x, theta): the log-likelihood of a chosen label.
    static Scalar log_likelihood(std::size_t y) { return {Kind::log_class_prob, y, 0}; }
    static Scalar two_class_prob(std::size_t slot, std::size_t yhat) {
        return {Kind::two_class_prob, slot, yhat};
    }
    static Scalar two_class_log_prob(std::size_t slot, std::size_t yhat) {
        return {Kind::two_class_log_prob, slot, yhat};
    }
};

/// Softmax output and prediction for one input.
struct Eval {
    std::vector<double> logits;
    std::vector<double> probs;
    std::vector<double> log_probs;
    std::size_t predicted = 0;  // argmax of probs, lowest index on ties
};

struct Gradients {
    ParamVector wrt_params;  // length p
    Tensor wrt_input;        // shaped like the input
};

struct GradResult {
    Eval eval;
    Gradients g;
};

struct MultiGradResult {
    Eval eval;
    std::vector<Gradients> grads;  // one per requested scalar
};

/**
 * Feed-forward classifier with a flattened parameter vector.
 *
 * The layer list must be composable from the input shape and end in exactly
 * one softmax. A constructed network is immutable as far as forward and
 * gradient evaluation are concerned; those are const and safe to call
 * concurrently on distinct inputs. set_params / init_params mutate and
 * require exclusive access.
 */
class Network {
public:
    Network(std::vector<std::size_t> input_shape, std::vector<LayerSpec> layers)
        : input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
        if (layers_.empty()) throw ConfigError("network needs at least one layer");
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            bool is_last = (i + 1 == layers_.size());
            if ((layers_[i].kind == LayerKind::softmax) != is_last)
                throw ConfigError("network must end in exactly one terminal softmax layer");
        }
        shapes_.push_back(input_shape_);
        for (const auto& l : layers_) shapes_.push_back(layer_output_shape(l, shapes_.back()));
        if (shapes_.back().size() != 1)
            throw ConfigError("network output must be a flat class vector");
        num_classes_ = shapes_.back()[0];
        if (num_classes_ < 2) throw ConfigError("network needs at least two classes");

        std::size_t off = 0;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            std::size_t n = layers_[i].param_count();
            if (n > 0) offsets_.push_back({i, off, n});
            off += n;
        }
        params_.assign(off, 0.0);
    }

    const std::vector<std::size_t>& input_shape() const { return input_shape_; }
    const std::vector<LayerSpec>& layers() const { return layers_; }
    std::size_t num_classes() const { return num_classes_; }
    std::size_t param_count() const { return params_.size(); }
    const ParamVector& params() const { return params_; }
    const std::vector<ParamBlock>& offset_table() const { return offsets_; }
    /// Shape of the activation entering layer i (shape 0 is the input).
    const std::vector<std::size_t>& shape_at(std::size_t i) const { return shapes_[i]; }

    void set_params(ParamVector p) {
        if (p.size() != params_.size())
            throw ShapeError("parameter vector has length " + std::to_string(p.size()) +
                             ", network expects " + std::to_string(params_.size()));
        params_ = std::move(p);
    }

    /// He-scaled normal weights, zero biases. Deterministic in the seed.
    void init_params(std::uint64_t seed) {
        Rng rng(seed);
        for (const auto& blk : offsets_) {
            const LayerSpec& l = layers_[blk.layer];
            std::size_t fan_in =
                l.kind == LayerKind::dense ? l.in : l.in_channels * l.kernel * l.kernel;
            std::size_t biases = l.kind == LayerKind::dense ? (l.bias ? l.out : 0) : l.out_channels;
            std::size_t weights = blk.count - biases;
            double std = std::sqrt(2.0 / static_cast<double>(fan_in));
            for (std::size_t i = 0; i < weights; ++i) params_[blk.offset + i] = rng.normal(0.0, std);
            for (std::size_t i = weights; i < blk.count; ++i) params_[blk.offset + i] = 0.0;
        }
    }

    /// Copy of this network with parameters theta + eps * v.
    Network perturbed(const ParamVector& v, double eps) const {
        if (v.size() != params_.size())
            throw ShapeError("perturbation direction has length " + std::to_string(v.size()) +
                             ", network has " + std::to_string(params_.size()) + " parameters");
        Network out = *this;
        for (std::size_t i = 0; i < out.params_.size(); ++i) out.params_[i] += eps * v[i];
        return out;
    }

    Eval evaluate(const Tensor& x) const {
        Trace t = run(x, /*keep=*/false);
        return std::move(t.eval);
    }

    /// Class-membership probabilities: positive, summing to one.
    std::vector<double> forward(const Tensor& x) const { return evaluate(x).probs; }

    GradResult grad(const Tensor& x, const Scalar& target) const {
        MultiGradResult r = grad_many(x, {target});
        return {std::move(r.eval), std::move(r.grads[0])};
    }

    /// One forward pass shared by several backward passes.
    MultiGradResult grad_many(const Tensor& x, const std::vector<Scalar>& targets) const {
        Trace t = run(x, /*keep=*/true);
        MultiGradResult out;
        out.grads.reserve(targets.size());
        for (const auto& s : targets) out.grads.push_back(backward(t, seed_at_logits(t.eval, s)));
        out.eval = std::move(t.eval);
        return out;
    }

    ParamVector grad_params(const Tensor& x, const Scalar& target) const {
        return grad(x, target).g.wrt_params;
    }

    Tensor grad_input(const Tensor& x, const Scalar& target) const {
        return grad(x, target).g.wrt_input;
    }

private:
    struct Trace {
        std::vector<Tensor> inputs;                   // activation entering each layer
        std::vector<std::vector<std::size_t>> argmax; // maxpool source indices, per layer
        Eval eval;
    };

    Trace run(const Tensor& x, bool keep) const {
        if (x.shape != input_shape_)
            throw ShapeError("input shape " + shape_string(x.shape) + " does not match network input " +
                             shape_string(input_shape_));
        x.require_finite("network input");

        Trace t;
        if (keep) {
            t.inputs.resize(layers_.size());
            t.argmax.resize(layers_.size());
        }
        Tensor cur = x;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const LayerSpec& l = layers_[i];
            if (keep) t.inputs[i] = cur;
            switch (l.kind) {
                case LayerKind::dense: cur = dense_forward(l, offset_of(i), cur); break;
                case LayerKind::conv2d: cur = conv_forward(l, offset_of(i), cur); break;
                case LayerKind::relu:
                    for (double& v : cur.data) v = v > 0.0 ? v : 0.0;
                    break;
                case LayerKind::maxpool2d: {
                    std::vector<std::size_t> idx;
                    cur = pool_forward(l, cur, idx);
                    if (keep) t.argmax[i] = std::move(idx);
                    break;
                }
                case LayerKind::flatten: cur.shape = {cur.size()}; break;
                case LayerKind::softmax: {
                    cur.require_finite("logits");
                    t.eval = softmax_eval(cur.data);
                    return t;
                }
            }
            cur.require_finite("activations");
        }
        throw ConfigError("network did not reach its softmax layer"); // unreachable
    }

    static Eval softmax_eval(std::vector<double> logits) {
        Eval e;
        std::size_t c = logits.size();
        double m = logits[0];
        std::size_t arg = 0;
        for (std::size_t i = 1; i < c; ++i)
            if (logits[i] > m) { m = logits[i]; arg = i; }
        double sum = 0.0;
        e.probs.resize(c);
        for (std::size_t i = 0; i < c; ++i) {
            e.probs[i] = std::exp(logits[i] - m);
            sum += e.probs[i];
        }
        double lse = m + std::log(sum);
        e.log_probs.resize(c);
        for (std::size_t i = 0; i < c; ++i) {
            e.log_probs[i] = logits[i] - lse;
            e.probs[i] /= sum;
        }
        e.predicted = arg; // max logit == max prob; first max wins on ties
        e.logits = std::move(logits);
        return e;
    }

    /// d(scalar)/d(logits), evaluated analytically from the softmax output.
    std::vector<double> seed_at_logits(const Eval& eval, const Scalar& s) const {
        const std::size_t C = num_classes_;
        const auto& f = eval.probs;
        auto check = [&](std::size_t c) {
            if (c >= C) throw ClassIndexError("class index " + std::to_string(c) +
                                              " out of range for C=" + std::to_string(C));
        };
        std::vector<double> seed(C);
        auto fill = [&](std::size_t c, double scale) {
            // scale * (e_c - f): the Jacobian row of log p_c w.r.t. logits
            for (std::size_t j = 0; j < C; ++j) seed[j] = scale * ((j == c ? 1.0 : 0.0) - f[j]);
        };
        switch (s.kind) {
            case Scalar::Kind::class_prob:
                check(s.index);
                fill(s.index, f[s.index]);
                break;
            case Scalar::Kind::log_class_prob:
                check(s.index);
                fill(s.index, 1.0);
                break;
            case Scalar::Kind::two_class_prob:
            case Scalar::Kind::two_class_log_prob: {
                check(s.yhat);
                if (s.index > 1)
                    throw ClassIndexError("two-class slot must be 0 or 1");
                // complement computed by summation, which stays accurate when
                // the predicted probability is close to one
                double rest = 0.0;
                for (std::size_t j = 0; j < C; ++j)
                    if (j != s.yhat) rest += f[j];
                bool logp = s.kind == Scalar::Kind::two_class_log_prob;
                double scale;
                if (s.index == 0)
                    scale = logp ? 1.0 : f[s.yhat];
                else {
                    if (logp && rest <= 0.0)
                        throw NumericError("two-class complement probability underflowed to zero");
                    scale = logp ? -f[s.yhat] / rest : -f[s.yhat];
                }
                fill(s.yhat, scale);
                break;
            }
        }
        return seed;
    }

    Gradients backward(const Trace& t, std::vector<double> seed) const {
        Gradients g;
        g.wrt_params.assign(params_.size(), 0.0);
        Tensor cur({num_classes_}, std::move(seed));
        // the terminal softmax is where the seed lives; walk the rest in reverse
        for (std::size_t ii = layers_.size() - 1; ii-- > 0;) {
            const LayerSpec& l = layers_[ii];
            const Tensor& in = t.inputs[ii];
            switch (l.kind) {
                case LayerKind::dense: cur = dense_backward(l, offset_of(ii), in, cur, g.wrt_params); break;
                case LayerKind::conv2d: cur = conv_backward(l, offset_of(ii), in, cur, g.wrt_params); break;
                case LayerKind::relu:
                    for (std::size_t i = 0; i < cur.size(); ++i)
                        if (in.data[i] <= 0.0) cur.data[i] = 0.0;
                    break;
                case LayerKind::maxpool2d: {
                    Tensor next = Tensor::zeros(in.shape);
                    const auto& idx = t.argmax[ii];
                    for (std::size_t i = 0; i < cur.size(); ++i) next.data[idx[i]] += cur.data[i];
                    cur = std::move(next);
                    break;
                }
                case LayerKind::flatten: cur.shape = in.shape; break;
                case LayerKind::softmax: break; // only terminal; not reached
            }
        }
        g.wrt_input = std::move(cur);
        return g;
    }

    std::size_t offset_of(std::size_t layer) const {
        for (const auto& b : offsets_)
            if (b.layer == layer) return b.offset;
        throw ConfigError("layer has no parameters");
    }

    Tensor dense_forward(const LayerSpec& l, std::size_t off, const Tensor& x) const {
        const double* W = params_.data() + off;
        const double* b = W + l.in * l.out;
        Tensor y = Tensor::zeros({l.out});
        for (std::size_t o = 0; o < l.out; ++o) {
            double s = l.bias ? b[o] : 0.0;
            const double* row = W + o * l.in;
            for (std::size_t i = 0; i < l.in; ++i) s += row[i] * x.data[i];
            y.data[o] = s;
        }
        return y;
    }

    Tensor dense_backward(const LayerSpec& l, std::size_t off, const Tensor& x, const Tensor& dy,
                          ParamVector& dparams) const {
        const double* W = params_.data() + off;
        double* dW = dparams.data() + off;
        double* db = dW + l.in * l.out;
        Tensor dx = Tensor::zeros(x.shape);
        for (std::size_t o = 0; o < l.out; ++o) {
            double d = dy.data[o];
            if (l.bias) db[o] += d;
            const double* row = W + o * l.in;
            double* drow = dW + o * l.in;
            for (std::size_t i = 0; i < l.in; ++i) {
                drow[i] += d * x.data[i];
                dx.data[i] += d * row[i];
            }
        }
        return dx;
    }

    Tensor conv_forward(const LayerSpec& l, std::size_t off, const Tensor& x) const {
        auto chw = as_chw(x.shape);
        std::size_t IC = chw[0], H = chw[1], W = chw[2];
        std::size_t K = l.kernel, S = l.stride;
        std::size_t OH = (H - K) / S + 1, OW = (W - K) / S + 1;
        const double* kernels = params_.data() + off;
        const double* bias = kernels + l.out_channels * IC * K * K;
        Tensor y = Tensor::zeros({l.out_channels, OH, OW});
        for (std::size_t oc = 0; oc < l.out_channels; ++oc) {
            for (std::size_t oh = 0; oh < OH; ++oh) {
                for (std::size_t ow = 0; ow < OW; ++ow) {
                    double s = bias[oc];
                    for (std::size_t ic = 0; ic < IC; ++ic) {
                        const double* img = x.data.data() + ic * H * W;
                        const double* ker = kernels + ((oc * IC + ic) * K) * K;
                        for (std::size_t kh = 0; kh < K; ++kh) {
                            const double* irow = img + (oh * S + kh) * W + ow * S;
                            const double* krow = ker + kh * K;
                            for (std::size_t kw = 0; kw < K; ++kw) s += krow[kw] * irow[kw];
                        }
                    }
                    y.data[(oc * OH + oh) * OW + ow] = s;
                }
            }
        }
        return y;
    }

    Tensor conv_backward(const LayerSpec& l, std::size_t off, const Tensor& x, const Tensor& dy,
                         ParamVector& dparams) const {
        auto chw = as_chw(x.shape);
        std::size_t IC = chw[0], H = chw[1], W = chw[2];
        std::size_t K = l.kernel, S = l.stride;
        std::size_t OH = (H - K) / S + 1, OW = (W - K) / S + 1;
        const double* kernels = params_.data() + off;
        double* dkernels = dparams.data() + off;
        double* dbias = dkernels + l.out_channels * IC * K * K;
        Tensor dx = Tensor::zeros(x.shape);
        for (std::size_t oc = 0; oc < l.out_channels; ++oc) {
            for (std::size_t oh = 0; oh < OH; ++oh) {
                for (std::size_t ow = 0; ow < OW; ++ow) {
                    double d = dy.data[(oc * OH + oh) * OW + ow];
                    if (d == 0.0) continue;
                    dbias[oc] += d;
                    for (std::size_t ic = 0; ic < IC; ++ic) {
                        const double* img = x.data.data() + ic * H * W;
                        double* dimg = dx.data.data() + ic * H * W;
                        const double* ker = kernels + ((oc * IC + ic) * K) * K;
                        double* dker = dkernels + ((oc * IC + ic) * K) * K;
                        for (std::size_t kh = 0; kh < K; ++kh) {
                            std::size_t base = (oh * S + kh) * W + ow * S;
                            for (std::size_t kw = 0; kw < K; ++kw) {
                                dker[kh * K + kw] += d * img[base + kw];
                                dimg[base + kw] += d * ker[kh * K + kw];
                            }
                        }
                    }
                }
            }
        }
        return dx;
    }

    static Tensor pool_forward(const LayerSpec& l, const Tensor& x, std::vector<std::size_t>& argmax) {
        auto chw = as_chw(x.shape);
        std::size_t C = chw[0], H = chw[1], W = chw[2];
        std::size_t K = l.window, S = l.pool_stride;
        std::size_t OH = (H - K) / S + 1, OW = (W - K) / S + 1;
        Tensor y = Tensor::zeros({C, OH, OW});
        argmax.assign(C * OH * OW, 0);
        for (std::size_t c = 0; c < C; ++c) {
            const double* img = x.data.data() + c * H * W;
            for (std::size_t oh = 0; oh < OH; ++oh) {
                for (std::size_t ow = 0; ow < OW; ++ow) {
                    std::size_t best = (oh * S) * W + ow * S;
                    double bv = img[best];
                    for (std::size_t kh = 0; kh < K; ++kh) {
                        for (std::size_t kw = 0; kw < K; ++kw) {
                            std::size_t at = (oh * S + kh) * W + ow * S + kw;
                            if (img[at] > bv) { bv = img[at]; best = at; } // first max wins
                        }
                    }
                    y.data[(c * OH + oh) * OW + ow] = bv;
                    argmax[(c * OH + oh) * OW + ow] = c * H * W + best;
                }
            }
        }
        return y;
    }

    std::vector<std::size_t> input_shape_;
    std::vector<LayerSpec> layers_;
    std::vector<std::vector<std::size_t>> shapes_;
    std::vector<ParamBlock> offsets_;
    ParamVector params_;
    std::size_t num_classes_ = 0;
};

} // namespace fisherdet
