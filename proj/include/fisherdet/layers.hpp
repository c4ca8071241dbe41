#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fisherdet/errors.hpp"
#include "fisherdet/tensor.hpp"

namespace fisherdet {

enum class LayerKind { dense, conv2d, relu, maxpool2d, flatten, softmax };

inline const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::dense: return "dense";
        case LayerKind::conv2d: return "conv2d";
        case LayerKind::relu: return "relu";
        case LayerKind::maxpool2d: return "maxpool2d";
        case LayerKind::flatten: return "flatten";
        case LayerKind::softmax: return "softmax";
    }
    return "?";
}

inline LayerKind layer_kind_from_name(const std::string& name) {
    if (name == "dense") return LayerKind::dense;
    if (name == "conv2d") return LayerKind::conv2d;
    if (name == "relu") return LayerKind::relu;
    if (name == "maxpool2d") return LayerKind::maxpool2d;
    if (name == "flatten") return LayerKind::flatten;
    if (name == "softmax") return LayerKind::softmax;
    throw ConfigError("unknown layer kind '" + name + "'");
}

/**
 * Architecture description of a single layer. Only the fields relevant to
 * the kind are used:
 *   dense:     in, out, bias
 *   conv2d:    in_channels, out_channels, kernel, stride  (valid padding)
 *   maxpool2d: window, stride
 *   relu, flatten, softmax: no fields
 */
struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::size_t in = 0, out = 0;                     // dense
    bool bias = true;                                // dense
    std::size_t in_channels = 0, out_channels = 0;   // conv2d
    std::size_t kernel = 0, stride = 1;              // conv2d
    std::size_t window = 0, pool_stride = 1;         // maxpool2d

    static LayerSpec dense(std::size_t in, std::size_t out, bool bias = true) {
        LayerSpec s;
        s.kind = LayerKind::dense;
        s.in = in;
        s.out = out;
        s.bias = bias;
        return s;
    }
    static LayerSpec conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
                            std::size_t stride = 1) {
        LayerSpec s;
        s.kind = LayerKind::conv2d;
        s.in_channels = in_ch;
        s.out_channels = out_ch;
        s.kernel = kernel;
        s.stride = stride;
        return s;
    }
    static LayerSpec relu() {
        LayerSpec s;
        s.kind = LayerKind::relu;
        return s;
    }
    static LayerSpec maxpool2d(std::size_t window, std::size_t stride) {
        LayerSpec s;
        s.kind = LayerKind::maxpool2d;
        s.window = window;
        s.pool_stride = stride;
        return s;
    }
    static LayerSpec flatten() {
        LayerSpec s;
        s.kind = LayerKind::flatten;
        return s;
    }
    static LayerSpec softmax() {
        LayerSpec s;
        s.kind = LayerKind::softmax;
        return s;
    }

    std::size_t param_count() const {
        switch (kind) {
            case LayerKind::dense: return in * out + (bias ? out : 0);
            case LayerKind::conv2d: return out_channels * in_channels * kernel * kernel + out_channels;
            default: return 0;
        }
    }

    bool operator==(const LayerSpec&) const = default;
};

/// [C,H,W] view of a rank-2 or rank-3 shape; a rank-2 shape is a single channel.
inline std::vector<std::size_t> as_chw(const std::vector<std::size_t>& shape) {
    if (shape.size() == 2) return {1, shape[0], shape[1]};
    if (shape.size() == 3) return shape;
    throw ShapeError("expected a rank-2 or rank-3 image shape, got " + shape_string(shape));
}

/// Output shape of one layer given its input shape; throws ShapeError if the
/// layer cannot consume the input.
inline std::vector<std::size_t> layer_output_shape(const LayerSpec& spec,
                                                   const std::vector<std::size_t>& in_shape) {
    switch (spec.kind) {
        case LayerKind::dense: {
            std::size_t n = Tensor::element_count(in_shape);
            if (in_shape.size() != 1 || n != spec.in)
                throw ShapeError("dense layer expects a flat input of size " +
                                 std::to_string(spec.in) + ", got " + shape_string(in_shape));
            return {spec.out};
        }
        case LayerKind::conv2d: {
            auto chw = as_chw(in_shape);
            if (chw[0] != spec.in_channels)
                throw ShapeError("conv2d expects " + std::to_string(spec.in_channels) +
                                 " input channels, got " + shape_string(in_shape));
            if (chw[1] < spec.kernel || chw[2] < spec.kernel)
                throw ShapeError("conv2d kernel larger than input " + shape_string(in_shape));
            if (spec.stride == 0) throw ConfigError("conv2d stride must be positive");
            std::size_t oh = (chw[1] - spec.kernel) / spec.stride + 1;
            std::size_t ow = (chw[2] - spec.kernel) / spec.stride + 1;
            return {spec.out_channels, oh, ow};
        }
        case LayerKind::relu:
            return in_shape;
        case LayerKind::maxpool2d: {
            auto chw = as_chw(in_shape);
            if (spec.window == 0 || spec.pool_stride == 0)
                throw ConfigError("maxpool2d window and stride must be positive");
            if (chw[1] < spec.window || chw[2] < spec.window)
                throw ShapeError("maxpool2d window larger than input " + shape_string(in_shape));
            std::size_t oh = (chw[1] - spec.window) / spec.pool_stride + 1;
            std::size_t ow = (chw[2] - spec.window) / spec.pool_stride + 1;
            return {chw[0], oh, ow};
        }
        case LayerKind::flatten:
            return {Tensor::element_count(in_shape)};
        case LayerKind::softmax: {
            if (in_shape.size() != 1)
                throw ShapeError("softmax expects a flat input, got " + shape_string(in_shape));
            return in_shape;
        }
    }
    throw ConfigError("unhandled layer kind");
}

} // namespace fisherdet
