#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "fisherdet/errors.hpp"
#include "fisherdet/rng.hpp"
#include "fisherdet/tensor.hpp"

namespace fisherdet {

/// Inputs with class labels. Inputs share one shape; pixel values live in [0,1].
struct LabeledDataset {
    std::vector<Tensor> inputs;
    std::vector<std::size_t> labels;
    std::string provenance;

    std::size_t size() const { return inputs.size(); }

    void validate(std::size_t num_classes = 0) const {
        if (inputs.size() != labels.size())
            throw DataError("dataset has " + std::to_string(inputs.size()) + " inputs but " +
                            std::to_string(labels.size()) + " labels");
        if (inputs.empty()) throw DataError("dataset is empty");
        for (std::size_t i = 1; i < inputs.size(); ++i)
            if (inputs[i].shape != inputs[0].shape)
                throw ShapeError("dataset input " + std::to_string(i) + " has shape " +
                                 shape_string(inputs[i].shape) + ", expected " +
                                 shape_string(inputs[0].shape));
        if (num_classes > 0)
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (labels[i] >= num_classes)
                    throw DataError("label " + std::to_string(labels[i]) + " at index " +
                                    std::to_string(i) + " out of range for C=" +
                                    std::to_string(num_classes));
    }
};

/**
 * Seeded Gaussian clusters in [0,1]^dim, one cluster per class.
 *
 * Centers are drawn uniformly in [0.2, 0.8]^dim with rejection until all
 * pairwise distances exceed 0.35; with cluster width 0.04 the classes are
 * separable by a wide margin. Samples are clipped into [0,1]. Packing too
 * many classes into a low dimension makes center placement infeasible and
 * is reported as a configuration error rather than silently degrading.
 */
inline LabeledDataset synthetic_blobs(std::size_t num_classes, std::size_t per_class,
                                      std::size_t dim, std::uint64_t seed) {
    if (num_classes < 2) throw ConfigError("synthetic_blobs needs at least 2 classes");
    if (per_class == 0) throw ConfigError("synthetic_blobs: per_class must be positive");
    if (dim == 0) throw ConfigError("synthetic_blobs: dim must be positive");

    constexpr double kMinSep = 0.35;
    constexpr double kSigma = 0.04;

    Rng rng(seed);
    std::vector<std::vector<double>> centers;
    std::size_t attempts = 0;
    while (centers.size() < num_classes) {
        if (++attempts > 20000)
            throw ConfigError("synthetic_blobs: cannot place " + std::to_string(num_classes) +
                              " separated centers in dimension " + std::to_string(dim));
        std::vector<double> c(dim);
        for (auto& v : c) v = rng.uniform(0.2, 0.8);
        bool ok = true;
        for (const auto& prev : centers) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) d2 += (c[j] - prev[j]) * (c[j] - prev[j]);
            if (d2 < kMinSep * kMinSep) { ok = false; break; }
        }
        if (ok) centers.push_back(std::move(c));
    }

    LabeledDataset ds;
    ds.provenance = "synthetic_blobs(classes=" + std::to_string(num_classes) +
                    ", per_class=" + std::to_string(per_class) + ", dim=" + std::to_string(dim) +
                    ", seed=" + std::to_string(seed) + ")";
    ds.inputs.reserve(num_classes * per_class);
    ds.labels.reserve(num_classes * per_class);
    for (std::size_t c = 0; c < num_classes; ++c) {
        for (std::size_t k = 0; k < per_class; ++k) {
            Tensor x = Tensor::zeros({dim});
            for (std::size_t j = 0; j < dim; ++j)
                x.data[j] = std::clamp(rng.normal(centers[c][j], kSigma), 0.0, 1.0);
            ds.inputs.push_back(std::move(x));
            ds.labels.push_back(c);
        }
    }
    return ds;
}

} // namespace fisherdet
