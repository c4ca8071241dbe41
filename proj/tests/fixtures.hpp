// Shared test fixtures. The frozen MLP's weights are literal so tests can
// compare against the independent matrix-arithmetic reference below, which
// deliberately shares no code with the library's forward pass.
#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "fisherdet/fisherdet.hpp"

namespace fixtures {

using namespace fisherdet;

// 2-3-2 MLP: dense(2,3), relu, dense(3,2), softmax. 17 parameters.
// Layout per dense layer: W row-major [out][in], then bias [out].
inline const ParamVector kFrozenParams = {
    // W1 (3x2)
    0.5, -0.25, 0.75, 0.1, -0.6, 0.3,
    // b1
    0.05, -0.1, 0.2,
    // W2 (2x3)
    0.4, -0.5, 0.2, -0.3, 0.6, -0.1,
    // b2
    0.15, -0.05};

inline Network frozen_mlp() {
    Network net({2}, {LayerSpec::dense(2, 3), LayerSpec::relu(), LayerSpec::dense(3, 2),
                      LayerSpec::softmax()});
    net.set_params(kFrozenParams);
    return net;
}

// Independent reference forward for the frozen MLP: plain loops over the
// literal weights, softmax without the max-shift trick.
inline std::vector<double> frozen_mlp_probs(double x0, double x1) {
    const ParamVector& p = kFrozenParams;
    double h[3];
    for (int o = 0; o < 3; ++o) {
        double s = p[6 + o] + p[o * 2 + 0] * x0 + p[o * 2 + 1] * x1;
        h[o] = s > 0.0 ? s : 0.0;
    }
    double z[2];
    for (int o = 0; o < 2; ++o) {
        double s = p[15 + o];
        for (int i = 0; i < 3; ++i) s += p[9 + o * 3 + i] * h[i];
        z[o] = s;
    }
    double e0 = std::exp(z[0]), e1 = std::exp(z[1]);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

// Conv net with 47 parameters on 6x6 inputs; weights from the given seed.
inline Network tiny_conv(std::uint64_t seed = 202) {
    Network net({6, 6}, {LayerSpec::conv2d(1, 2, 3), LayerSpec::relu(), LayerSpec::maxpool2d(2, 2),
                         LayerSpec::flatten(), LayerSpec::dense(8, 3), LayerSpec::softmax()});
    net.init_params(seed);
    return net;
}

inline Network seeded_mlp(std::uint64_t seed, std::size_t in = 4, std::size_t hidden = 6,
                          std::size_t out = 3) {
    Network net({in}, {LayerSpec::dense(in, hidden), LayerSpec::relu(),
                       LayerSpec::dense(hidden, out), LayerSpec::softmax()});
    net.init_params(seed);
    return net;
}

inline Tensor random_input(const std::vector<std::size_t>& shape, std::uint64_t seed,
                           double lo = 0.0, double hi = 1.0) {
    Tensor t = Tensor::zeros(shape);
    Rng r(seed);
    for (double& v : t.data) v = lo + (hi - lo) * r.uniform();
    return t;
}

// Central-difference gradient of an arbitrary scalar of the outputs; the
// independent check for every backward-pass test.
template <typename F>
ParamVector fd_grad_params(const Network& net, F&& scalar_of, double h = 1e-6) {
    ParamVector g(net.param_count());
    Network work = net;
    ParamVector p = net.params();
    for (std::size_t i = 0; i < p.size(); ++i) {
        double keep = p[i];
        p[i] = keep + h;
        work.set_params(p);
        double up = scalar_of(work);
        p[i] = keep - h;
        work.set_params(p);
        double dn = scalar_of(work);
        p[i] = keep;
        g[i] = (up - dn) / (2.0 * h);
    }
    work.set_params(p);
    return g;
}

inline double rel_err(double got, double want) {
    double denom = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / denom;
}

// Scratch directory for file-producing tests; unique per process.
inline std::string scratch_dir() {
    static std::string dir = [] {
        auto d = std::filesystem::temp_directory_path() /
                 ("fisherdet-tests-" + std::to_string(::getpid()));
        std::filesystem::create_directories(d);
        return d.string();
    }();
    return dir;
}

inline std::string scratch(const std::string& name) {
    return (std::filesystem::path(scratch_dir()) / name).string();
}

} // namespace fixtures
