#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include "fisherdet/errors.hpp"
#include "fisherdet/network.hpp"
#include "fisherdet/scores.hpp"
#include "fisherdet/tensor.hpp"

namespace fisherdet {

/**
 * Brute-force references. Everything here is O(p^2) or worse and guarded
 * against real-network sizes; the point is to validate the scalable paths
 * on fixtures where the full objects are still computable.
 */

/// p x p Fisher matrix, sum over classes of f^c (grad log f^c)(grad log f^c)^T.
struct FisherMatrix {
    std::size_t n = 0;
    std::vector<double> entries; // row-major n*n

    double at(std::size_t i, std::size_t j) const { return entries[i * n + j]; }

    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < n; ++i) t += at(i, i);
        return t;
    }

    /// v^T F v by direct matrix product.
    double quad(const ParamVector& v) const {
        if (v.size() != n) throw ShapeError("vector length does not match matrix size");
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += at(i, j) * v[j];
            s += v[i] * row;
        }
        return s;
    }
};

/// N x N delta_vF matrix, sum over class groups of a^c (b^c)^T.
struct DeltaVFisherMatrix {
    std::size_t n = 0;
    std::vector<double> entries;

    double at(std::size_t i, std::size_t j) const { return entries[i * n + j]; }

    std::vector<double> diagonal() const {
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
        return d;
    }
};

/// Eigenvalues of a symmetric matrix (row-major n*n), ascending. Cyclic
/// Jacobi; plenty for the guarded sizes here.
inline std::vector<double> sym_eigenvalues(std::vector<double> m, std::size_t n) {
    if (n == 0) return {};
    auto idx = [n](std::size_t i, std::size_t j) { return i * n + j; };
    double scale = 0.0;
    for (double v : m) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return std::vector<double>(n, 0.0);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += m[idx(i, j)] * m[idx(i, j)];
        if (std::sqrt(off) < 1e-14 * scale * n) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = m[idx(p, q)];
                if (std::abs(apq) < 1e-300) continue;
                double app = m[idx(p, p)], aqq = m[idx(q, q)];
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = m[idx(k, p)], akq = m[idx(k, q)];
                    m[idx(k, p)] = c * akp - s * akq;
                    m[idx(k, q)] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = m[idx(p, k)], aqk = m[idx(q, k)];
                    m[idx(p, k)] = c * apk - s * aqk;
                    m[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = m[idx(i, i)];
    std::sort(eig.begin(), eig.end());
    return eig;
}

/// Singular values, descending: sqrt of the eigenvalues of A^T A.
inline std::vector<double> singular_values(const std::vector<double>& a, std::size_t n) {
    std::vector<double> ata(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += a[k * n + i] * a[k * n + j];
            ata[i * n + j] = s;
        }
    std::vector<double> eig = sym_eigenvalues(std::move(ata), n);
    std::vector<double> sv(n);
    for (std::size_t i = 0; i < n; ++i) sv[i] = std::sqrt(std::max(eig[n - 1 - i], 0.0));
    return sv;
}

inline FisherMatrix full_fisher(const Network& net, const Tensor& x, ClassMode class_mode) {
    const std::size_t p = net.param_count();
    if (p > 500)
        throw SizeGuardError("full_fisher refused: p=" + std::to_string(p) + " exceeds guard 500");

    std::vector<Scalar> targets;
    std::vector<double> weights;
    if (class_mode == ClassMode::full_C) {
        for (std::size_t c = 0; c < net.num_classes(); ++c)
            targets.push_back(Scalar::log_class_prob(c));
    } else {
        std::size_t yhat = net.evaluate(x).predicted;
        targets.push_back(Scalar::two_class_log_prob(0, yhat));
        targets.push_back(Scalar::two_class_log_prob(1, yhat));
    }
    MultiGradResult r = net.grad_many(x, targets);
    if (class_mode == ClassMode::full_C) {
        weights = r.eval.probs;
    } else {
        auto qr = two_class_reduce(r.eval.probs, r.eval.predicted);
        weights = {qr[0], qr[1]};
    }

    FisherMatrix F;
    F.n = p;
    F.entries.assign(p * p, 0.0);
    for (std::size_t g = 0; g < targets.size(); ++g) {
        const ParamVector& grad = r.grads[g].wrt_params;
        double w = weights[g];
        for (std::size_t i = 0; i < p; ++i) {
            double wi = w * grad[i];
            for (std::size_t j = 0; j < p; ++j) F.entries[i * p + j] += wi * grad[j];
        }
    }
    return F;
}

/// KL(p || q) = sum p_c log(p_c / q_c). Entries of q must be positive.
inline double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw ShapeError("KL arguments have different lengths");
    double sp = 0.0, sq = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        if (!(p[c] >= 0.0)) throw NumericError("first KL argument has a negative entry");
        if (!(q[c] > 0.0)) throw NumericError("second KL argument has a nonpositive entry");
        sp += p[c];
        sq += q[c];
    }
    if (std::abs(sp - 1.0) > 1e-6 || std::abs(sq - 1.0) > 1e-6)
        throw DataError("KL arguments must sum to one");
    double kl = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c)
        if (p[c] > 0.0) kl += p[c] * std::log(p[c] / q[c]);
    return kl;
}

struct KlCheckPoint {
    double eps;
    double kl;       // KL(f_theta || f_theta+eps*v)
    double taylor;   // 0.5 eps^2 v^T F v
    double residual; // |kl - taylor|, expected O(eps^3)
};

/// Measures how well 0.5 eps^2 v^T F v tracks the true KL divergence.
inline std::vector<KlCheckPoint> kl_taylor_check(const Network& net, const Tensor& x,
                                                 const ParamVector& v,
                                                 const std::vector<double>& eps_list) {
    for (double e : eps_list)
        if (!(e >= 0.0 && e <= 0.1))
            throw ConfigError("kl_taylor_check eps values must lie in [0, 1e-1]");
    double vFv = full_fisher(net, x, ClassMode::full_C).quad(v);
    Eval base = net.evaluate(x);
    std::vector<KlCheckPoint> out;
    out.reserve(eps_list.size());
    for (double e : eps_list) {
        Eval pert = net.perturbed(v, e).evaluate(x);
        double kl = kl_divergence(base.probs, pert.probs);
        double taylor = 0.5 * e * e * vFv;
        out.push_back({e, kl, taylor, std::abs(kl - taylor)});
    }
    return out;
}

/// Full delta_vF matrix from the same finite-difference gradient pairs the
/// FIS fast path uses; fis(...) must equal this matrix's diagonal.
inline DeltaVFisherMatrix delta_v_fisher_full(const Network& net, const Tensor& x,
                                              const DirectionVector& dv, const ScoreConfig& cfg) {
    const std::size_t n = x.size();
    if (n > 200)
        throw SizeGuardError("delta_v_fisher_full refused: N=" + std::to_string(n) +
                             " exceeds guard 200");
    detail::FisComponents cc = detail::fis_components(net, x, dv, cfg);
    DeltaVFisherMatrix M;
    M.n = n;
    M.entries.assign(n * n, 0.0);
    for (std::size_t g = 0; g < cc.a.size(); ++g)
        for (std::size_t i = 0; i < n; ++i) {
            double ai = cc.a[g][i];
            for (std::size_t j = 0; j < n; ++j) M.entries[i * n + j] += ai * cc.b[g][j];
        }
    return M;
}

/// Row-major CSV dump for offline inspection.
inline void write_matrix_csv(const std::string& path, const std::vector<double>& entries,
                             std::size_t n) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) out << (j ? "," : "") << entries[i * n + j];
        out << '\n';
    }
    if (!out) throw IoError("write failure on " + path);
}

} // namespace fisherdet
