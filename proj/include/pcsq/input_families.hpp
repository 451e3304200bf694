// Copyright 2026 The pcsq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Univariate input layers. Every family maps an effective parameter block
// (K rows, one per unit) to K functions of one variable and provides their
// pointwise values, integrals and pairwise product integrals (Gram matrix),
// plus the matching reverse-mode rules.

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "pcsq/errors.hpp"
#include "pcsq/linalg.hpp"
#include "pcsq/parameters.hpp"
#include "pcsq/signed_log.hpp"
#include "pcsq/spline.hpp"

namespace pcsq {

enum class FamilyKind { Gaussian, Categorical, Binomial, Embedding, Spline };

inline const char *to_string(FamilyKind k) {
    switch (k) {
        case FamilyKind::Gaussian: return "gaussian";
        case FamilyKind::Categorical: return "categorical";
        case FamilyKind::Binomial: return "binomial";
        case FamilyKind::Embedding: return "embedding";
        case FamilyKind::Spline: return "spline";
    }
    return "?";
}

inline FamilyKind family_from_string(const std::string &s) {
    if (s == "gaussian") return FamilyKind::Gaussian;
    if (s == "categorical") return FamilyKind::Categorical;
    if (s == "binomial") return FamilyKind::Binomial;
    if (s == "embedding") return FamilyKind::Embedding;
    if (s == "spline") return FamilyKind::Spline;
    throw InvalidArgument("unknown input family '" + s + "'");
}

/// Hyperparameters of an input family for one variable.
struct FamilySpec {
    FamilyKind kind = FamilyKind::Gaussian;
    int states = 2;           // categorical, embedding
    int trials = 31;          // binomial
    int spline_degree = 2;    // spline
    int spline_knots = 32;    // interior knots
    double lower = 0.0;       // spline interval
    double upper = 1.0;
    bool monotonic = true;    // spline coefficients through exp

    bool operator==(const FamilySpec &) const = default;
};

class InputFamily {
   public:
    InputFamily() = default;
    explicit InputFamily(FamilySpec spec) : spec_(spec) {
        switch (spec.kind) {
            case FamilyKind::Categorical:
            case FamilyKind::Embedding:
                if (spec.states < 1) throw InvalidArgument("input family: states must be >= 1");
                break;
            case FamilyKind::Binomial:
                if (spec.trials < 1) throw InvalidArgument("binomial: trials must be >= 1");
                break;
            case FamilyKind::Spline:
                basis_ = BSplineBasis::uniform(spec.spline_degree, spec.spline_knots, spec.lower, spec.upper);
                break;
            case FamilyKind::Gaussian:
                break;
        }
    }

    const FamilySpec &spec() const { return spec_; }
    FamilyKind kind() const { return spec_.kind; }
    const BSplineBasis &basis() const { return basis_; }

    bool discrete() const {
        return spec_.kind == FamilyKind::Categorical || spec_.kind == FamilyKind::Embedding || spec_.kind == FamilyKind::Binomial;
    }
    /// Number of states of a discrete family.
    int support_size() const {
        if (spec_.kind == FamilyKind::Binomial) return spec_.trials + 1;
        if (discrete()) return spec_.states;
        throw UnsupportedOperation("support_size on a continuous family");
    }

    std::size_t param_cols() const {
        switch (spec_.kind) {
            case FamilyKind::Gaussian: return 2;
            case FamilyKind::Categorical:
            case FamilyKind::Embedding: return static_cast<std::size_t>(spec_.states);
            case FamilyKind::Binomial: return 1;
            case FamilyKind::Spline: return static_cast<std::size_t>(basis_.size());
        }
        return 0;
    }

    Reparam reparam() const {
        switch (spec_.kind) {
            case FamilyKind::Categorical: return Reparam::SoftmaxRow;
            case FamilyKind::Spline: return spec_.monotonic ? Reparam::Exp : Reparam::Identity;
            default: return Reparam::Identity;
        }
    }

    /// True if every unit is a non-negative function for these parameters.
    bool nonnegative(const Matrix &eff) const {
        if (spec_.kind == FamilyKind::Embedding || spec_.kind == FamilyKind::Spline) {
            for (double v : eff.values())
                if (v < 0.0) return false;
        }
        return true;
    }

    void check_domain(double x) const {
        if (std::isnan(x)) throw DomainError("input value is NaN");
        if (discrete()) {
            const int m = support_size();
            if (x != std::floor(x) || x < 0 || x >= m)
                throw DomainError("value " + std::to_string(x) + " outside {0, ..., " + std::to_string(m - 1) + "}");
        } else if (spec_.kind == FamilyKind::Spline && !basis_.in_domain(x)) {
            throw DomainError("value " + std::to_string(x) + " outside spline interval [" + std::to_string(spec_.lower) + ", " +
                              std::to_string(spec_.upper) + "]");
        } else if (!std::isfinite(x)) {
            throw DomainError("input value is not finite");
        }
    }

    /// Interval holding essentially all the mass of every unit and of every
    /// pairwise product (continuous families).
    std::pair<double, double> bracket(const Matrix &eff) const {
        if (spec_.kind == FamilyKind::Spline) return {spec_.lower, spec_.upper};
        if (spec_.kind != FamilyKind::Gaussian) return {0.0, static_cast<double>(support_size() - 1)};
        double lo = 0.0, hi = 0.0;
        for (std::size_t i = 0; i < eff.rows(); ++i) {
            const double m = eff(i, 0), s = std::exp(eff(i, 1));
            lo = i == 0 ? m - 14.0 * s : std::min(lo, m - 14.0 * s);
            hi = i == 0 ? m + 14.0 * s : std::max(hi, m + 14.0 * s);
        }
        return {lo, hi};
    }

    /// K x m table of unit values over the states of a discrete family.
    Matrix table(const Matrix &eff) const {
        if (spec_.kind != FamilyKind::Binomial) return eff;
        const int n = spec_.trials;
        Matrix t(eff.rows(), static_cast<std::size_t>(n + 1));
        for (std::size_t i = 0; i < eff.rows(); ++i) {
            const double z = eff(i, 0);
            // log p and log (1 - p) from the logit without cancellation.
            const double lp = -std::log1p(std::exp(-z)), lq = -std::log1p(std::exp(z));
            const double log_p = std::isfinite(lp) ? lp : z, log_q = std::isfinite(lq) ? lq : -z;
            for (int k = 0; k <= n; ++k) {
                const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
                t(i, k) = std::exp(lc + k * log_p + (n - k) * log_q);
            }
        }
        return t;
    }

    /// Unit values at each x: out is [xs.size() x K].
    SignedLogTensor forward(const Matrix &eff, std::span<const double> xs) const {
        const std::size_t K = eff.rows();
        SignedLogTensor out(xs.size(), K);
        for (double x : xs) check_domain(x);
        if (spec_.kind == FamilyKind::Gaussian) {
            const double c = -0.5 * std::log(2.0 * std::numbers::pi);
            for (std::size_t b = 0; b < xs.size(); ++b)
                for (std::size_t i = 0; i < K; ++i) {
                    const double z = (xs[b] - eff(i, 0)) * std::exp(-eff(i, 1));
                    out.set(b, i, {c - eff(i, 1) - 0.5 * z * z, 1});
                }
        } else if (discrete()) {
            const Matrix t = table(eff);
            for (std::size_t b = 0; b < xs.size(); ++b)
                for (std::size_t i = 0; i < K; ++i) out.set(b, i, SignedLogValue::from_linear(t(i, static_cast<std::size_t>(xs[b]))));
        } else {
            std::vector<double> nz;
            for (std::size_t b = 0; b < xs.size(); ++b) {
                const int first = basis_.evaluate_nonzero(xs[b], nz);
                for (std::size_t i = 0; i < K; ++i) {
                    double v = 0.0;
                    for (std::size_t j = 0; j < nz.size(); ++j) v += eff(i, first + j) * nz[j];
                    out.set(b, i, SignedLogValue::from_linear(v));
                }
            }
        }
        return out;
    }

    /// Integral (or sum over states) of each unit: [1 x K].
    SignedLogTensor integrals(const Matrix &eff) const {
        const std::size_t K = eff.rows();
        SignedLogTensor out(1, K);
        if (spec_.kind == FamilyKind::Gaussian || spec_.kind == FamilyKind::Binomial || spec_.kind == FamilyKind::Categorical) {
            for (std::size_t i = 0; i < K; ++i) out.set(0, i, {0.0, 1});
            return out;
        }
        const std::vector<double> w = spec_.kind == FamilyKind::Spline ? basis_.integrals() : std::vector<double>(eff.cols(), 1.0);
        for (std::size_t i = 0; i < K; ++i) {
            double v = 0.0;
            for (std::size_t j = 0; j < eff.cols(); ++j) v += eff(i, j) * w[j];
            out.set(0, i, SignedLogValue::from_linear(v));
        }
        return out;
    }

    /// Pairwise product integrals M_ij = int f_i f_j, flattened as i*K + j.
    SignedLogTensor gram(const Matrix &eff) const {
        const std::size_t K = eff.rows();
        SignedLogTensor out(1, K * K);
        if (spec_.kind == FamilyKind::Gaussian) {
            for (std::size_t i = 0; i < K; ++i)
                for (std::size_t j = 0; j < K; ++j) {
                    const double s2 = std::exp(2.0 * eff(i, 1)) + std::exp(2.0 * eff(j, 1));
                    const double d = eff(i, 0) - eff(j, 0);
                    out.set(0, i * K + j, {-0.5 * std::log(2.0 * std::numbers::pi * s2) - 0.5 * d * d / s2, 1});
                }
            return out;
        }
        Matrix m;
        if (discrete()) {
            const Matrix t = table(eff);
            m = matmul_nt(t.view(), t.view());
        } else {
            m = matmul_nt(matmul(eff, basis_.gram()).view(), eff.view());
        }
        for (std::size_t i = 0; i < K * K; ++i) out.set_flat(i, SignedLogValue::from_linear(m.values()[i]));
        return out;
    }

    /// Accumulates d(obj)/d(free params) given the adjoint of the unit values
    /// at each x (adj is [xs.size() x K], d(obj)/d f_i(x_b) in signed log).
    void backward_points(const Matrix &eff, std::span<const double> xs, const SignedLogTensor &adj, ParameterStore &store,
                         int block) const {
        const std::size_t K = eff.rows();
        if (!store.block(block).trainable) return;
        Matrix g(eff.rows(), eff.cols());
        if (spec_.kind == FamilyKind::Gaussian) {
            const double c = -0.5 * std::log(2.0 * std::numbers::pi);
            for (std::size_t b = 0; b < xs.size(); ++b)
                for (std::size_t i = 0; i < K; ++i) {
                    const auto a = adj.at(b, i);
                    if (a.sign == 0) continue;
                    const double z = (xs[b] - eff(i, 0)) * std::exp(-eff(i, 1));
                    // adjoint times value: d(obj)/d log f_i
                    const double gl = a.sign * std::exp(a.log_mag + c - eff(i, 1) - 0.5 * z * z);
                    g(i, 0) += gl * z * std::exp(-eff(i, 1));
                    g(i, 1) += gl * (z * z - 1.0);
                }
            store.accumulate_gradient(block, eff, g.values());
            return;
        }
        if (discrete()) {
            Matrix gt(K, static_cast<std::size_t>(support_size()));
            for (std::size_t b = 0; b < xs.size(); ++b)
                for (std::size_t i = 0; i < K; ++i) gt(i, static_cast<std::size_t>(xs[b])) += adj.at(b, i).value();
            table_backward(eff, gt, store, block);
            return;
        }
        std::vector<double> nz;
        for (std::size_t b = 0; b < xs.size(); ++b) {
            const int first = basis_.evaluate_nonzero(xs[b], nz);
            for (std::size_t i = 0; i < K; ++i) {
                const double a = adj.at(b, i).value();
                if (a == 0.0) continue;
                for (std::size_t j = 0; j < nz.size(); ++j) g(i, first + j) += a * nz[j];
            }
        }
        store.accumulate_gradient(block, eff, g.values());
    }

    /// Backward of integrals(); adj is [1 x K].
    void backward_integrals(const Matrix &eff, const SignedLogTensor &adj, ParameterStore &store, int block) const {
        if (!store.block(block).trainable) return;
        if (spec_.kind != FamilyKind::Embedding && spec_.kind != FamilyKind::Spline) return;  // integrals are constant 1
        const std::vector<double> w = spec_.kind == FamilyKind::Spline ? basis_.integrals() : std::vector<double>(eff.cols(), 1.0);
        Matrix g(eff.rows(), eff.cols());
        for (std::size_t i = 0; i < eff.rows(); ++i) {
            const double a = adj.at(0, i).value();
            for (std::size_t j = 0; j < eff.cols(); ++j) g(i, j) = a * w[j];
        }
        store.accumulate_gradient(block, eff, g.values());
    }

    /// Backward of gram(); adj is [1 x K*K].
    void backward_gram(const Matrix &eff, const SignedLogTensor &adj, ParameterStore &store, int block) const {
        if (!store.block(block).trainable) return;
        const std::size_t K = eff.rows();
        if (spec_.kind == FamilyKind::Gaussian) {
            Matrix g(K, 2);
            for (std::size_t i = 0; i < K; ++i)
                for (std::size_t j = 0; j < K; ++j) {
                    const auto a = adj.at(0, i * K + j);
                    if (a.sign == 0) continue;
                    const double vi = std::exp(2.0 * eff(i, 1)), vj = std::exp(2.0 * eff(j, 1));
                    const double s2 = vi + vj, d = eff(i, 0) - eff(j, 0);
                    const double gl = a.sign * std::exp(a.log_mag - 0.5 * std::log(2.0 * std::numbers::pi * s2) - 0.5 * d * d / s2);
                    g(i, 0) -= gl * d / s2;
                    g(j, 0) += gl * d / s2;
                    const double dls2 = -0.5 / s2 + 0.5 * d * d / (s2 * s2);  // d log M / d s2
                    g(i, 1) += gl * dls2 * 2.0 * vi;
                    g(j, 1) += gl * dls2 * 2.0 * vj;
                }
            store.accumulate_gradient(block, eff, g.values());
            return;
        }
        Matrix a(K, K);
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j < K; ++j) a(i, j) = adj.at(0, i * K + j).value();
        Matrix sym(K, K);
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j < K; ++j) sym(i, j) = a(i, j) + a(j, i);
        if (discrete()) {
            const Matrix t = table(eff);
            table_backward(eff, matmul(sym, t), store, block);
            return;
        }
        const Matrix g = matmul(matmul(sym, eff).view(), basis_.gram().view());
        store.accumulate_gradient(block, eff, g.values());
    }

   private:
    /// Chain rule from d(obj)/d table to the free parameters.
    void table_backward(const Matrix &eff, const Matrix &gt, ParameterStore &store, int block) const {
        if (spec_.kind != FamilyKind::Binomial) {
            store.accumulate_gradient(block, eff, gt.values());
            return;
        }
        const Matrix t = table(eff);
        const int n = spec_.trials;
        auto g = store.grad(block);
        for (std::size_t i = 0; i < eff.rows(); ++i) {
            const double p = 1.0 / (1.0 + std::exp(-eff(i, 0)));
            double acc = 0.0;
            for (int k = 0; k <= n; ++k) acc += gt(i, k) * t(i, k) * (k - n * p);
            g[i] += acc;
        }
    }

    FamilySpec spec_;
    BSplineBasis basis_;
};

}  // namespace pcsq
