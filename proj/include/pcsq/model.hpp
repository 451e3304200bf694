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

// A density model: one or more circuits over the same variables sharing a
// ParameterStore, each used either directly (monotonic) or squared, joined
// by a learnable mixture when there is more than one.
//
//   p(x) = sum_c pi_c q_c(x) / sum_c pi_c Z_c,   q_c = c_c or c_c^2.

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "pcsq/circuit.hpp"
#include "pcsq/errors.hpp"
#include "pcsq/evaluator.hpp"
#include "pcsq/inference.hpp"
#include "pcsq/random.hpp"
#include "pcsq/region_graph.hpp"
#include "pcsq/squaring.hpp"

namespace pcsq {

enum class ModelKind { Monotonic, SquaredMonotonic, SquaredNonMonotonic };

inline const char *to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Monotonic: return "monotonic";
        case ModelKind::SquaredMonotonic: return "squared-monotonic";
        case ModelKind::SquaredNonMonotonic: return "squared-nonmonotonic";
    }
    return "?";
}

inline ModelKind model_kind_from_string(const std::string &s) {
    if (s == "monotonic") return ModelKind::Monotonic;
    if (s == "squared-monotonic") return ModelKind::SquaredMonotonic;
    if (s == "squared-nonmonotonic") return ModelKind::SquaredNonMonotonic;
    throw InvalidArgument("unknown model kind '" + s + "'");
}

inline bool is_squared(ModelKind k) { return k != ModelKind::Monotonic; }

namespace detail {

inline double log_sum_exp(const std::vector<double> &v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (m == kNegInf) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace detail

class Model {
   public:
    Model() = default;

    /// `mixture_block` is a 1 x C softmax block (or -1 for one component);
    /// `head_block` an optional fixed sum applied on top of each squared
    /// component (used by kernel-model reductions).
    Model(ModelKind kind, std::shared_ptr<ParameterStore> store, std::vector<TensorizedCircuit> components, int mixture_block = -1,
          int head_block = -1)
        : kind_(kind), store_(std::move(store)), components_(std::move(components)), mixture_block_(mixture_block), head_block_(head_block) {
        if (components_.empty()) throw InvalidArgument("model: no components");
        if (components_.size() > 1 && mixture_block_ < 0) throw InvalidArgument("model: mixture needs a weight block");
        for (const auto &c : components_) {
            if (c.store_ptr() != store_) throw InvalidArgument("model: components must share the parameter store");
            if (c.variable_count() != components_[0].variable_count()) throw InvalidArgument("model: variable counts differ");
        }
        for (const auto &c : components_) {
            if (!is_squared(kind_)) {
                if (head_block_ >= 0) throw InvalidArgument("model: head requires a squared model");
                densities_.push_back(c);
                continue;
            }
            TensorizedCircuit q = square(c).circuit;
            if (head_block_ >= 0) q.set_output(q.add_sum_with(q.output(), head_block_, false));
            densities_.push_back(std::move(q));
        }
        for (const auto &q : densities_)
            if (q.layer(q.output()).width != 1) throw InvalidArgument("model: density circuit must have a single output");
    }

    ModelKind kind() const { return kind_; }
    bool squared() const { return is_squared(kind_); }
    int variable_count() const { return components_[0].variable_count(); }
    ParameterStore &params() { return *store_; }
    const ParameterStore &params() const { return *store_; }
    const std::shared_ptr<ParameterStore> &store_ptr() const { return store_; }
    const std::vector<TensorizedCircuit> &components() const { return components_; }
    const TensorizedCircuit &density(std::size_t c) const { return densities_.at(c); }
    int mixture_block() const { return mixture_block_; }
    int head_block() const { return head_block_; }
    std::uint64_t z_evaluations() const { return z_evaluations_; }

    std::vector<double> log_mixture_weights() const {
        if (mixture_block_ < 0) return {0.0};
        const Matrix pi = store_->effective(mixture_block_);
        std::vector<double> out;
        for (double v : pi.values()) out.push_back(v > 0 ? std::log(v) : kNegInf);
        return out;
    }

    /// log Z_c per component, cached per parameter version.
    const std::vector<double> &log_partitions() const {
        if (cache_version_ != store_->version() || cached_log_z_.empty()) {
            ++z_evaluations_;
            cached_log_z_.clear();
            for (const auto &q : densities_) cached_log_z_.push_back(partition_function(q).log_mag);
            cache_version_ = store_->version();
        }
        return cached_log_z_;
    }

    double log_normalizer() const {
        const auto &lz = log_partitions();
        const auto lp = log_mixture_weights();
        std::vector<double> t(lz.size());
        for (std::size_t c = 0; c < lz.size(); ++c) t[c] = lp[c] + lz[c];
        return detail::log_sum_exp(t);
    }

    /// Normalized log-density of every row.
    std::vector<double> log_density(const Matrix &x) const {
        const auto L = component_logs(x);
        const auto lp = log_mixture_weights();
        const double lz = log_normalizer();
        std::vector<double> out(x.rows());
        std::vector<double> t(L.size());
        for (std::size_t b = 0; b < x.rows(); ++b) {
            for (std::size_t c = 0; c < L.size(); ++c) t[c] = lp[c] + L[c][b];
            out[b] = detail::log_sum_exp(t) - lz;
            if (!std::isfinite(out[b])) throw NumericError("log-density undefined at row " + std::to_string(b));
        }
        return out;
    }

    double mean_log_likelihood(const Matrix &x) const {
        double s = 0.0;
        for (double v : log_density(x)) s += v;
        return s / static_cast<double>(x.rows());
    }

    /// Adds weight * d/dtheta sum_b log(sum_c pi_c q_c(x_b)) to the gradient
    /// buffer and returns the (unnormalized) sum of log values.
    double data_backward(const Matrix &x, double weight) {
        const std::size_t C = components_.size();
        const auto lp = log_mixture_weights();
        std::vector<Tape> tapes;
        std::vector<std::vector<double>> L(C);
        for (std::size_t c = 0; c < C; ++c) {
            tapes.push_back(forward(data_circuit(c), x));
            L[c] = logs_of(tapes.back().output(), c);
        }
        std::vector<std::vector<double>> resp(C, std::vector<double>(x.rows()));
        double total = 0.0;
        std::vector<double> t(C), dlogpi(C, 0.0);
        for (std::size_t b = 0; b < x.rows(); ++b) {
            for (std::size_t c = 0; c < C; ++c) t[c] = lp[c] + L[c][b];
            const double l = detail::log_sum_exp(t);
            total += l;
            for (std::size_t c = 0; c < C; ++c) {
                resp[c][b] = std::exp(t[c] - l);
                dlogpi[c] += weight * resp[c][b];
            }
        }
        const double factor = squared() && head_block_ < 0 ? 2.0 : 1.0;
        for (std::size_t c = 0; c < C; ++c) {
            std::vector<double> w(x.rows());
            for (std::size_t b = 0; b < x.rows(); ++b) w[b] = weight * factor * resp[c][b];
            backward(tapes[c], log_objective_seed(tapes[c].output(), w), *store_);
        }
        mixture_backward(dlogpi);
        return total;
    }

    /// Adds weight * d/dtheta log(sum_c pi_c Z_c); one partition-function
    /// evaluation. Returns the log normalizer.
    double normalizer_backward(double weight) {
        ++z_evaluations_;
        const std::size_t C = densities_.size();
        const auto lp = log_mixture_weights();
        const std::vector<char> all(static_cast<std::size_t>(variable_count()), 1);
        std::vector<Tape> tapes;
        std::vector<double> lz(C), t(C);
        for (std::size_t c = 0; c < C; ++c) {
            tapes.push_back(forward(densities_[c], Matrix(1, static_cast<std::size_t>(variable_count())), all));
            const auto z = tapes.back().output().at(0, 0);
            if (z.sign <= 0 || !std::isfinite(z.log_mag)) throw DegenerateModel("partition function is zero, negative or not finite");
            lz[c] = z.log_mag;
            t[c] = lp[c] + lz[c];
        }
        cached_log_z_ = lz;
        cache_version_ = store_->version();
        const double l = detail::log_sum_exp(t);
        std::vector<double> dlogpi(C);
        for (std::size_t c = 0; c < C; ++c) {
            const double q = std::exp(t[c] - l);
            dlogpi[c] = weight * q;
            const std::vector<double> w{weight * q};
            backward(tapes[c], log_objective_seed(tapes[c].output(), w), *store_);
        }
        mixture_backward(dlogpi);
        return l;
    }

    /// Exact samples: a component by its share of the normalizer, then the
    /// component's density autoregressively.
    Matrix sample(std::size_t n, Rng &rng) const {
        const auto lz = log_partitions();
        const auto lp = log_mixture_weights();
        const std::size_t C = densities_.size();
        std::vector<double> t(C);
        for (std::size_t c = 0; c < C; ++c) t[c] = lp[c] + lz[c];
        const double l = detail::log_sum_exp(t);
        std::vector<std::size_t> counts(C, 0);
        for (std::size_t s = 0; s < n; ++s) {
            double u = rng.uniform();
            std::size_t c = 0;
            for (; c + 1 < C; ++c) {
                u -= std::exp(t[c] - l);
                if (u < 0) break;
            }
            ++counts[c];
        }
        Matrix out(n, static_cast<std::size_t>(variable_count()));
        std::size_t row = 0;
        for (std::size_t c = 0; c < C; ++c) {
            if (counts[c] == 0) continue;
            const Matrix part = pcsq::sample(densities_[c], counts[c], rng);
            for (std::size_t r = 0; r < part.rows(); ++r, ++row)
                for (std::size_t v = 0; v < part.cols(); ++v) out(row, v) = part(r, v);
        }
        if (C > 1) {  // interleave components
            std::vector<std::size_t> order(n);
            for (std::size_t i = 0; i < n; ++i) order[i] = i;
            rng.shuffle(order);
            Matrix shuffled(n, out.cols());
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t v = 0; v < out.cols(); ++v) shuffled(i, v) = out(order[i], v);
            out = std::move(shuffled);
        }
        return out;
    }

   private:
    const TensorizedCircuit &data_circuit(std::size_t c) const {
        return squared() && head_block_ < 0 ? components_[c] : densities_[c];
    }

    std::vector<double> logs_of(const SignedLogTensor &out, std::size_t c) const {
        std::vector<double> l(out.rows());
        const bool via_source = squared() && head_block_ < 0;
        for (std::size_t b = 0; b < out.rows(); ++b) {
            const auto v = out.at(b, 0);
            if (v.sign == 0 || (!via_source && v.sign < 0))
                throw NumericError("log-density undefined: component " + std::to_string(c) + " is zero at row " + std::to_string(b));
            l[b] = via_source ? 2.0 * v.log_mag : v.log_mag;
        }
        return l;
    }

    std::vector<std::vector<double>> component_logs(const Matrix &x) const {
        std::vector<std::vector<double>> L;
        for (std::size_t c = 0; c < components_.size(); ++c) L.push_back(logs_of(evaluate(data_circuit(c), x), c));
        return L;
    }

    void mixture_backward(const std::vector<double> &dlogpi) {
        if (mixture_block_ < 0 || !store_->block(mixture_block_).trainable) return;
        const Matrix pi = store_->effective(mixture_block_);
        std::vector<double> g(dlogpi.size());
        for (std::size_t c = 0; c < g.size(); ++c) g[c] = pi.values()[c] > 0 ? dlogpi[c] / pi.values()[c] : 0.0;
        store_->accumulate_gradient(mixture_block_, pi, g);
    }

    ModelKind kind_ = ModelKind::SquaredNonMonotonic;
    std::shared_ptr<ParameterStore> store_;
    std::vector<TensorizedCircuit> components_;
    std::vector<TensorizedCircuit> densities_;
    int mixture_block_ = -1;
    int head_block_ = -1;
    mutable std::vector<double> cached_log_z_;
    mutable std::uint64_t cache_version_ = 0;
    mutable std::uint64_t z_evaluations_ = 0;
};

/// Structure of a model built from random tree region graphs.
struct ModelSpec {
    ModelKind kind = ModelKind::SquaredNonMonotonic;
    std::string region_graph = "lt";  // lt | bt
    std::size_t width = 8;
    ProductKind product = ProductKind::Hadamard;
    std::vector<FamilySpec> families{FamilySpec{}};
    int components = 1;
};

/// Component c uses a region graph seeded by derive_seed(seed, c).
inline Model build_model(int variable_count, const ModelSpec &spec, std::uint64_t seed) {
    if (spec.components < 1) throw InvalidArgument("model: components must be >= 1");
    auto store = std::make_shared<ParameterStore>();
    CircuitOptions opt;
    opt.width = spec.width;
    opt.product = spec.product;
    opt.sum_reparam = spec.kind == ModelKind::SquaredNonMonotonic ? Reparam::Identity : Reparam::Exp;
    opt.families = spec.families;
    for (auto &f : opt.families) f.monotonic = spec.kind != ModelKind::SquaredNonMonotonic;
    std::vector<TensorizedCircuit> comps;
    for (int c = 0; c < spec.components; ++c) {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(c));
        RegionGraph rg;
        if (spec.region_graph == "lt") rg = build_linear_tree(variable_count, s);
        else if (spec.region_graph == "bt") rg = build_binary_tree(variable_count, s);
        else throw InvalidArgument("unknown region graph '" + spec.region_graph + "'");
        comps.push_back(from_region_graph(rg, opt, store));
    }
    int mix = -1;
    if (spec.components > 1) mix = store->add_block(1, static_cast<std::size_t>(spec.components), Reparam::SoftmaxRow);
    return Model(spec.kind, store, std::move(comps), mix);
}

}  // namespace pcsq
