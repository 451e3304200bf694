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

// Maximum-likelihood training: minibatch gradient descent on the negative
// mean log-likelihood with one partition-function evaluation per step.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <regex>
#include <string>
#include <vector>

#include "pcsq/errors.hpp"
#include "pcsq/model.hpp"
#include "pcsq/parameters.hpp"
#include "pcsq/random.hpp"

namespace pcsq {

struct InitScheme {
    enum class Kind { Uniform, Normal } kind = Kind::Uniform;
    double a = 0.0;  // lower bound or mean
    double b = 1.0;  // upper bound or standard deviation

    std::string str() const {
        return std::string(kind == Kind::Uniform ? "uniform(" : "normal(") + std::to_string(a) + "," + std::to_string(b) + ")";
    }
};

/// Parses "uniform(a,b)" or "normal(mean,std)".
inline InitScheme parse_init_scheme(const std::string &s) {
    static const std::regex re(R"(\s*(uniform|normal)\s*\(\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\)\s*)");
    std::smatch m;
    if (!std::regex_match(s, m, re)) throw InvalidArgument("bad init scheme '" + s + "'");
    InitScheme out;
    out.kind = m[1] == "uniform" ? InitScheme::Kind::Uniform : InitScheme::Kind::Normal;
    try {
        out.a = std::stod(m[2]);
        out.b = std::stod(m[3]);
    } catch (const std::exception &) {
        throw InvalidArgument("bad init scheme '" + s + "'");
    }
    if (out.kind == InitScheme::Kind::Uniform && !(out.a < out.b)) throw InvalidArgument("init: uniform bounds must satisfy a < b");
    if (out.kind == InitScheme::Kind::Normal && !(out.b > 0)) throw InvalidArgument("init: normal std must be > 0");
    return out;
}

/// Draws every trainable free parameter from the scheme.
inline void init_parameters(ParameterStore &store, const InitScheme &scheme, std::uint64_t seed) {
    Rng rng(seed);
    auto v = store.mutable_values();
    for (const auto &b : store.blocks()) {
        if (!b.trainable) continue;
        for (std::size_t i = b.offset; i < b.offset + b.size(); ++i)
            v[i] = scheme.kind == InitScheme::Kind::Uniform ? rng.uniform(scheme.a, scheme.b) : rng.normal(scheme.a, scheme.b);
    }
}

enum class OptimizerKind { Sgd, Adam };

inline OptimizerKind optimizer_from_string(const std::string &s) {
    if (s == "sgd") return OptimizerKind::Sgd;
    if (s == "adam") return OptimizerKind::Adam;
    throw InvalidArgument("unknown optimizer '" + s + "'");
}

struct TrainConfig {
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
    int max_epochs = 100;
    int patience = 3;
    OptimizerKind optimizer = OptimizerKind::Adam;
    InitScheme init;
    std::uint64_t seed = 0;
    double l2 = 0.0;
    std::size_t chunk_size = 256;  // rows per forward/backward pass inside a batch
    bool initialize = true;

    void validate() const {
        if (batch_size < 1) throw InvalidArgument("train: batch_size must be >= 1");
        if (!(learning_rate > 0)) throw InvalidArgument("train: learning_rate must be > 0");
        if (patience < 1) throw InvalidArgument("train: patience must be >= 1");
        if (max_epochs < 0) throw InvalidArgument("train: max_epochs must be >= 0");
        if (chunk_size < 1) throw InvalidArgument("train: chunk_size must be >= 1");
        if (l2 < 0) throw InvalidArgument("train: l2 must be >= 0");
    }
};

/// SGD or Adam(0.9, 0.999, 1e-8) on the trainable entries of a store,
/// minimizing: params -= step.
class Optimizer {
   public:
    Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {}

    void step(ParameterStore &store) {
        auto v = store.mutable_values();
        auto g = store.gradients();
        if (m_.size() != v.size()) {
            m_.assign(v.size(), 0.0);
            s_.assign(v.size(), 0.0);
        }
        ++t_;
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_)), c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
        for (const auto &b : store.blocks()) {
            if (!b.trainable) continue;
            for (std::size_t i = b.offset; i < b.offset + b.size(); ++i) {
                if (kind_ == OptimizerKind::Sgd) {
                    v[i] -= lr_ * g[i];
                } else {
                    m_[i] = b1 * m_[i] + (1 - b1) * g[i];
                    s_[i] = b2 * s_[i] + (1 - b2) * g[i] * g[i];
                    v[i] -= lr_ * (m_[i] / c1) / (std::sqrt(s_[i] / c2) + eps);
                }
            }
        }
    }

   private:
    OptimizerKind kind_;
    double lr_;
    std::uint64_t t_ = 0;
    std::vector<double> m_, s_;
};

namespace detail {

inline Matrix gather_rows(const Matrix &x, const std::vector<std::size_t> &idx, std::size_t begin, std::size_t end) {
    Matrix out(end - begin, x.cols());
    for (std::size_t r = begin; r < end; ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out(r - begin, c) = x(idx[r], c);
    return out;
}

}  // namespace detail

/// Gradient of the loss -mean log p over `batch` (plus optional L2) into the
/// store, then one optimizer update. Returns the batch mean log-likelihood
/// at the pre-update parameters.
inline double train_step(Model &model, const Matrix &batch, Optimizer &opt, const TrainConfig &cfg) {
    ParameterStore &store = model.params();
    store.zero_gradients();
    const double n = static_cast<double>(batch.rows());
    const double log_norm = model.normalizer_backward(1.0);
    double data = 0.0;
    std::vector<std::size_t> all(batch.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    for (std::size_t start = 0; start < batch.rows(); start += cfg.chunk_size) {
        const std::size_t end = std::min(batch.rows(), start + cfg.chunk_size);
        data += model.data_backward(detail::gather_rows(batch, all, start, end), -1.0 / n);
    }
    if (cfg.l2 > 0) {
        auto g = store.gradients();
        auto v = store.values();
        for (const auto &b : store.blocks())
            if (b.trainable)
                for (std::size_t i = b.offset; i < b.offset + b.size(); ++i) g[i] += 2.0 * cfg.l2 * v[i];
    }
    for (double g : store.gradients())
        if (std::isnan(g)) throw NumericError("NaN gradient");
    opt.step(store);
    return data / n - log_norm;
}

struct EpochRecord {
    int epoch = 0;
    double train_ll = 0.0;
    double val_ll = 0.0;
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
    double best_val_ll = -std::numeric_limits<double>::infinity();
    std::vector<double> best_values;
    std::uint64_t steps = 0;
    std::uint64_t z_evaluations = 0;  // during optimizer steps only
    double seconds = 0.0;

    /// epoch,train_ll,val_ll,seconds
    void write_csv(const std::string &path) const {
        std::ofstream f(path);
        if (!f) throw InvalidArgument("cannot write " + path);
        f.precision(17);
        f << "epoch,train_ll,val_ll,seconds\n";
        for (const auto &e : epochs) f << e.epoch << ',' << e.train_ll << ',' << e.val_ll << ',' << e.seconds << '\n';
    }
};

/// Trains on the rows of `train`, early-stopping on the mean log-likelihood
/// of `val` (patience epochs without improvement); the model ends with the
/// best-validation parameters. Epoch e shuffles with derive_seed(seed, e+1).
inline TrainReport train(Model &model, const Matrix &train_rows, const Matrix &val_rows, const TrainConfig &cfg,
                         const std::function<void(const EpochRecord &)> &on_epoch = {}) {
    cfg.validate();
    if (train_rows.rows() == 0) throw InvalidArgument("train: empty training split");
    const auto t0 = std::chrono::steady_clock::now();
    const auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    ParameterStore &store = model.params();
    if (cfg.initialize) init_parameters(store, cfg.init, derive_seed(cfg.seed, 0));
    Optimizer opt(cfg.optimizer, cfg.learning_rate);
    TrainReport rep;
    const bool has_val = val_rows.rows() > 0;
    const auto validation = [&] { return has_val ? model.mean_log_likelihood(val_rows) : model.mean_log_likelihood(train_rows); };
    rep.best_val_ll = validation();
    rep.best_values.assign(store.values().begin(), store.values().end());
    int since_best = 0;
    std::vector<std::size_t> order(train_rows.rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);
        double sum_ll = 0.0;
        std::size_t step = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++step) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const Matrix batch = detail::gather_rows(train_rows, order, start, end);
            const std::uint64_t before = model.z_evaluations();
            try {
                sum_ll += train_step(model, batch, opt, cfg) * static_cast<double>(end - start);
            } catch (const NumericError &e) {
                throw NumericError("epoch " + std::to_string(epoch) + " step " + std::to_string(step) + ": " + e.what());
            }
            rep.z_evaluations += model.z_evaluations() - before;
            ++rep.steps;
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_ll = sum_ll / static_cast<double>(order.size());
        try {
            rec.val_ll = validation();
        } catch (const NumericError &e) {
            throw NumericError("epoch " + std::to_string(epoch) + " validation: " + e.what());
        }
        rec.seconds = elapsed();
        rep.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
        if (rec.val_ll > rep.best_val_ll) {
            rep.best_val_ll = rec.val_ll;
            rep.best_epoch = epoch;
            rep.best_values.assign(store.values().begin(), store.values().end());
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    store.set_values(rep.best_values);
    rep.seconds = elapsed();
    return rep;
}

}  // namespace pcsq
