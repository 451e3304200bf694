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

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pcsq/errors.hpp"
#include "pcsq/linalg.hpp"

namespace pcsq {

/// Map from free (optimizer) parameters to the values a layer uses.
enum class Reparam { Identity, Exp, SoftmaxRow };

inline const char *to_string(Reparam r) {
    switch (r) {
        case Reparam::Identity: return "identity";
        case Reparam::Exp: return "exp";
        case Reparam::SoftmaxRow: return "softmax_row";
    }
    return "?";
}

inline Reparam reparam_from_string(const std::string &s) {
    if (s == "identity") return Reparam::Identity;
    if (s == "exp") return Reparam::Exp;
    if (s == "softmax_row") return Reparam::SoftmaxRow;
    throw InvalidArgument("unknown reparameterization '" + s + "'");
}

struct ParameterBlock {
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    Reparam reparam = Reparam::Identity;
    bool trainable = true;

    std::size_t size() const { return rows * cols; }
};

/// Flat float-64 parameter vector with per-layer blocks and a same-shape
/// gradient buffer. `version()` changes whenever values are modified through
/// the store, so derived quantities can be cached per parameter version.
class ParameterStore {
   public:
    int add_block(std::size_t rows, std::size_t cols, Reparam reparam, bool trainable = true, double fill = 0.0) {
        ParameterBlock b{values_.size(), rows, cols, reparam, trainable};
        values_.resize(values_.size() + b.size(), fill);
        gradients_.resize(values_.size(), 0.0);
        blocks_.push_back(b);
        ++version_;
        return static_cast<int>(blocks_.size()) - 1;
    }

    const std::vector<ParameterBlock> &blocks() const { return blocks_; }
    const ParameterBlock &block(int id) const { return blocks_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return values_.size(); }
    void set_trainable(int id, bool trainable) { blocks_.at(static_cast<std::size_t>(id)).trainable = trainable; }

    std::span<const double> values() const { return values_; }
    std::span<const double> gradients() const { return gradients_; }
    std::span<double> gradients() { return gradients_; }

    std::span<const double> free(int id) const {
        const auto &b = block(id);
        return {values_.data() + b.offset, b.size()};
    }
    std::span<double> mutable_free(int id) {
        ++version_;
        const auto &b = block(id);
        return {values_.data() + b.offset, b.size()};
    }
    std::span<double> grad(int id) {
        const auto &b = block(id);
        return {gradients_.data() + b.offset, b.size()};
    }

    /// Mutable access to every value; bumps the version.
    std::span<double> mutable_values() {
        ++version_;
        return values_;
    }
    void set_values(std::span<const double> v) {
        if (v.size() != values_.size()) throw InvalidArgument("ParameterStore::set_values: size mismatch");
        values_.assign(v.begin(), v.end());
        ++version_;
    }
    void zero_gradients() { std::fill(gradients_.begin(), gradients_.end(), 0.0); }
    std::uint64_t version() const { return version_; }

    /// Values after the block's reparameterization.
    Matrix effective(int id) const {
        const auto &b = block(id);
        Matrix m(b.rows, b.cols);
        auto src = free(id);
        auto dst = m.values();
        switch (b.reparam) {
            case Reparam::Identity:
                std::copy(src.begin(), src.end(), dst.begin());
                break;
            case Reparam::Exp:
                for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::exp(src[i]);
                break;
            case Reparam::SoftmaxRow:
                for (std::size_t r = 0; r < b.rows; ++r) {
                    double mx = -std::numeric_limits<double>::infinity();
                    for (std::size_t c = 0; c < b.cols; ++c) mx = std::max(mx, src[r * b.cols + c]);
                    double z = 0.0;
                    for (std::size_t c = 0; c < b.cols; ++c) z += (dst[r * b.cols + c] = std::exp(src[r * b.cols + c] - mx));
                    for (std::size_t c = 0; c < b.cols; ++c) dst[r * b.cols + c] /= z;
                }
                break;
        }
        return m;
    }

    /// Chain rule: accumulates d(obj)/d(free) given d(obj)/d(effective).
    void accumulate_gradient(int id, const Matrix &effective_values, std::span<const double> grad_effective) {
        const auto &b = block(id);
        auto g = grad(id);
        auto eff = effective_values.values();
        switch (b.reparam) {
            case Reparam::Identity:
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += grad_effective[i];
                break;
            case Reparam::Exp:
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += grad_effective[i] * eff[i];
                break;
            case Reparam::SoftmaxRow:
                for (std::size_t r = 0; r < b.rows; ++r) {
                    double dot = 0.0;
                    for (std::size_t c = 0; c < b.cols; ++c) dot += eff[r * b.cols + c] * grad_effective[r * b.cols + c];
                    for (std::size_t c = 0; c < b.cols; ++c)
                        g[r * b.cols + c] += eff[r * b.cols + c] * (grad_effective[r * b.cols + c] - dot);
                }
                break;
        }
    }

   private:
    std::vector<double> values_;
    std::vector<double> gradients_;
    std::vector<ParameterBlock> blocks_;
    std::uint64_t version_ = 0;
};

}  // namespace pcsq
