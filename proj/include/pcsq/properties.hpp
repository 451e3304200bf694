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

// Structural and parametric property checks on tensorized circuits.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "pcsq/circuit.hpp"
#include "pcsq/errors.hpp"
#include "pcsq/evaluator.hpp"

namespace pcsq {

enum class Property { Smooth, Decomposable, StructuredDecomposable, Monotonic, DeterministicInputs };

namespace detail {

inline bool is_smooth(const TensorizedCircuit &c) {
    for (const auto &l : c.layers())
        if (l.kind == LayerKind::Sum && (l.inputs.size() != 1 || c.layer(l.inputs[0]).scope != l.scope)) return false;
    return true;
}

inline bool is_decomposable(const TensorizedCircuit &c) {
    for (const auto &l : c.layers()) {
        if (l.kind != LayerKind::Hadamard && l.kind != LayerKind::Kronecker) continue;
        Scope seen;
        for (int in : l.inputs) {
            if (!seen.disjoint(c.layer(in).scope)) return false;
            seen = seen.unite(c.layer(in).scope);
        }
        if (seen != l.scope) return false;
    }
    return true;
}

/// All product layers over the same scope split it into the same child scopes.
inline bool is_structured_decomposable(const TensorizedCircuit &c) {
    if (!is_decomposable(c)) return false;
    std::map<Scope, std::vector<Scope>> split;
    for (const auto &l : c.layers()) {
        if (l.kind != LayerKind::Hadamard && l.kind != LayerKind::Kronecker) continue;
        std::vector<Scope> parts;
        for (int in : l.inputs) parts.push_back(c.layer(in).scope);
        std::sort(parts.begin(), parts.end());
        auto [it, inserted] = split.emplace(l.scope, parts);
        if (!inserted && it->second != parts) return false;
    }
    return true;
}

inline bool is_monotonic(const TensorizedCircuit &c) {
    for (const auto &l : c.layers()) {
        if (l.kind == LayerKind::Input) {
            if (!l.family.nonnegative(c.params().effective(l.param))) return false;
        } else if (l.kind == LayerKind::Sum) {
            const Matrix w = c.params().effective(l.param);
            bool neg = false, pos = false;
            for (double v : w.values()) {
                neg = neg || v < 0.0;
                pos = pos || v > 0.0;
            }
            // W (x) W is non-negative iff W has a single sign.
            if (l.squared ? (neg && pos) : neg) return false;
        }
    }
    return true;
}

inline bool is_deterministic(const TensorizedCircuit &c) {
    const int D = c.variable_count();
    if (D > 16) throw UnsupportedOperation("determinism check: more than 16 variables");
    std::vector<int> states(static_cast<std::size_t>(D), 1);
    for (const auto &l : c.layers()) {
        if (l.kind != LayerKind::Input) continue;
        if (!l.family.discrete()) throw UnsupportedOperation("determinism check requires finite-discrete inputs");
        states[static_cast<std::size_t>(l.variable)] = l.family.support_size();
    }
    std::size_t total = 1;
    for (int m : states) {
        total *= static_cast<std::size_t>(m);
        if (total > (std::size_t{1} << 22)) throw UnsupportedOperation("determinism check: assignment space too large");
    }
    const std::size_t chunk = 4096;
    std::vector<int> digits(static_cast<std::size_t>(D), 0);
    for (std::size_t start = 0; start < total; start += chunk) {
        const std::size_t n = std::min(chunk, total - start);
        Matrix x(n, static_cast<std::size_t>(D));
        for (std::size_t r = 0; r < n; ++r) {
            for (int v = 0; v < D; ++v) x(r, static_cast<std::size_t>(v)) = digits[static_cast<std::size_t>(v)];
            for (int v = D; v-- > 0;) {
                if (++digits[static_cast<std::size_t>(v)] < states[static_cast<std::size_t>(v)]) break;
                digits[static_cast<std::size_t>(v)] = 0;
            }
        }
        const Tape t = forward(c, x);
        for (std::size_t id = 0; id < c.layer_count(); ++id) {
            const Layer &l = c.layers()[id];
            if (l.kind != LayerKind::Sum) continue;
            const Matrix &w = t.effective[id];
            std::vector<char> used(w.cols(), 0);
            for (std::size_t s = 0; s < w.rows(); ++s)
                for (std::size_t j = 0; j < w.cols(); ++j) used[j] = used[j] || w(s, j) != 0.0;
            const SignedLogTensor &in = t.values[static_cast<std::size_t>(l.inputs[0])];
            for (std::size_t r = 0; r < n; ++r) {
                int live = 0;
                for (std::size_t j = 0; j < in.cols(); ++j) live += used[j] && in.sign_row(r)[j] != 0;
                if (live > 1) return false;
            }
        }
    }
    return true;
}

}  // namespace detail

inline bool check_property(const TensorizedCircuit &c, Property p) {
    switch (p) {
        case Property::Smooth: return detail::is_smooth(c);
        case Property::Decomposable: return detail::is_decomposable(c);
        case Property::StructuredDecomposable: return detail::is_structured_decomposable(c);
        case Property::Monotonic: return detail::is_monotonic(c);
        case Property::DeterministicInputs: return detail::is_deterministic(c);
    }
    return false;
}

}  // namespace pcsq
