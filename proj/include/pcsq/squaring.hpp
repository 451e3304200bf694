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

// Layer-wise squaring of structured-decomposable circuits, and the cheaper
// squaring of deterministic circuits.

#include <cstdint>
#include <vector>

#include "pcsq/circuit.hpp"
#include "pcsq/errors.hpp"
#include "pcsq/properties.hpp"

namespace pcsq {

/// c^2 over the same region graph. Shares the source's ParameterStore: the
/// squared sums read the source weights W and apply W (x) W on the fly.
struct SquaredCircuit {
    TensorizedCircuit circuit;
    std::vector<int> layer_map;  // source layer id -> squared layer id
};

/// Output permutation of a squared Kronecker layer. The layer computes
/// (a_1 (x) a_1) (x) ... (x) (a_N (x) a_N); entry (i_1 i'_1, ..., i_N i'_N)
/// belongs at position (p, q) of v (x) v with v = a_1 (x) ... (x) a_N,
/// p = (i_1, ..., i_N) and q = (i'_1, ..., i'_N) in mixed radix.
inline std::vector<std::uint32_t> squared_kronecker_permutation(const std::vector<std::size_t> &widths) {
    std::size_t w = 1;
    for (auto k : widths) w *= k;
    const std::size_t N = widths.size();
    std::vector<std::uint32_t> perm(w * w);
    std::vector<std::size_t> digit(N, 0);  // digit n in [0, K_n^2)
    for (std::size_t s = 0; s < w * w; ++s) {
        std::size_t p = 0, q = 0;
        for (std::size_t n = 0; n < N; ++n) {
            p = p * widths[n] + digit[n] / widths[n];
            q = q * widths[n] + digit[n] % widths[n];
        }
        perm[s] = static_cast<std::uint32_t>(p * w + q);
        for (std::size_t n = N; n-- > 0;) {
            if (++digit[n] < widths[n] * widths[n]) break;
            digit[n] = 0;
        }
    }
    return perm;
}

inline SquaredCircuit square(const TensorizedCircuit &c) {
    if (!check_property(c, Property::StructuredDecomposable))
        throw UnsupportedStructure("square: circuit is not structured-decomposable");
    SquaredCircuit out{TensorizedCircuit(c.variable_count(), c.store_ptr()), std::vector<int>(c.layer_count(), -1)};
    TensorizedCircuit &q = out.circuit;
    for (std::size_t id = 0; id < c.layer_count(); ++id) {
        const Layer &l = c.layers()[id];
        if (l.squared) throw UnsupportedOperation("square: circuit already contains squared layers");
        std::vector<int> ins;
        for (int in : l.inputs) ins.push_back(out.layer_map[static_cast<std::size_t>(in)]);
        int nid = -1;
        switch (l.kind) {
            case LayerKind::Input: nid = q.add_input_with(l.variable, l.family, l.width * l.width, l.param, true); break;
            case LayerKind::Sum: nid = q.add_sum_with(ins[0], l.param, true); break;
            case LayerKind::Hadamard: nid = q.add_product(ProductKind::Hadamard, ins, true); break;
            case LayerKind::Kronecker: {
                std::vector<std::size_t> widths;
                for (int in : l.inputs) widths.push_back(c.layer(in).width);
                nid = q.add_product(ProductKind::Kronecker, ins, true, squared_kronecker_permutation(widths));
                break;
            }
        }
        q.set_region(nid, l.region);
        out.layer_map[id] = nid;
    }
    q.set_output(out.layer_map[static_cast<std::size_t>(c.output())]);
    if (c.region_graph()) q.set_region_graph(*c.region_graph());
    return out;
}

/// Squares a deterministic circuit by squaring its weights and input
/// functions; same topology and size, fresh parameter store.
inline TensorizedCircuit square_deterministic(const TensorizedCircuit &c) {
    for (const auto &l : c.layers())
        if (l.squared) throw UnsupportedOperation("square_deterministic: circuit already contains squared layers");
    if (!check_property(c, Property::Smooth) || !check_property(c, Property::Decomposable) ||
        !check_property(c, Property::DeterministicInputs))
        throw PreconditionViolation("square_deterministic: circuit is not smooth, decomposable and deterministic");
    TensorizedCircuit q(c.variable_count());
    for (std::size_t id = 0; id < c.layer_count(); ++id) {
        const Layer &l = c.layers()[id];
        int nid = -1;
        switch (l.kind) {
            case LayerKind::Input: {
                const Matrix t = l.family.table(c.params().effective(l.param));
                FamilySpec spec;
                spec.kind = FamilyKind::Embedding;
                spec.states = static_cast<int>(t.cols());
                nid = q.add_input(l.variable, spec, l.width, false);
                auto dst = q.params().mutable_free(q.layer(nid).param);
                for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = t.values()[i] * t.values()[i];
                break;
            }
            case LayerKind::Sum: {
                const Matrix w = c.params().effective(l.param);
                nid = q.add_sum(l.inputs[0], l.width, Reparam::Identity, false);
                auto dst = q.params().mutable_free(q.layer(nid).param);
                for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = w.values()[i] * w.values()[i];
                break;
            }
            case LayerKind::Hadamard: nid = q.add_product(ProductKind::Hadamard, l.inputs); break;
            case LayerKind::Kronecker: nid = q.add_product(ProductKind::Kronecker, l.inputs); break;
        }
        q.set_region(nid, l.region);
    }
    q.set_output(c.output());
    if (c.region_graph()) q.set_region_graph(*c.region_graph());
    return q;
}

}  // namespace pcsq
