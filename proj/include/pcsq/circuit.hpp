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

// Tensorized circuits: a topologically ordered list of input, sum,
// Hadamard-product and Kronecker-product layers over a shared
// ParameterStore.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcsq/errors.hpp"
#include "pcsq/input_families.hpp"
#include "pcsq/parameters.hpp"
#include "pcsq/region_graph.hpp"

namespace pcsq {

enum class LayerKind { Input, Sum, Hadamard, Kronecker };
enum class ProductKind { Hadamard, Kronecker };

inline const char *to_string(LayerKind k) {
    switch (k) {
        case LayerKind::Input: return "input";
        case LayerKind::Sum: return "sum";
        case LayerKind::Hadamard: return "hadamard";
        case LayerKind::Kronecker: return "kronecker";
    }
    return "?";
}

inline LayerKind layer_kind_from_string(const std::string &s) {
    if (s == "input") return LayerKind::Input;
    if (s == "sum") return LayerKind::Sum;
    if (s == "hadamard") return LayerKind::Hadamard;
    if (s == "kronecker") return LayerKind::Kronecker;
    throw InvalidArgument("unknown layer kind '" + s + "'");
}

inline ProductKind product_from_string(const std::string &s) {
    if (s == "hadamard") return ProductKind::Hadamard;
    if (s == "kronecker") return ProductKind::Kronecker;
    throw InvalidArgument("unknown product kind '" + s + "'");
}

/// One layer. A `squared` layer computes the square of the layer it was
/// derived from: inputs give the K^2 products f_i f_j, sums apply W (x) W
/// with W read from the same parameter block, and Kronecker layers reorder
/// their output through `permutation`.
struct Layer {
    LayerKind kind = LayerKind::Input;
    Scope scope;
    std::size_t width = 0;
    std::vector<int> inputs;
    int param = -1;
    int variable = -1;
    InputFamily family;
    bool squared = false;
    std::vector<std::uint32_t> permutation;
    int region = -1;
};

class TensorizedCircuit {
   public:
    TensorizedCircuit() : store_(std::make_shared<ParameterStore>()) {}
    explicit TensorizedCircuit(int variable_count, std::shared_ptr<ParameterStore> store = nullptr)
        : variable_count_(variable_count), store_(store ? std::move(store) : std::make_shared<ParameterStore>()) {
        if (variable_count < 1) throw InvalidArgument("circuit: variable_count must be >= 1");
    }

    int variable_count() const { return variable_count_; }
    const std::vector<Layer> &layers() const { return layers_; }
    const Layer &layer(int id) const { return layers_.at(static_cast<std::size_t>(id)); }
    std::size_t layer_count() const { return layers_.size(); }
    int output() const { return output_ < 0 ? static_cast<int>(layers_.size()) - 1 : output_; }
    void set_output(int id) { output_ = id; }

    ParameterStore &params() { return *store_; }
    const ParameterStore &params() const { return *store_; }
    const std::shared_ptr<ParameterStore> &store_ptr() const { return store_; }

    const std::optional<RegionGraph> &region_graph() const { return region_graph_; }
    void set_region_graph(RegionGraph rg) { region_graph_ = std::move(rg); }

    /// Input layer of `width` units over one variable with a fresh block.
    int add_input(int variable, const FamilySpec &spec, std::size_t width, bool trainable = true) {
        InputFamily fam(spec);
        const int block = store_->add_block(width, fam.param_cols(), fam.reparam(), trainable);
        return add_input_with(variable, std::move(fam), width, block, false);
    }

    /// Input layer bound to an existing parameter block.
    int add_input_with(int variable, InputFamily family, std::size_t width, int param, bool squared) {
        if (variable < 0 || variable >= variable_count_) throw InvalidArgument("input layer: variable out of range");
        const auto &b = store_->block(param);
        if (b.rows * (squared ? b.rows : 1) != width || b.cols != family.param_cols())
            throw InvalidArgument("input layer: parameter block shape mismatch");
        Layer l;
        l.kind = LayerKind::Input;
        l.scope = Scope{variable};
        l.width = width;
        l.param = param;
        l.variable = variable;
        l.family = std::move(family);
        l.squared = squared;
        return push(std::move(l));
    }

    /// Sum layer with a fresh S x K block (K = input width).
    int add_sum(int input, std::size_t width, Reparam reparam, bool trainable = true, double fill = 0.0) {
        const int block = store_->add_block(width, layer(input).width, reparam, trainable, fill);
        return add_sum_with(input, block, false);
    }

    /// Sum layer reading an existing block; squared sums read W and apply W (x) W.
    int add_sum_with(int input, int param, bool squared) {
        const auto &b = store_->block(param);
        const std::size_t in_width = layer(input).width;
        const std::size_t k = squared ? b.cols * b.cols : b.cols;
        if (k != in_width) throw InvalidArgument("sum layer: weight columns do not match input width");
        Layer l;
        l.kind = LayerKind::Sum;
        l.scope = layer(input).scope;
        l.width = squared ? b.rows * b.rows : b.rows;
        l.inputs = {input};
        l.param = param;
        l.squared = squared;
        return push(std::move(l));
    }

    int add_product(ProductKind kind, std::vector<int> inputs, bool squared = false, std::vector<std::uint32_t> permutation = {}) {
        if (inputs.empty()) throw InvalidArgument("product layer: no inputs");
        Layer l;
        l.kind = kind == ProductKind::Hadamard ? LayerKind::Hadamard : LayerKind::Kronecker;
        l.width = kind == ProductKind::Hadamard ? layer(inputs[0]).width : 1;
        for (int in : inputs) {
            const Layer &x = layer(in);
            if (!l.scope.disjoint(x.scope)) throw UnsupportedStructure("product layer: input scopes overlap");
            l.scope = l.scope.unite(x.scope);
            if (kind == ProductKind::Hadamard) {
                if (x.width != l.width) throw InvalidArgument("hadamard layer: input widths differ");
            } else {
                l.width *= x.width;
            }
        }
        if (!permutation.empty() && permutation.size() != l.width) throw InvalidArgument("kronecker layer: permutation size mismatch");
        l.inputs = std::move(inputs);
        l.squared = squared;
        l.permutation = std::move(permutation);
        return push(std::move(l));
    }

    void set_region(int layer_id, int region) { layers_.at(static_cast<std::size_t>(layer_id)).region = region; }

    /// Effective parameters of a layer's block.
    Matrix weights(int layer_id) const { return store_->effective(layer(layer_id).param); }

   private:
    int push(Layer l) {
        for (int in : l.inputs)
            if (in < 0 || in >= static_cast<int>(layers_.size())) throw InvalidArgument("layer input must precede the layer");
        layers_.push_back(std::move(l));
        return static_cast<int>(layers_.size()) - 1;
    }

    int variable_count_ = 1;
    std::vector<Layer> layers_;
    int output_ = -1;
    std::shared_ptr<ParameterStore> store_;
    std::optional<RegionGraph> region_graph_;
};

struct CircuitOptions {
    std::size_t width = 2;
    ProductKind product = ProductKind::Hadamard;
    Reparam sum_reparam = Reparam::Identity;
    /// One spec per variable, or a single spec shared by all.
    std::vector<FamilySpec> families{FamilySpec{}};
    std::size_t root_width = 1;
};

/// Builds the circuit of a tree region graph: leaf regions become input
/// layers, each partition a product layer followed by a sum layer of the
/// given width (root_width at the root).
inline TensorizedCircuit from_region_graph(const RegionGraph &rg, const CircuitOptions &opt,
                                           std::shared_ptr<ParameterStore> store = nullptr) {
    if (opt.width < 1) throw InvalidArgument("from_region_graph: width must be >= 1");
    if (opt.families.size() != 1 && opt.families.size() != static_cast<std::size_t>(rg.variable_count()))
        throw InvalidArgument("from_region_graph: need one family spec or one per variable");
    if (!validate(rg).empty()) throw InvalidArgument("from_region_graph: invalid region graph");
    TensorizedCircuit c(rg.variable_count(), std::move(store));
    const auto spec_of = [&](int v) { return opt.families.size() == 1 ? opt.families[0] : opt.families[static_cast<std::size_t>(v)]; };

    // Post-order over regions; returns the layer computing the region.
    auto build = [&](auto &&self, int region) -> int {
        const RgNode &node = rg.node(region);
        const bool is_root = region == rg.root();
        if (node.children.empty()) {
            if (node.scope.size() != 1) throw UnsupportedStructure("from_region_graph: leaf regions must hold one variable");
            const int in = c.add_input(node.scope.vars()[0], spec_of(node.scope.vars()[0]), opt.width);
            c.set_region(in, region);
            if (!is_root) return in;
            const int s = c.add_sum(in, opt.root_width, opt.sum_reparam);
            c.set_region(s, region);
            return s;
        }
        const RgNode &part = rg.node(node.children[0]);
        std::vector<int> ins;
        for (int child : part.children) ins.push_back(self(self, child));
        const int prod = c.add_product(opt.product, ins);
        c.set_region(prod, node.children[0]);
        const int s = c.add_sum(prod, is_root ? opt.root_width : opt.width, opt.sum_reparam);
        c.set_region(s, region);
        return s;
    };
    c.set_output(build(build, rg.root()));
    c.set_region_graph(rg);
    return c;
}

/// Number of scalar input connections: S*K per sum, N*K per Hadamard and
/// (prod of widths) * (max width) per Kronecker, which is K^(N+1) for equal
/// widths. Input layers count zero.
inline std::size_t size(const TensorizedCircuit &c) {
    std::size_t total = 0;
    for (const auto &l : c.layers()) {
        switch (l.kind) {
            case LayerKind::Input: break;
            case LayerKind::Sum: total += l.width * c.layer(l.inputs[0]).width; break;
            case LayerKind::Hadamard: total += l.inputs.size() * l.width; break;
            case LayerKind::Kronecker: {
                std::size_t mx = 0;
                for (int in : l.inputs) mx = std::max(mx, c.layer(in).width);
                total += l.width * mx;
                break;
            }
        }
    }
    return total;
}

}  // namespace pcsq
