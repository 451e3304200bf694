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

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "pcsq/errors.hpp"
#include "pcsq/random.hpp"

namespace pcsq {

/// Sorted, duplicate-free set of variable indices.
class Scope {
   public:
    Scope() = default;
    Scope(std::initializer_list<int> vars) : vars_(vars) { normalize(); }
    explicit Scope(std::vector<int> vars) : vars_(std::move(vars)) { normalize(); }

    static Scope range(int begin, int end) {
        std::vector<int> v;
        for (int i = begin; i < end; ++i) v.push_back(i);
        return Scope(std::move(v));
    }

    const std::vector<int> &vars() const { return vars_; }
    std::size_t size() const { return vars_.size(); }
    bool empty() const { return vars_.empty(); }
    bool contains(int v) const { return std::binary_search(vars_.begin(), vars_.end(), v); }

    bool disjoint(const Scope &o) const {
        auto a = vars_.begin();
        auto b = o.vars_.begin();
        while (a != vars_.end() && b != o.vars_.end()) {
            if (*a == *b) return false;
            if (*a < *b) ++a;
            else ++b;
        }
        return true;
    }

    Scope unite(const Scope &o) const {
        std::vector<int> out;
        std::set_union(vars_.begin(), vars_.end(), o.vars_.begin(), o.vars_.end(), std::back_inserter(out));
        return Scope(std::move(out));
    }

    friend bool operator==(const Scope &, const Scope &) = default;
    friend auto operator<=>(const Scope &, const Scope &) = default;

   private:
    void normalize() {
        std::sort(vars_.begin(), vars_.end());
        vars_.erase(std::unique(vars_.begin(), vars_.end()), vars_.end());
    }
    std::vector<int> vars_;
};

enum class RgNodeKind { Region, Partition };

struct RgNode {
    RgNodeKind kind = RgNodeKind::Region;
    Scope scope;
    int parent = -1;
    std::vector<int> children;
};

struct RgViolation {
    enum class Kind { Bipartite, Parent, RootScope, NotBinary, Disjointness, Covering, LeafOverlap, LeafCoverage, EmptyScope, Range };
    Kind kind;
    int node;
    std::string message;
};

/// Rooted bipartite tree of regions and partitions. Node ids are dense and
/// assigned in construction order.
class RegionGraph {
   public:
    RegionGraph() = default;
    explicit RegionGraph(int variable_count) : variable_count_(variable_count) {}

    int add_region(Scope scope, int parent = -1) { return add(RgNodeKind::Region, std::move(scope), parent); }
    int add_partition(int parent_region) {
        const Scope s = nodes_.at(parent_region).scope;
        return add(RgNodeKind::Partition, s, parent_region);
    }
    void set_root(int id) { root_ = id; }

    int variable_count() const { return variable_count_; }
    int root() const { return root_; }
    const std::vector<RgNode> &nodes() const { return nodes_; }
    const RgNode &node(int id) const { return nodes_.at(id); }

    std::size_t region_count() const { return count(RgNodeKind::Region); }
    std::size_t partition_count() const { return count(RgNodeKind::Partition); }

    std::vector<int> leaves() const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(nodes_.size()); ++i)
            if (nodes_[i].kind == RgNodeKind::Region && nodes_[i].children.empty()) out.push_back(i);
        return out;
    }

    /// Number of partitions on the longest root-to-leaf path.
    int depth() const { return root_ < 0 ? 0 : depth_from(root_); }

    friend bool operator==(const RegionGraph &a, const RegionGraph &b) {
        if (a.variable_count_ != b.variable_count_ || a.root_ != b.root_ || a.nodes_.size() != b.nodes_.size()) return false;
        for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
            const auto &x = a.nodes_[i];
            const auto &y = b.nodes_[i];
            if (x.kind != y.kind || x.scope != y.scope || x.parent != y.parent || x.children != y.children) return false;
        }
        return true;
    }

   private:
    int add(RgNodeKind kind, Scope scope, int parent) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back({kind, std::move(scope), parent, {}});
        if (parent >= 0) nodes_.at(parent).children.push_back(id);
        if (root_ < 0 && parent < 0) root_ = id;
        return id;
    }
    std::size_t count(RgNodeKind k) const {
        return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [k](const RgNode &n) { return n.kind == k; }));
    }
    int depth_from(int id) const {
        int best = 0;
        for (int c : nodes_[id].children) best = std::max(best, depth_from(c));
        return best + (nodes_[id].kind == RgNodeKind::Partition ? 1 : 0);
    }

    int variable_count_ = 0;
    int root_ = -1;
    std::vector<RgNode> nodes_;
};

/// Linear tree over an explicit variable order: {x_i..x_D} splits into
/// {x_i} | {x_{i+1}..x_D}.
inline RegionGraph build_linear_tree_ordered(const std::vector<int> &order) {
    if (order.empty()) throw InvalidArgument("build_linear_tree: variable_count must be >= 1");
    const int d = static_cast<int>(order.size());
    RegionGraph rg(d);
    int region = rg.add_region(Scope(order));
    for (int i = 0; i + 1 < d; ++i) {
        const int part = rg.add_partition(region);
        rg.add_region(Scope{order[i]}, part);
        region = rg.add_region(Scope(std::vector<int>(order.begin() + i + 1, order.end())), part);
    }
    return rg;
}

inline RegionGraph build_linear_tree(int variable_count, std::uint64_t permutation_seed) {
    if (variable_count < 1) throw InvalidArgument("build_linear_tree: variable_count must be >= 1");
    std::vector<int> order(variable_count);
    for (int i = 0; i < variable_count; ++i) order[i] = i;
    Rng rng(permutation_seed);
    rng.shuffle(order);
    return build_linear_tree_ordered(order);
}

namespace detail {
inline void split_binary(RegionGraph &rg, int region, std::vector<int> vars, Rng &rng) {
    if (vars.size() < 2) return;
    rng.shuffle(vars);
    const std::size_t first = (vars.size() + 1) / 2;  // larger half first
    std::vector<int> a(vars.begin(), vars.begin() + first);
    std::vector<int> b(vars.begin() + first, vars.end());
    const int part = rg.add_partition(region);
    const int ra = rg.add_region(Scope(a), part);
    const int rb = rg.add_region(Scope(b), part);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    split_binary(rg, ra, a, rng);
    split_binary(rg, rb, b, rng);
}
}  // namespace detail

/// Binary tree: regions are split into random halves of sizes ceil(n/2) and
/// floor(n/2) until singletons remain.
inline RegionGraph build_binary_tree(int variable_count, std::uint64_t seed) {
    if (variable_count < 1) throw InvalidArgument("build_binary_tree: variable_count must be >= 1");
    RegionGraph rg(variable_count);
    const Scope all = Scope::range(0, variable_count);
    const int root = rg.add_region(all);
    Rng rng(seed);
    detail::split_binary(rg, root, all.vars(), rng);
    return rg;
}

/// Returns one record per violated structural invariant; empty iff valid.
inline std::vector<RgViolation> validate(const RegionGraph &rg) {
    using K = RgViolation::Kind;
    std::vector<RgViolation> out;
    const auto &nodes = rg.nodes();
    const int n = static_cast<int>(nodes.size());
    if (n == 0 || rg.root() < 0 || rg.root() >= n) {
        out.push_back({K::RootScope, -1, "missing root"});
        return out;
    }
    const int d = rg.variable_count();
    for (int i = 0; i < n; ++i) {
        const auto &node = nodes[i];
        if (node.scope.empty()) out.push_back({K::EmptyScope, i, "empty scope"});
        for (int v : node.scope.vars())
            if (v < 0 || v >= d) out.push_back({K::Range, i, "variable out of range"});
        if (i == rg.root()) {
            if (node.parent != -1) out.push_back({K::Parent, i, "root has a parent"});
        } else if (node.parent < 0 || node.parent >= n) {
            out.push_back({K::Parent, i, "node without parent"});
        } else if (std::count(nodes[node.parent].children.begin(), nodes[node.parent].children.end(), i) != 1) {
            out.push_back({K::Parent, i, "parent does not list node as child"});
        }
        for (int c : node.children) {
            if (c < 0 || c >= n) {
                out.push_back({K::Range, i, "child id out of range"});
                continue;
            }
            if (nodes[c].kind == node.kind) out.push_back({K::Bipartite, i, "child of same node kind"});
            if (nodes[c].parent != i) out.push_back({K::Parent, c, "child does not point back to parent"});
        }
        if (node.kind == RgNodeKind::Partition) {
            if (node.children.size() != 2) out.push_back({K::NotBinary, i, "partition is not binary"});
            Scope uni;
            bool disjoint = true;
            for (int c : node.children) {
                if (c < 0 || c >= n) continue;
                if (!uni.disjoint(nodes[c].scope)) disjoint = false;
                uni = uni.unite(nodes[c].scope);
            }
            if (!disjoint) out.push_back({K::Disjointness, i, "child scopes overlap"});
            if (uni != node.scope) out.push_back({K::Covering, i, "child scopes do not cover partition scope"});
            if (node.parent >= 0 && node.parent < n && nodes[node.parent].scope != node.scope)
                out.push_back({K::Covering, i, "partition scope differs from its region"});
        } else if (node.children.size() > 1) {
            // Tree region graph: a single way to partition each region.
            out.push_back({K::NotBinary, i, "region has more than one partition"});
        }
    }
    if (nodes[rg.root()].kind != RgNodeKind::Region || nodes[rg.root()].scope != Scope::range(0, d))
        out.push_back({K::RootScope, rg.root(), "root region does not cover all variables"});
    Scope leaves;
    for (int leaf : rg.leaves()) {
        if (!leaves.disjoint(nodes[leaf].scope)) out.push_back({K::LeafOverlap, leaf, "leaf scopes overlap"});
        leaves = leaves.unite(nodes[leaf].scope);
    }
    if (leaves != Scope::range(0, d)) out.push_back({K::LeafCoverage, -1, "leaf scopes do not cover all variables"});
    return out;
}

}  // namespace pcsq
