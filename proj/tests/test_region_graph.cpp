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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "pcsq/region_graph.hpp"

using namespace pcsq;

namespace {

bool has_violation(const RegionGraph &rg, RgViolation::Kind k) {
    for (const auto &v : validate(rg))
        if (v.kind == k) return true;
    return false;
}

}  // namespace

TEST(RegionGraph, LinearTreeIsValidWithDepthDMinusOne) {
    for (int d : {1, 2, 5, 9}) {
        const RegionGraph rg = build_linear_tree(d, 3);
        EXPECT_TRUE(validate(rg).empty()) << d;
        EXPECT_EQ(rg.depth(), d - 1);
        EXPECT_EQ(rg.partition_count(), static_cast<std::size_t>(d - 1));
        EXPECT_EQ(rg.leaves().size(), static_cast<std::size_t>(d));
    }
}

TEST(RegionGraph, LinearTreeIsAPermutationOfVariables) {
    const RegionGraph rg = build_linear_tree(6, 42);
    std::set<int> seen;
    for (int leaf : rg.leaves()) seen.insert(rg.node(leaf).scope.vars()[0]);
    EXPECT_EQ(seen.size(), 6u);
    EXPECT_TRUE(build_linear_tree(6, 42) == rg);
}

TEST(RegionGraph, BinaryTreeDepthIsCeilLog2) {
    for (int d : {2, 3, 7, 8, 12, 128}) {
        const RegionGraph rg = build_binary_tree(d, 5);
        EXPECT_TRUE(validate(rg).empty()) << d;
        EXPECT_EQ(rg.depth(), static_cast<int>(std::ceil(std::log2(d)))) << d;
    }
}

TEST(RegionGraph, ExplicitOrderIsRespected) {
    const RegionGraph rg = build_linear_tree_ordered({2, 0, 1});
    const auto &root = rg.node(rg.root());
    const auto &part = rg.node(root.children[0]);
    EXPECT_EQ(rg.node(part.children[0]).scope.vars(), std::vector<int>{2});
    EXPECT_EQ(rg.node(part.children[1]).scope.vars(), (std::vector<int>{0, 1}));
}

TEST(RegionGraph, OverlappingPartitionIsRejected) {
    RegionGraph rg(3);
    const int root = rg.add_region(Scope{0, 1, 2});
    const int p = rg.add_partition(root);
    rg.add_region(Scope{0, 1}, p);
    rg.add_region(Scope{1, 2}, p);
    EXPECT_FALSE(validate(rg).empty());
    EXPECT_TRUE(has_violation(rg, RgViolation::Kind::Disjointness));
}

TEST(RegionGraph, MissingVariableIsRejected) {
    RegionGraph rg(3);
    const int root = rg.add_region(Scope{0, 1});
    const int p = rg.add_partition(root);
    rg.add_region(Scope{0}, p);
    rg.add_region(Scope{1}, p);
    EXPECT_FALSE(validate(rg).empty());
}

TEST(RegionGraph, InvalidSizesThrow) {
    EXPECT_THROW(build_linear_tree(0, 1), InvalidArgument);
    EXPECT_THROW(build_binary_tree(0, 1), InvalidArgument);
}
