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


// Builds the unique-disjointness circuit of a perfect matching and prints
// its communication matrix for the split (first half, second half).

#include <cstdio>
#include <cstdlib>

#include "pcsq/pcsq.hpp"

int main(int argc, char **argv) {
    using namespace pcsq;
    const int pairs = argc > 1 ? std::atoi(argv[1]) : 3;
    if (pairs < 1 || pairs > 8) {
        std::fprintf(stderr, "usage: udisj_matching [pairs in 1..8]\n");
        return 2;
    }
    Graph g;
    g.vertices = 2 * pairs;
    for (int i = 0; i < pairs; ++i) g.edges.emplace_back(i, pairs + i);
    const auto [c, sq] = udisj_circuit(g);
    std::printf("c: %zu layers, size %zu, monotonic %s\n", c.layer_count(), size(c), check_property(c, Property::Monotonic) ? "yes" : "no");

    const CommunicationMatrix m = communication_matrix(sq.circuit);
    const auto label = [](const std::vector<int> &a) {
        std::string s;
        for (int b : a) s += static_cast<char>('0' + b);
        return s;
    };
    std::printf("%*s", pairs + 1, "");
    for (const auto &col : m.col_labels) std::printf(" %s", label(col).c_str());
    std::printf("\n");
    for (std::size_t i = 0; i < m.row_labels.size(); ++i) {
        std::printf("%s ", label(m.row_labels[i]).c_str());
        for (std::size_t j = 0; j < m.col_labels.size(); ++j) std::printf(" %*g", pairs, m.values(i, j));
        std::printf("\n");
    }
    return 0;
}
