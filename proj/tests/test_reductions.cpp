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
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "oracles.hpp"
#include "pcsq/pcsq.hpp"

using namespace pcsq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / ("pcsq_test_reductions_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir / name;
}

/// kappa(x)^T A kappa(x) with the RBF kernel written out.
double kernel_form(const Matrix &anchors, double h, const Matrix &a, const std::vector<double> &x) {
    const std::size_t d = anchors.rows();
    std::vector<double> k(d);
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t v = 0; v < x.size(); ++v) s += (x[v] - anchors(j, v)) * (x[v] - anchors(j, v));
        k[j] = std::exp(-0.5 * s / (h * h));
    }
    double out = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) out += k[i] * a(i, j) * k[j];
    return out;
}

double circuit_value(const PsdReduction &r, const std::vector<double> &x) {
    Matrix m(1, x.size(), x);
    return evaluate(r.model.density(0), m).at(0, 0).value();
}

Matrix random_matrix(Rng &rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double &v : m.values()) v = rng.normal();
    return m;
}

/// Direct left-to-right contraction of the cores.
double contract(const MpsFactorization &f, const std::vector<double> &x) {
    std::vector<double> row(f.r);
    for (std::size_t a = 0; a < f.r; ++a) row[a] = f.cores[0](static_cast<std::size_t>(x[0]), 0, a);
    for (std::size_t j = 1; j + 1 < f.d; ++j) {
        std::vector<double> next(f.r, 0.0);
        for (std::size_t b = 0; b < f.r; ++b)
            for (std::size_t a = 0; a < f.r; ++a) next[b] += row[a] * f.cores[j](static_cast<std::size_t>(x[j]), a, b);
        row = next;
    }
    double s = 0.0;
    for (std::size_t a = 0; a < f.r; ++a) s += row[a] * f.cores[f.d - 1](static_cast<std::size_t>(x[f.d - 1]), a, 0);
    return s;
}

Graph matching(int pairs) {
    Graph g;
    g.vertices = 2 * pairs;
    for (int i = 0; i < pairs; ++i) g.edges.emplace_back(i, pairs + i);
    return g;
}

}  // namespace

TEST(Jacobi, ReconstructsAndIsOrthogonal) {
    Rng rng(1);
    for (std::size_t n : {1u, 2u, 5u, 12u}) {
        const Matrix b = random_matrix(rng, n, n);
        const Matrix a = matmul_nt(b.view(), b.view());
        const auto e = jacobi_eigen(a);
        Matrix rec(n, n), gram(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) {
                    rec(i, j) += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
                    gram(i, j) += e.vectors(k, i) * e.vectors(k, j);
                }
        double err = 0.0, orth = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                err += (rec(i, j) - a(i, j)) * (rec(i, j) - a(i, j));
                orth = std::max(orth, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));
            }
        EXPECT_LT(std::sqrt(err) / a.frobenius_norm(), 1e-12) << n;
        EXPECT_LT(orth, 1e-12) << n;
        for (std::size_t k = 1; k < n; ++k) EXPECT_LE(e.values[k - 1], e.values[k]);
    }
}

TEST(Psd, RankOneIsASingleSquaredTerm) {
    PsdModel p;
    p.anchors = Matrix(3, 2, std::vector<double>{0.0, 0.0, 1.0, -1.0, -0.5, 2.0});
    p.bandwidth = 0.8;
    const std::vector<double> u{1.0, -2.0, 0.5};
    p.a = Matrix(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) p.a(i, j) = u[i] * u[j];
    const PsdReduction r = psd_to_circuit(p);
    EXPECT_EQ(r.rank, 1u);
    EXPECT_NEAR(r.eigenvalues[0], 1.0 + 4.0 + 0.25, 1e-12);
    for (const std::vector<double> &x : {std::vector<double>{0.1, 0.2}, {1.0, -1.0}, {-2.0, 3.0}})
        EXPECT_LT(oracle::rel_error(circuit_value(r, x), kernel_form(p.anchors, p.bandwidth, p.a, x)), 1e-12);
}

TEST(Psd, IdentityIsSumOfSquaredKernels) {
    PsdModel p;
    p.anchors = Matrix(2, 1, std::vector<double>{-1.0, 1.5});
    p.bandwidth = 1.0;
    p.a = Matrix::identity(2);
    const PsdReduction r = psd_to_circuit(p);
    EXPECT_EQ(r.rank, 2u);
    for (double x : {-3.0, 0.0, 0.7, 2.0}) {
        const double k1 = std::exp(-0.5 * (x + 1.0) * (x + 1.0)), k2 = std::exp(-0.5 * (x - 1.5) * (x - 1.5));
        EXPECT_LT(oracle::rel_error(circuit_value(r, {x}), k1 * k1 + k2 * k2), 1e-12);
    }
}

TEST(Psd, RandomModelMatchesDirectFormAndIsNonNegative) {
    Rng rng(2);
    PsdModel p;
    p.anchors = random_matrix(rng, 5, 2);
    p.bandwidth = 0.9;
    const Matrix b = random_matrix(rng, 5, 5);
    p.a = matmul_nt(b.view(), b.view());
    const PsdReduction r = psd_to_circuit(p);
    EXPECT_EQ(r.rank, 5u);
    EXPECT_TRUE(check_property(r.model.components()[0], Property::StructuredDecomposable));
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> x{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
        const double c = circuit_value(r, x);
        EXPECT_GE(c, 0.0);
        EXPECT_LT(oracle::rel_error(c, kernel_form(p.anchors, p.bandwidth, p.a, x)), 1e-8);
    }
    // Its normalizer is the integral of the kernel form.
    const double lz = r.model.log_normalizer();
    double riemann = 0.0;
    const double step = 0.05;
    for (double x1 = -8.0; x1 <= 8.0; x1 += step)
        for (double x2 = -8.0; x2 <= 8.0; x2 += step) riemann += kernel_form(p.anchors, p.bandwidth, p.a, {x1, x2}) * step * step;
    EXPECT_LT(oracle::rel_error(std::exp(lz), riemann), 1e-6);
}

TEST(Psd, InvalidModelsAreRejected) {
    PsdModel p;
    p.anchors = Matrix(2, 1, std::vector<double>{0.0, 1.0});
    p.a = Matrix(2, 2);
    EXPECT_THROW(psd_to_circuit(p), DegenerateModel);
    p.a = Matrix(2, 2, std::vector<double>{1.0, 0.5, 0.4, 1.0});
    EXPECT_THROW(psd_to_circuit(p), InvalidArgument);
    p.a = Matrix(2, 2, std::vector<double>{1.0, 0.0, 0.0, -1.0});
    EXPECT_THROW(psd_to_circuit(p), InvalidArgument);
    p.a = Matrix::identity(2);
    p.bandwidth = 0.0;
    EXPECT_THROW(psd_to_circuit(p), InvalidArgument);
}

TEST(Cp, RankOneTensorIsRecoveredExactly) {
    Rng rng(3);
    Tensor3 t(3, 4, 4);
    std::vector<double> a(3), b(4), c(4);
    for (double &v : a) v = rng.normal();
    for (double &v : b) v = rng.normal();
    for (double &v : c) v = rng.normal();
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            for (std::size_t l = 0; l < 4; ++l) t(i, j, l) = a[i] * b[j] * c[l];
    const CpResult r = cp_decompose(t, 1);
    EXPECT_LT(r.relative_error, 1e-10);
    EXPECT_NEAR(cp_relative_error(t, r), r.relative_error, 1e-15);
}

TEST(Cp, DiagonalSlicesHaveRankR) {
    Rng rng(4);
    const std::size_t m = 3, r = 3;
    Tensor3 t(m, r, r);
    for (std::size_t x = 0; x < m; ++x)
        for (std::size_t a = 0; a < r; ++a) t(x, a, a) = rng.normal();
    const CpResult res = cp_decompose(t, r);
    EXPECT_LT(res.relative_error, 1e-8);
    const Tensor3 back = cp_reconstruct(res);
    for (std::size_t i = 0; i < t.data.size(); ++i) EXPECT_NEAR(back.data[i], t.data[i], 1e-7);
}

TEST(Cp, MaximalRankIsExact) {
    Rng rng(5);
    for (auto [m, r] : std::vector<std::pair<std::size_t, std::size_t>>{{2, 2}, {2, 3}, {4, 2}, {3, 3}}) {
        Tensor3 t(m, r, r);
        for (double &v : t.data) v = rng.normal();
        const CpResult res = cp_decompose(t, std::min(r * r, m * r));
        EXPECT_LT(res.relative_error, 1e-8) << m << "x" << r;
    }
}

TEST(Cp, DeterministicGivenSeedAndRejectsBadRank) {
    Rng rng(6);
    Tensor3 t(3, 3, 3);
    for (double &v : t.data) v = rng.normal();
    CpConfig cfg;
    cfg.seed = 17;
    cfg.max_iterations = 200;
    const CpResult a = cp_decompose(t, 2, cfg), b = cp_decompose(t, 2, cfg);
    EXPECT_EQ(std::vector<double>(a.v.values().begin(), a.v.values().end()), std::vector<double>(b.v.values().begin(), b.v.values().end()));
    EXPECT_EQ(a.relative_error, b.relative_error);
    EXPECT_THROW(cp_decompose(t, 0), InvalidArgument);
    EXPECT_THROW(cp_decompose(t, 10), InvalidArgument);
}

TEST(Mps, TwoCoresNeedNoDecomposition) {
    const MpsFactorization f = MpsFactorization::random(2, 3, 2, 7);
    const MpsReduction red = mps_to_circuit(f);
    EXPECT_TRUE(red.cp_errors.empty());
    const Matrix x = oracle::all_assignments({3, 3});
    const auto y = evaluate(red.circuit, x);
    for (std::size_t r = 0; r < x.rows(); ++r) EXPECT_NEAR(y.at(r, 0).value(), contract(f, {x(r, 0), x(r, 1)}), 1e-14);
}

TEST(Mps, CircuitAndBornMachineMatchContraction) {
    for (std::uint64_t seed : {8u, 9u, 10u}) {
        const MpsFactorization f = MpsFactorization::random(4, 2, 2, seed);
        const MpsReduction red = mps_to_circuit(f);
        ASSERT_EQ(red.cp_errors.size(), 2u);
        EXPECT_TRUE(check_property(red.circuit, Property::StructuredDecomposable));
        ASSERT_TRUE(red.circuit.region_graph().has_value());
        const SquaredCircuit born = square(red.circuit);
        const Matrix x = oracle::all_assignments({2, 2, 2, 2});
        const auto y = evaluate(red.circuit, x), y2 = evaluate(born, x);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const double t = contract(f, {x(r, 0), x(r, 1), x(r, 2), x(r, 3)});
            EXPECT_LT(std::abs(y.at(r, 0).value() - t), 1e-6);
            EXPECT_LT(std::abs(y2.at(r, 0).value() - t * t), 1e-6 * std::max(1.0, t * t));
        }
    }
}

TEST(Mps, LongerChainsAndLowRankReportError) {
    const MpsFactorization f = MpsFactorization::random(6, 3, 2, 11);
    const MpsReduction full = mps_to_circuit(f);
    const Matrix x = oracle::all_assignments(std::vector<int>(6, 3));
    const auto y = evaluate(full.circuit, x);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::vector<double> row(x.row(r).begin(), x.row(r).end());
        EXPECT_LT(std::abs(y.at(r, 0).value() - contract(f, row)), 1e-6);
    }
    const MpsReduction low = mps_to_circuit(f, 1);
    for (double e : low.cp_errors) EXPECT_GT(e, 1e-3);
}

TEST(Mps, BinaryRoundTripAndCorruptFiles) {
    const MpsFactorization f = MpsFactorization::random(3, 2, 3, 12);
    const fs::path p = scratch("cores.bin");
    write_mps(p.string(), f);
    const MpsFactorization g = read_mps(p.string());
    ASSERT_EQ(g.d, 3u);
    ASSERT_EQ(g.r, 3u);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(g.cores[j].data, f.cores[j].data);
    EXPECT_EQ(fs::file_size(p), 3 * 8 + (2 * 3 + 2 * 9 + 2 * 3) * 8u);

    fs::resize_file(p, fs::file_size(p) - 8);
    EXPECT_THROW(read_mps(p.string()), IngestError);
    write_mps(p.string(), f);
    {
        std::ofstream extra(p, std::ios::binary | std::ios::app);
        extra << 'x';
    }
    EXPECT_THROW(read_mps(p.string()), IngestError);
    {
        std::ofstream bad(p, std::ios::binary | std::ios::trunc);
        const std::int64_t hdr[3] = {1, 2, 2};
        bad.write(reinterpret_cast<const char *>(hdr), sizeof hdr);
    }
    EXPECT_THROW(read_mps(p.string()), IngestError);
    EXPECT_THROW(read_mps((p.parent_path() / "missing.bin").string()), IngestError);
}

TEST(Udisj, ExampleMatchingTable) {
    const auto [c, sq] = udisj_circuit(matching(3));
    const CommunicationMatrix m = communication_matrix(sq.circuit);
    const double expected[8][8] = {
        {1, 1, 1, 1, 1, 1, 1, 1}, {1, 0, 1, 1, 0, 0, 1, 0}, {1, 1, 0, 1, 0, 1, 0, 0}, {1, 1, 1, 0, 1, 0, 0, 0},
        {1, 0, 0, 1, 1, 0, 0, 1}, {1, 0, 1, 0, 0, 1, 0, 1}, {1, 1, 0, 0, 0, 0, 1, 1}, {1, 0, 0, 0, 1, 1, 1, 4},
    };
    const std::vector<std::vector<int>> labels{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};
    EXPECT_EQ(m.row_labels, labels);
    EXPECT_EQ(m.col_labels, labels);
    int zeros = 0;
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) {
            EXPECT_EQ(m.values(i, j), expected[i][j]) << i << "," << j;
            zeros += m.values(i, j) == 0.0;
        }
    EXPECT_EQ(zeros, 27);
}

TEST(Udisj, SquareOfOneMinusEdgeSumOnRandomGraphs) {
    Rng rng(13);
    for (int trial = 0; trial < 8; ++trial) {
        Graph g;
        g.vertices = 2 + static_cast<int>(rng.index(9));
        for (int u = 0; u < g.vertices; ++u)
            for (int v = u + 1; v < g.vertices; ++v)
                if (rng.uniform() < 0.3) g.edges.emplace_back(u, v);
        const auto [c, sq] = udisj_circuit(g);
        EXPECT_TRUE(check_property(c, Property::StructuredDecomposable));
        EXPECT_EQ(check_property(c, Property::Monotonic), g.edges.empty());
        const Matrix x = oracle::all_assignments(std::vector<int>(static_cast<std::size_t>(g.vertices), 2));
        const auto y = evaluate(sq, x);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            double f = 1.0;
            for (auto [u, v] : g.edges) f -= x(r, static_cast<std::size_t>(u)) * x(r, static_cast<std::size_t>(v));
            EXPECT_NEAR(y.at(r, 0).value(), f * f, 1e-12 * std::max(1.0, f * f));
            EXPECT_GE(y.at(r, 0).sign, 0);
            EXPECT_EQ(y.at(r, 0).sign == 0, f == 0.0);
        }
    }
}

TEST(Udisj, GraphValidationAndParsing) {
    Graph g;
    g.vertices = 3;
    g.edges = {{0, 3}};
    EXPECT_THROW(g.validate(), InvalidArgument);
    g.edges = {{1, 1}};
    EXPECT_THROW(g.validate(), InvalidArgument);
    g.edges = {{0, 1}, {1, 0}};
    EXPECT_THROW(g.validate(), InvalidArgument);

    const fs::path p = scratch("graph.txt");
    {
        std::ofstream f(p);
        f << "# matching\n6\n0 3\n1 4  # second\n\n2 5\n";
    }
    const Graph m = read_graph(p.string());
    EXPECT_EQ(m.vertices, 6);
    EXPECT_EQ(m.edges, (std::vector<std::pair<int, int>>{{0, 3}, {1, 4}, {2, 5}}));
    {
        std::ofstream f(p);
        f << "4\n0 1\n2 x\n";
    }
    try {
        read_graph(p.string());
        FAIL() << "expected IngestError";
    } catch (const IngestError &e) {
        EXPECT_EQ(e.line(), 3);
    }
    {
        std::ofstream f(p);
        f << "4\n0 1 2\n";
    }
    EXPECT_THROW(read_graph(p.string()), IngestError);
    {
        std::ofstream f(p);
        f << "2\n0 1\n0 1\n";
    }
    EXPECT_THROW(read_graph(p.string()), IngestError);
}

TEST(Udisj, CommunicationMatrixLimit) {
    Graph g;
    g.vertices = 17;
    const auto [c, sq] = udisj_circuit(g);
    EXPECT_THROW(communication_matrix(c), UnsupportedOperation);
    EXPECT_EQ(popcount_order(2), (std::vector<std::vector<int>>{{0, 0}, {1, 0}, {0, 1}, {1, 1}}));
}
