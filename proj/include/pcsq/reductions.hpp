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

// Constructive translations into circuits: PSD kernel models, matrix
// product states (through CP decompositions of their cores) and the
// unique-disjointness circuit of a graph.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pcsq/circuit.hpp"
#include "pcsq/errors.hpp"
#include "pcsq/inference.hpp"
#include "pcsq/linalg.hpp"
#include "pcsq/model.hpp"
#include "pcsq/random.hpp"
#include "pcsq/squaring.hpp"

namespace pcsq {

// ---------------------------------------------------------------- PSD models

/// f(x) = kappa(x)^T A kappa(x) with RBF features
/// kappa_j(x) = exp(-|x - a_j|^2 / (2 h^2)) over anchors a_j (rows).
struct PsdModel {
    Matrix anchors;  // d x D
    double bandwidth = 1.0;
    Matrix a;  // d x d, symmetric PSD
};

inline double rbf(const PsdModel &p, std::size_t j, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t v = 0; v < x.size(); ++v) s += (x[v] - p.anchors(j, v)) * (x[v] - p.anchors(j, v));
    return std::exp(-s / (2.0 * p.bandwidth * p.bandwidth));
}

/// Direct kappa^T A kappa.
inline double psd_value(const PsdModel &p, std::span<const double> x) {
    const std::size_t d = p.anchors.rows();
    std::vector<double> k(d);
    for (std::size_t j = 0; j < d; ++j) k[j] = rbf(p, j, x);
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) s += k[i] * p.a(i, j) * k[j];
    return s;
}

struct PsdReduction {
    Model model;  // one squared component with a fixed diagonal head
    std::vector<double> eigenvalues;  // kept (positive) eigenvalues
    std::size_t rank = 0;
};

/// A = sum_i lambda_i u_i u_i^T gives f = sum_i lambda_i (u_i^T kappa)^2: a
/// circuit whose r root units compute u_i^T kappa(x), squared, then mixed by
/// a fixed head holding lambda_i on the diagonal of the r x r products.
inline PsdReduction psd_to_circuit(const PsdModel &p) {
    const std::size_t d = p.anchors.rows(), D = p.anchors.cols();
    if (d == 0 || D == 0) throw InvalidArgument("psd: no anchors");
    if (p.a.rows() != d || p.a.cols() != d) throw InvalidArgument("psd: A must be d x d");
    if (!(p.bandwidth > 0)) throw InvalidArgument("psd: bandwidth must be > 0");
    const double scale = std::max(1.0, p.a.frobenius_norm());
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (std::abs(p.a(i, j) - p.a(j, i)) > 1e-12 * scale) throw InvalidArgument("psd: A is not symmetric");
    const EigenDecomposition eig = jacobi_eigen(p.a);
    double max_abs = 0.0;
    for (double l : eig.values) max_abs = std::max(max_abs, std::abs(l));
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < d; ++i) {
        if (eig.values[i] < -1e-9 * scale) throw InvalidArgument("psd: A has a negative eigenvalue");
        if (eig.values[i] > 1e-12 * max_abs && max_abs > 0) keep.push_back(i);
    }
    if (keep.empty()) throw DegenerateModel("psd: A has rank 0");
    const std::size_t r = keep.size();

    std::vector<int> order(D);
    for (std::size_t v = 0; v < D; ++v) order[v] = static_cast<int>(v);
    const RegionGraph rg = build_linear_tree_ordered(order);
    CircuitOptions opt;
    opt.width = d;
    opt.root_width = r;
    opt.families = {FamilySpec{FamilyKind::Gaussian}};
    auto store = std::make_shared<ParameterStore>();
    TensorizedCircuit c = from_region_graph(rg, opt, store);
    const double log_h = std::log(p.bandwidth);
    const double norm = std::pow(p.bandwidth * std::sqrt(2.0 * std::numbers::pi), static_cast<double>(D));
    for (std::size_t id = 0; id < c.layer_count(); ++id) {
        const Layer &l = c.layers()[id];
        if (l.param < 0) continue;
        store->set_trainable(l.param, false);
        auto w = store->mutable_free(l.param);
        if (l.kind == LayerKind::Input) {
            for (std::size_t j = 0; j < d; ++j) {
                w[j * 2] = p.anchors(j, static_cast<std::size_t>(l.variable));
                w[j * 2 + 1] = log_h;
            }
        } else if (static_cast<int>(id) == c.output()) {
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < d; ++j) w[i * d + j] = eig.vectors(j, keep[i]) * norm;
        } else {
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) w[i * d + j] = i == j ? 1.0 : 0.0;
        }
    }
    const int head = store->add_block(1, r * r, Reparam::Identity, false);
    auto hw = store->mutable_free(head);
    PsdReduction out;
    for (std::size_t i = 0; i < r; ++i) {
        hw[i * r + i] = eig.values[keep[i]];
        out.eigenvalues.push_back(eig.values[keep[i]]);
    }
    out.rank = r;
    out.model = Model(ModelKind::SquaredNonMonotonic, store, {c}, -1, head);
    return out;
}

// ------------------------------------------------------- CP decomposition

/// Dense 3-way tensor, row-major in (i, j, l).
struct Tensor3 {
    std::size_t n0 = 0, n1 = 0, n2 = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(std::size_t a, std::size_t b, std::size_t c) : n0(a), n1(b), n2(c), data(a * b * c, 0.0) {}
    double &operator()(std::size_t i, std::size_t j, std::size_t l) { return data[(i * n1 + j) * n2 + l]; }
    double operator()(std::size_t i, std::size_t j, std::size_t l) const { return data[(i * n1 + j) * n2 + l]; }
    double norm() const {
        double s = 0.0;
        for (double v : data) s += v * v;
        return std::sqrt(s);
    }
};

/// T[x, a, b] ~ sum_s V[x, s] B[a, s] C[b, s].
struct CpResult {
    Matrix v;  // n0 x k
    Matrix b;  // n1 x k
    Matrix c;  // n2 x k
    double relative_error = 0.0;
    int iterations = 0;
    std::uint64_t seed = 0;
};

inline Tensor3 cp_reconstruct(const CpResult &r) {
    Tensor3 t(r.v.rows(), r.b.rows(), r.c.rows());
    for (std::size_t i = 0; i < t.n0; ++i)
        for (std::size_t j = 0; j < t.n1; ++j)
            for (std::size_t l = 0; l < t.n2; ++l) {
                double s = 0.0;
                for (std::size_t q = 0; q < r.v.cols(); ++q) s += r.v(i, q) * r.b(j, q) * r.c(l, q);
                t(i, j, l) = s;
            }
    return t;
}

inline double cp_relative_error(const Tensor3 &t, const CpResult &r) {
    const Tensor3 rec = cp_reconstruct(r);
    double s = 0.0;
    for (std::size_t i = 0; i < t.data.size(); ++i) s += (t.data[i] - rec.data[i]) * (t.data[i] - rec.data[i]);
    const double n = t.norm();
    return n > 0 ? std::sqrt(s) / n : std::sqrt(s);
}

struct CpConfig {
    int max_iterations = 2000;
    double tolerance = 1e-10;  // on the change of relative error
    int restarts = 5;
    std::uint64_t seed = 0;
};

namespace detail {

/// One ALS factor update: F = M G^{-1} with G the Hadamard product of the
/// other two Gram matrices; small ridge on failure.
inline void als_update(Matrix &f, const Matrix &m, Matrix g) {
    const std::size_t k = g.rows();
    Matrix rhs = m.transposed();  // k x n
    Matrix sol = rhs;
    if (!cholesky_solve(g, sol)) {
        double tr = 0.0;
        for (std::size_t i = 0; i < k; ++i) tr += g(i, i);
        for (std::size_t i = 0; i < k; ++i) g(i, i) += 1e-12 * std::max(tr, 1e-300);
        sol = rhs;
        if (!cholesky_solve(g, sol)) {
            for (std::size_t i = 0; i < k; ++i) g(i, i) += 1e-8 * std::max(tr, 1e-300);
            sol = rhs;
            if (!cholesky_solve(g, sol)) throw NumericError("cp_decompose: singular normal equations");
        }
    }
    f = sol.transposed();
}

inline CpResult cp_als(const Tensor3 &t, std::size_t k, const CpConfig &cfg, std::uint64_t seed) {
    Rng rng(seed);
    CpResult r;
    r.seed = seed;
    r.v = Matrix(t.n0, k);
    r.b = Matrix(t.n1, k);
    r.c = Matrix(t.n2, k);
    for (Matrix *m : {&r.v, &r.b, &r.c})
        for (double &x : m->values()) x = rng.normal();
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        r.iterations = it;
        {  // V
            Matrix m(t.n0, k);
            for (std::size_t i = 0; i < t.n0; ++i)
                for (std::size_t j = 0; j < t.n1; ++j)
                    for (std::size_t l = 0; l < t.n2; ++l) {
                        const double x = t(i, j, l);
                        if (x == 0.0) continue;
                        for (std::size_t q = 0; q < k; ++q) m(i, q) += x * r.b(j, q) * r.c(l, q);
                    }
            Matrix g = matmul_tn(r.b.view(), r.b.view());
            const Matrix gc = matmul_tn(r.c.view(), r.c.view());
            for (std::size_t i = 0; i < k * k; ++i) g.values()[i] *= gc.values()[i];
            als_update(r.v, m, g);
        }
        {  // B
            Matrix m(t.n1, k);
            for (std::size_t i = 0; i < t.n0; ++i)
                for (std::size_t j = 0; j < t.n1; ++j)
                    for (std::size_t l = 0; l < t.n2; ++l) {
                        const double x = t(i, j, l);
                        if (x == 0.0) continue;
                        for (std::size_t q = 0; q < k; ++q) m(j, q) += x * r.v(i, q) * r.c(l, q);
                    }
            Matrix g = matmul_tn(r.v.view(), r.v.view());
            const Matrix gc = matmul_tn(r.c.view(), r.c.view());
            for (std::size_t i = 0; i < k * k; ++i) g.values()[i] *= gc.values()[i];
            als_update(r.b, m, g);
        }
        {  // C
            Matrix m(t.n2, k);
            for (std::size_t i = 0; i < t.n0; ++i)
                for (std::size_t j = 0; j < t.n1; ++j)
                    for (std::size_t l = 0; l < t.n2; ++l) {
                        const double x = t(i, j, l);
                        if (x == 0.0) continue;
                        for (std::size_t q = 0; q < k; ++q) m(l, q) += x * r.v(i, q) * r.b(j, q);
                    }
            Matrix g = matmul_tn(r.v.view(), r.v.view());
            const Matrix gb = matmul_tn(r.b.view(), r.b.view());
            for (std::size_t i = 0; i < k * k; ++i) g.values()[i] *= gb.values()[i];
            als_update(r.c, m, g);
        }
        r.relative_error = cp_relative_error(t, r);
        if (r.relative_error < 1e-15 || std::abs(prev - r.relative_error) < cfg.tolerance) break;
        prev = r.relative_error;
    }
    return r;
}

/// Exact rank n0*n1 or n1*n2 decomposition by unfolding, padded to k.
inline CpResult cp_unfolding(const Tensor3 &t, std::size_t k) {
    CpResult r;
    r.v = Matrix(t.n0, k);
    r.b = Matrix(t.n1, k);
    r.c = Matrix(t.n2, k);
    if (k >= t.n1 * t.n2) {
        for (std::size_t j = 0; j < t.n1; ++j)
            for (std::size_t l = 0; l < t.n2; ++l) {
                const std::size_t q = j * t.n2 + l;
                r.b(j, q) = 1.0;
                r.c(l, q) = 1.0;
                for (std::size_t i = 0; i < t.n0; ++i) r.v(i, q) = t(i, j, l);
            }
    } else {
        for (std::size_t i = 0; i < t.n0; ++i)
            for (std::size_t j = 0; j < t.n1; ++j) {
                const std::size_t q = i * t.n1 + j;
                r.v(i, q) = 1.0;
                r.b(j, q) = 1.0;
                for (std::size_t l = 0; l < t.n2; ++l) r.c(l, q) = t(i, j, l);
            }
    }
    r.relative_error = cp_relative_error(t, r);
    return r;
}

}  // namespace detail

/// Rank-k CP decomposition by alternating least squares with `restarts`
/// seeded restarts (seed derive_seed(cfg.seed, i)); the best is kept (lowest
/// error, then lowest restart index). For k >= min(n0*n1, n1*n2) the exact
/// unfolding is a further candidate.
inline CpResult cp_decompose(const Tensor3 &t, std::size_t k, const CpConfig &cfg = {}) {
    if (k < 1) throw InvalidArgument("cp_decompose: rank must be >= 1");
    if (k > std::min(t.n1 * t.n2, t.n0 * t.n1)) throw InvalidArgument("cp_decompose: rank exceeds min(r^2, m r)");
    if (cfg.restarts < 1) throw InvalidArgument("cp_decompose: restarts must be >= 1");
    CpResult best;
    best.relative_error = std::numeric_limits<double>::infinity();
    if (k >= std::min(t.n0 * t.n1, t.n1 * t.n2)) best = detail::cp_unfolding(t, k);
    for (int i = 0; i < cfg.restarts && best.relative_error > 1e-15; ++i) {
        CpResult r = detail::cp_als(t, k, cfg, derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        if (r.relative_error < best.relative_error) best = std::move(r);
    }
    return best;
}

// ------------------------------------------------------------------- MPS

/// Cores A_1 (m x r), A_j (m x r x r) for 1 < j < D, A_D (m x r):
/// T[x] = A_1[x_1] A_2[x_2] ... A_D[x_D]^T.
struct MpsFactorization {
    std::size_t d = 0, m = 0, r = 0;
    std::vector<Tensor3> cores;  // cores[j] is m x r x r for 0 < j < d-1; ends are m x 1 x r and m x r x 1

    static MpsFactorization random(std::size_t d, std::size_t m, std::size_t r, std::uint64_t seed) {
        if (d < 2 || m < 1 || r < 1) throw InvalidArgument("mps: need D >= 2, m >= 1, r >= 1");
        MpsFactorization f;
        f.d = d;
        f.m = m;
        f.r = r;
        Rng rng(seed);
        for (std::size_t j = 0; j < d; ++j) {
            Tensor3 t(m, j == 0 ? 1 : r, j + 1 == d ? 1 : r);
            for (double &v : t.data) v = rng.normal();
            f.cores.push_back(std::move(t));
        }
        return f;
    }
};

/// Eq. 5 contraction at one assignment.
inline double mps_value(const MpsFactorization &f, std::span<const int> x) {
    std::vector<double> vec(f.r);
    for (std::size_t a = 0; a < f.r; ++a) vec[a] = f.cores[0](static_cast<std::size_t>(x[0]), 0, a);
    for (std::size_t j = 1; j + 1 < f.d; ++j) {
        std::vector<double> next(f.r, 0.0);
        for (std::size_t a = 0; a < f.r; ++a)
            for (std::size_t b = 0; b < f.r; ++b) next[b] += vec[a] * f.cores[j](static_cast<std::size_t>(x[j]), a, b);
        vec = std::move(next);
    }
    double s = 0.0;
    for (std::size_t a = 0; a < f.r; ++a) s += vec[a] * f.cores[f.d - 1](static_cast<std::size_t>(x[f.d - 1]), a, 0);
    return s;
}

/// Binary layout: int64 D, m, r (little-endian), then float-64 cores
/// A_1 (m x r), A_2 .. A_{D-1} (m x r x r), A_D (m x r), row-major.
inline void write_mps(const std::string &path, const MpsFactorization &f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path);
    const std::int64_t hdr[3] = {static_cast<std::int64_t>(f.d), static_cast<std::int64_t>(f.m), static_cast<std::int64_t>(f.r)};
    out.write(reinterpret_cast<const char *>(hdr), sizeof hdr);
    for (const auto &c : f.cores) out.write(reinterpret_cast<const char *>(c.data.data()), static_cast<std::streamsize>(c.data.size() * sizeof(double)));
}

inline MpsFactorization read_mps(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open " + path, 0);
    std::int64_t hdr[3];
    if (!in.read(reinterpret_cast<char *>(hdr), sizeof hdr)) throw IngestError("truncated MPS header", 0);
    if (hdr[0] < 2 || hdr[1] < 1 || hdr[2] < 1 || hdr[0] > 4096 || hdr[1] > 1 << 20 || hdr[2] > 4096)
        throw IngestError("invalid MPS header", 0);
    MpsFactorization f;
    f.d = static_cast<std::size_t>(hdr[0]);
    f.m = static_cast<std::size_t>(hdr[1]);
    f.r = static_cast<std::size_t>(hdr[2]);
    for (std::size_t j = 0; j < f.d; ++j) {
        Tensor3 t(f.m, j == 0 ? 1 : f.r, j + 1 == f.d ? 1 : f.r);
        if (!in.read(reinterpret_cast<char *>(t.data.data()), static_cast<std::streamsize>(t.data.size() * sizeof(double))))
            throw IngestError("truncated MPS core " + std::to_string(j + 1), 0);
        f.cores.push_back(std::move(t));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw IngestError("trailing bytes after MPS cores", 0);
    return f;
}

struct MpsReduction {
    TensorizedCircuit circuit;
    std::vector<double> cp_errors;  // per interior core
};

/// Linear-tree circuit over X_1..X_D. Interior cores are CP-decomposed as
/// A_j[x, a, b] = sum_s V_j[x, s] B_j[a, s] C_j[b, s]; the region {X_j..X_D}
/// then computes the contraction from the right through embedding inputs
/// V_j, Hadamard products and sums C_{j-1}^T B_j, closed by A_1 and a root of
/// ones.
inline MpsReduction mps_to_circuit(const MpsFactorization &f, std::size_t rank = 0, const CpConfig &cfg = {}) {
    const std::size_t D = f.d, m = f.m, r = f.r;
    if (D < 2 || f.cores.size() != D) throw InvalidArgument("mps: need at least two cores");
    const std::size_t k = rank == 0 ? std::min(r * r, m * r) : rank;
    std::vector<CpResult> cp(D);
    MpsReduction out;
    for (std::size_t j = 1; j + 1 < D; ++j) {
        CpConfig c = cfg;
        c.seed = derive_seed(cfg.seed, j);
        cp[j] = cp_decompose(f.cores[j], k, c);
        out.cp_errors.push_back(cp[j].relative_error);
    }
    std::vector<int> order(D);
    for (std::size_t v = 0; v < D; ++v) order[v] = static_cast<int>(v);
    const RegionGraph rg = build_linear_tree_ordered(order);
    TensorizedCircuit &c = out.circuit;
    c = TensorizedCircuit(static_cast<int>(D));
    FamilySpec emb;
    emb.kind = FamilyKind::Embedding;
    emb.states = static_cast<int>(m);
    auto fill = [&](int layer, const Matrix &w) {
        auto dst = c.params().mutable_free(c.layer(layer).param);
        std::copy(w.values().begin(), w.values().end(), dst.begin());
    };
    auto input = [&](std::size_t var, const Matrix &table) {  // table: m x width, stored width x m
        const int id = c.add_input(static_cast<int>(var), emb, table.cols(), false);
        fill(id, table.transposed());
        return id;
    };
    // Region {X_{D-1}, X_D} down to {X_2..X_D}.
    Matrix ad(m, r);  // A_D
    for (std::size_t x = 0; x < m; ++x)
        for (std::size_t a = 0; a < r; ++a) ad(x, a) = f.cores[D - 1](x, a, 0);
    int right;
    if (D == 2) {
        right = input(1, ad);
    } else {
        right = input(D - 1, matmul(ad, cp[D - 2].c));  // V_D = A_D C_{D-1}
        for (std::size_t j = D - 2; j >= 1; --j) {
            const int vj = input(j, cp[j].v);
            const int prod = c.add_product(ProductKind::Hadamard, {vj, right});
            const Matrix w = j == 1 ? cp[1].b : matmul_tn(cp[j - 1].c.view(), cp[j].b.view());
            right = c.add_sum(prod, w.rows(), Reparam::Identity, false);
            fill(right, w);
        }
    }
    Matrix a1(m, r);
    for (std::size_t x = 0; x < m; ++x)
        for (std::size_t a = 0; a < r; ++a) a1(x, a) = f.cores[0](x, 0, a);
    const int left = input(0, a1);
    const int prod = c.add_product(ProductKind::Hadamard, {left, right});
    const int root = c.add_sum(prod, 1, Reparam::Identity, false, 1.0);
    c.set_output(root);
    c.set_region_graph(rg);
    return out;
}

// ----------------------------------------------------------------- UDISJ

struct Graph {
    int vertices = 0;
    std::vector<std::pair<int, int>> edges;

    void validate() const {
        if (vertices < 1) throw InvalidArgument("graph: need at least one vertex");
        std::vector<std::pair<int, int>> seen;
        for (auto [u, v] : edges) {
            if (u < 0 || v < 0 || u >= vertices || v >= vertices) throw InvalidArgument("graph: edge references a missing vertex");
            if (u == v) throw InvalidArgument("graph: self-loop");
            const std::pair<int, int> e{std::min(u, v), std::max(u, v)};
            if (std::find(seen.begin(), seen.end(), e) != seen.end()) throw InvalidArgument("graph: duplicate edge");
            seen.emplace_back(e);
        }
    }
};

/// First line: vertex count; then one "u v" edge per line (0-based).
inline Graph read_graph(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path, 0);
    Graph g;
    std::string line;
    long lineno = 0;
    bool have_n = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ss(line);
        std::string extra;
        if (!have_n) {
            if (!(ss >> g.vertices)) {
                if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
                throw IngestError("expected vertex count", lineno);
            }
            have_n = true;
        } else {
            int u, v;
            if (!(ss >> u)) {
                if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
                throw IngestError("expected an edge 'u v'", lineno);
            }
            if (!(ss >> v)) throw IngestError("expected an edge 'u v'", lineno);
            g.edges.emplace_back(u, v);
        }
        if (ss >> extra) throw IngestError("unexpected trailing text", lineno);
    }
    if (!have_n) throw IngestError("empty graph file", lineno);
    try {
        g.validate();
    } catch (const InvalidArgument &e) {
        throw IngestError(e.what(), 0);
    }
    return g;
}

/// c(x) = 1 - sum_{uv in E} x_u x_v over Boolean vertex variables, as a
/// linear-tree circuit of width |E| + 1: unit 0 of every vertex input is
/// the constant 1, unit e is x_v when v is an endpoint of edge e and the
/// constant 1 otherwise, so product unit e is x_u x_v (smoothed by ones);
/// the root weighs unit 0 by 1 and every edge unit by -1. Returns c and c^2.
inline std::pair<TensorizedCircuit, SquaredCircuit> udisj_circuit(const Graph &g) {
    g.validate();
    const int n = g.vertices;
    const std::size_t w = g.edges.size() + 1;
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) order[static_cast<std::size_t>(v)] = v;
    const RegionGraph rg = build_linear_tree_ordered(order);
    CircuitOptions opt;
    opt.width = w;
    opt.families = {FamilySpec{FamilyKind::Embedding, 2}};
    TensorizedCircuit c = from_region_graph(rg, opt);
    for (std::size_t id = 0; id < c.layer_count(); ++id) {
        const Layer &l = c.layers()[id];
        if (l.param < 0) continue;
        c.params().set_trainable(l.param, false);
        auto p = c.params().mutable_free(l.param);
        if (l.kind == LayerKind::Input) {
            for (std::size_t e = 0; e < w; ++e) {
                const bool on_edge = e > 0 && (g.edges[e - 1].first == l.variable || g.edges[e - 1].second == l.variable);
                p[e * 2 + 0] = on_edge ? 0.0 : 1.0;
                p[e * 2 + 1] = 1.0;
            }
        } else if (static_cast<int>(id) == c.output()) {
            for (std::size_t e = 0; e < p.size(); ++e) p[e] = e == 0 ? 1.0 : -1.0;
        } else {
            for (std::size_t i = 0; i < w; ++i)
                for (std::size_t j = 0; j < w; ++j) p[i * w + j] = i == j ? 1.0 : 0.0;
        }
    }
    SquaredCircuit sq = square(c);
    return {std::move(c), std::move(sq)};
}

/// Assignments of `bits` Boolean variables ordered by number of ones, then
/// lexicographically by the positions of the ones ("100" before "010").
inline std::vector<std::vector<int>> popcount_order(int bits) {
    std::vector<std::vector<int>> out;
    for (int ones = 0; ones <= bits; ++ones) {
        std::vector<int> pos(static_cast<std::size_t>(ones));
        for (int i = 0; i < ones; ++i) pos[static_cast<std::size_t>(i)] = i;
        while (true) {
            std::vector<int> a(static_cast<std::size_t>(bits), 0);
            for (int p : pos) a[static_cast<std::size_t>(p)] = 1;
            out.push_back(std::move(a));
            int i = ones - 1;
            while (i >= 0 && pos[static_cast<std::size_t>(i)] == bits - ones + i) --i;
            if (i < 0) break;
            ++pos[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < ones; ++j) pos[static_cast<std::size_t>(j)] = pos[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return out;
}

struct CommunicationMatrix {
    std::vector<std::vector<int>> row_labels;  // assignments of Y (first floor(n/2) vertices)
    std::vector<std::vector<int>> col_labels;  // assignments of Z (remaining vertices)
    Matrix values;
};

/// Values of a circuit over Boolean variables for every (Y, Z) pair.
inline CommunicationMatrix communication_matrix(const TensorizedCircuit &c) {
    const int n = c.variable_count();
    if (n > 16) throw UnsupportedOperation("communication matrix: more than 16 variables");
    const int ny = n / 2, nz = n - ny;
    CommunicationMatrix out;
    out.row_labels = popcount_order(ny);
    out.col_labels = popcount_order(nz);
    const std::size_t R = out.row_labels.size(), C = out.col_labels.size();
    Matrix x(R * C, static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < C; ++j) {
            for (int v = 0; v < ny; ++v) x(i * C + j, static_cast<std::size_t>(v)) = out.row_labels[i][static_cast<std::size_t>(v)];
            for (int v = 0; v < nz; ++v) x(i * C + j, static_cast<std::size_t>(ny + v)) = out.col_labels[j][static_cast<std::size_t>(v)];
        }
    const SignedLogTensor y = evaluate(c, x);
    out.values = Matrix(R, C);
    for (std::size_t i = 0; i < R * C; ++i) out.values.values()[i] = y.at(i, 0).value();
    return out;
}

}  // namespace pcsq
