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

// Reference computations for tests: plain double-precision evaluation of
// circuits straight from their layer definitions, enumeration helpers,
// random circuit generators and scalar quadrature.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "pcsq/pcsq.hpp"

namespace oracle {

using pcsq::Layer;
using pcsq::LayerKind;
using pcsq::Matrix;
using pcsq::TensorizedCircuit;

/// Value of one input unit, recomputed from its family's definition.
inline double input_unit(const Layer &l, const Matrix &eff, std::size_t i, double x) {
    const auto &f = l.family.spec();
    switch (f.kind) {
        case pcsq::FamilyKind::Gaussian: {
            const double mu = eff(i, 0), s = std::exp(eff(i, 1));
            return std::exp(-0.5 * (x - mu) * (x - mu) / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi));
        }
        case pcsq::FamilyKind::Categorical:
        case pcsq::FamilyKind::Embedding:
            return eff(i, static_cast<std::size_t>(x));
        case pcsq::FamilyKind::Binomial: {
            const double p = 1.0 / (1.0 + std::exp(-eff(i, 0)));
            const int n = f.trials, k = static_cast<int>(x);
            return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) * std::pow(p, k) * std::pow(1 - p, n - k);
        }
        case pcsq::FamilyKind::Spline: {
            const auto basis = pcsq::BSplineBasis::uniform(f.spline_degree, f.spline_knots, f.lower, f.upper);
            const auto b = basis.evaluate(x);
            double s = 0.0;
            for (std::size_t j = 0; j < b.size(); ++j) s += eff(i, j) * b[j];
            return s;
        }
    }
    return 0.0;
}

/// Output of an unsquared circuit at one point, layer by layer in linear space.
/// With `magnitudes` every weight and input value enters by its absolute
/// value, which bounds the rounding error of the signed evaluation.
inline double eval(const TensorizedCircuit &c, const std::vector<double> &x, bool magnitudes = false) {
    const auto mag = [&](double v) { return magnitudes ? std::abs(v) : v; };
    std::vector<std::vector<double>> v(c.layer_count());
    for (std::size_t id = 0; id < c.layer_count(); ++id) {
        const Layer &l = c.layer(static_cast<int>(id));
        auto &out = v[id];
        switch (l.kind) {
            case LayerKind::Input: {
                const Matrix eff = c.params().effective(l.param);
                for (std::size_t i = 0; i < l.width; ++i) out.push_back(mag(input_unit(l, eff, i, x[static_cast<std::size_t>(l.variable)])));
                break;
            }
            case LayerKind::Sum: {
                const Matrix w = c.params().effective(l.param);
                const auto &in = v[static_cast<std::size_t>(l.inputs[0])];
                for (std::size_t s = 0; s < w.rows(); ++s) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < w.cols(); ++k) acc += mag(w(s, k)) * in[k];
                    out.push_back(acc);
                }
                break;
            }
            case LayerKind::Hadamard:
                out.assign(l.width, 1.0);
                for (int in : l.inputs)
                    for (std::size_t i = 0; i < l.width; ++i) out[i] *= v[static_cast<std::size_t>(in)][i];
                break;
            case LayerKind::Kronecker:
                out = {1.0};
                for (int in : l.inputs) {
                    std::vector<double> next;
                    for (double a : out)
                        for (double b : v[static_cast<std::size_t>(in)]) next.push_back(a * b);
                    out = std::move(next);
                }
                break;
        }
    }
    return v[static_cast<std::size_t>(c.output())][0];
}

/// Calls f on every assignment of variables with the given state counts,
/// first variable slowest.
inline void enumerate(const std::vector<int> &states, const std::function<void(const std::vector<double> &)> &f) {
    std::vector<double> x(states.size(), 0.0);
    while (true) {
        f(x);
        std::size_t v = states.size();
        while (v > 0 && ++x[v - 1] >= states[v - 1]) x[--v] = 0.0;
        if (v == 0) return;
    }
}

/// Rows of every assignment, first variable slowest.
inline Matrix all_assignments(const std::vector<int> &states) {
    std::vector<std::vector<double>> rows;
    enumerate(states, [&](const std::vector<double> &x) { rows.push_back(x); });
    Matrix m(rows.size(), states.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < states.size(); ++c) m(r, c) = rows[r][c];
    return m;
}

inline double rel_error(double a, double b) {
    const double d = std::max(std::abs(a), std::abs(b));
    return d == 0.0 ? 0.0 : std::abs(a - b) / d;
}

/// Random real weights everywhere (sum weights N(0,1), input tables N(0,1)).
inline void randomize(pcsq::ParameterStore &s, pcsq::Rng &rng, double scale = 1.0) {
    auto v = s.mutable_values();
    for (double &x : v) x = scale * rng.normal();
}

/// Random circuit over binary variables from a tree region graph: either a
/// binary tree (depth <= ceil(log2 D)) or a linear tree for D <= 5, so the
/// depth stays at most 4 for D <= 12.
inline TensorizedCircuit random_binary_circuit(pcsq::Rng &rng, int max_vars = 12, std::size_t max_width = 4,
                                               pcsq::FamilyKind family = pcsq::FamilyKind::Embedding) {
    const int d = 2 + static_cast<int>(rng.index(static_cast<std::uint64_t>(max_vars - 1)));
    const std::uint64_t seed = rng.next_u64();
    const pcsq::RegionGraph rg = d <= 5 && rng.uniform() < 0.5 ? pcsq::build_linear_tree(d, seed) : pcsq::build_binary_tree(d, seed);
    pcsq::CircuitOptions opt;
    opt.width = 1 + rng.index(max_width);
    opt.product = rng.uniform() < 0.5 ? pcsq::ProductKind::Hadamard : pcsq::ProductKind::Kronecker;
    pcsq::FamilySpec f;
    f.kind = family;
    f.states = 2;
    opt.families = {f};
    TensorizedCircuit c = pcsq::from_region_graph(rg, opt);
    randomize(c.params(), rng);
    return c;
}

/// Adaptive Simpson quadrature of f on [a, b].
inline double simpson(const std::function<double(double)> &f, double a, double b, double tol, int depth = 50) {
    const auto step = [&](auto &&self, double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int left) -> double {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double l = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double r = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (left <= 0 || std::abs(l + r - whole) <= 15.0 * eps) return l + r + (l + r - whole) / 15.0;
        return self(self, lo, mid, flo, flm, fmid, l, eps / 2.0, left - 1) + self(self, mid, hi, fmid, frm, fhi, r, eps / 2.0, left - 1);
    };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return step(step, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

}  // namespace oracle
