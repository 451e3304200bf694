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

// Clamped B-spline bases on [a, b]: n interior knots and degree k give
// n + k + 1 basis functions that are non-negative and sum to one on [a, b].

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "pcsq/errors.hpp"
#include "pcsq/linalg.hpp"

namespace pcsq {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
inline void gauss_legendre(int n, std::vector<double> &nodes, std::vector<double> &weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p1 = x, p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

class BSplineBasis {
   public:
    BSplineBasis() = default;

    /// `interior_knots` strictly increasing inside (lower, upper).
    BSplineBasis(int degree, std::vector<double> interior_knots, double lower, double upper)
        : degree_(degree), lower_(lower), upper_(upper), interior_(std::move(interior_knots)) {
        if (degree < 0) throw InvalidArgument("BSplineBasis: degree must be >= 0");
        if (!(lower < upper)) throw InvalidArgument("BSplineBasis: empty interval");
        for (std::size_t i = 0; i < interior_.size(); ++i) {
            if (!(interior_[i] > lower && interior_[i] < upper)) throw InvalidArgument("BSplineBasis: knot outside (a, b)");
            if (i > 0 && !(interior_[i] > interior_[i - 1])) throw InvalidArgument("BSplineBasis: knots not strictly increasing");
        }
        knots_.assign(degree + 1, lower);
        knots_.insert(knots_.end(), interior_.begin(), interior_.end());
        knots_.insert(knots_.end(), degree + 1, upper);
    }

    /// `count` uniformly spaced interior knots in (lower, upper).
    static BSplineBasis uniform(int degree, int count, double lower, double upper) {
        std::vector<double> k(count);
        for (int i = 0; i < count; ++i) k[i] = lower + (upper - lower) * (i + 1) / (count + 1);
        return BSplineBasis(degree, std::move(k), lower, upper);
    }

    int degree() const { return degree_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    const std::vector<double> &interior_knots() const { return interior_; }
    const std::vector<double> &knot_vector() const { return knots_; }
    int size() const { return static_cast<int>(interior_.size()) + degree_ + 1; }

    bool in_domain(double x) const { return x >= lower_ && x <= upper_; }

    /// Knot span index s with knots[s] <= x < knots[s+1]; x == upper maps to
    /// the last non-empty span.
    int span(double x) const {
        if (!in_domain(x)) throw DomainError("spline: x = " + std::to_string(x) + " outside [" + std::to_string(lower_) + ", " + std::to_string(upper_) + "]");
        const int last = size() - 1;
        if (x >= upper_) return last;
        int lo = degree_, hi = last + 1;
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            if (x >= knots_[mid]) lo = mid;
            else hi = mid;
        }
        return lo;
    }

    /// The degree + 1 non-zero basis values at x (Cox-de Boor, triangular
    /// form). Returns the index of the first of them.
    int evaluate_nonzero(double x, std::vector<double> &out) const {
        const int s = span(x);
        const int k = degree_;
        out.assign(k + 1, 0.0);
        std::vector<double> left(k + 1), right(k + 1);
        out[0] = 1.0;
        for (int j = 1; j <= k; ++j) {
            left[j] = x - knots_[s + 1 - j];
            right[j] = knots_[s + j] - x;
            double saved = 0.0;
            for (int r = 0; r < j; ++r) {
                const double denom = right[r + 1] + left[j - r];
                const double temp = denom == 0.0 ? 0.0 : out[r] / denom;
                out[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            out[j] = saved;
        }
        return s - k;
    }

    /// All basis values at x (dense).
    std::vector<double> evaluate(double x) const {
        std::vector<double> nz;
        const int first = evaluate_nonzero(x, nz);
        std::vector<double> out(size(), 0.0);
        for (int j = 0; j <= degree_; ++j) out[first + j] = nz[j];
        return out;
    }

    /// Integral of each basis function over [a, b]: (t_{i+k+1} - t_i)/(k+1).
    std::vector<double> integrals() const {
        std::vector<double> out(size());
        for (int i = 0; i < size(); ++i) out[i] = (knots_[i + degree_ + 1] - knots_[i]) / (degree_ + 1);
        return out;
    }

    /// Gram matrix of basis products, integrated exactly per knot span with
    /// degree + 1 Gauss-Legendre points (exact for the degree-2k products).
    const Matrix &gram() const {
        if (gram_.rows() == static_cast<std::size_t>(size())) return gram_;
        const int nb = size();
        Matrix g(nb, nb);
        std::vector<double> nodes, weights, nz;
        gauss_legendre(degree_ + 1, nodes, weights);
        for (std::size_t s = 0; s + 1 < knots_.size(); ++s) {
            const double lo = knots_[s], hi = knots_[s + 1];
            if (!(hi > lo)) continue;
            const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
            for (std::size_t q = 0; q < nodes.size(); ++q) {
                const double x = mid + half * nodes[q];
                const double w = half * weights[q];
                const int first = evaluate_nonzero(x, nz);
                for (int i = 0; i <= degree_; ++i)
                    for (int j = 0; j <= degree_; ++j) g(first + i, first + j) += w * nz[i] * nz[j];
            }
        }
        gram_ = std::move(g);
        return gram_;
    }

    /// Integral over [a, b] of the product of two splines with coefficients u, v.
    double product_integral(std::span<const double> u, std::span<const double> v) const {
        if (u.size() != static_cast<std::size_t>(size()) || v.size() != u.size()) throw InvalidArgument("product_integral: coefficient count mismatch");
        const Matrix &g = gram();
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j) s += u[i] * g(i, j) * v[j];
        return s;
    }

   private:
    int degree_ = 2;
    double lower_ = 0.0;
    double upper_ = 1.0;
    std::vector<double> interior_;
    std::vector<double> knots_;
    mutable Matrix gram_;
};

}  // namespace pcsq
