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

// Queries on circuits whose output is an unnormalized density: pointwise
// evaluation, partition function, marginals and exact sampling.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pcsq/circuit.hpp"
#include "pcsq/errors.hpp"
#include "pcsq/evaluator.hpp"
#include "pcsq/random.hpp"
#include "pcsq/squaring.hpp"

namespace pcsq {

/// Output of the circuit on every row of x ([batch x output width]).
inline SignedLogTensor evaluate(const TensorizedCircuit &c, const Matrix &x) { return forward(c, x).output(); }
inline SignedLogTensor evaluate(const SquaredCircuit &c, const Matrix &x) { return evaluate(c.circuit, x); }

/// Integral of the circuit output over every variable. Throws
/// DegenerateModel if the result is zero, negative or not finite.
inline SignedLogValue partition_function(const TensorizedCircuit &c) {
    const std::vector<char> all(static_cast<std::size_t>(c.variable_count()), 1);
    const SignedLogValue z = forward(c, Matrix(1, static_cast<std::size_t>(c.variable_count())), all).output().at(0, 0);
    if (z.sign <= 0 || !std::isfinite(z.log_mag)) throw DegenerateModel("partition function is zero, negative or not finite");
    return z;
}
inline SignedLogValue partition_function(const SquaredCircuit &c) { return partition_function(c.circuit); }

/// Evidence on some variables; the marginalized set lists variables to
/// integrate out. Variables in neither are integrated out as well.
struct Query {
    std::map<int, double> evidence;
    std::set<int> marginalized;
    bool require_normalized = false;
};

inline SignedLogValue marginalize(const TensorizedCircuit &c, const Query &q) {
    const int D = c.variable_count();
    Matrix x(1, static_cast<std::size_t>(D));
    std::vector<char> mask(static_cast<std::size_t>(D), 1);
    for (int v : q.marginalized)
        if (v < 0 || v >= D) throw InvalidArgument("query: marginalized variable out of range");
    for (const auto &[v, val] : q.evidence) {
        if (v < 0 || v >= D) throw InvalidArgument("query: evidence variable out of range");
        if (q.marginalized.count(v)) throw InvalidArgument("query: variable both observed and marginalized");
        x(0, static_cast<std::size_t>(v)) = val;
        mask[static_cast<std::size_t>(v)] = 0;
    }
    SignedLogValue out = forward(c, x, mask).output().at(0, 0);
    if (q.require_normalized) {
        const SignedLogValue z = partition_function(c);
        if (out.sign != 0) out.log_mag -= z.log_mag;
    }
    return out;
}
inline SignedLogValue marginalize(const SquaredCircuit &c, const Query &q) { return marginalize(c.circuit, q); }

/// Mean of log c(x) - log Z over the rows (c is a density circuit, e.g. c^2).
inline double log_likelihood(const TensorizedCircuit &density, const Matrix &rows) {
    const double lz = partition_function(density).log_mag;
    const SignedLogTensor out = evaluate(density, rows);
    double s = 0.0;
    for (std::size_t b = 0; b < rows.rows(); ++b) {
        const auto v = out.at(b, 0);
        if (v.sign <= 0) throw NumericError("log-likelihood undefined: density is zero at row " + std::to_string(b));
        s += v.log_mag - lz;
    }
    return s / static_cast<double>(rows.rows());
}
inline double log_likelihood(const SquaredCircuit &c2, const Matrix &rows) { return log_likelihood(c2.circuit, rows); }

namespace detail {

/// Families of the input layers over variable v (all identical in circuits
/// built by this library); used for domains and brackets.
inline const Layer &input_layer_of(const TensorizedCircuit &c, int v) {
    for (const auto &l : c.layers())
        if (l.kind == LayerKind::Input && l.variable == v) return l;
    throw InvalidArgument("no input layer over variable " + std::to_string(v));
}

inline std::pair<double, double> variable_bracket(const TensorizedCircuit &c, int v) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto &l : c.layers()) {
        if (l.kind != LayerKind::Input || l.variable != v) continue;
        const auto [a, b] = l.family.bracket(c.params().effective(l.param));
        lo = first ? a : std::min(lo, a);
        hi = first ? b : std::max(hi, b);
        first = false;
    }
    if (first) throw InvalidArgument("no input layer over variable " + std::to_string(v));
    return {lo, hi};
}

/// Conditional density of one variable given a fixed prefix, integrated
/// over the remaining variables; evaluations are batched.
class Conditional {
   public:
    Conditional(const TensorizedCircuit &c, int var, std::vector<double> prefix) : c_(c), var_(var), prefix_(std::move(prefix)) {
        const auto D = static_cast<std::size_t>(c.variable_count());
        mask_.assign(D, 0);
        for (std::size_t v = static_cast<std::size_t>(var) + 1; v < D; ++v) mask_[v] = 1;
    }

    /// Density values (unnormalized, linear, scaled by exp(-shift)) at ts.
    std::vector<double> density(const std::vector<double> &ts) const {
        const auto D = static_cast<std::size_t>(c_.variable_count());
        Matrix x(ts.size(), D);
        for (std::size_t r = 0; r < ts.size(); ++r) {
            for (std::size_t v = 0; v < prefix_.size(); ++v) x(r, v) = prefix_[v];
            x(r, static_cast<std::size_t>(var_)) = ts[r];
        }
        const SignedLogTensor out = forward(c_, x, mask_).output();
        std::vector<double> d(ts.size());
        for (std::size_t r = 0; r < ts.size(); ++r) {
            const auto v = out.at(r, 0);
            if (std::isnan(v.log_mag) || v.log_mag == std::numeric_limits<double>::infinity())
                throw NumericError("sampling: non-finite conditional density");
            if (shift_ == kNegInf && v.sign != 0) shift_ = v.log_mag;
            d[r] = v.sign < 0 ? 0.0 : (v.sign == 0 ? 0.0 : std::exp(v.log_mag - shift_));
            if (!std::isfinite(d[r])) throw NumericError("sampling: conditional density overflow");
        }
        return d;
    }

    /// Fixes the scaling from the largest value over a coarse grid.
    void calibrate(double lo, double hi) {
        const auto D = static_cast<std::size_t>(c_.variable_count());
        const int n = 257;
        Matrix x(n, D);
        for (int r = 0; r < n; ++r) {
            for (std::size_t v = 0; v < prefix_.size(); ++v) x(static_cast<std::size_t>(r), v) = prefix_[v];
            x(static_cast<std::size_t>(r), static_cast<std::size_t>(var_)) = lo + (hi - lo) * r / (n - 1);
        }
        const SignedLogTensor out = forward(c_, x, mask_).output();
        shift_ = kNegInf;
        for (int r = 0; r < n; ++r)
            if (out.sign()[static_cast<std::size_t>(r)] > 0) shift_ = std::max(shift_, out.log_mag()[static_cast<std::size_t>(r)]);
    }

    void set_shift(double s) { shift_ = s; }
    double shift() const { return shift_; }

   private:
    const TensorizedCircuit &c_;
    int var_;
    std::vector<double> prefix_;
    std::vector<char> mask_;
    mutable double shift_ = kNegInf;
};

struct Panel {
    double a, b, mass;
};

/// Gauss-Kronrod (7, 15) integrals of f over each [a, b] in one batch;
/// returns (kronrod, |kronrod - gauss|) per interval.
inline std::vector<std::pair<double, double>> gk15(const Conditional &f, const std::vector<std::pair<double, double>> &iv) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    const auto &xk = GK::abscissa();
    const auto &wk = GK::weights();
    const auto &wg = G::weights();
    std::vector<double> ts;
    ts.reserve(iv.size() * 15);
    for (const auto &[a, b] : iv) {
        const double m = 0.5 * (a + b), h = 0.5 * (b - a);
        ts.push_back(m);
        for (std::size_t i = 1; i < xk.size(); ++i) {
            ts.push_back(m - h * xk[i]);
            ts.push_back(m + h * xk[i]);
        }
    }
    const std::vector<double> y = f.density(ts);
    std::vector<std::pair<double, double>> out;
    for (std::size_t p = 0; p < iv.size(); ++p) {
        const double *v = y.data() + p * 15;
        const double h = 0.5 * (iv[p].second - iv[p].first);
        double k = wk[0] * v[0], g = wg[0] * v[0];
        for (std::size_t i = 1; i < xk.size(); ++i) {
            const double s = v[2 * i - 1] + v[2 * i];
            k += wk[i] * s;
            if (i % 2 == 0) g += wg[i / 2] * s;
        }
        out.emplace_back(h * k, h * std::abs(k - g));
    }
    return out;
}

/// Adaptive panel table covering [lo, hi].
inline std::vector<Panel> build_panels(const Conditional &f, double lo, double hi) {
    std::vector<std::pair<double, double>> todo;
    const int initial = 32;
    for (int i = 0; i < initial; ++i) todo.emplace_back(lo + (hi - lo) * i / initial, lo + (hi - lo) * (i + 1) / initial);
    std::vector<Panel> done;
    std::vector<std::pair<double, double>> pending_err;
    for (int depth = 0; depth < 30 && !todo.empty(); ++depth) {
        const auto r = gk15(f, todo);
        double total = 0.0;
        for (const auto &p : done) total += p.mass;
        for (const auto &[k, e] : r) total += k;
        std::vector<std::pair<double, double>> next;
        for (std::size_t i = 0; i < todo.size(); ++i) {
            const auto [a, b] = todo[i];
            if (r[i].second > 1e-13 * total && depth < 29 && (b - a) > 1e-12 * (hi - lo)) {
                next.emplace_back(a, 0.5 * (a + b));
                next.emplace_back(0.5 * (a + b), b);
            } else {
                done.push_back({a, b, std::max(0.0, r[i].first)});
            }
        }
        todo = std::move(next);
    }
    std::sort(done.begin(), done.end(), [](const Panel &x, const Panel &y) { return x.a < y.a; });
    return done;
}

/// Inverse CDF inside one panel: safeguarded Newton on F(t) = target with
/// F from a GK15 rule over [a, t].
inline double invert_panel(const Conditional &f, const Panel &p, double target, double tol) {
    double lo = p.a, hi = p.b, t = p.a + (p.b - p.a) * std::clamp(target / std::max(p.mass, 1e-300), 0.0, 1.0);
    for (int it = 0; it < 100; ++it) {
        const auto r = gk15(f, {{p.a, t}});
        const double F = r[0].first;
        const double err = F - target;
        if (std::abs(err) <= tol) return t;
        if (err > 0) hi = t;
        else lo = t;
        const double d = f.density({t})[0];
        double next = d > 0 ? t - err / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(t))) return next;
        t = next;
    }
    return t;
}

}  // namespace detail

/// Exact autoregressive sampling from a non-negative density circuit in
/// variable index order. Discrete variables use the exact conditional PMF;
/// continuous ones invert the conditional CDF to tolerance 1e-9.
inline Matrix sample(const TensorizedCircuit &density, std::size_t n, Rng &rng) {
    const int D = density.variable_count();
    Matrix out(n, static_cast<std::size_t>(D));
    std::map<std::vector<double>, std::vector<double>> pmf_cache;
    std::vector<detail::Panel> first_panels;  // the first variable's conditional does not depend on the sample
    double first_shift = 0.0;
    bool have_first = false;
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<double> prefix;
        for (int v = 0; v < D; ++v) {
            const Layer &in = detail::input_layer_of(density, v);
            const double u = rng.uniform();
            double value = 0.0;
            if (in.family.discrete()) {
                auto it = pmf_cache.find(prefix);
                if (it == pmf_cache.end()) {
                    const int m = in.family.support_size();
                    detail::Conditional f(density, v, prefix);
                    std::vector<double> ts(static_cast<std::size_t>(m));
                    for (int k = 0; k < m; ++k) ts[static_cast<std::size_t>(k)] = k;
                    std::vector<double> cdf = f.density(ts);
                    for (std::size_t k = 1; k < cdf.size(); ++k) cdf[k] += cdf[k - 1];
                    if (!(cdf.back() > 0) || !std::isfinite(cdf.back())) throw NumericError("sampling: conditional has no mass");
                    it = pmf_cache.emplace(prefix, std::move(cdf)).first;
                }
                const auto &cdf = it->second;
                const double target = u * cdf.back();
                value = static_cast<double>(std::upper_bound(cdf.begin(), cdf.end(), target) - cdf.begin());
                value = std::min(value, static_cast<double>(cdf.size() - 1));
            } else {
                detail::Conditional f(density, v, prefix);
                std::vector<detail::Panel> local;
                if (v == 0 && have_first) {
                    f.set_shift(first_shift);
                } else {
                    const auto [lo, hi] = detail::variable_bracket(density, v);
                    f.calibrate(lo, hi);
                    local = detail::build_panels(f, lo, hi);
                    if (v == 0) {
                        first_panels = local;
                        first_shift = f.shift();
                        have_first = true;
                    }
                }
                const auto &panels = v == 0 ? first_panels : local;
                double total = 0.0;
                for (const auto &p : panels) total += p.mass;
                if (!(total > 0) || !std::isfinite(total)) throw NumericError("sampling: conditional has no mass");
                double target = u * total;
                std::size_t k = 0;
                while (k + 1 < panels.size() && target > panels[k].mass) target -= panels[k++].mass;
                value = detail::invert_panel(f, panels[k], std::min(target, panels[k].mass), 1e-9 * total);
            }
            out(s, static_cast<std::size_t>(v)) = value;
            prefix.push_back(value);
        }
    }
    return out;
}
inline Matrix sample(const SquaredCircuit &c2, std::size_t n, Rng &rng) { return sample(c2.circuit, n, rng); }

}  // namespace pcsq
