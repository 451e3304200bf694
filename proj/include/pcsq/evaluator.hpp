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

// Batched forward evaluation of a circuit in signed log-space, the tape it
// leaves behind, and the reverse sweep that accumulates parameter gradients.
// A plain float-64 evaluator is kept alongside as a reference path.

#include <cmath>
#include <string>
#include <vector>

#include "pcsq/circuit.hpp"
#include "pcsq/errors.hpp"
#include "pcsq/linalg.hpp"
#include "pcsq/signed_log.hpp"

namespace pcsq {

/// Forward record: per-layer outputs plus what the reverse sweep needs.
struct Tape {
    const TensorizedCircuit *circuit = nullptr;
    std::size_t batch = 0;
    std::vector<char> marginalized;          // per variable
    std::vector<SignedLogTensor> values;     // per layer, [batch x width]
    std::vector<SignedLogTensor> unit_values;  // squared inputs: the K unsquared values
    std::vector<Matrix> effective;           // per layer effective parameters
    std::vector<std::vector<double>> columns;  // input layers: the data column

    const SignedLogTensor &output() const { return values.at(static_cast<std::size_t>(circuit->output())); }
};

namespace detail {

inline std::string layer_name(int id) { return "layer " + std::to_string(id); }

inline SignedLogTensor broadcast(const SignedLogTensor &row, std::size_t rows) {
    SignedLogTensor out(rows, row.cols());
    for (std::size_t b = 0; b < rows; ++b)
        for (std::size_t j = 0; j < row.cols(); ++j) out.set(b, j, row.at(0, j));
    return out;
}

/// Outer product per row: out[b, i*K + j] = f[b, i] f[b, j].
inline SignedLogTensor self_outer(const SignedLogTensor &f) {
    const std::size_t K = f.cols();
    SignedLogTensor out(f.rows(), K * K);
    for (std::size_t b = 0; b < f.rows(); ++b)
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j < K; ++j) out.set(b, i * K + j, f.at(b, i) * f.at(b, j));
    return out;
}

/// Y = W X W^T per row with X the K x K reshaping of the row.
inline SignedLogTensor squared_sum_forward(const Matrix &w, const SignedLogTensor &x, int id) {
    const std::size_t S = w.rows(), K = w.cols();
    SignedLogTensor y(x.rows(), S * S);
    Matrix xs(K, K);
    for (std::size_t b = 0; b < x.rows(); ++b) {
        for (std::size_t i = 0; i < K * K; ++i)
            if (std::isnan(x.log_mag()[b * K * K + i])) throw NumericError("NaN input to " + layer_name(id));
        const double alpha = scale_row(x.log_row(b), x.sign_row(b), xs.values());
        if (alpha == kNegInf) continue;
        const Matrix t = matmul(w, xs);
        const Matrix r = matmul_nt(t.view(), w.view());
        for (std::size_t i = 0; i < S * S; ++i) {
            const double v = r.values()[i];
            if (std::isnan(v)) throw NumericError("NaN produced in " + layer_name(id));
            if (v != 0.0) y.set_flat(b * S * S + i, {alpha + std::log(std::abs(v)), v > 0 ? 1 : -1});
        }
    }
    return y;
}

inline void accumulate(SignedLogTensor &into, const SignedLogTensor &add) {
    if (into.size() == 0) {
        into = add;
        return;
    }
    for (std::size_t i = 0; i < into.size(); ++i) into.set_flat(i, into.at_flat(i) + add.at_flat(i));
}

inline SignedLogTensor sum_rows(const SignedLogTensor &a) {
    SignedLogTensor out(1, a.cols());
    for (std::size_t b = 0; b < a.rows(); ++b)
        for (std::size_t j = 0; j < a.cols(); ++j) out.set(0, j, out.at(0, j) + a.at(b, j));
    return out;
}

/// Converts a scaled linear accumulator back into signed log-space.
inline SignedLogValue unscale(double v, double offset) {
    if (v == 0.0 || offset == kNegInf) return {};
    return {offset + std::log(std::abs(v)), v > 0 ? 1 : -1};
}

}  // namespace detail

/// Evaluates every layer on the rows of x ([batch x D]). Variables flagged in
/// `marginalized` are integrated out (their data column is ignored).
inline Tape forward(const TensorizedCircuit &c, const Matrix &x, const std::vector<char> &marginalized = {}) {
    const int D = c.variable_count();
    if (x.cols() != static_cast<std::size_t>(D)) throw InvalidArgument("forward: data has " + std::to_string(x.cols()) +
                                                                          " columns, circuit has " + std::to_string(D) + " variables");
    Tape t;
    t.circuit = &c;
    t.batch = x.rows();
    t.marginalized = marginalized.empty() ? std::vector<char>(static_cast<std::size_t>(D), 0) : marginalized;
    if (t.marginalized.size() != static_cast<std::size_t>(D)) throw InvalidArgument("forward: marginalization mask size mismatch");
    const std::size_t L = c.layer_count();
    t.values.resize(L);
    t.unit_values.resize(L);
    t.effective.resize(L);
    t.columns.resize(L);
    for (std::size_t id = 0; id < L; ++id) {
        const Layer &l = c.layers()[id];
        const int lid = static_cast<int>(id);
        if (l.param >= 0) t.effective[id] = c.params().effective(l.param);
        switch (l.kind) {
            case LayerKind::Input: {
                const Matrix &eff = t.effective[id];
                if (t.marginalized[static_cast<std::size_t>(l.variable)]) {
                    t.values[id] = detail::broadcast(l.squared ? l.family.gram(eff) : l.family.integrals(eff), t.batch);
                } else {
                    auto &col = t.columns[id];
                    col.resize(t.batch);
                    for (std::size_t b = 0; b < t.batch; ++b) col[b] = x(b, static_cast<std::size_t>(l.variable));
                    SignedLogTensor f = l.family.forward(eff, col);
                    if (l.squared) {
                        t.values[id] = detail::self_outer(f);
                        t.unit_values[id] = std::move(f);
                    } else {
                        t.values[id] = std::move(f);
                    }
                }
                t.values[id].check_finite(detail::layer_name(lid));
                break;
            }
            case LayerKind::Sum: {
                const SignedLogTensor &in = t.values[static_cast<std::size_t>(l.inputs[0])];
                t.values[id] = l.squared ? detail::squared_sum_forward(t.effective[id], in, lid)
                                         : signed_logsumexp(t.effective[id].view(), in, detail::layer_name(lid));
                break;
            }
            case LayerKind::Hadamard: {
                std::vector<const SignedLogTensor *> ins;
                for (int in : l.inputs) ins.push_back(&t.values[static_cast<std::size_t>(in)]);
                t.values[id] = signed_hadamard(ins);
                break;
            }
            case LayerKind::Kronecker: {
                std::vector<const SignedLogTensor *> ins;
                for (int in : l.inputs) ins.push_back(&t.values[static_cast<std::size_t>(in)]);
                SignedLogTensor k = signed_kronecker(ins);
                if (!l.permutation.empty()) {
                    SignedLogTensor p(k.rows(), k.cols());
                    for (std::size_t b = 0; b < k.rows(); ++b)
                        for (std::size_t s = 0; s < k.cols(); ++s) p.set(b, l.permutation[s], k.at(b, s));
                    k = std::move(p);
                }
                t.values[id] = std::move(k);
                break;
            }
        }
        for (double v : t.values[id].log_mag())
            if (std::isnan(v)) throw NumericError("NaN produced in " + detail::layer_name(lid));
    }
    return t;
}

/// Reverse sweep. `seed` holds d(obj)/d(output value) per row in signed
/// log-space ([batch x output width]); gradients with respect to the free
/// parameters are added to the circuit's ParameterStore.
inline void backward(const Tape &t, const SignedLogTensor &seed, ParameterStore &store) {
    const TensorizedCircuit &c = *t.circuit;
    const int out = c.output();
    if (seed.rows() != t.batch || seed.cols() != c.layer(out).width) throw InvalidArgument("backward: seed shape mismatch");
    std::vector<SignedLogTensor> adj(c.layer_count());
    adj[static_cast<std::size_t>(out)] = seed;
    for (int id = out; id >= 0; --id) {
        const auto uid = static_cast<std::size_t>(id);
        if (adj[uid].size() == 0) continue;
        const Layer &l = c.layer(id);
        const SignedLogTensor &a = adj[uid];
        switch (l.kind) {
            case LayerKind::Input: {
                const Matrix &eff = t.effective[uid];
                if (t.marginalized[static_cast<std::size_t>(l.variable)]) {
                    const SignedLogTensor total = detail::sum_rows(a);
                    if (l.squared) l.family.backward_gram(eff, total, store, l.param);
                    else l.family.backward_integrals(eff, total, store, l.param);
                } else if (!l.squared) {
                    l.family.backward_points(eff, t.columns[uid], a, store, l.param);
                } else {
                    const SignedLogTensor &f = t.unit_values[uid];
                    const std::size_t K = f.cols();
                    SignedLogTensor af(t.batch, K);
                    std::vector<double> fs(K), as(K * K);
                    for (std::size_t b = 0; b < t.batch; ++b) {
                        const double alpha = scale_row(f.log_row(b), f.sign_row(b), fs);
                        const double beta = scale_row(a.log_row(b), a.sign_row(b), as);
                        for (std::size_t i = 0; i < K; ++i) {
                            double acc = 0.0;
                            for (std::size_t j = 0; j < K; ++j) acc += (as[i * K + j] + as[j * K + i]) * fs[j];
                            af.set(b, i, detail::unscale(acc, alpha + beta));
                        }
                    }
                    l.family.backward_points(eff, t.columns[uid], af, store, l.param);
                }
                break;
            }
            case LayerKind::Sum: {
                const Matrix &w = t.effective[uid];
                const auto in_id = static_cast<std::size_t>(l.inputs[0]);
                const SignedLogTensor &x = t.values[in_id];
                const bool train = store.block(l.param).trainable;
                Matrix gw(w.rows(), w.cols());
                if (!l.squared) {
                    const Matrix wt = w.transposed();
                    detail::accumulate(adj[in_id], signed_logsumexp(wt.view(), a, detail::layer_name(id) + " (backward)"));
                    if (train) {
                        std::vector<double> xs(x.cols()), as(a.cols());
                        for (std::size_t b = 0; b < t.batch; ++b) {
                            const double alpha = scale_row(x.log_row(b), x.sign_row(b), xs);
                            const double beta = scale_row(a.log_row(b), a.sign_row(b), as);
                            if (alpha == kNegInf || beta == kNegInf) continue;
                            const double f = std::exp(alpha + beta);
                            for (std::size_t s = 0; s < w.rows(); ++s)
                                for (std::size_t j = 0; j < w.cols(); ++j) gw(s, j) += f * as[s] * xs[j];
                        }
                    }
                } else {
                    const std::size_t S = w.rows(), K = w.cols();
                    SignedLogTensor ax(t.batch, K * K);
                    Matrix xs(K, K), as(S, S);
                    for (std::size_t b = 0; b < t.batch; ++b) {
                        const double alpha = scale_row(x.log_row(b), x.sign_row(b), xs.values());
                        const double beta = scale_row(a.log_row(b), a.sign_row(b), as.values());
                        if (beta == kNegInf) continue;
                        const Matrix aw = matmul(as, w);                   // S x K
                        const Matrix axm = matmul_tn(w.view(), aw.view());  // K x K
                        for (std::size_t i = 0; i < K * K; ++i) ax.set_flat(b * K * K + i, detail::unscale(axm.values()[i], beta));
                        if (!train || alpha == kNegInf) continue;
                        const Matrix atw = matmul_tn(as.view(), w.view());  // S x K
                        const Matrix g1 = matmul_nt(aw.view(), xs.view());
                        const Matrix g2 = matmul(atw, xs);
                        const double f = std::exp(alpha + beta);
                        for (std::size_t i = 0; i < S * K; ++i) gw.values()[i] += f * (g1.values()[i] + g2.values()[i]);
                    }
                    detail::accumulate(adj[in_id], ax);
                }
                if (train) store.accumulate_gradient(l.param, w, gw.values());
                break;
            }
            case LayerKind::Hadamard: {
                for (std::size_t n = 0; n < l.inputs.size(); ++n) {
                    std::vector<const SignedLogTensor *> others{&a};
                    for (std::size_t m = 0; m < l.inputs.size(); ++m)
                        if (m != n) others.push_back(&t.values[static_cast<std::size_t>(l.inputs[m])]);
                    detail::accumulate(adj[static_cast<std::size_t>(l.inputs[n])], signed_hadamard(others));
                }
                break;
            }
            case LayerKind::Kronecker: {
                const std::size_t N = l.inputs.size();
                std::vector<const SignedLogTensor *> xs;
                std::vector<std::size_t> widths;
                for (int in : l.inputs) {
                    xs.push_back(&t.values[static_cast<std::size_t>(in)]);
                    widths.push_back(xs.back()->cols());
                }
                std::vector<SignedLogTensor> ax;
                for (std::size_t n = 0; n < N; ++n) ax.emplace_back(t.batch, widths[n]);
                std::vector<std::vector<double>> sx(N);
                std::vector<double> alpha(N), sa(l.width);
                std::vector<std::size_t> idx(N);
                for (std::size_t b = 0; b < t.batch; ++b) {
                    // undo the output permutation
                    SignedLogTensor ab(1, l.width);
                    for (std::size_t s = 0; s < l.width; ++s) ab.set(0, s, a.at(b, l.permutation.empty() ? s : l.permutation[s]));
                    const double beta = scale_row(ab.log_row(0), ab.sign_row(0), sa);
                    if (beta == kNegInf) continue;
                    for (std::size_t n = 0; n < N; ++n) {
                        sx[n].resize(widths[n]);
                        alpha[n] = scale_row(xs[n]->log_row(b), xs[n]->sign_row(b), sx[n]);
                    }
                    std::vector<std::vector<double>> acc(N);
                    for (std::size_t n = 0; n < N; ++n) acc[n].assign(widths[n], 0.0);
                    std::fill(idx.begin(), idx.end(), 0);
                    for (std::size_t s = 0; s < l.width; ++s) {
                        if (sa[s] != 0.0) {
                            for (std::size_t n = 0; n < N; ++n) {
                                double p = sa[s];
                                for (std::size_t m = 0; m < N && p != 0.0; ++m)
                                    if (m != n) p *= sx[m][idx[m]];
                                acc[n][idx[n]] += p;
                            }
                        }
                        for (std::size_t n = N; n-- > 0;) {
                            if (++idx[n] < widths[n]) break;
                            idx[n] = 0;
                        }
                    }
                    for (std::size_t n = 0; n < N; ++n) {
                        double off = beta;
                        for (std::size_t m = 0; m < N; ++m)
                            if (m != n) off += alpha[m];
                        for (std::size_t i = 0; i < widths[n]; ++i) ax[n].set(b, i, detail::unscale(acc[n][i], off));
                    }
                }
                for (std::size_t n = 0; n < N; ++n) detail::accumulate(adj[static_cast<std::size_t>(l.inputs[n])], ax[n]);
                break;
            }
        }
    }
}

/// Seed for obj = sum_b weight_b * log|c(x_b)| on a width-1 output:
/// d obj / d c_b = weight_b / c_b.
inline SignedLogTensor log_objective_seed(const SignedLogTensor &out, std::span<const double> weight) {
    if (out.cols() != 1 || weight.size() != out.rows()) throw InvalidArgument("log_objective_seed: shape mismatch");
    SignedLogTensor seed(out.rows(), 1);
    for (std::size_t b = 0; b < out.rows(); ++b) {
        const auto v = out.at(b, 0);
        if (v.sign == 0) throw NumericError("log|c(x)| undefined: circuit output is exactly zero at row " + std::to_string(b));
        if (weight[b] == 0.0) continue;
        seed.set(b, 0, {std::log(std::abs(weight[b])) - v.log_mag, (weight[b] > 0 ? 1 : -1) * v.sign});
    }
    return seed;
}

/// Reference float-64 evaluation in linear space; overflows where the
/// signed log-space path does not. Returns [batch x output width].
inline Matrix evaluate_linear(const TensorizedCircuit &c, const Matrix &x, const std::vector<char> &marginalized = {}) {
    const std::size_t L = c.layer_count();
    const std::size_t B = x.rows();
    std::vector<Matrix> v(L);
    const auto masked = [&](int var) { return !marginalized.empty() && marginalized[static_cast<std::size_t>(var)]; };
    for (std::size_t id = 0; id < L; ++id) {
        const Layer &l = c.layers()[id];
        switch (l.kind) {
            case LayerKind::Input: {
                const Matrix eff = c.params().effective(l.param);
                v[id] = Matrix(B, l.width);
                if (masked(l.variable)) {
                    const auto g = (l.squared ? l.family.gram(eff) : l.family.integrals(eff)).to_linear();
                    for (std::size_t b = 0; b < B; ++b)
                        for (std::size_t j = 0; j < l.width; ++j) v[id](b, j) = g[j];
                } else {
                    std::vector<double> col(B);
                    for (std::size_t b = 0; b < B; ++b) col[b] = x(b, static_cast<std::size_t>(l.variable));
                    const auto f = l.family.forward(eff, col).to_linear();
                    const std::size_t K = eff.rows();
                    for (std::size_t b = 0; b < B; ++b) {
                        if (!l.squared) {
                            for (std::size_t j = 0; j < K; ++j) v[id](b, j) = f[b * K + j];
                        } else {
                            for (std::size_t i = 0; i < K; ++i)
                                for (std::size_t j = 0; j < K; ++j) v[id](b, i * K + j) = f[b * K + i] * f[b * K + j];
                        }
                    }
                }
                break;
            }
            case LayerKind::Sum: {
                const Matrix w = c.params().effective(l.param);
                const Matrix &in = v[static_cast<std::size_t>(l.inputs[0])];
                if (!l.squared) {
                    v[id] = matmul_nt(in.view(), w.view());
                } else {
                    const std::size_t K = w.cols(), S = w.rows();
                    v[id] = Matrix(B, S * S);
                    for (std::size_t b = 0; b < B; ++b) {
                        Matrix xs(K, K, std::vector<double>(in.row(b).begin(), in.row(b).end()));
                        const Matrix y = matmul_nt(matmul(w, xs).view(), w.view());
                        for (std::size_t i = 0; i < S * S; ++i) v[id](b, i) = y.values()[i];
                    }
                }
                break;
            }
            case LayerKind::Hadamard: {
                v[id] = Matrix(B, l.width, 1.0);
                for (int in : l.inputs)
                    for (std::size_t i = 0; i < B * l.width; ++i) v[id].values()[i] *= v[static_cast<std::size_t>(in)].values()[i];
                break;
            }
            case LayerKind::Kronecker: {
                v[id] = Matrix(B, l.width);
                std::vector<std::size_t> idx(l.inputs.size());
                for (std::size_t b = 0; b < B; ++b) {
                    std::fill(idx.begin(), idx.end(), 0);
                    for (std::size_t s = 0; s < l.width; ++s) {
                        double p = 1.0;
                        for (std::size_t n = 0; n < l.inputs.size(); ++n) p *= v[static_cast<std::size_t>(l.inputs[n])](b, idx[n]);
                        v[id](b, l.permutation.empty() ? s : l.permutation[s]) = p;
                        for (std::size_t n = l.inputs.size(); n-- > 0;) {
                            if (++idx[n] < c.layer(l.inputs[n]).width) break;
                            idx[n] = 0;
                        }
                    }
                }
                break;
            }
        }
    }
    return v[static_cast<std::size_t>(c.output())];
}

}  // namespace pcsq
