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

// Signed log-space values: every quantity is carried as (log|v|, sign(v))
// with sign in {-1, 0, +1}; sign 0 iff log|v| = -inf.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pcsq/errors.hpp"
#include "pcsq/linalg.hpp"

namespace pcsq {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct SignedLogValue {
    double log_mag = kNegInf;
    int sign = 0;

    static SignedLogValue zero() { return {}; }
    static SignedLogValue from_linear(double v) {
        if (v == 0.0) return {};
        return {std::log(std::abs(v)), v > 0.0 ? 1 : -1};
    }
    static SignedLogValue from_log(double log_mag, int sign = 1) {
        if (sign == 0 || log_mag == kNegInf) return {};
        return {log_mag, sign};
    }
    bool is_zero() const { return sign == 0; }
    double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_mag); }
};

inline SignedLogValue operator*(SignedLogValue a, SignedLogValue b) {
    if (a.sign == 0 || b.sign == 0) return {};
    return {a.log_mag + b.log_mag, a.sign * b.sign};
}

/// Exact-cancellation aware addition in signed log-space.
inline SignedLogValue operator+(SignedLogValue a, SignedLogValue b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    if (a.log_mag < b.log_mag) std::swap(a, b);
    const double d = std::exp(b.log_mag - a.log_mag);
    if (a.sign == b.sign) return {a.log_mag + std::log1p(d), a.sign};
    if (d == 1.0) return {};
    return {a.log_mag + std::log1p(-d), a.sign};
}

/// Row-major [rows x cols] tensor of signed log values. Rows index the batch.
class SignedLogTensor {
   public:
    SignedLogTensor() = default;
    SignedLogTensor(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), log_mag_(rows * cols, kNegInf), sign_(rows * cols, 0) {}

    static SignedLogTensor from_linear(std::size_t rows, std::size_t cols, std::span<const double> values) {
        if (values.size() != rows * cols) throw InvalidArgument("SignedLogTensor: size mismatch");
        SignedLogTensor t(rows, cols);
        for (std::size_t i = 0; i < values.size(); ++i) t.set_flat(i, SignedLogValue::from_linear(values[i]));
        return t;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return log_mag_.size(); }

    SignedLogValue at(std::size_t r, std::size_t c) const { return at_flat(r * cols_ + c); }
    SignedLogValue at_flat(std::size_t i) const { return {log_mag_[i], sign_[i]}; }
    void set(std::size_t r, std::size_t c, SignedLogValue v) { set_flat(r * cols_ + c, v); }
    void set_flat(std::size_t i, SignedLogValue v) {
        if (v.sign == 0 || v.log_mag == kNegInf) {
            log_mag_[i] = kNegInf;
            sign_[i] = 0;
        } else {
            log_mag_[i] = v.log_mag;
            sign_[i] = static_cast<std::int8_t>(v.sign);
        }
    }

    std::span<const double> log_mag() const { return log_mag_; }
    std::span<const std::int8_t> sign() const { return sign_; }
    std::span<double> log_mag() { return log_mag_; }
    std::span<std::int8_t> sign() { return sign_; }
    std::span<const double> log_row(std::size_t r) const { return {log_mag_.data() + r * cols_, cols_}; }
    std::span<const std::int8_t> sign_row(std::size_t r) const { return {sign_.data() + r * cols_, cols_}; }

    std::vector<double> to_linear() const {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = at_flat(i).value();
        return out;
    }

    /// Throws NumericError if any entry is NaN (reported with `where`).
    void check_finite(const std::string &where) const {
        for (double v : log_mag_) {
            if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
                throw NumericError("non-finite value in " + where);
            }
        }
    }

   private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> log_mag_;
    std::vector<std::int8_t> sign_;
};

/// Scales one row into linear space: out[j] = sign_j * exp(log_j - alpha),
/// alpha = max over non-zero entries. Returns alpha, or -inf if all are zero.
inline double scale_row(std::span<const double> logs, std::span<const std::int8_t> signs, std::span<double> out) {
    double alpha = kNegInf;
    for (std::size_t j = 0; j < logs.size(); ++j)
        if (signs[j] != 0 && logs[j] > alpha) alpha = logs[j];
    if (alpha == kNegInf) {
        std::fill(out.begin(), out.end(), 0.0);
        return alpha;
    }
    for (std::size_t j = 0; j < logs.size(); ++j) out[j] = signs[j] == 0 ? 0.0 : signs[j] * std::exp(logs[j] - alpha);
    return alpha;
}

/// The signed log-sum-exp trick: y = W x evaluated per batch row with
/// x and y in signed log-space. W is S x K, x is [batch x K].
inline SignedLogTensor signed_logsumexp(MatrixView w, const SignedLogTensor &x, const std::string &where = "sum layer") {
    if (x.cols() != w.cols) throw InvalidArgument("signed_logsumexp: width mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isnan(x.log_mag()[i])) throw NumericError("NaN input to " + where);
    }
    SignedLogTensor y(x.rows(), w.rows);
    std::vector<double> scaled(w.cols);
    for (std::size_t b = 0; b < x.rows(); ++b) {
        const double alpha = scale_row(x.log_row(b), x.sign_row(b), scaled);
        if (alpha == kNegInf) continue;
        for (std::size_t s = 0; s < w.rows; ++s) {
            const double *wr = w.data + s * w.cols;
            double acc = 0.0;
            for (std::size_t j = 0; j < w.cols; ++j) acc += wr[j] * scaled[j];
            if (std::isnan(acc)) throw NumericError("NaN produced in " + where);
            if (acc != 0.0) y.set(b, s, {alpha + std::log(std::abs(acc)), acc > 0.0 ? 1 : -1});
        }
    }
    return y;
}

/// Element-wise (Hadamard) product of equal-width inputs.
inline SignedLogTensor signed_hadamard(std::span<const SignedLogTensor *const> xs) {
    if (xs.empty()) throw InvalidArgument("signed_hadamard: no inputs");
    const std::size_t rows = xs[0]->rows();
    const std::size_t cols = xs[0]->cols();
    for (const auto *x : xs) {
        if (x->cols() != cols || x->rows() != rows) throw InvalidArgument("signed_hadamard: width mismatch");
    }
    SignedLogTensor out(rows, cols);
    auto logs = out.log_mag();
    auto signs = out.sign();
    for (std::size_t i = 0; i < rows * cols; ++i) {
        double l = 0.0;
        int s = 1;
        for (const auto *x : xs) {
            s *= x->sign()[i];
            l += x->log_mag()[i];
        }
        if (s == 0) continue;
        logs[i] = l;
        signs[i] = static_cast<std::int8_t>(s);
    }
    return out;
}

/// Kronecker product in signed log-space: log-magnitudes add over the outer
/// index structure, signs multiply. The first input is the most significant
/// index of the output.
inline SignedLogTensor signed_kronecker(std::span<const SignedLogTensor *const> xs) {
    if (xs.empty()) throw InvalidArgument("signed_kronecker: no inputs");
    const std::size_t rows = xs[0]->rows();
    std::size_t width = 1;
    for (const auto *x : xs) {
        if (x->rows() != rows) throw InvalidArgument("signed_kronecker: batch mismatch");
        width *= x->cols();
    }
    SignedLogTensor out(rows, width);
    std::vector<std::size_t> idx(xs.size());
    for (std::size_t b = 0; b < rows; ++b) {
        std::fill(idx.begin(), idx.end(), 0);
        for (std::size_t o = 0; o < width; ++o) {
            double l = 0.0;
            int s = 1;
            for (std::size_t n = 0; n < xs.size() && s != 0; ++n) {
                const auto v = xs[n]->at(b, idx[n]);
                s *= v.sign;
                l += v.log_mag;
            }
            if (s != 0) out.set(b, o, {l, s});
            for (std::size_t n = xs.size(); n-- > 0;) {
                if (++idx[n] < xs[n]->cols()) break;
                idx[n] = 0;
            }
        }
    }
    return out;
}

}  // namespace pcsq
