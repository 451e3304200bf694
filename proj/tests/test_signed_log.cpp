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
#include <limits>
#include <vector>

#include "pcsq/signed_log.hpp"
#include "pcsq/random.hpp"

using namespace pcsq;

TEST(SignedLogValue, FromLinearRoundTrip) {
    for (double v : {-3.5, -1e-300, 0.0, 2.0, 1e300}) EXPECT_NEAR(SignedLogValue::from_linear(v).value(), v, 1e-12 * std::abs(v)) << v;
    EXPECT_TRUE(SignedLogValue::from_linear(0.0).is_zero());
    EXPECT_EQ(SignedLogValue::from_linear(-2.0).sign, -1);
}

TEST(SignedLogValue, AdditionCancelsExactly) {
    const auto a = SignedLogValue::from_linear(0.75), b = SignedLogValue::from_linear(-0.75);
    EXPECT_TRUE((a + b).is_zero());
    EXPECT_NEAR((a + SignedLogValue::from_linear(-0.25)).value(), 0.5, 1e-15);
    EXPECT_NEAR((SignedLogValue::from_linear(-3.0) + SignedLogValue::from_linear(1.0)).value(), -2.0, 1e-15);
}

TEST(SignedLogValue, ProductAddsLogs) {
    const auto p = SignedLogValue::from_log(700.0, -1) * SignedLogValue::from_log(700.0, -1);
    EXPECT_EQ(p.sign, 1);
    EXPECT_DOUBLE_EQ(p.log_mag, 1400.0);
    EXPECT_TRUE((p * SignedLogValue::zero()).is_zero());
}

TEST(SignedLogSumExp, MatchesLinearEvaluation) {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t S = 1 + rng.index(5), K = 1 + rng.index(6), B = 1 + rng.index(3);
        Matrix w(S, K);
        for (double &v : w.values()) v = rng.normal();
        std::vector<double> xs(B * K);
        for (double &v : xs) v = rng.uniform() < 0.2 ? 0.0 : rng.normal() * std::exp(rng.uniform(-5, 5));
        const auto y = signed_logsumexp(w.view(), SignedLogTensor::from_linear(B, K, xs));
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t s = 0; s < S; ++s) {
                double ref = 0.0, scale = 0.0;
                for (std::size_t k = 0; k < K; ++k) {
                    ref += w(s, k) * xs[b * K + k];
                    scale += std::abs(w(s, k) * xs[b * K + k]);
                }
                EXPECT_LE(std::abs(y.at(b, s).value() - ref), 1e-13 * scale);
            }
    }
}

TEST(SignedLogSumExp, ExactZeroCancellation) {
    Matrix w(1, 2, std::vector<double>{1.0, -1.0});
    const std::vector<double> xs{0.3, 0.3};
    const auto y = signed_logsumexp(w.view(), SignedLogTensor::from_linear(1, 2, xs));
    EXPECT_EQ(y.at(0, 0).sign, 0);
}

TEST(SignedLogSumExp, NoOverflowAtExtremeMagnitudes) {
    Matrix w(1, 2, std::vector<double>{2.0, -1.0});
    SignedLogTensor x(1, 2);
    x.set(0, 0, SignedLogValue::from_log(5000.0, 1));
    x.set(0, 1, SignedLogValue::from_log(5000.0, 1));
    const auto y = signed_logsumexp(w.view(), x);
    EXPECT_EQ(y.at(0, 0).sign, 1);
    EXPECT_NEAR(y.at(0, 0).log_mag, 5000.0, 1e-12);
}

TEST(SignedLogSumExp, NaNRaisesNumericError) {
    Matrix w(1, 1, std::vector<double>{1.0});
    SignedLogTensor x(1, 1);
    x.set(0, 0, {std::numeric_limits<double>::quiet_NaN(), 1});
    EXPECT_THROW(signed_logsumexp(w.view(), x), NumericError);
}

TEST(SignedLogSumExp, AllZeroRowStaysZero) {
    Matrix w(2, 3, 1.0);
    const auto y = signed_logsumexp(w.view(), SignedLogTensor(1, 3));
    EXPECT_EQ(y.at(0, 0).sign, 0);
    EXPECT_EQ(y.at(0, 1).sign, 0);
}

TEST(SignedProducts, HadamardAndKroneckerMatchLinear) {
    const std::vector<double> a{1.5, -2.0, 0.0}, b{-0.5, 3.0};
    const auto ta = SignedLogTensor::from_linear(1, 3, a), tb = SignedLogTensor::from_linear(1, 2, b);
    const SignedLogTensor *kx[] = {&ta, &tb};
    const auto k = signed_kronecker(kx);
    ASSERT_EQ(k.cols(), 6u);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(k.at(0, i * 2 + j).value(), a[i] * b[j], 1e-14);
    const SignedLogTensor *hx[] = {&ta, &ta};
    const auto h = signed_hadamard(hx);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(h.at(0, i).value(), a[i] * a[i], 1e-14);
}
