// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#include "gradcheck.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace offlang;
using namespace offlang::ad;
using offlang::testing::grad_check;
using offlang::testing::project;
using offlang::testing::random_param;
using offlang::testing::random_tensor;

namespace {

constexpr double kPrimitiveTolerance = 1e-4;

// Moves entries of p away from zero so relu kinks are not straddled by the
// finite-difference step.
void push_off_zero(Parameter<double>& p, double margin = 0.05) {
    for (auto& v : p.value.data)
        if (std::abs(v) < margin) v = v < 0 ? -margin : margin;
}

class PrimitiveGradients : public ::testing::TestWithParam<int> {
protected:
    std::mt19937_64 rng{static_cast<std::uint64_t>(GetParam()) * 7919 + 1};
};

#define EXPECT_GRADS_MATCH(params, ...)                                               \
    do {                                                                              \
        const auto r_ = grad_check(params, __VA_ARGS__);                              \
        EXPECT_LE(r_.max_rel_error, kPrimitiveTolerance) << r_.worst;                 \
        EXPECT_GT(r_.checked, 0u);                                                    \
    } while (0)

}  // namespace

TEST_P(PrimitiveGradients, MatmulMatrixMatrix) {
    auto A = random_param("A", {3, 4}, rng);
    auto B = random_param("B", {4, 2}, rng);
    const auto R = random_tensor({3, 2}, rng);
    EXPECT_GRADS_MATCH((std::vector{&A, &B}), [&](Tape<double>& t) {
        return project(matmul(t.param(A), t.param(B)), R);
    });
}

TEST_P(PrimitiveGradients, MatmulMatrixVector) {
    auto A = random_param("A", {3, 5}, rng);
    auto x = random_param("x", {5}, rng);
    const auto R = random_tensor({3}, rng);
    EXPECT_GRADS_MATCH((std::vector{&A, &x}), [&](Tape<double>& t) {
        return project(matmul(t.param(A), t.param(x)), R);
    });
}

TEST_P(PrimitiveGradients, AddSameShapeAndRowBroadcast) {
    auto A = random_param("A", {3, 4}, rng);
    auto B = random_param("B", {3, 4}, rng);
    auto b = random_param("b", {4}, rng);
    const auto R = random_tensor({3, 4}, rng);
    EXPECT_GRADS_MATCH((std::vector{&A, &B, &b}), [&](Tape<double>& t) {
        return project(add(add(t.param(A), t.param(B)), t.param(b)), R);
    });
}

TEST_P(PrimitiveGradients, SubMulScaleOneMinus) {
    auto a = random_param("a", {6}, rng);
    auto b = random_param("b", {6}, rng);
    const auto R = random_tensor({6}, rng);
    EXPECT_GRADS_MATCH((std::vector{&a, &b}), [&](Tape<double>& t) {
        auto va = t.param(a), vb = t.param(b);
        return project(mul(one_minus(sub(va, vb)), scale(vb, 0.7)), R);
    });
}

TEST_P(PrimitiveGradients, ConcatStackRowTranspose) {
    auto a = random_param("a", {3}, rng);
    auto b = random_param("b", {2}, rng);
    auto c = random_param("c", {5}, rng);
    auto M = random_param("M", {2, 3}, rng);
    const auto R = random_tensor({5, 2}, rng);
    EXPECT_GRADS_MATCH((std::vector{&a, &b, &c, &M}), [&](Tape<double>& t) {
        auto ab = concat<double>({t.param(a), t.param(b)});
        auto S = stack_rows<double>({ab, t.param(c)});  // {2,5}
        auto mixed = add(transpose(S), row(transpose(t.param(M)), 1));  // {5,2} + {2}
        return project(mixed, R);
    });
}

TEST_P(PrimitiveGradients, EmbedLookupWithRepeatedIds) {
    auto E = random_param("E", {5, 3}, rng);
    const std::vector<std::size_t> ids{4, 1, 4, 0};
    const auto R = random_tensor({4, 3}, rng);
    EXPECT_GRADS_MATCH((std::vector{&E}), [&](Tape<double>& t) { return project(embed_lookup(t.param(E), ids), R); });
}

TEST_P(PrimitiveGradients, Conv1dValid) {
    for (std::size_t width : {1u, 2u, 3u}) {
        auto x = random_param("x", {5, 3}, rng);
        auto W = random_param("W", {4, width * 3}, rng);
        auto b = random_param("b", {4}, rng);
        const auto R = random_tensor({5 - width + 1, 4}, rng);
        EXPECT_GRADS_MATCH((std::vector{&x, &W, &b}), [&](Tape<double>& t) {
            return project(conv1d(t.param(x), t.param(W), t.param(b)), R);
        });
    }
}

TEST_P(PrimitiveGradients, MaxOverTime) {
    // Column values spaced far apart relative to the difference step.
    Parameter<double> x("x", Tensor<double>({4, 3}));
    std::vector<double> base{0.0, 0.3, 0.6, 0.9};
    for (std::size_t f = 0; f < 3; ++f) {
        std::shuffle(base.begin(), base.end(), rng);
        for (std::size_t s = 0; s < 4; ++s) x.value(s, f) = base[s] + static_cast<double>(f);
    }
    const auto R = random_tensor({3}, rng);
    EXPECT_GRADS_MATCH((std::vector{&x}), [&](Tape<double>& t) { return project(max_over_time(t.param(x)), R); });
}

TEST_P(PrimitiveGradients, Activations) {
    auto x = random_param("x", {8}, rng, 1.5);
    push_off_zero(x);
    const auto R1 = random_tensor({8}, rng), R2 = random_tensor({8}, rng), R3 = random_tensor({8}, rng);
    EXPECT_GRADS_MATCH((std::vector{&x}), [&](Tape<double>& t) { return project(ad::tanh(t.param(x)), R1); });
    EXPECT_GRADS_MATCH((std::vector{&x}), [&](Tape<double>& t) { return project(relu(t.param(x)), R2); });
    EXPECT_GRADS_MATCH((std::vector{&x}), [&](Tape<double>& t) { return project(sigmoid(t.param(x)), R3); });
}

TEST_P(PrimitiveGradients, DropoutInTrainingMode) {
    auto x = random_param("x", {10}, rng);
    const auto R = random_tensor({10}, rng);
    const auto seed = rng();
    EXPECT_GRADS_MATCH((std::vector{&x}), [&](Tape<double>& t) {
        std::mt19937_64 local(seed);  // same mask on every evaluation
        return project(dropout(t.param(x), 0.4, true, local), R);
    });
}

TEST_P(PrimitiveGradients, LstmStep) {
    const std::size_t D = 3, H = 4;
    auto x = random_param("x", {D}, rng);
    auto h = random_param("h", {H}, rng);
    auto c = random_param("c", {H}, rng);
    auto W = random_param("W", {4 * H, D + H}, rng, 0.5);
    auto b = random_param("b", {4 * H}, rng, 0.5);
    const auto R = random_tensor({2, H}, rng);
    EXPECT_GRADS_MATCH((std::vector{&x, &h, &c, &W, &b}), [&](Tape<double>& t) {
        return project(lstm_step(t.param(x), t.param(h), t.param(c), t.param(W), t.param(b)), R);
    });
}

TEST_P(PrimitiveGradients, SoftmaxAndCrossEntropy) {
    auto z = random_param("z", {5}, rng, 2.0);
    const auto R = random_tensor({5}, rng);
    EXPECT_GRADS_MATCH((std::vector{&z}), [&](Tape<double>& t) { return project(softmax(t.param(z)), R); });
    const std::size_t target = rng() % 5;
    EXPECT_GRADS_MATCH((std::vector{&z}), [&](Tape<double>& t) { return softmax_xent_sparse(t.param(z), target); });
}

TEST_P(PrimitiveGradients, SumMeanAddN) {
    auto a = random_param("a", {2, 3}, rng);
    auto b = random_param("b", {2, 3}, rng);
    EXPECT_GRADS_MATCH((std::vector{&a, &b}), [&](Tape<double>& t) {
        auto va = t.param(a);
        return add_n<double>({mean(mul(va, va)), sum(t.param(b)), mean(va)});
    });
}

TEST_P(PrimitiveGradients, FloodOnBothSides) {
    auto w = random_param("w", {4}, rng);
    for (double b : {0.0, 0.05, 100.0}) {  // J > b, J > b, J < b
        EXPECT_GRADS_MATCH((std::vector{&w}), [&](Tape<double>& t) {
            auto v = t.param(w);
            return flood(add_n<double>({mean(mul(v, v)), t.constant(Tensor<double>::scalar(0.5))}), b);
        });
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, PrimitiveGradients, ::testing::Range(0, 5));

TEST(Primitives, TanhBackwardAtZeroIsOne) {
    Parameter<double> x("x", Tensor<double>::scalar(0.0));
    x.zero_grad();
    Tape<double> t;
    t.backward(sum(ad::tanh(t.param(x))));
    EXPECT_EQ(x.grad[0], 1.0);
}

TEST(Primitives, CrossEntropyOfUniformLogitsIsLn2) {
    Tape<double> t;
    auto loss = softmax_xent_sparse(t.constant(Tensor<double>::vector({0.0, 0.0})), 0);
    EXPECT_NEAR(loss.value()[0], std::log(2.0), 1e-15);
}

TEST(Primitives, CrossEntropyIsNegativeLogSoftmax) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> z(2 + rng() % 4);
        for (auto& v : z) v = g(rng);
        const std::size_t y = rng() % z.size();
        Tape<double> t;
        auto zv = t.constant(Tensor<double>::vector(z));
        const double loss = softmax_xent_sparse(zv, y).value()[0];
        const double p = softmax(zv).value()[y];
        EXPECT_GE(loss, 0.0);
        EXPECT_NEAR(loss, -std::log(p), 1e-9);
    }
}

TEST(Primitives, SoftmaxSumsToOne) {
    Tape<double> t;
    auto y = softmax(t.constant(Tensor<double>::vector({1000.0, 999.0, -5.0})));
    double s = 0;
    for (double v : y.value().data) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Primitives, LstmStepConservesShapes) {
    Tape<float> t;
    auto out = lstm_step(t.constant(Tensor<float>({7})), t.constant(Tensor<float>({5})),
                         t.constant(Tensor<float>({5})), t.constant(Tensor<float>({20, 12})),
                         t.constant(Tensor<float>({20})));
    EXPECT_EQ(out.shape(), (std::vector<std::size_t>{2, 5}));
    EXPECT_EQ(row(out, 0).shape(), (std::vector<std::size_t>{5}));
}

TEST(Primitives, ShapeMismatchesAreReported) {
    Tape<double> t;
    auto a = t.constant(Tensor<double>({2, 3}));
    auto b = t.constant(Tensor<double>({2, 3}));
    auto v4 = t.constant(Tensor<double>({4}));
    EXPECT_THROW(matmul(a, b), ShapeMismatch);
    EXPECT_THROW(matmul(a, v4), ShapeMismatch);
    EXPECT_THROW(add(a, v4), ShapeMismatch);
    EXPECT_THROW(mul(a, v4), ShapeMismatch);
    EXPECT_THROW(concat<double>({a}), ShapeMismatch);
    EXPECT_THROW(embed_lookup(a, {2}), ShapeMismatch);
    EXPECT_THROW(conv1d(a, t.constant(Tensor<double>({1, 9})), t.constant(Tensor<double>({1}))), ShapeMismatch);
    EXPECT_THROW(softmax_xent_sparse(v4, 4), ShapeMismatch);
    EXPECT_THROW(flood(a, 0.1), ShapeMismatch);
    EXPECT_THROW(Tensor<double>({2, 2}, std::vector<double>{1.0}), ShapeMismatch);
}

TEST(Dropout, EvalModeIsIdentity) {
    std::mt19937_64 rng(1);
    Tape<float> t;
    auto x = t.constant(Tensor<float>::vector({1.f, 2.f, 3.f}));
    auto y = dropout(x, 0.5, false, rng);
    EXPECT_EQ(y.value(), x.value());
}

TEST(Dropout, FixedSeedIsDeterministicAndScaled) {
    Tensor<double> ones({2000}, 1.0);
    std::mt19937_64 r1(42), r2(42);
    Tape<double> t;
    const auto a = dropout(t.constant(ones), 0.33, true, r1).value();
    const auto b = dropout(t.constant(ones), 0.33, true, r2).value();
    EXPECT_EQ(a, b);
    double mean = 0;
    for (double v : a.data) {
        EXPECT_TRUE(v == 0.0 || std::abs(v - 1.0 / 0.67) < 1e-12);
        mean += v / 2000.0;
    }
    EXPECT_NEAR(mean, 1.0, 0.05);
}

TEST(Backward, SumGivesAllOnes) {
    Parameter<double> w("w", Tensor<double>::vector({0.3, -2.0, 7.0}));
    w.zero_grad();
    Tape<double> t;
    t.backward(sum(t.param(w)));
    for (double g : w.grad.data) EXPECT_EQ(g, 1.0);
}

TEST(Backward, ReusedNodeSumsBothPaths) {
    std::mt19937_64 rng(5);
    auto w = random_param("w", {4}, rng);
    auto A = random_param("A", {4, 4}, rng);
    const auto r = grad_check({&w, &A}, [&](Tape<double>& t) {
        auto h = ad::tanh(matmul(t.param(A), t.param(w)));  // h is used twice below
        return sum(add(mul(h, h), sigmoid(h)));
    });
    EXPECT_LE(r.max_rel_error, kPrimitiveTolerance) << r.worst;
}

TEST(Backward, ConstantLossGivesZeroGradients) {
    Parameter<double> w("w", Tensor<double>::vector({1.0, 2.0}));
    w.zero_grad();
    Tape<double> t;
    t.param(w);
    t.backward(sum(t.constant(Tensor<double>::vector({3.0, 4.0}))));
    for (double g : w.grad.data) EXPECT_EQ(g, 0.0);
}

TEST(Backward, UntouchedLeafGetsZero) {
    Parameter<double> used("used", Tensor<double>::vector({1.0}));
    Parameter<double> unused("unused", Tensor<double>::vector({1.0, 1.0}));
    used.zero_grad();
    unused.zero_grad();
    Tape<double> t;
    auto u = t.param(used);
    t.param(unused);
    t.backward(sum(scale(u, 3.0)));
    EXPECT_EQ(used.grad[0], 3.0);
    EXPECT_EQ(unused.grad, Tensor<double>({2}));
}

TEST(Backward, GradientsAccumulateAcrossTapes) {
    Parameter<double> w("w", Tensor<double>::vector({1.0}));
    w.zero_grad();
    for (int k = 0; k < 3; ++k) {
        Tape<double> t;
        t.backward(sum(t.param(w)));
    }
    EXPECT_EQ(w.grad[0], 3.0);
}

TEST(Backward, FrozenParameterReceivesNothing) {
    Parameter<double> w("w", Tensor<double>::vector({1.0}));
    w.trainable = false;
    w.zero_grad();
    Tape<double> t;
    auto loss = sum(t.param(w));
    t.backward(loss);
    EXPECT_EQ(w.grad[0], 0.0);
}

TEST(Backward, RejectsNonScalarLoss) {
    Parameter<double> w("w", Tensor<double>::vector({1.0, 2.0}));
    Tape<double> t;
    EXPECT_THROW(t.backward(scale(t.param(w), 2.0)), NonScalarLoss);
}

TEST(Backward, RejectsNonFiniteLoss) {
    Parameter<double> w("w", Tensor<double>::vector({NAN}));
    Tape<double> t;
    EXPECT_THROW(t.backward(sum(t.param(w))), NonFiniteValue);
}

TEST(Flood, ValueExamples) {
    EXPECT_DOUBLE_EQ(flood_value(0.5, 0.1), 0.5);
    EXPECT_DOUBLE_EQ(flood_value(0.05, 0.1), 0.15);
    for (double J : {0.0, 0.3, 2.0}) EXPECT_EQ(flood_value(J, 0.0), J);
    Tape<double> t;
    EXPECT_THROW(flood(t.constant(Tensor<double>::scalar(1.0)), -0.1), NegativeFloodLevel);
}

TEST(Flood, SubgradientAtLevelIsPlusOne) {
    Parameter<double> J("J", Tensor<double>::scalar(0.25));
    J.zero_grad();
    Tape<double> t;
    t.backward(flood(t.param(J), 0.25));
    EXPECT_EQ(J.grad[0], 1.0);
}

TEST(AdadeltaRule, ZeroGradientLeavesParametersAndDecaysState) {
    Tensor<double> x = Tensor<double>::vector({1.0, -2.0});
    const Tensor<double> g({2});
    AdadeltaState<double> s{Tensor<double>::vector({0.4, 0.4}), Tensor<double>::vector({0.2, 0.2})};
    const AdadeltaOptions opts;
    for (int k = 0; k < 50; ++k) {
        const auto prev = s;
        adadelta_step(x, g, s, opts);
        EXPECT_EQ(x, Tensor<double>::vector({1.0, -2.0}));
        for (std::size_t i = 0; i < 2; ++i) {
            EXPECT_LT(s.sq_grad[i], prev.sq_grad[i]);
            EXPECT_LT(s.sq_update[i], prev.sq_update[i]);
        }
    }
}

TEST(AdadeltaRule, ConstantGradientMovesAgainstItsSign) {
    Tensor<double> x = Tensor<double>::vector({0.0, 0.0});
    const Tensor<double> g = Tensor<double>::vector({2.0, -0.5});
    AdadeltaState<double> s;
    for (int k = 0; k < 200; ++k) {
        const auto prev = x;
        adadelta_step(x, g, s, {});
        EXPECT_LT(x[0], prev[0]);
        EXPECT_GT(x[1], prev[1]);
    }
}

TEST(AdadeltaRule, QuadraticMatchesReferenceRecurrenceAndDecreases) {
    // Reference recurrence for J(theta) = theta^2 written out longhand.
    const double rho = 0.95, eps = 1e-6;
    double theta_ref = 1.0, eg2 = 0.0, edx2 = 0.0;
    std::vector<double> ref;
    for (int k = 0; k < 100; ++k) {
        const double grad = 2.0 * theta_ref;
        eg2 = rho * eg2 + (1 - rho) * grad * grad;
        const double dx = -std::sqrt(edx2 + eps) / std::sqrt(eg2 + eps) * grad;
        edx2 = rho * edx2 + (1 - rho) * dx * dx;
        theta_ref += dx;
        ref.push_back(theta_ref);
    }

    Parameter<double> theta("theta", Tensor<double>::scalar(1.0));
    Adadelta<double> opt;
    double prev_J = 1.0;
    for (int k = 0; k < 100; ++k) {
        theta.zero_grad();
        Tape<double> t;
        auto th = t.param(theta);
        t.backward(sum(mul(th, th)));
        opt.step({&theta});
        EXPECT_DOUBLE_EQ(theta.value[0], ref[static_cast<std::size_t>(k)]);
        const double J = theta.value[0] * theta.value[0];
        EXPECT_LT(J, prev_J) << "step " << k;
        prev_J = J;
    }
}

TEST(AdadeltaRule, FrozenRowsAndShapeChecks) {
    Parameter<double> E("E", Tensor<double>({3, 2}, 1.0));
    E.frozen_rows = {0};
    E.grad = Tensor<double>({3, 2}, 1.0);
    Adadelta<double> opt;
    opt.step({&E});
    EXPECT_EQ(E.value(0, 0), 1.0);
    EXPECT_EQ(E.value(0, 1), 1.0);
    EXPECT_LT(E.value(1, 0), 1.0);

    Tensor<double> x({2});
    AdadeltaState<double> s;
    EXPECT_THROW(adadelta_step(x, Tensor<double>({3}), s, {}), ShapeMismatch);
    EXPECT_THROW(Adadelta<double>(AdadeltaOptions{1.0, 1e-6, 1.0}), ConfigError);
}

TEST(Precision, FloatTapeRunsTheSameGraph) {
    Parameter<float> A("A", Tensor<float>({2, 2}, std::vector<float>{1, 2, 3, 4}));
    A.zero_grad();
    Tape<float> t;
    auto y = matmul(t.param(A), t.constant(Tensor<float>::vector({1.f, -1.f})));
    t.backward(sum(y));
    EXPECT_EQ(y.value(), Tensor<float>::vector({-1.f, -1.f}));
    EXPECT_EQ(A.grad, Tensor<float>({2, 2}, std::vector<float>{1, -1, 1, -1}));
}
