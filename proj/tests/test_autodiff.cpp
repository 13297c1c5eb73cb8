// SPDX-License-Identifier: Apache-2.0
//
// csir — CSI recreation toolkit: untrained-network channel estimation and
// conditional-GAN channel recreation over a propagation area
// Copyright (C) 2026 the csir authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <catch2/catch_amalgamated.hpp>

#include "csir/autodiff.hpp"
#include "csir/rng.hpp"

using csir::gradient_tape;
using csir::tensor;
using tape_t = gradient_tape<double>;
using var = tape_t::var;

namespace {

tensor<double> random_tensor(const std::vector<std::size_t> &dims, csir::rng_stream &rng, double lo = -1.0,
                             double hi = 1.0)
{
    tensor<double> t(dims);
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = rng.uniform(lo, hi);
    return t;
}

} // namespace

TEST_CASE("gradient check on x^2 is exact to rounding")
{
    auto build = [](tape_t &tp, const std::vector<var> &p) { return tp.sum_squares(p[0]); };
    tensor<double> x({1});
    x[0] = 3.0;

    // analytic derivative is 6; central differences on a quadratic are exact
    tape_t tape;
    var xv = tape.parameter(x);
    var loss = build(tape, {xv});
    tape.backward(loss);
    CHECK(tape.grad(xv)[0] == Catch::Approx(6.0).epsilon(1e-14));

    CHECK(csir::gradient_check(build, {x}, 1e-5) < 1e-8);
}

TEST_CASE("gradients accumulate additively when a node is reused")
{
    // f(x) = sum((x + x)^2) = 4 sum(x^2), df/dx = 8x
    tape_t tape;
    tensor<double> x({3}, {1.0, -2.0, 0.5});
    var xv = tape.parameter(x);
    var s = tape.add(xv, xv);
    var loss = tape.sum_squares(s);
    tape.backward(loss);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(tape.grad(xv)[i] == Catch::Approx(8.0 * x[i]).epsilon(1e-12));
}

TEST_CASE("primitive gradients match central finite differences")
{
    csir::rng_stream rng(101);
    const double eps = 1e-5;
    const double tol = 1e-4;

    SECTION("mode_product, both arguments")
    {
        tensor<double> x = random_tensor({3, 4, 2}, rng);
        tensor<double> u = random_tensor({5, 4}, rng);
        auto build = [](tape_t &tp, const std::vector<var> &p) {
            return tp.sum_squares(tp.mode_product(p[0], p[1], 2));
        };
        CHECK(csir::gradient_check(build, {x, u}, eps) < tol);
    }
    SECTION("mode_product against a constant matrix")
    {
        tensor<double> x = random_tensor({2, 3}, rng);
        tensor<double> u = random_tensor({4, 2}, rng);
        auto build = [&u](tape_t &tp, const std::vector<var> &p) {
            return tp.sum_squares(tp.mode_product(p[0], u, 1));
        };
        CHECK(csir::gradient_check(build, {x}, eps) < tol);
    }
    SECTION("activations")
    {
        tensor<double> x = random_tensor({4, 5}, rng);
        // keep entries away from the ReLU kink so finite differences are clean
        for (std::size_t i = 0; i < x.size(); ++i)
            if (std::abs(x[i]) < 1e-3)
                x[i] = 0.1;
        auto relu = [](tape_t &tp, const std::vector<var> &p) { return tp.sum_squares(tp.relu(p[0])); };
        auto leaky = [](tape_t &tp, const std::vector<var> &p) { return tp.sum_squares(tp.leaky_relu(p[0], 0.3)); };
        auto tanh_b = [](tape_t &tp, const std::vector<var> &p) { return tp.sum_squares(tp.tanh_act(p[0])); };
        CHECK(csir::gradient_check(relu, {x}, eps) < tol);
        CHECK(csir::gradient_check(leaky, {x}, eps) < tol);
        CHECK(csir::gradient_check(tanh_b, {x}, eps) < tol);
    }
    SECTION("add_scaled and scale")
    {
        tensor<double> a = random_tensor({3, 3}, rng);
        tensor<double> b = random_tensor({3, 3}, rng);
        auto build = [](tape_t &tp, const std::vector<var> &p) {
            return tp.sum_squares(tp.add_scaled(tp.scale(p[0], 1.7), p[1], -2.5));
        };
        CHECK(csir::gradient_check(build, {a, b}, eps) < tol);
    }
    SECTION("batch normalization, all three inputs")
    {
        tensor<double> x = random_tensor({4, 3, 2}, rng);
        tensor<double> gamma = random_tensor({2}, rng, 0.5, 1.5);
        tensor<double> beta = random_tensor({2}, rng);
        auto build = [](tape_t &tp, const std::vector<var> &p) {
            return tp.sum_squares(tp.batch_norm_train(p[0], p[1], p[2], 1e-5));
        };
        CHECK(csir::gradient_check(build, {x, gamma, beta}, eps) < tol);
    }
    SECTION("batch normalization in eval mode")
    {
        tensor<double> x = random_tensor({4, 2}, rng);
        tensor<double> gamma = random_tensor({2}, rng, 0.5, 1.5);
        tensor<double> beta = random_tensor({2}, rng);
        tensor<double> mean = random_tensor({2}, rng);
        tensor<double> variance = random_tensor({2}, rng, 0.2, 1.0);
        auto build = [&](tape_t &tp, const std::vector<var> &p) {
            return tp.sum_squares(tp.batch_norm_eval(p[0], p[1], p[2], mean, variance, 1e-5));
        };
        CHECK(csir::gradient_check(build, {x, gamma, beta}, eps) < tol);
    }
    SECTION("concat and slice")
    {
        tensor<double> a = random_tensor({2, 3, 2}, rng);
        tensor<double> b = random_tensor({2, 1, 2}, rng);
        auto build = [](tape_t &tp, const std::vector<var> &p) {
            var c = tp.concat(p[0], p[1], 2);
            return tp.sum_squares(tp.slice_op(c, 2, 1, 2));
        };
        CHECK(csir::gradient_check(build, {a, b}, eps) < tol);
    }
    SECTION("zero padding")
    {
        tensor<double> x = random_tensor({2, 3, 4, 2}, rng);
        auto build = [](tape_t &tp, const std::vector<var> &p) { return tp.sum_squares(tp.zero_pad2d(p[0])); };
        CHECK(csir::gradient_check(build, {x}, eps) < tol);
    }
    SECTION("conv2d with stride and same padding")
    {
        tensor<double> x = random_tensor({2, 4, 6, 3}, rng);
        tensor<double> w = random_tensor({2, 4, 3, 5}, rng);
        tensor<double> b = random_tensor({5}, rng);
        auto build = [](tape_t &tp, const std::vector<var> &p) {
            var y = tp.conv2d(p[0], p[1], 1, 2, csir::pad2d::same);
            return tp.sum_squares(tp.add_channel_bias(y, p[2]));
        };
        CHECK(csir::gradient_check(build, {x, w, b}, eps) < tol);
    }
    SECTION("conv2d with valid padding")
    {
        tensor<double> x = random_tensor({1, 4, 4, 2}, rng);
        tensor<double> w = random_tensor({4, 4, 2, 3}, rng);
        auto build = [](tape_t &tp, const std::vector<var> &p) {
            return tp.sum_squares(tp.conv2d(p[0], p[1], 1, 1, csir::pad2d::valid));
        };
        CHECK(csir::gradient_check(build, {x, w}, eps) < tol);
    }
    SECTION("conv2d_transpose, same and valid")
    {
        tensor<double> x = random_tensor({2, 3, 4, 3}, rng);
        tensor<double> w = random_tensor({2, 4, 5, 3}, rng); // {kh,kw,cout,cin}
        auto same_b = [](tape_t &tp, const std::vector<var> &p) {
            return tp.sum_squares(tp.conv2d_transpose(p[0], p[1], 1, 2, csir::pad2d::same));
        };
        CHECK(csir::gradient_check(same_b, {x, w}, eps) < tol);

        tensor<double> x2 = random_tensor({1, 1, 1, 4}, rng);
        tensor<double> w2 = random_tensor({4, 4, 3, 4}, rng);
        auto valid_b = [](tape_t &tp, const std::vector<var> &p) {
            return tp.sum_squares(tp.conv2d_transpose(p[0], p[1], 2, 2, csir::pad2d::valid));
        };
        CHECK(csir::gradient_check(valid_b, {x2, w2}, eps) < tol);
    }
    SECTION("dropout with a seed-stable mask")
    {
        tensor<double> x = random_tensor({6, 6}, rng);
        auto build = [](tape_t &tp, const std::vector<var> &p) {
            csir::rng_stream mask_rng(42); // same mask on every evaluation
            return tp.sum_squares(tp.dropout(p[0], 0.5, mask_rng, true));
        };
        CHECK(csir::gradient_check(build, {x}, eps) < tol);
    }
    SECTION("mse")
    {
        tensor<double> a = random_tensor({3, 4}, rng);
        tensor<double> b = random_tensor({3, 4}, rng);
        auto build = [](tape_t &tp, const std::vector<var> &p) { return tp.mse(p[0], p[1]); };
        CHECK(csir::gradient_check(build, {a, b}, eps) < tol);
    }
    SECTION("sigmoid cross-entropy from logits")
    {
        tensor<double> x = random_tensor({4, 4}, rng, -3.0, 3.0);
        auto to_one = [](tape_t &tp, const std::vector<var> &p) { return tp.sigmoid_ce_mean(p[0], 1.0); };
        auto to_zero = [](tape_t &tp, const std::vector<var> &p) { return tp.sigmoid_ce_mean(p[0], 0.0); };
        CHECK(csir::gradient_check(to_one, {x}, eps) < tol);
        CHECK(csir::gradient_check(to_zero, {x}, eps) < tol);
    }
}

TEST_CASE("composite block gradients stay within tolerance")
{
    csir::rng_stream rng(202);

    SECTION("downsample-style block: conv + bias + batchnorm + leaky relu")
    {
        tensor<double> x = random_tensor({2, 4, 6, 2}, rng);
        tensor<double> w = random_tensor({2, 4, 2, 3}, rng);
        tensor<double> b = random_tensor({3}, rng);
        tensor<double> gamma = random_tensor({3}, rng, 0.5, 1.5);
        tensor<double> beta = random_tensor({3}, rng);
        tensor<double> target = random_tensor({2, 4, 3, 3}, rng);
        auto build = [&target](tape_t &tp, const std::vector<var> &p) {
            var y = tp.conv2d(p[0], p[1], 1, 2, csir::pad2d::same);
            y = tp.add_channel_bias(y, p[2]);
            y = tp.batch_norm_train(y, p[3], p[4], 1e-5);
            y = tp.leaky_relu(y, 0.3);
            return tp.mse(y, tp.constant(target));
        };
        CHECK(csir::gradient_check(build, {x, w, b, gamma, beta}, 1e-5) < 1e-4);
    }
    SECTION("upsample-style block: transposed conv + bias + batchnorm + relu")
    {
        tensor<double> x = random_tensor({1, 2, 3, 3}, rng);
        tensor<double> w = random_tensor({2, 4, 2, 3}, rng);
        tensor<double> b = random_tensor({2}, rng);
        tensor<double> gamma = random_tensor({2}, rng, 0.5, 1.5);
        tensor<double> beta = random_tensor({2}, rng);
        tensor<double> target = random_tensor({1, 2, 6, 2}, rng);
        auto build = [&target](tape_t &tp, const std::vector<var> &p) {
            var y = tp.conv2d_transpose(p[0], p[1], 1, 2, csir::pad2d::same);
            y = tp.add_channel_bias(y, p[2]);
            y = tp.batch_norm_train(y, p[3], p[4], 1e-5);
            y = tp.relu(y);
            return tp.mse(y, tp.constant(target));
        };
        CHECK(csir::gradient_check(build, {x, w, b, gamma, beta}, 1e-5) < 1e-4);
    }
}

TEST_CASE("backward rejects non-scalar roots and non-finite losses")
{
    tape_t tape;
    var x = tape.parameter(tensor<double>({2, 2}, 1.0));
    CHECK_THROWS_AS(tape.backward(x), std::invalid_argument);

    tape_t tape2;
    tensor<double> bad({1});
    bad[0] = std::numeric_limits<double>::quiet_NaN();
    var y = tape2.parameter(bad);
    CHECK_THROWS_AS(tape2.backward(y), csir::numeric_error);
}

TEST_CASE("constants receive no gradient work")
{
    tape_t tape;
    tensor<double> c({2, 2}, 3.0);
    var cv = tape.constant(c);
    var pv = tape.parameter(tensor<double>({2, 2}, 1.0));
    var loss = tape.sum_squares(tape.add(cv, pv));
    tape.backward(loss);
    CHECK(tape.needs_grad(pv));
    CHECK_FALSE(tape.needs_grad(cv));
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(tape.grad(pv)[i] == Catch::Approx(8.0).epsilon(1e-12));
}
