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

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "conv_kernels.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace csir {

// Eager reverse-mode tape. Each op computes its value immediately and
// records a closure that scatters the output cotangent to its inputs.
// backward() replays the closures in exact reverse recording order;
// gradients accumulate additively. One tape serves one forward/backward
// pass and is confined to a single logical thread.
template <typename T>
class gradient_tape {
  public:
    struct var {
        std::uint32_t id = 0;
    };

    var constant(tensor<T> v) { return push(std::move(v), false); }

    var parameter(const tensor<T> &v) { return push(v, true); }

    const tensor<T> &value(var v) const { return nodes_[v.id].value; }

    // zero tensor until backward() has touched the node
    const tensor<T> &grad(var v)
    {
        node &n = nodes_[v.id];
        if (n.grad.size() == 0)
            n.grad = tensor<T>(n.value.dims());
        return n.grad;
    }

    std::size_t node_count() const { return nodes_.size(); }

    // ---- primitive operations -------------------------------------------

    var mode_product(var x, var u, std::size_t mode)
    {
        tensor<T> y = csir::mode_product(value(x), value(u), mode);
        var out = push(std::move(y), needs_grad(x) || needs_grad(u));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [x, u, mode, out](gradient_tape &tp) {
                const tensor<T> &g = tp.nodes_[out.id].grad;
                if (tp.needs_grad(x))
                    tp.accumulate(x, csir::mode_product(g, transpose(tp.value(u)), mode));
                if (tp.needs_grad(u))
                {
                    tensor<T> gu = unfold(g, mode);
                    tensor<T> xu = unfold(tp.value(x), mode);
                    const std::size_t j = gu.extent(1), c = gu.extent(2), md = xu.extent(1);
                    tensor<T> du({j, md});
                    gemm(false, true, j, md, c, T(1), gu.data(), c, xu.data(), c, T(0), du.data(), md);
                    tp.accumulate(u, std::move(du));
                }
            };
        return out;
    }

    var mode_product(var x, const tensor<T> &u, std::size_t mode) { return mode_product(x, constant(u), mode); }

    var add(var a, var b) { return add_scaled(a, b, T(1)); }

    // a + alpha * b, elementwise on identical dims
    var add_scaled(var a, var b, T alpha)
    {
        const tensor<T> &va = value(a), &vb = value(b);
        if (!va.same_dims(vb))
            throw std::invalid_argument("add: dims mismatch");
        tensor<T> y(va.dims());
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] = va[i] + alpha * vb[i];
        var out = push(std::move(y), needs_grad(a) || needs_grad(b));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [a, b, alpha, out](gradient_tape &tp) {
                const tensor<T> &g = tp.nodes_[out.id].grad;
                if (tp.needs_grad(a))
                    tp.accumulate(a, g);
                if (tp.needs_grad(b))
                {
                    tensor<T> gb(g.dims());
                    for (std::size_t i = 0; i < g.size(); ++i)
                        gb[i] = alpha * g[i];
                    tp.accumulate(b, std::move(gb));
                }
            };
        return out;
    }

    var scale(var x, T c)
    {
        tensor<T> y = value(x);
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] *= c;
        var out = push(std::move(y), needs_grad(x));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [x, c, out](gradient_tape &tp) {
                const tensor<T> &g = tp.nodes_[out.id].grad;
                tensor<T> gx(g.dims());
                for (std::size_t i = 0; i < g.size(); ++i)
                    gx[i] = c * g[i];
                tp.accumulate(x, std::move(gx));
            };
        return out;
    }

    var relu(var x) { return leaky_relu(x, T(0)); }

    var leaky_relu(var x, T slope)
    {
        const tensor<T> &vx = value(x);
        tensor<T> y(vx.dims());
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] = vx[i] > T(0) ? vx[i] : slope * vx[i];
        var out = push(std::move(y), needs_grad(x));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [x, slope, out](gradient_tape &tp) {
                const tensor<T> &g = tp.nodes_[out.id].grad;
                const tensor<T> &vx = tp.value(x);
                tensor<T> gx(g.dims());
                for (std::size_t i = 0; i < g.size(); ++i)
                    gx[i] = vx[i] > T(0) ? g[i] : slope * g[i];
                tp.accumulate(x, std::move(gx));
            };
        return out;
    }

    var tanh_act(var x)
    {
        const tensor<T> &vx = value(x);
        tensor<T> y(vx.dims());
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] = std::tanh(vx[i]);
        var out = push(std::move(y), needs_grad(x));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [x, out](gradient_tape &tp) {
                const tensor<T> &g = tp.nodes_[out.id].grad;
                const tensor<T> &vy = tp.value(out);
                tensor<T> gx(g.dims());
                for (std::size_t i = 0; i < g.size(); ++i)
                    gx[i] = g[i] * (T(1) - vy[i] * vy[i]);
                tp.accumulate(x, std::move(gx));
            };
        return out;
    }

    // Batch normalization over all leading axes, channel = last mode.
    // Uses the statistics of the tensor at hand (the "batch"); gamma and
    // beta are per-channel trainables. Optionally reports the moments so a
    // caller can maintain running statistics.
    var batch_norm_train(var x, var gamma, var beta, T eps, tensor<T> *moments_mean = nullptr,
                         tensor<T> *moments_var = nullptr)
    {
        const tensor<T> &vx = value(x);
        const std::size_t c = vx.dims().back();
        const std::size_t n = vx.size() / c;
        if (value(gamma).size() != c || value(beta).size() != c)
            throw std::invalid_argument("batch_norm: gamma/beta must have one entry per channel");

        tensor<T> mean({c}), inv({c}), variance({c});
        {
            std::vector<double> s1(c, 0.0), s2(c, 0.0);
            const T *p = vx.data();
            for (std::size_t i = 0; i < n; ++i, p += c)
                for (std::size_t ch = 0; ch < c; ++ch)
                {
                    const double v = static_cast<double>(p[ch]);
                    s1[ch] += v;
                    s2[ch] += v * v;
                }
            for (std::size_t ch = 0; ch < c; ++ch)
            {
                const double m = s1[ch] / static_cast<double>(n);
                const double v = s2[ch] / static_cast<double>(n) - m * m;
                mean[ch] = static_cast<T>(m);
                variance[ch] = static_cast<T>(v < 0 ? 0 : v);
                inv[ch] = static_cast<T>(1.0 / std::sqrt((v < 0 ? 0 : v) + static_cast<double>(eps)));
            }
        }
        if (moments_mean)
            *moments_mean = mean;
        if (moments_var)
            *moments_var = variance;

        const tensor<T> &vg = value(gamma), &vb = value(beta);
        tensor<T> y(vx.dims());
        {
            const T *p = vx.data();
            T *q = y.data();
            for (std::size_t i = 0; i < n; ++i, p += c, q += c)
                for (std::size_t ch = 0; ch < c; ++ch)
                    q[ch] = vg[ch] * (p[ch] - mean[ch]) * inv[ch] + vb[ch];
        }

        var out = push(std::move(y), needs_grad(x) || needs_grad(gamma) || needs_grad(beta));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [x, gamma, beta, out, mean, inv, c, n](gradient_tape &tp) {
                const tensor<T> &g = tp.nodes_[out.id].grad;
                const tensor<T> &vx = tp.value(x);
                const tensor<T> &vg = tp.value(gamma);
                std::vector<double> s1(c, 0.0), s2(c, 0.0);
                {
                    const T *pg = g.data();
                    const T *px = vx.data();
                    for (std::size_t i = 0; i < n; ++i, pg += c, px += c)
                        for (std::size_t ch = 0; ch < c; ++ch)
                        {
                            const double xh = static_cast<double>((px[ch] - mean[ch]) * inv[ch]);
                            s1[ch] += static_cast<double>(pg[ch]);
                            s2[ch] += static_cast<double>(pg[ch]) * xh;
                        }
                }
                if (tp.needs_grad(beta))
                {
                    tensor<T> db({c});
                    for (std::size_t ch = 0; ch < c; ++ch)
                        db[ch] = static_cast<T>(s1[ch]);
                    tp.accumulate(beta, std::move(db));
                }
                if (tp.needs_grad(gamma))
                {
                    tensor<T> dg({c});
                    for (std::size_t ch = 0; ch < c; ++ch)
                        dg[ch] = static_cast<T>(s2[ch]);
                    tp.accumulate(gamma, std::move(dg));
                }
                if (tp.needs_grad(x))
                {
                    tensor<T> dx(vx.dims());
                    const T *pg = g.data();
                    const T *px = vx.data();
                    T *pd = dx.data();
                    const double dn = static_cast<double>(n);
                    for (std::size_t i = 0; i < n; ++i, pg += c, px += c, pd += c)
                        for (std::size_t ch = 0; ch < c; ++ch)
                        {
                            const double xh = static_cast<double>((px[ch] - mean[ch]) * inv[ch]);
                            const double t = static_cast<double>(pg[ch]) - s1[ch] / dn - xh * s2[ch] / dn;
                            pd[ch] = static_cast<T>(static_cast<double>(vg[ch]) * static_cast<double>(inv[ch]) * t);
                        }
                    tp.accumulate(x, std::move(dx));
                }
            };
        return out;
    }

    // Normalization against fixed moments (inference mode).
    var batch_norm_eval(var x, var gamma, var beta, const tensor<T> &mean, const tensor<T> &variance, T eps)
    {
        const tensor<T> &vx = value(x);
        const std::size_t c = vx.dims().back();
        const std::size_t n = vx.size() / c;
        tensor<T> inv({c});
        for (std::size_t ch = 0; ch < c; ++ch)
            inv[ch] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(variance[ch]) + static_cast<double>(eps)));

        const tensor<T> &vg = value(gamma), &vb = value(beta);
        tensor<T> y(vx.dims());
        {
            const T *p = vx.data();
            T *q = y.data();
            for (std::size_t i = 0; i < n; ++i, p += c, q += c)
                for (std::size_t ch = 0; ch < c; ++ch)
                    q[ch] = vg[ch] * (p[ch] - mean[ch]) * inv[ch] + vb[ch];
        }
        var out = push(std::move(y), needs_grad(x) || needs_grad(gamma) || needs_grad(beta));
        if (nodes_[out.id].requires_grad)
        {
            tensor<T> mean_c = mean;
            nodes_[out.id].backprop = [x, gamma, beta, out, mean_c, inv, c, n](gradient_tape &tp) {
                const tensor<T> &g = tp.nodes_[out.id].grad;
                const tensor<T> &vx = tp.value(x);
                const tensor<T> &vg = tp.value(gamma);
                if (tp.needs_grad(beta) || tp.needs_grad(gamma))
                {
                    tensor<T> db({c}), dg({c});
                    const T *pg = g.data();
                    const T *px = vx.data();
                    for (std::size_t i = 0; i < n; ++i, pg += c, px += c)
                        for (std::size_t ch = 0; ch < c; ++ch)
                        {
                            db[ch] += pg[ch];
                            dg[ch] += pg[ch] * (px[ch] - mean_c[ch]) * inv[ch];
                        }
                    if (tp.needs_grad(beta))
                        tp.accumulate(beta, std::move(db));
                    if (tp.needs_grad(gamma))
                        tp.accumulate(gamma, std::move(dg));
                }
                if (tp.needs_grad(x))
                {
                    tensor<T> dx(vx.dims());
                    const T *pg = g.data();
                    T *pd = dx.data();
                    for (std::size_t i = 0; i < n; ++i, pg += c, pd += c)
                        for (std::size_t ch = 0; ch < c; ++ch)
                            pd[ch] = pg[ch] * vg[ch] * inv[ch];
                    tp.accumulate(x, std::move(dx));
                }
            };
        }
        return out;
    }

    var concat(var a, var b, std::size_t mode)
    {
        tensor<T> y = csir::concat(value(a), value(b), mode);
        var out = push(std::move(y), needs_grad(a) || needs_grad(b));
        if (nodes_[out.id].requires_grad)
        {
            const std::size_t ea = value(a).extent(mode);
            const std::size_t eb = value(b).extent(mode);
            nodes_[out.id].backprop = [a, b, mode, ea, eb, out](gradient_tape &tp) {
                const tensor<T> &g = tp.nodes_[out.id].grad;
                if (tp.needs_grad(a))
                    tp.accumulate(a, csir::slice(g, mode, 0, ea));
                if (tp.needs_grad(b))
                    tp.accumulate(b, csir::slice(g, mode, ea, eb));
            };
        }
        return out;
    }

    var slice_op(var x, std::size_t mode, std::size_t start, std::size_t len)
    {
        tensor<T> y = csir::slice(value(x), mode, start, len);
        var out = push(std::move(y), needs_grad(x));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [x, mode, start, len, out](gradient_tape &tp) {
                const tensor<T> &g = tp.nodes_[out.id].grad;
                const tensor<T> &vx = tp.value(x);
                tensor<T> gx(vx.dims());
                const std::size_t nd = vx.order();
                const std::size_t pre = detail::product(vx.dims(), 0, mode - 1);
                const std::size_t post = detail::product(vx.dims(), mode, nd);
                const std::size_t in_block = vx.extent(mode) * post;
                const std::size_t out_block = len * post;
                for (std::size_t p = 0; p < pre; ++p)
                    std::memcpy(gx.data() + p * in_block + start * post, g.data() + p * out_block,
                                out_block * sizeof(T));
                tp.accumulate(x, std::move(gx));
            };
        return out;
    }

    // pads one zero row/column on each side of the spatial dims of {b,h,w,c}
    var zero_pad2d(var x)
    {
        const tensor<T> &vx = value(x);
        if (vx.order() != 4)
            throw std::invalid_argument("zero_pad2d: {b,h,w,c} expected");
        const std::size_t b = vx.extent(1), h = vx.extent(2), w = vx.extent(3), c = vx.extent(4);
        tensor<T> y({b, h + 2, w + 2, c});
        for (std::size_t ib = 0; ib < b; ++ib)
            for (std::size_t ih = 0; ih < h; ++ih)
                std::memcpy(y.data() + ((ib * (h + 2) + ih + 1) * (w + 2) + 1) * c,
                            vx.data() + (ib * h + ih) * w * c, w * c * sizeof(T));
        var out = push(std::move(y), needs_grad(x));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [x, b, h, w, c, out](gradient_tape &tp) {
                const tensor<T> &g = tp.nodes_[out.id].grad;
                tensor<T> gx({b, h, w, c});
                for (std::size_t ib = 0; ib < b; ++ib)
                    for (std::size_t ih = 0; ih < h; ++ih)
                        std::memcpy(gx.data() + (ib * h + ih) * w * c,
                                    g.data() + ((ib * (h + 2) + ih + 1) * (w + 2) + 1) * c, w * c * sizeof(T));
                tp.accumulate(x, std::move(gx));
            };
        return out;
    }

    var conv2d(var x, var w, std::size_t stride_h, std::size_t stride_w, pad2d pad)
    {
        const conv_geometry g = make_conv_geometry(value(x).dims(), value(w).dims(), stride_h, stride_w, pad);
        tensor<T> y = conv2d_forward(value(x), value(w), g);
        var out = push(std::move(y), needs_grad(x) || needs_grad(w));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [x, w, g, out](gradient_tape &tp) {
                const tensor<T> &dy = tp.nodes_[out.id].grad;
                if (tp.needs_grad(x))
                    tp.accumulate(x, conv2d_backward_input(dy, tp.value(w), g));
                if (tp.needs_grad(w))
                    tp.accumulate(w, conv2d_backward_weights(tp.value(x), dy, g));
            };
        return out;
    }

    var conv2d_transpose(var x, var w, std::size_t stride_h, std::size_t stride_w, pad2d pad)
    {
        const conv_geometry g =
            make_conv_transpose_geometry(value(x).dims(), value(w).dims(), stride_h, stride_w, pad);
        tensor<T> y = conv2d_backward_input(value(x), value(w), g);
        var out = push(std::move(y), needs_grad(x) || needs_grad(w));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [x, w, g, out](gradient_tape &tp) {
                const tensor<T> &dy = tp.nodes_[out.id].grad;
                if (tp.needs_grad(x))
                    tp.accumulate(x, conv2d_forward(dy, tp.value(w), g));
                if (tp.needs_grad(w))
                    tp.accumulate(w, conv2d_backward_weights(dy, tp.value(x), g));
            };
        return out;
    }

    // adds b[c] across the last mode
    var add_channel_bias(var x, var b)
    {
        const tensor<T> &vx = value(x);
        const tensor<T> &vb = value(b);
        const std::size_t c = vx.dims().back();
        if (vb.size() != c)
            throw std::invalid_argument("add_channel_bias: bias size mismatch");
        tensor<T> y = vx;
        {
            T *q = y.data();
            const std::size_t n = y.size() / c;
            for (std::size_t i = 0; i < n; ++i, q += c)
                for (std::size_t ch = 0; ch < c; ++ch)
                    q[ch] += vb[ch];
        }
        var out = push(std::move(y), needs_grad(x) || needs_grad(b));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [x, b, c, out](gradient_tape &tp) {
                const tensor<T> &g = tp.nodes_[out.id].grad;
                if (tp.needs_grad(x))
                    tp.accumulate(x, g);
                if (tp.needs_grad(b))
                {
                    tensor<T> db({c});
                    const T *pg = g.data();
                    const std::size_t n = g.size() / c;
                    std::vector<double> acc(c, 0.0);
                    for (std::size_t i = 0; i < n; ++i, pg += c)
                        for (std::size_t ch = 0; ch < c; ++ch)
                            acc[ch] += static_cast<double>(pg[ch]);
                    for (std::size_t ch = 0; ch < c; ++ch)
                        db[ch] = static_cast<T>(acc[ch]);
                    tp.accumulate(b, std::move(db));
                }
            };
        return out;
    }

    // inverted dropout; identity when disabled
    var dropout(var x, T rate, rng_stream &rng, bool enabled)
    {
        if (!enabled || rate <= T(0))
            return x;
        const tensor<T> &vx = value(x);
        tensor<T> mask(vx.dims());
        const T keep_scale = T(1) / (T(1) - rate);
        for (std::size_t i = 0; i < mask.size(); ++i)
            mask[i] = (rng.uniform() < static_cast<double>(rate)) ? T(0) : keep_scale;
        tensor<T> y(vx.dims());
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] = vx[i] * mask[i];
        var out = push(std::move(y), needs_grad(x));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [x, mask, out](gradient_tape &tp) {
                const tensor<T> &g = tp.nodes_[out.id].grad;
                tensor<T> gx(g.dims());
                for (std::size_t i = 0; i < g.size(); ++i)
                    gx[i] = g[i] * mask[i];
                tp.accumulate(x, std::move(gx));
            };
        return out;
    }

    // mean of squared differences, as a 1-element tensor
    var mse(var a, var b)
    {
        const tensor<T> &va = value(a), &vb = value(b);
        if (!va.same_dims(vb))
            throw std::invalid_argument("mse: dims mismatch");
        double acc = 0.0;
        for (std::size_t i = 0; i < va.size(); ++i)
        {
            const double d = static_cast<double>(va[i]) - static_cast<double>(vb[i]);
            acc += d * d;
        }
        tensor<T> y({1});
        y[0] = static_cast<T>(acc / static_cast<double>(va.size()));
        var out = push(std::move(y), needs_grad(a) || needs_grad(b));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [a, b, out](gradient_tape &tp) {
                const T g0 = tp.nodes_[out.id].grad[0];
                const tensor<T> &va = tp.value(a), &vb = tp.value(b);
                const T f = T(2) * g0 / static_cast<T>(va.size());
                if (tp.needs_grad(a))
                {
                    tensor<T> da(va.dims());
                    for (std::size_t i = 0; i < va.size(); ++i)
                        da[i] = f * (va[i] - vb[i]);
                    tp.accumulate(a, std::move(da));
                }
                if (tp.needs_grad(b))
                {
                    tensor<T> db(vb.dims());
                    for (std::size_t i = 0; i < vb.size(); ++i)
                        db[i] = f * (vb[i] - va[i]);
                    tp.accumulate(b, std::move(db));
                }
            };
        return out;
    }

    var sum_squares(var x)
    {
        const tensor<T> &vx = value(x);
        double acc = 0.0;
        for (std::size_t i = 0; i < vx.size(); ++i)
            acc += static_cast<double>(vx[i]) * static_cast<double>(vx[i]);
        tensor<T> y({1});
        y[0] = static_cast<T>(acc);
        var out = push(std::move(y), needs_grad(x));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [x, out](gradient_tape &tp) {
                const T g0 = tp.nodes_[out.id].grad[0];
                const tensor<T> &vx = tp.value(x);
                tensor<T> dx(vx.dims());
                for (std::size_t i = 0; i < vx.size(); ++i)
                    dx[i] = T(2) * g0 * vx[i];
                tp.accumulate(x, std::move(dx));
            };
        return out;
    }

    // mean sigmoid cross-entropy against a constant 0/1 label, stable form
    var sigmoid_ce_mean(var logits, T label)
    {
        const tensor<T> &vx = value(logits);
        double acc = 0.0;
        for (std::size_t i = 0; i < vx.size(); ++i)
        {
            const double x = static_cast<double>(vx[i]);
            acc += std::max(x, 0.0) - x * static_cast<double>(label) + std::log1p(std::exp(-std::abs(x)));
        }
        tensor<T> y({1});
        y[0] = static_cast<T>(acc / static_cast<double>(vx.size()));
        var out = push(std::move(y), needs_grad(logits));
        if (nodes_[out.id].requires_grad)
            nodes_[out.id].backprop = [logits, label, out](gradient_tape &tp) {
                const T g0 = tp.nodes_[out.id].grad[0];
                const tensor<T> &vx = tp.value(logits);
                tensor<T> dx(vx.dims());
                const T inv_n = T(1) / static_cast<T>(vx.size());
                for (std::size_t i = 0; i < vx.size(); ++i)
                {
                    const double s = 1.0 / (1.0 + std::exp(-static_cast<double>(vx[i])));
                    dx[i] = g0 * inv_n * (static_cast<T>(s) - label);
                }
                tp.accumulate(logits, std::move(dx));
            };
        return out;
    }

    // ---- reverse pass ----------------------------------------------------

    void backward(var root)
    {
        node &r = nodes_[root.id];
        if (r.value.size() != 1)
            throw std::invalid_argument("backward: root must be scalar");
        if (!std::isfinite(static_cast<double>(r.value[0])))
            throw numeric_error("backward: non-finite loss value");
        if (!r.requires_grad)
            return;
        if (r.grad.size() == 0)
            r.grad = tensor<T>(r.value.dims());
        r.grad[0] = T(1);
        r.touched = true;
        for (std::size_t i = nodes_.size(); i-- > 0;)
        {
            node &n = nodes_[i];
            if (n.touched && n.backprop)
                n.backprop(*this);
        }
    }

    bool needs_grad(var v) const { return nodes_[v.id].requires_grad; }

  private:
    struct node {
        tensor<T> value;
        tensor<T> grad;
        bool requires_grad = false;
        bool touched = false;
        std::function<void(gradient_tape &)> backprop;
    };

    var push(tensor<T> v, bool req)
    {
        nodes_.push_back(node{std::move(v), {}, req, false, nullptr});
        return var{static_cast<std::uint32_t>(nodes_.size() - 1)};
    }

    void accumulate(var v, tensor<T> g)
    {
        node &n = nodes_[v.id];
        if (!n.requires_grad)
            return;
        if (n.grad.size() == 0)
        {
            n.grad = std::move(g);
        }
        else
        {
            for (std::size_t i = 0; i < n.grad.size(); ++i)
                n.grad[i] += g[i];
        }
        n.touched = true;
    }

    std::vector<node> nodes_;
};

// Compares tape gradients of a scalar function against central finite
// differences, elementwise over all parameters; returns the largest
// relative error. Meant for real-64 and small parameter sets.
template <typename T, typename Builder>
double gradient_check(Builder &&build, std::vector<tensor<T>> params, T epsilon)
{
    using tape_t = gradient_tape<T>;
    auto eval = [&](const std::vector<tensor<T>> &p) -> double {
        tape_t tape;
        std::vector<typename tape_t::var> vars;
        vars.reserve(p.size());
        for (const auto &t : p)
            vars.push_back(tape.parameter(t));
        typename tape_t::var loss = build(tape, vars);
        const double v = static_cast<double>(tape.value(loss)[0]);
        if (!std::isfinite(v))
            throw numeric_error("gradient_check: non-finite function value");
        return v;
    };

    // analytic gradients
    std::vector<tensor<T>> analytic;
    {
        tape_t tape;
        std::vector<typename tape_t::var> vars;
        for (const auto &t : params)
            vars.push_back(tape.parameter(t));
        typename tape_t::var loss = build(tape, vars);
        tape.backward(loss);
        for (auto v : vars)
            analytic.push_back(tape.grad(v));
    }

    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi)
        for (std::size_t i = 0; i < params[pi].size(); ++i)
        {
            const T orig = params[pi][i];
            params[pi][i] = orig + epsilon;
            const double fp = eval(params);
            params[pi][i] = orig - epsilon;
            const double fm = eval(params);
            params[pi][i] = orig;
            const double fd = (fp - fm) / (2.0 * static_cast<double>(epsilon));
            const double an = static_cast<double>(analytic[pi][i]);
            if (!std::isfinite(fd) || !std::isfinite(an))
                throw numeric_error("gradient_check: non-finite gradient");
            const double rel = std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)});
            max_rel = std::max(max_rel, rel);
        }
    return max_rel;
}

} // namespace csir
