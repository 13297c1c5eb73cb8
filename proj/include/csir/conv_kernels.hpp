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

#include <cstring>
#include <vector>

#include "tensor.hpp"

namespace csir {

// 2-D convolution kernels on channels-last tensors {batch, h, w, c}.
// Weights are {kh, kw, c_in, c_out}; viewed row-major this is already the
// (kh*kw*c_in) x c_out matrix the im2col GEMM needs. Padding follows the
// usual conventions: 'same' keeps ceil(in/stride), 'valid' takes only fully
// covered windows.

enum class pad2d { same, valid };

struct conv_geometry {
    std::size_t batch, in_h, in_w, in_c;
    std::size_t kh, kw, out_c;
    std::size_t stride_h, stride_w;
    std::size_t pad_top, pad_left;
    std::size_t out_h, out_w;
};

inline conv_geometry make_conv_geometry(const std::vector<std::size_t> &x_dims, const std::vector<std::size_t> &w_dims,
                                        std::size_t stride_h, std::size_t stride_w, pad2d pad)
{
    if (x_dims.size() != 4 || w_dims.size() != 4)
        throw std::invalid_argument("conv2d: input must be {b,h,w,c}, weights {kh,kw,cin,cout}");
    if (x_dims[3] != w_dims[2])
        throw std::invalid_argument("conv2d: input has " + std::to_string(x_dims[3]) + " channels, weights expect " +
                                    std::to_string(w_dims[2]));
    if (stride_h < 1 || stride_w < 1)
        throw std::invalid_argument("conv2d: strides must be >= 1");

    conv_geometry g{};
    g.batch = x_dims[0];
    g.in_h = x_dims[1];
    g.in_w = x_dims[2];
    g.in_c = x_dims[3];
    g.kh = w_dims[0];
    g.kw = w_dims[1];
    g.out_c = w_dims[3];
    g.stride_h = stride_h;
    g.stride_w = stride_w;

    if (pad == pad2d::same)
    {
        g.out_h = (g.in_h + stride_h - 1) / stride_h;
        g.out_w = (g.in_w + stride_w - 1) / stride_w;
        const std::size_t need_h = (g.out_h - 1) * stride_h + g.kh;
        const std::size_t need_w = (g.out_w - 1) * stride_w + g.kw;
        g.pad_top = need_h > g.in_h ? (need_h - g.in_h) / 2 : 0;
        g.pad_left = need_w > g.in_w ? (need_w - g.in_w) / 2 : 0;
    }
    else
    {
        if (g.in_h < g.kh || g.in_w < g.kw)
            throw std::invalid_argument("conv2d: valid padding needs input >= kernel");
        g.out_h = (g.in_h - g.kh) / stride_h + 1;
        g.out_w = (g.in_w - g.kw) / stride_w + 1;
        g.pad_top = g.pad_left = 0;
    }
    return g;
}

namespace detail {

// Gathers the (b, oh, ow) patch rows; out-of-range taps stay zero.
template <typename T>
void im2col(const tensor<T> &x, const conv_geometry &g, std::vector<T> &col)
{
    const std::size_t k = g.kh * g.kw * g.in_c;
    col.assign(g.batch * g.out_h * g.out_w * k, T(0));
    const T *src = x.data();
    const std::size_t row_stride = g.in_w * g.in_c;
    std::size_t r = 0;
    for (std::size_t b = 0; b < g.batch; ++b)
    {
        const T *xb = src + b * g.in_h * row_stride;
        for (std::size_t oh = 0; oh < g.out_h; ++oh)
            for (std::size_t ow = 0; ow < g.out_w; ++ow, ++r)
            {
                T *dst = col.data() + r * k;
                for (std::size_t dh = 0; dh < g.kh; ++dh)
                {
                    const std::ptrdiff_t ih =
                        static_cast<std::ptrdiff_t>(oh * g.stride_h + dh) - static_cast<std::ptrdiff_t>(g.pad_top);
                    if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.in_h))
                        continue;
                    for (std::size_t dw = 0; dw < g.kw; ++dw)
                    {
                        const std::ptrdiff_t iw =
                            static_cast<std::ptrdiff_t>(ow * g.stride_w + dw) - static_cast<std::ptrdiff_t>(g.pad_left);
                        if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.in_w))
                            continue;
                        std::memcpy(dst + (dh * g.kw + dw) * g.in_c,
                                    xb + static_cast<std::size_t>(ih) * row_stride +
                                        static_cast<std::size_t>(iw) * g.in_c,
                                    g.in_c * sizeof(T));
                    }
                }
            }
    }
}

// Adjoint of im2col: scatter-adds patch rows back into the input layout.
template <typename T>
void col2im(const std::vector<T> &col, const conv_geometry &g, tensor<T> &x)
{
    const std::size_t k = g.kh * g.kw * g.in_c;
    T *dst_base = x.data();
    const std::size_t row_stride = g.in_w * g.in_c;
    std::size_t r = 0;
    for (std::size_t b = 0; b < g.batch; ++b)
    {
        T *xb = dst_base + b * g.in_h * row_stride;
        for (std::size_t oh = 0; oh < g.out_h; ++oh)
            for (std::size_t ow = 0; ow < g.out_w; ++ow, ++r)
            {
                const T *src = col.data() + r * k;
                for (std::size_t dh = 0; dh < g.kh; ++dh)
                {
                    const std::ptrdiff_t ih =
                        static_cast<std::ptrdiff_t>(oh * g.stride_h + dh) - static_cast<std::ptrdiff_t>(g.pad_top);
                    if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.in_h))
                        continue;
                    for (std::size_t dw = 0; dw < g.kw; ++dw)
                    {
                        const std::ptrdiff_t iw =
                            static_cast<std::ptrdiff_t>(ow * g.stride_w + dw) - static_cast<std::ptrdiff_t>(g.pad_left);
                        if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.in_w))
                            continue;
                        T *dst = xb + static_cast<std::size_t>(ih) * row_stride + static_cast<std::size_t>(iw) * g.in_c;
                        const T *s = src + (dh * g.kw + dw) * g.in_c;
                        for (std::size_t c = 0; c < g.in_c; ++c)
                            dst[c] += s[c];
                    }
                }
            }
    }
}

} // namespace detail

template <typename T>
tensor<T> conv2d_forward(const tensor<T> &x, const tensor<T> &w, const conv_geometry &g)
{
    std::vector<T> col;
    detail::im2col(x, g, col);
    const std::size_t rows = g.batch * g.out_h * g.out_w;
    const std::size_t k = g.kh * g.kw * g.in_c;
    tensor<T> y({g.batch, g.out_h, g.out_w, g.out_c});
    gemm(false, false, rows, g.out_c, k, T(1), col.data(), k, w.data(), g.out_c, T(0), y.data(), g.out_c);
    return y;
}

template <typename T>
tensor<T> conv2d_backward_input(const tensor<T> &dy, const tensor<T> &w, const conv_geometry &g)
{
    const std::size_t rows = g.batch * g.out_h * g.out_w;
    const std::size_t k = g.kh * g.kw * g.in_c;
    std::vector<T> dcol(rows * k);
    gemm(false, true, rows, k, g.out_c, T(1), dy.data(), g.out_c, w.data(), g.out_c, T(0), dcol.data(), k);
    tensor<T> dx({g.batch, g.in_h, g.in_w, g.in_c});
    detail::col2im(dcol, g, dx);
    return dx;
}

template <typename T>
tensor<T> conv2d_backward_weights(const tensor<T> &x, const tensor<T> &dy, const conv_geometry &g)
{
    std::vector<T> col;
    detail::im2col(x, g, col);
    const std::size_t rows = g.batch * g.out_h * g.out_w;
    const std::size_t k = g.kh * g.kw * g.in_c;
    tensor<T> dw({g.kh, g.kw, g.in_c, g.out_c});
    gemm(true, false, k, g.out_c, rows, T(1), col.data(), k, dy.data(), g.out_c, T(0), dw.data(), g.out_c);
    return dw;
}

// Transposed convolution = adjoint of a conv running the opposite way.
// Weights stay in conv orientation {kh, kw, out_c, in_c}: out_c is what the
// transposed layer produces. 'same' gives in*stride spatial size, 'valid'
// gives (in-1)*stride + kernel.
inline conv_geometry make_conv_transpose_geometry(const std::vector<std::size_t> &x_dims,
                                                  const std::vector<std::size_t> &w_dims, std::size_t stride_h,
                                                  std::size_t stride_w, pad2d pad)
{
    if (x_dims.size() != 4 || w_dims.size() != 4)
        throw std::invalid_argument("conv2d_transpose: input must be {b,h,w,c}, weights {kh,kw,cout,cin}");
    if (x_dims[3] != w_dims[3])
        throw std::invalid_argument("conv2d_transpose: input has " + std::to_string(x_dims[3]) +
                                    " channels, weights expect " + std::to_string(w_dims[3]));
    std::size_t out_h, out_w;
    if (pad == pad2d::same)
    {
        out_h = x_dims[1] * stride_h;
        out_w = x_dims[2] * stride_w;
    }
    else
    {
        out_h = (x_dims[1] - 1) * stride_h + w_dims[0];
        out_w = (x_dims[2] - 1) * stride_w + w_dims[1];
    }
    // geometry of the adjoint conv: {b, out_h, out_w, cout} -> {b, in_h, in_w, cin}
    conv_geometry g = make_conv_geometry({x_dims[0], out_h, out_w, w_dims[2]},
                                         {w_dims[0], w_dims[1], w_dims[2], w_dims[3]}, stride_h, stride_w, pad);
    if (g.out_h != x_dims[1] || g.out_w != x_dims[2])
        throw std::invalid_argument("conv2d_transpose: shape arithmetic failed to invert");
    return g;
}

} // namespace csir
