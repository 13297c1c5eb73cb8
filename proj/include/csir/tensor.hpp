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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstring>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "blas.hpp"

namespace csir {

// Dense D-way array, linear layout with the last index running fastest.
// Modes are 1-based (d = 1..D) to match the usual d-mode algebra; element
// indices are 0-based. Tensors are plain values: copyable, immutable by
// convention once handed to another component.
template <typename T>
class tensor {
  public:
    tensor() = default;

    explicit tensor(std::vector<std::size_t> dims, T fill = T(0)) : dims_(std::move(dims))
    {
        check_dims();
        data_.assign(element_count(), fill);
    }

    tensor(std::vector<std::size_t> dims, std::vector<T> data) : dims_(std::move(dims)), data_(std::move(data))
    {
        check_dims();
        if (data_.size() != element_count())
            throw std::invalid_argument("tensor: data length " + std::to_string(data_.size()) +
                                        " does not match dims product " + std::to_string(element_count()));
    }

    std::size_t order() const { return dims_.size(); }
    const std::vector<std::size_t> &dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }

    // extent of the d-th mode, d in 1..D
    std::size_t extent(std::size_t mode) const
    {
        if (mode < 1 || mode > dims_.size())
            throw std::invalid_argument("tensor: mode " + std::to_string(mode) + " out of range 1.." +
                                        std::to_string(dims_.size()));
        return dims_[mode - 1];
    }

    T *data() { return data_.data(); }
    const T *data() const { return data_.data(); }
    std::vector<T> &storage() { return data_; }
    const std::vector<T> &storage() const { return data_; }

    T &operator[](std::size_t i) { return data_[i]; }
    const T &operator[](std::size_t i) const { return data_[i]; }

    // 0-based multi-index access
    T &at(std::initializer_list<std::size_t> idx) { return data_[linear_index(idx)]; }
    const T &at(std::initializer_list<std::size_t> idx) const { return data_[linear_index(idx)]; }

    std::size_t linear_index(std::initializer_list<std::size_t> idx) const
    {
        if (idx.size() != dims_.size())
            throw std::invalid_argument("tensor: index rank mismatch");
        std::size_t lin = 0;
        std::size_t d = 0;
        for (std::size_t i : idx)
        {
            if (i >= dims_[d])
                throw std::invalid_argument("tensor: index out of range on mode " + std::to_string(d + 1));
            lin = lin * dims_[d] + i;
            ++d;
        }
        return lin;
    }

    bool same_dims(const tensor &o) const { return dims_ == o.dims_; }

  private:
    void check_dims() const
    {
        if (dims_.empty())
            throw std::invalid_argument("tensor: order must be >= 1");
        for (std::size_t m : dims_)
            if (m < 1)
                throw std::invalid_argument("tensor: all extents must be >= 1");
    }

    std::size_t element_count() const
    {
        std::size_t n = 1;
        for (std::size_t m : dims_)
            n *= m;
        return n;
    }

    std::vector<std::size_t> dims_;
    std::vector<T> data_;
};

template <typename T>
using complex_tensor = tensor<std::complex<T>>;

namespace detail {

template <typename T>
struct scalar_of {
    using type = T;
};
template <typename T>
struct scalar_of<std::complex<T>> {
    using type = T;
};

inline std::size_t product(const std::vector<std::size_t> &v, std::size_t lo, std::size_t hi)
{
    std::size_t p = 1;
    for (std::size_t i = lo; i < hi; ++i)
        p *= v[i];
    return p;
}

// Column strides of the d-mode unfolding: remaining modes enumerated in the
// order (d+1, ..., D, 1, ..., d-1), the first of that list varying fastest.
inline std::vector<std::size_t> unfold_col_strides(const std::vector<std::size_t> &dims, std::size_t d0)
{
    const std::size_t nd = dims.size();
    std::vector<std::size_t> order;
    for (std::size_t m = d0 + 1; m < nd; ++m)
        order.push_back(m);
    for (std::size_t m = 0; m < d0; ++m)
        order.push_back(m);
    std::vector<std::size_t> col_stride(nd, 0);
    std::size_t s = 1;
    for (std::size_t m : order)
    {
        col_stride[m] = s;
        s *= dims[m];
    }
    return col_stride;
}

} // namespace detail

// d-mode unfolding: rows are the d-mode vectors, columns enumerate the
// remaining indices in the order (d+1, ..., D, 1, ..., d-1) with the first
// of that list varying fastest. Result is an M_d x (prod of others) matrix.
template <typename T>
tensor<T> unfold(const tensor<T> &t, std::size_t mode)
{
    const std::size_t nd = t.order();
    if (mode < 1 || mode > nd)
        throw std::invalid_argument("unfold: mode " + std::to_string(mode) + " out of range 1.." + std::to_string(nd));
    const auto &dims = t.dims();
    const std::size_t d0 = mode - 1;
    const std::size_t rows = dims[d0];
    const std::size_t cols = t.size() / rows;

    tensor<T> out({rows, cols});
    const auto col_stride = detail::unfold_col_strides(dims, d0);

    std::vector<std::size_t> idx(nd, 0);
    const T *src = t.data();
    T *dst = out.data();
    std::size_t row = 0, col = 0;
    for (std::size_t lin = 0; lin < t.size(); ++lin)
    {
        dst[row * cols + col] = src[lin];
        // odometer increment, last mode fastest (matches the linear layout)
        for (std::size_t m = nd; m-- > 0;)
        {
            if (m == d0)
            {
                if (++idx[m] < dims[m])
                {
                    ++row;
                    break;
                }
                idx[m] = 0;
                row = 0;
            }
            else
            {
                if (++idx[m] < dims[m])
                {
                    col += col_stride[m];
                    break;
                }
                col -= (dims[m] - 1) * col_stride[m];
                idx[m] = 0;
            }
        }
    }
    return out;
}

// Inverse of unfold: rebuilds a tensor with the given dims from its d-mode
// unfolding (matrix rows must equal dims[mode-1]).
template <typename T>
tensor<T> fold(const tensor<T> &mat, std::size_t mode, const std::vector<std::size_t> &dims)
{
    if (mat.order() != 2)
        throw std::invalid_argument("fold: input must be a matrix");
    const std::size_t nd = dims.size();
    if (mode < 1 || mode > nd)
        throw std::invalid_argument("fold: mode out of range");
    const std::size_t d0 = mode - 1;
    std::size_t total = 1;
    for (std::size_t m : dims)
        total *= m;
    const std::size_t rows = dims[d0];
    const std::size_t cols = total / rows;
    if (mat.extent(1) != rows || mat.extent(2) != cols)
        throw std::invalid_argument("fold: matrix shape does not match target dims");

    tensor<T> out(dims);
    const auto col_stride = detail::unfold_col_strides(dims, d0);

    std::vector<std::size_t> idx(nd, 0);
    const T *src = mat.data();
    T *dst = out.data();
    std::size_t row = 0, col = 0;
    for (std::size_t lin = 0; lin < total; ++lin)
    {
        dst[lin] = src[row * cols + col];
        for (std::size_t m = nd; m-- > 0;)
        {
            if (m == d0)
            {
                if (++idx[m] < dims[m])
                {
                    ++row;
                    break;
                }
                idx[m] = 0;
                row = 0;
            }
            else
            {
                if (++idx[m] < dims[m])
                {
                    col += col_stride[m];
                    break;
                }
                col -= (dims[m] - 1) * col_stride[m];
                idx[m] = 0;
            }
        }
    }
    return out;
}

// d-mode product with a J x M_d matrix: every d-mode vector is multiplied by
// u, the d-th extent becomes J. Fast paths keep the first/last mode cases
// free of gather copies.
template <typename T>
tensor<T> mode_product(const tensor<T> &t, const tensor<T> &u, std::size_t mode)
{
    static_assert(std::is_floating_point_v<T>, "mode_product: real tensors only");
    const std::size_t nd = t.order();
    if (mode < 1 || mode > nd)
        throw std::invalid_argument("mode_product: mode out of range");
    if (u.order() != 2)
        throw std::invalid_argument("mode_product: u must be a matrix");
    const std::size_t md = t.extent(mode);
    const std::size_t j = u.extent(1);
    if (u.extent(2) != md)
        throw std::invalid_argument("mode_product: u has " + std::to_string(u.extent(2)) + " columns, mode extent is " +
                                    std::to_string(md));

    std::vector<std::size_t> out_dims = t.dims();
    out_dims[mode - 1] = j;
    tensor<T> out(out_dims);

    const std::size_t pre = detail::product(t.dims(), 0, mode - 1);
    const std::size_t post = detail::product(t.dims(), mode, nd);

    if (mode == 1)
    {
        // out (J x post) = u (J x M1) * t (M1 x post)
        gemm(false, false, j, post, md, T(1), u.data(), md, t.data(), post, T(0), out.data(), post);
        return out;
    }
    if (mode == nd)
    {
        // out (pre x J) = t (pre x Md) * u^T
        gemm(false, true, pre, j, md, T(1), t.data(), md, u.data(), md, T(0), out.data(), j);
        return out;
    }
    // middle mode: contiguous (Md x post) slice per leading index
    for (std::size_t p = 0; p < pre; ++p)
        gemm(false, false, j, post, md, T(1), u.data(), md, t.data() + p * md * post, post, T(0),
             out.data() + p * j * post, post);
    return out;
}

// Concatenation along the d-th mode; a's slices precede b's.
template <typename T>
tensor<T> concat(const tensor<T> &a, const tensor<T> &b, std::size_t mode)
{
    const std::size_t nd = a.order();
    if (b.order() != nd)
        throw std::invalid_argument("concat: order mismatch");
    if (mode < 1 || mode > nd)
        throw std::invalid_argument("concat: mode out of range");
    for (std::size_t m = 1; m <= nd; ++m)
        if (m != mode && a.extent(m) != b.extent(m))
            throw std::invalid_argument("concat: extents differ on mode " + std::to_string(m));

    std::vector<std::size_t> out_dims = a.dims();
    out_dims[mode - 1] = a.extent(mode) + b.extent(mode);
    tensor<T> out(out_dims);

    const std::size_t pre = detail::product(a.dims(), 0, mode - 1);
    const std::size_t post = detail::product(a.dims(), mode, nd);
    const std::size_t block_a = a.extent(mode) * post;
    const std::size_t block_b = b.extent(mode) * post;
    for (std::size_t p = 0; p < pre; ++p)
    {
        std::memcpy(out.data() + p * (block_a + block_b), a.data() + p * block_a, block_a * sizeof(T));
        std::memcpy(out.data() + p * (block_a + block_b) + block_a, b.data() + p * block_b, block_b * sizeof(T));
    }
    return out;
}

// Contiguous slab [start, start+len) along the d-th mode.
template <typename T>
tensor<T> slice(const tensor<T> &t, std::size_t mode, std::size_t start, std::size_t len)
{
    const std::size_t nd = t.order();
    if (mode < 1 || mode > nd)
        throw std::invalid_argument("slice: mode out of range");
    if (len < 1 || start + len > t.extent(mode))
        throw std::invalid_argument("slice: range out of bounds");

    std::vector<std::size_t> out_dims = t.dims();
    out_dims[mode - 1] = len;
    tensor<T> out(out_dims);

    const std::size_t pre = detail::product(t.dims(), 0, mode - 1);
    const std::size_t post = detail::product(t.dims(), mode, nd);
    const std::size_t in_block = t.extent(mode) * post;
    const std::size_t out_block = len * post;
    for (std::size_t p = 0; p < pre; ++p)
        std::memcpy(out.data() + p * out_block, t.data() + p * in_block + start * post, out_block * sizeof(T));
    return out;
}

template <typename T>
double squared_frobenius_norm(const tensor<T> &t)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
    {
        if constexpr (std::is_floating_point_v<T>)
            acc += static_cast<double>(t[i]) * static_cast<double>(t[i]);
        else
        {
            const double re = static_cast<double>(t[i].real());
            const double im = static_cast<double>(t[i].imag());
            acc += re * re + im * im;
        }
    }
    return acc;
}

template <typename T>
double frobenius_norm(const tensor<T> &t)
{
    return std::sqrt(squared_frobenius_norm(t));
}

template <typename T>
tensor<T> transpose(const tensor<T> &m)
{
    if (m.order() != 2)
        throw std::invalid_argument("transpose: matrix expected");
    tensor<T> out({m.extent(2), m.extent(1)});
    for (std::size_t i = 0; i < m.extent(1); ++i)
        for (std::size_t j = 0; j < m.extent(2); ++j)
            out[j * m.extent(1) + i] = m[i * m.extent(2) + j];
    return out;
}

template <typename T>
tensor<T> identity_matrix(std::size_t n)
{
    tensor<T> out({n, n});
    for (std::size_t i = 0; i < n; ++i)
        out[i * n + i] = T(1);
    return out;
}

// Converts between scalar precisions (and complex widths) elementwise.
template <typename To, typename From>
tensor<To> convert(const tensor<From> &t)
{
    std::vector<To> data(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
    {
        if constexpr (std::is_floating_point_v<From> && std::is_floating_point_v<To>)
            data[i] = static_cast<To>(t[i]);
        else if constexpr (!std::is_floating_point_v<From> && !std::is_floating_point_v<To>)
            data[i] = To(t[i].real(), t[i].imag());
        else
            static_assert(std::is_floating_point_v<From> == std::is_floating_point_v<To>,
                          "convert: real/complex mixing not supported");
    }
    return tensor<To>(t.dims(), std::move(data));
}

} // namespace csir
