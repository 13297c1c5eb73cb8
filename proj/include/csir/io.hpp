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

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace csir {

// CTEN tensor file:
//   magic "CTEN", u32 version = 1, u8 dtype (0 = real-32, 1 = complex
//   interleaved real-32, 2 = real-64), u8 ndim, 2 pad bytes, ndim
//   little-endian u64 extents, then the payload in the linear layout
//   (last index fastest), little-endian.

enum class cten_dtype : std::uint8_t { real32 = 0, complex64 = 1, real64 = 2 };

namespace detail {

template <typename T>
struct cten_traits;
template <>
struct cten_traits<float> {
    static constexpr cten_dtype dtype = cten_dtype::real32;
};
template <>
struct cten_traits<std::complex<float>> {
    static constexpr cten_dtype dtype = cten_dtype::complex64;
};
template <>
struct cten_traits<double> {
    static constexpr cten_dtype dtype = cten_dtype::real64;
};

} // namespace detail

template <typename T>
void write_cten(const std::filesystem::path &path, const tensor<T> &t)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw io_error("cannot open for writing: " + path.string());

    const char magic[4] = {'C', 'T', 'E', 'N'};
    f.write(magic, 4);
    const std::uint32_t version = 1;
    f.write(reinterpret_cast<const char *>(&version), 4);
    const std::uint8_t dtype = static_cast<std::uint8_t>(detail::cten_traits<T>::dtype);
    const std::uint8_t ndim = static_cast<std::uint8_t>(t.order());
    const std::uint8_t pad[2] = {0, 0};
    f.write(reinterpret_cast<const char *>(&dtype), 1);
    f.write(reinterpret_cast<const char *>(&ndim), 1);
    f.write(reinterpret_cast<const char *>(pad), 2);
    for (std::size_t m : t.dims())
    {
        const std::uint64_t e = m;
        f.write(reinterpret_cast<const char *>(&e), 8);
    }
    f.write(reinterpret_cast<const char *>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(T)));
    if (!f)
        throw io_error("write failed: " + path.string());
}

inline cten_dtype peek_cten_dtype(const std::filesystem::path &path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw io_error("cannot open: " + path.string());
    char header[9];
    f.read(header, 9);
    if (!f || std::memcmp(header, "CTEN", 4) != 0)
        throw io_error("not a CTEN file: " + path.string());
    return static_cast<cten_dtype>(static_cast<std::uint8_t>(header[8]));
}

template <typename T>
tensor<T> read_cten(const std::filesystem::path &path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw io_error("cannot open: " + path.string());

    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "CTEN", 4) != 0)
        throw io_error("not a CTEN file: " + path.string());
    std::uint32_t version = 0;
    f.read(reinterpret_cast<char *>(&version), 4);
    if (version != 1)
        throw io_error("unsupported CTEN version " + std::to_string(version) + ": " + path.string());
    std::uint8_t dtype = 0, ndim = 0;
    std::uint8_t pad[2];
    f.read(reinterpret_cast<char *>(&dtype), 1);
    f.read(reinterpret_cast<char *>(&ndim), 1);
    f.read(reinterpret_cast<char *>(pad), 2);
    if (!f)
        throw io_error("truncated CTEN header: " + path.string());
    if (dtype != static_cast<std::uint8_t>(detail::cten_traits<T>::dtype))
        throw io_error("CTEN dtype mismatch (file has " + std::to_string(dtype) + "): " + path.string());
    if (ndim < 1)
        throw io_error("CTEN ndim must be >= 1: " + path.string());

    std::vector<std::size_t> dims(ndim);
    std::size_t total = 1;
    for (std::size_t i = 0; i < ndim; ++i)
    {
        std::uint64_t e = 0;
        f.read(reinterpret_cast<char *>(&e), 8);
        if (!f || e < 1)
            throw io_error("bad CTEN extent: " + path.string());
        dims[i] = static_cast<std::size_t>(e);
        total *= dims[i];
    }
    std::vector<T> data(total);
    f.read(reinterpret_cast<char *>(data.data()), static_cast<std::streamsize>(total * sizeof(T)));
    if (!f)
        throw io_error("truncated CTEN payload: " + path.string());
    return tensor<T>(std::move(dims), std::move(data));
}

inline std::uint64_t file_checksum(const std::filesystem::path &path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw io_error("cannot open: " + path.string());
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    std::array<char, 65536> buf;
    while (f)
    {
        f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        hash = fnv1a64(buf.data(), static_cast<std::size_t>(f.gcount()), hash);
    }
    return hash;
}

inline std::string checksum_hex(std::uint64_t h)
{
    static const char *digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i)
    {
        s[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return s;
}

inline std::string read_text_file(const std::filesystem::path &path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw io_error("cannot open: " + path.string());
    std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return s;
}

inline void write_text_file(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw io_error("cannot open for writing: " + path.string());
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f)
        throw io_error("write failed: " + path.string());
}

} // namespace csir
