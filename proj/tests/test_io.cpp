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

#include "csir/io.hpp"
#include "csir/rng.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using csir::tensor;
namespace fs = std::filesystem;

namespace {

struct temp_dir {
    fs::path path;
    temp_dir()
    {
        path = fs::temp_directory_path() / ("csir_io_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~temp_dir() { std::error_code ec; fs::remove_all(path, ec); }
};

} // namespace

TEST_CASE("CTEN files round-trip for every dtype")
{
    temp_dir dir;
    csir::rng_stream rng(77);

    SECTION("real-32")
    {
        tensor<float> t({3, 2, 5});
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = static_cast<float>(rng.uniform(-2.0, 2.0));
        const fs::path p = dir.path / "a.cten";
        csir::write_cten(p, t);
        CHECK(csir::peek_cten_dtype(p) == csir::cten_dtype::real32);
        tensor<float> back = csir::read_cten<float>(p);
        CHECK(back.dims() == t.dims());
        CHECK(back.storage() == t.storage());
    }
    SECTION("complex interleaved real-32")
    {
        tensor<std::complex<float>> t({2, 4});
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = {static_cast<float>(rng.uniform(-1, 1)), static_cast<float>(rng.uniform(-1, 1))};
        const fs::path p = dir.path / "b.cten";
        csir::write_cten(p, t);
        CHECK(csir::peek_cten_dtype(p) == csir::cten_dtype::complex64);
        auto back = csir::read_cten<std::complex<float>>(p);
        CHECK(back.dims() == t.dims());
        CHECK(back.storage() == t.storage());
    }
    SECTION("real-64")
    {
        tensor<double> t({7});
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = rng.uniform(-3.0, 3.0);
        const fs::path p = dir.path / "c.cten";
        csir::write_cten(p, t);
        tensor<double> back = csir::read_cten<double>(p);
        CHECK(back.storage() == t.storage());
    }
}

TEST_CASE("CTEN header layout is bit-exact")
{
    temp_dir dir;
    tensor<float> t({2, 3}, {0, 1, 2, 3, 4, 5});
    const fs::path p = dir.path / "h.cten";
    csir::write_cten(p, t);

    std::ifstream f(p, std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    REQUIRE(bytes.size() == 4 + 4 + 1 + 1 + 2 + 2 * 8 + 6 * 4);
    CHECK(bytes[0] == 'C');
    CHECK(bytes[1] == 'T');
    CHECK(bytes[2] == 'E');
    CHECK(bytes[3] == 'N');
    CHECK(bytes[4] == 1); // version u32 LE
    CHECK(bytes[5] == 0);
    CHECK(bytes[6] == 0);
    CHECK(bytes[7] == 0);
    CHECK(bytes[8] == 0); // dtype real-32
    CHECK(bytes[9] == 2); // ndim
    CHECK(bytes[10] == 0);
    CHECK(bytes[11] == 0);
    CHECK(bytes[12] == 2); // extent 2, u64 LE
    CHECK(bytes[20] == 3); // extent 3
}

TEST_CASE("CTEN error paths")
{
    temp_dir dir;
    SECTION("missing file")
    {
        CHECK_THROWS_AS(csir::read_cten<float>(dir.path / "nope.cten"), csir::io_error);
    }
    SECTION("bad magic")
    {
        const fs::path p = dir.path / "bad.cten";
        csir::write_text_file(p, "NOPE....");
        CHECK_THROWS_AS(csir::read_cten<float>(p), csir::io_error);
    }
    SECTION("dtype mismatch")
    {
        const fs::path p = dir.path / "f32.cten";
        csir::write_cten(p, tensor<float>({2}, {1, 2}));
        CHECK_THROWS_AS(csir::read_cten<double>(p), csir::io_error);
    }
    SECTION("truncated payload")
    {
        const fs::path p = dir.path / "t.cten";
        csir::write_cten(p, tensor<float>({4}, {1, 2, 3, 4}));
        auto bytes = csir::read_text_file(p);
        csir::write_text_file(p, bytes.substr(0, bytes.size() - 6));
        CHECK_THROWS_AS(csir::read_cten<float>(p), csir::io_error);
    }
}

TEST_CASE("checksums are stable and content-sensitive")
{
    temp_dir dir;
    const fs::path p1 = dir.path / "one.bin";
    const fs::path p2 = dir.path / "two.bin";
    csir::write_text_file(p1, "some payload 123");
    csir::write_text_file(p2, "some payload 124");
    CHECK(csir::file_checksum(p1) == csir::file_checksum(p1));
    CHECK(csir::file_checksum(p1) != csir::file_checksum(p2));
    CHECK(csir::checksum_hex(0x1234abcdULL) == "000000001234abcd");
}

TEST_CASE("seed derivation is stable and stream-separating")
{
    const std::uint64_t master = 20260810;
    CHECK(csir::derive_seed(master, "simulate") == csir::derive_seed(master, "simulate"));
    CHECK(csir::derive_seed(master, "simulate") != csir::derive_seed(master, "fit-unn"));
    CHECK(csir::derive_seed(master, "traj", 0) != csir::derive_seed(master, "traj", 1));

    csir::rng_stream a(csir::derive_seed(master, "x"));
    csir::rng_stream b(csir::derive_seed(master, "x"));
    for (int i = 0; i < 16; ++i)
        CHECK(a.raw() == b.raw());
}
