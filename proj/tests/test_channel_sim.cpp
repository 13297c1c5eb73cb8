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

#include "csir/channel_sim.hpp"
#include "csir/scene_config.hpp"

using csir::scene;
using csir::tensor;
using csir::trajectory;

namespace {

scene los_only_scene()
{
    scene sc;
    sc.scatterers.clear();
    sc.trajectories.clear();
    return sc;
}

} // namespace

TEST_CASE("broadside LOS gives equal phase on all antennas and subcarriers")
{
    scene sc = los_only_scene();
    sc.bs_position = {0, 0, 0};
    trajectory traj{{10.0, 0.0, 0.0}, {0, 0, 0}, 1, 0.01};

    auto [h, locs] = csir::synthesize_channel(sc, traj);
    REQUIRE(h.dims() == std::vector<std::size_t>{1, 64, 36});
    const std::complex<double> ref = h[0];
    CHECK(std::abs(ref) == Catch::Approx(1.0 / 10.0).epsilon(1e-12));
    for (std::size_t i = 1; i < h.size(); ++i)
        CHECK(std::abs(h[i] - ref) < 1e-12);
    CHECK(locs.at({0, 0}) == Catch::Approx(10.0));
}

TEST_CASE("reference configuration yields the expected tensor shape")
{
    scene sc;
    auto [h, locs] = csir::synthesize_channel(sc, csir::default_measurement_trajectories()[0]);
    CHECK(h.dims() == std::vector<std::size_t>{128, 64, 36});
    CHECK(locs.dims() == std::vector<std::size_t>{128, 3});
}

TEST_CASE("two-path magnitude matches the closed-form interference pattern")
{
    // single antenna removes steering, leaving the pure two-ray pattern
    scene sc;
    sc.bs_position = {0, 0, 0};
    sc.ura.rows = sc.ura.cols = 1;
    sc.scatterers = {{{30.0, 40.0, 0.0}, {5.0, 2.0}}};
    trajectory traj{{100.0, 0.0, 0.0}, {0, 0, 0}, 1, 0.01};

    auto [h, locs] = csir::synthesize_channel(sc, traj);
    REQUIRE(h.dims() == std::vector<std::size_t>{1, 64, 1});

    const double d_los = 100.0;
    const double d1 = csir::norm(csir::vec3{30.0, 40.0, 0.0} - csir::vec3{100.0, 0.0, 0.0});
    const double d2 = 50.0;
    const std::complex<double> g1(1.0 / d_los, 0.0);
    const std::complex<double> g2 = std::complex<double>(5.0, 2.0) / (d1 * d2);
    const double delta_tau = (d1 + d2 - d_los) / csir::speed_of_light;
    const double delta_f = sc.bandwidth_hz / static_cast<double>(sc.n_sub);

    for (std::size_t f = 0; f < 64; ++f)
    {
        const double phase = -2.0 * M_PI * static_cast<double>(f) * delta_f * delta_tau;
        const std::complex<double> expected = g1 + g2 * std::polar(1.0, phase);
        CHECK(std::abs(h.at({0, f, 0})) == Catch::Approx(std::abs(expected)).epsilon(1e-10));
    }
}

TEST_CASE("path-set edge cases raise numeric errors")
{
    scene sc = los_only_scene();
    sc.los_enabled = false;
    trajectory traj{{10, 0, 1.5}, {0, 0, 0}, 1, 0.01};
    CHECK_THROWS_AS(csir::synthesize_channel(sc, traj), csir::numeric_error);

    scene sc2 = los_only_scene();
    sc2.bs_position = {0, 0, 0};
    trajectory at_bs{{0, 0, 0}, {0, 0, 0}, 1, 0.01};
    CHECK_THROWS_AS(csir::synthesize_channel(sc2, at_bs), csir::numeric_error);
}

TEST_CASE("synthesis is deterministic and linear in the path gains")
{
    scene sc;
    sc.scatterers = csir::default_scatterers();
    sc.los_enabled = false; // gains scale only the scatterer terms
    trajectory traj = csir::default_measurement_trajectories()[0];
    traj.n_snapshots = 8;

    auto [h1, l1] = csir::synthesize_channel(sc, traj);
    auto [h2, l2] = csir::synthesize_channel(sc, traj);
    CHECK(h1.storage() == h2.storage());

    scene scaled = sc;
    for (auto &s : scaled.scatterers)
        s.gain *= 2.5;
    auto [h3, l3] = csir::synthesize_channel(scaled, traj);
    CHECK(csir::frobenius_norm(h3) == Catch::Approx(2.5 * csir::frobenius_norm(h1)).epsilon(1e-12));
}

TEST_CASE("add_noise hits the requested SNR")
{
    scene sc;
    auto [h, locs] = csir::synthesize_channel(sc, csir::default_measurement_trajectories()[0]);

    SECTION("infinite SNR returns the input unchanged")
    {
        auto out = csir::add_noise(h, std::numeric_limits<double>::infinity(), 1);
        CHECK(out.storage() == h.storage());
    }
    SECTION("realized SNR is within 0.2 dB of 20 dB on 128x64x36")
    {
        auto noisy = csir::add_noise(h, 20.0, 42);
        double noise_energy = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i)
            noise_energy += std::norm(noisy[i] - h[i]);
        const double realized = 10.0 * std::log10(csir::squared_frobenius_norm(h) / noise_energy);
        CHECK(realized == Catch::Approx(20.0).margin(0.2));
    }
    SECTION("same seed twice is bit-identical")
    {
        auto a = csir::add_noise(h, 20.0, 7);
        auto b = csir::add_noise(h, 20.0, 7);
        CHECK(a.storage() == b.storage());
    }
    SECTION("zero-energy input with finite SNR is rejected")
    {
        tensor<std::complex<double>> z({4, 4});
        CHECK_THROWS_AS(csir::add_noise(z, 10.0, 1), csir::numeric_error);
    }
}

TEST_CASE("study-area dataset")
{
    scene sc;
    SECTION("returns exactly n_samples pairs, all inside the box")
    {
        sc.study.n_samples = 300;
        auto ds = csir::study_area_dataset(sc, 99);
        CHECK(ds.channels.dims() == std::vector<std::size_t>{300, 64, 36});
        CHECK(ds.locations.dims() == std::vector<std::size_t>{300, 3});
        const csir::box3 rel{sc.study.area.min - sc.bs_position, sc.study.area.max - sc.bs_position};
        for (std::size_t i = 0; i < 300; ++i)
        {
            const csir::vec3 p{ds.locations.at({i, 0}), ds.locations.at({i, 1}), ds.locations.at({i, 2})};
            CHECK(rel.contains(p));
        }
    }
    SECTION("n_samples = 1")
    {
        sc.study.n_samples = 1;
        auto ds = csir::study_area_dataset(sc, 5);
        CHECK(ds.channels.dims() == std::vector<std::size_t>{1, 64, 36});
    }
    SECTION("deterministic under the master seed")
    {
        sc.study.n_samples = 50;
        auto a = csir::study_area_dataset(sc, 123);
        auto b = csir::study_area_dataset(sc, 123);
        CHECK(a.channels.storage() == b.channels.storage());
        CHECK(a.locations.storage() == b.locations.storage());
    }
}

TEST_CASE("default study area is LOS-dominant and close to frequency-flat")
{
    scene sc = csir::parse_scene(nlohmann::json::object()); // full default scene
    sc.study.n_samples = 64;
    auto ds = csir::study_area_dataset(sc, 2026);
    for (std::size_t i = 0; i < 64; ++i)
    {
        // per-snapshot magnitude profile across subcarriers
        double mean = 0.0, m2 = 0.0;
        std::vector<double> mag(sc.n_sub);
        for (std::size_t f = 0; f < sc.n_sub; ++f)
        {
            double e = 0.0;
            for (std::size_t a = 0; a < sc.n_ant(); ++a)
                e += std::norm(ds.channels.at({i, f, a}));
            mag[f] = std::sqrt(e);
            mean += mag[f];
        }
        mean /= static_cast<double>(sc.n_sub);
        for (double v : mag)
            m2 += (v - mean) * (v - mean);
        const double stddev = std::sqrt(m2 / static_cast<double>(sc.n_sub));
        CHECK(stddev / mean <= 0.1);
    }
}

TEST_CASE("scene config parsing")
{
    SECTION("defaults cover the reference setup")
    {
        scene sc = csir::parse_scene(nlohmann::json::object());
        CHECK(sc.n_ant() == 36);
        CHECK(sc.n_sub == 64);
        CHECK(sc.carrier_hz == 2.6e9);
        CHECK(sc.trajectories.size() == 3);
        CHECK(sc.trajectories[0].n_snapshots == 128);
        CHECK(sc.snr_db == 20.0);
        CHECK(sc.study.n_samples == 4492);
    }
    SECTION("unknown keys are rejected by name")
    {
        nlohmann::json j = {{"carrier_gz", 2.6e9}};
        CHECK_THROWS_WITH(csir::parse_scene(j), Catch::Matchers::ContainsSubstring("carrier_gz"));
    }
    SECTION("invariants are validated")
    {
        nlohmann::json j = {{"n_sub", 1}};
        CHECK_THROWS_AS(csir::parse_scene(j), csir::config_error);
    }
}
