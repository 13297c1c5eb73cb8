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
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace csir {

// Geometric ray-superposition channel model: a fixed BS with a uniform
// rectangular array, single-antenna UEs on straight trajectories, optional
// point scatterers with fixed complex gains. Per snapshot t, subcarrier f
// and element a:
//
//   H[t,f,a] = sum_p g_p(t) * exp(-j 2 pi f_sub(f) tau_p(t))
//                           * exp(-j 2 pi <d_a, u_p(t)> / lambda)
//
// with tau_p the excess delay over the earliest path (receiver timing sync),
// u_p the unit arrival direction at the array, d_a the element displacement
// and f_sub(f) = f * bandwidth / n_sub. LOS amplitude is 1/d, scatterer
// amplitude |g| / (d_ue-s * d_s-bs) with the configured complex gain g.

inline constexpr double speed_of_light = 299792458.0;

struct vec3 {
    double x = 0, y = 0, z = 0;
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double &operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
};

inline vec3 operator-(const vec3 &a, const vec3 &b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline vec3 operator+(const vec3 &a, const vec3 &b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline vec3 operator*(const vec3 &a, double s) { return {a.x * s, a.y * s, a.z * s}; }
inline double dot(const vec3 &a, const vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const vec3 &a) { return std::sqrt(dot(a, a)); }

struct box3 {
    vec3 min{}, max{};
    bool contains(const vec3 &p) const
    {
        for (int i = 0; i < 3; ++i)
            if (p[i] < min[i] || p[i] > max[i])
                return false;
        return true;
    }
};

struct ura_config {
    std::size_t rows = 6, cols = 6;
    double spacing_wl = 0.5;
};

struct scatterer {
    vec3 position{};
    std::complex<double> gain{1.0, 0.0};
};

struct trajectory {
    vec3 start{};
    vec3 velocity{};
    std::size_t n_snapshots = 128;
    double snapshot_interval_s = 0.01;
};

struct study_area_config {
    box3 area{{15.0, -5.0, 1.5}, {25.0, 5.0, 1.5}};
    std::size_t n_samples = 4492;
    double velocity_min = 0.1, velocity_max = 5.0;
    std::size_t snapshots_min = 74, snapshots_max = 174;
    double snapshot_interval_s = 0.01;
};

struct scene {
    vec3 bs_position{0.0, 0.0, 10.0};
    ura_config ura{};
    double carrier_hz = 2.6e9;
    double bandwidth_hz = 20e6;
    std::size_t n_sub = 64;
    double snr_db = 20.0;
    bool los_enabled = true;
    std::vector<box3> los_disabled_regions;
    std::vector<scatterer> scatterers;
    std::vector<trajectory> trajectories;
    study_area_config study{};

    std::size_t n_ant() const { return ura.rows * ura.cols; }
    double wavelength() const { return speed_of_light / carrier_hz; }

    void validate() const
    {
        if (ura.rows < 1 || ura.cols < 1)
            throw config_error("scene: ura.rows and ura.cols must be >= 1");
        if (n_sub < 2)
            throw config_error("scene: n_sub must be >= 2");
        if (carrier_hz <= 0)
            throw config_error("scene: carrier_hz must be positive");
        if (bandwidth_hz <= 0)
            throw config_error("scene: bandwidth_hz must be positive");
        if (ura.spacing_wl <= 0)
            throw config_error("scene: ura.spacing_wl must be positive");
        for (const auto &t : trajectories)
        {
            if (t.n_snapshots < 1)
                throw config_error("scene: trajectory n_snapshots must be >= 1");
            if (t.snapshot_interval_s <= 0)
                throw config_error("scene: trajectory snapshot_interval_s must be positive");
        }
        if (study.velocity_min <= 0 || study.velocity_max < study.velocity_min)
            throw config_error("scene: study velocity range invalid");
        if (study.snapshots_min < 1 || study.snapshots_max < study.snapshots_min)
            throw config_error("scene: study snapshot range invalid");
    }
};

struct measurement_set {
    tensor<std::complex<double>> h_sim; // N_sp x N_sub x N_ant
    tensor<std::complex<double>> h_mes; // same dims
    tensor<double> locations;           // N_sp x 3, relative to the BS
    double snr_db = 0.0;
};

struct study_dataset {
    tensor<std::complex<double>> channels; // n x N_sub x N_ant
    tensor<double> locations;              // n x 3, relative to the BS
};

namespace detail {

struct path_term {
    std::complex<double> amplitude;
    double delay_s;
    vec3 direction; // unit arrival direction at the array
};

inline bool los_blocked(const scene &sc, const vec3 &ue)
{
    if (!sc.los_enabled)
        return true;
    for (const auto &b : sc.los_disabled_regions)
        if (b.contains(ue))
            return true;
    return false;
}

inline std::vector<path_term> paths_at(const scene &sc, const vec3 &ue)
{
    std::vector<path_term> paths;
    const vec3 rel = ue - sc.bs_position;
    if (!los_blocked(sc, ue))
    {
        const double d = norm(rel);
        if (d <= 0.0)
            throw numeric_error("channel synthesis: UE coincides with the BS (zero-norm direction)");
        paths.push_back({{1.0 / d, 0.0}, d / speed_of_light, rel * (1.0 / d)});
    }
    for (const auto &s : sc.scatterers)
    {
        const double d1 = norm(ue - s.position);
        const vec3 sb = s.position - sc.bs_position;
        const double d2 = norm(sb);
        if (d1 <= 0.0 || d2 <= 0.0)
            throw numeric_error("channel synthesis: degenerate scatterer geometry (zero-norm direction)");
        paths.push_back({s.gain / (d1 * d2), (d1 + d2) / speed_of_light, sb * (1.0 / d2)});
    }
    if (paths.empty())
        throw numeric_error("channel synthesis: empty path set (no LOS, no scatterers)");
    return paths;
}

inline std::vector<vec3> element_offsets(const scene &sc)
{
    // URA in the y-z plane, broadside along +x, half-offset centring
    const double d = sc.ura.spacing_wl * sc.wavelength();
    std::vector<vec3> off;
    off.reserve(sc.n_ant());
    const double cy = (static_cast<double>(sc.ura.cols) - 1.0) / 2.0;
    const double cz = (static_cast<double>(sc.ura.rows) - 1.0) / 2.0;
    for (std::size_t r = 0; r < sc.ura.rows; ++r)
        for (std::size_t c = 0; c < sc.ura.cols; ++c)
            off.push_back({0.0, (static_cast<double>(c) - cy) * d, (static_cast<double>(r) - cz) * d});
    return off;
}

} // namespace detail

// Ground-truth channel for one straight trajectory plus per-snapshot UE
// locations (relative to the BS).
inline std::pair<tensor<std::complex<double>>, tensor<double>> synthesize_channel(const scene &sc,
                                                                                  const trajectory &traj)
{
    sc.validate();
    const std::size_t n_sp = traj.n_snapshots;
    const std::size_t n_sub = sc.n_sub;
    const std::size_t n_ant = sc.n_ant();
    const double delta_f = sc.bandwidth_hz / static_cast<double>(n_sub);
    const double lambda = sc.wavelength();
    const auto offsets = detail::element_offsets(sc);

    tensor<std::complex<double>> h({n_sp, n_sub, n_ant});
    tensor<double> locs({n_sp, 3});
    const double two_pi = 6.283185307179586476925286766559;

    for (std::size_t t = 0; t < n_sp; ++t)
    {
        const vec3 pos = traj.start + traj.velocity * (traj.snapshot_interval_s * static_cast<double>(t));
        const vec3 rel = pos - sc.bs_position;
        locs.at({t, 0}) = rel[0];
        locs.at({t, 1}) = rel[1];
        locs.at({t, 2}) = rel[2];

        auto paths = detail::paths_at(sc, pos);
        double tau0 = std::numeric_limits<double>::infinity();
        for (const auto &p : paths)
            tau0 = std::min(tau0, p.delay_s);

        // per-path element phases are rank-one across (f, a): precompute both factors
        for (const auto &p : paths)
        {
            std::vector<std::complex<double>> steer(n_ant);
            for (std::size_t a = 0; a < n_ant; ++a)
            {
                const double phase = -two_pi * dot(offsets[a], p.direction) / lambda;
                steer[a] = p.amplitude * std::complex<double>(std::cos(phase), std::sin(phase));
            }
            const double excess = p.delay_s - tau0;
            for (std::size_t f = 0; f < n_sub; ++f)
            {
                const double phase = -two_pi * (static_cast<double>(f) * delta_f) * excess;
                const std::complex<double> fterm(std::cos(phase), std::sin(phase));
                std::complex<double> *row = h.data() + (t * n_sub + f) * n_ant;
                for (std::size_t a = 0; a < n_ant; ++a)
                    row[a] += fterm * steer[a];
            }
        }
    }
    return {std::move(h), std::move(locs)};
}

// Adds circularly-symmetric complex Gaussian noise so that
// 10*log10(|h|_F^2 / E|N|_F^2) equals snr_db. Deterministic under rng_seed;
// +infinity passes the tensor through untouched.
inline tensor<std::complex<double>> add_noise(const tensor<std::complex<double>> &h, double snr_db,
                                              std::uint64_t rng_seed)
{
    if (std::isinf(snr_db) && snr_db > 0)
        return h;
    const double signal_energy = squared_frobenius_norm(h);
    if (signal_energy <= 0.0)
        throw numeric_error("add_noise: zero-energy input with finite SNR");
    const double noise_power = signal_energy / (static_cast<double>(h.size()) * std::pow(10.0, snr_db / 10.0));
    const double sigma = std::sqrt(noise_power / 2.0);

    rng_stream rng(rng_seed);
    tensor<std::complex<double>> out = h;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += std::complex<double>(sigma * rng.normal(), sigma * rng.normal());
    return out;
}

// Draws short random trajectories inside the study area until n_samples
// snapshots are collected. Velocities, headings, lengths and starts come
// from per-trajectory RNG streams derived from the master seed, so the
// result does not depend on scheduling.
inline study_dataset study_area_dataset(const scene &sc, std::uint64_t master_seed)
{
    sc.validate();
    const study_area_config &cfg = sc.study;
    const std::size_t n_sub = sc.n_sub;
    const std::size_t n_ant = sc.n_ant();
    if (cfg.n_samples < 1)
        throw config_error("study_area_dataset: n_samples must be >= 1");

    study_dataset ds{tensor<std::complex<double>>({cfg.n_samples, n_sub, n_ant}), tensor<double>({cfg.n_samples, 3})};

    std::size_t filled = 0;
    std::size_t traj_index = 0;
    const double two_pi = 6.283185307179586476925286766559;
    while (filled < cfg.n_samples)
    {
        rng_stream rng(derive_seed(master_seed, "study-trajectory", traj_index++));
        trajectory traj;
        traj.snapshot_interval_s = cfg.snapshot_interval_s;
        traj.n_snapshots = cfg.snapshots_min + rng.integer(cfg.snapshots_max - cfg.snapshots_min + 1);

        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt)
        {
            const double speed = rng.uniform(cfg.velocity_min, cfg.velocity_max);
            const double heading = rng.uniform(0.0, two_pi);
            traj.velocity = {speed * std::cos(heading), speed * std::sin(heading), 0.0};
            traj.start = {rng.uniform(cfg.area.min[0], cfg.area.max[0]), rng.uniform(cfg.area.min[1], cfg.area.max[1]),
                          cfg.area.min[2] == cfg.area.max[2] ? cfg.area.min[2]
                                                             : rng.uniform(cfg.area.min[2], cfg.area.max[2])};
            const vec3 end =
                traj.start + traj.velocity * (traj.snapshot_interval_s * static_cast<double>(traj.n_snapshots - 1));
            placed = cfg.area.contains(end); // straight line, convex box: endpoints suffice
        }
        if (!placed)
            throw numeric_error("study_area_dataset: could not place a trajectory inside the area");

        auto [h, locs] = synthesize_channel(sc, traj);
        const std::size_t take = std::min(traj.n_snapshots, cfg.n_samples - filled);
        std::copy(h.data(), h.data() + take * n_sub * n_ant, ds.channels.data() + filled * n_sub * n_ant);
        std::copy(locs.data(), locs.data() + take * 3, ds.locations.data() + filled * 3);
        filled += take;
    }
    return ds;
}

} // namespace csir
