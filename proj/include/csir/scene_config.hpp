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

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "channel_sim.hpp"
#include "errors.hpp"

namespace csir {

// Scene files are JSON with a documented, closed key set; unknown keys are
// hard errors because a silently ignored typo corrupts an experiment.
// Every key is optional and defaults to the reference measurement setup:
// 2.6 GHz carrier, 20 MHz over 64 subcarriers, 6x6 half-wavelength URA,
// three 128-snapshot UE trajectories at 1 m/s, 20 dB SNR, and a 10 m x 10 m
// study area.

namespace detail {

inline void expect_keys(const nlohmann::json &j, std::initializer_list<const char *> allowed,
                        const std::string &where)
{
    for (auto it = j.begin(); it != j.end(); ++it)
    {
        bool ok = false;
        for (const char *k : allowed)
            if (it.key() == k)
            {
                ok = true;
                break;
            }
        if (!ok)
            throw config_error("unknown config key '" + it.key() + "' in " + where);
    }
}

inline vec3 parse_vec3(const nlohmann::json &j, const std::string &where)
{
    if (!j.is_array() || j.size() != 3)
        throw config_error(where + " must be a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline box3 parse_box(const nlohmann::json &j, const std::string &where)
{
    expect_keys(j, {"min", "max"}, where);
    if (!j.contains("min") || !j.contains("max"))
        throw config_error(where + " needs 'min' and 'max'");
    box3 b{parse_vec3(j["min"], where + ".min"), parse_vec3(j["max"], where + ".max")};
    for (int i = 0; i < 3; ++i)
        if (b.max[i] < b.min[i])
            throw config_error(where + ": max must be >= min on every axis");
    return b;
}

} // namespace detail

inline std::vector<trajectory> default_measurement_trajectories()
{
    // three UEs crossing the study area, heading roughly towards the BS
    auto towards_bs = [](vec3 start, double speed) {
        const double d = std::sqrt(start[0] * start[0] + start[1] * start[1]);
        return vec3{-start[0] / d * speed, -start[1] / d * speed, 0.0};
    };
    std::vector<trajectory> t(3);
    t[0] = {{23.5, -3.5, 1.5}, towards_bs({23.5, -3.5, 1.5}, 1.0), 128, 0.01};
    t[1] = {{20.0, 0.5, 1.5}, towards_bs({20.0, 0.5, 1.5}, 1.0), 128, 0.01};
    t[2] = {{17.5, 3.5, 1.5}, towards_bs({17.5, 3.5, 1.5}, 1.0), 128, 0.01};
    return t;
}

inline std::vector<scatterer> default_scatterers()
{
    // sparse far-out reflectors; weak enough to keep the study area
    // LOS-dominant and close to frequency-flat
    return {
        {{30.0, 12.0, 6.0}, {1.6, 0.9}},  {{28.0, -14.0, 8.0}, {-1.2, 1.1}}, {{8.0, 18.0, 5.0}, {0.8, -1.4}},
        {{5.0, -15.0, 4.0}, {-1.0, -.7}}, {{35.0, 3.0, 10.0}, {1.3, 0.4}},   {{12.0, 9.0, 3.0}, {0.5, 1.0}},
        {{18.0, -12.0, 7.0}, {-0.9, 0.8}}, {{26.0, 8.0, 4.0}, {1.1, -0.6}},
    };
}

inline scene parse_scene(const nlohmann::json &j)
{
    detail::expect_keys(j,
                        {"bs_position", "ura", "carrier_hz", "bandwidth_hz", "n_sub", "snr_db", "los_enabled",
                         "los_disabled_regions", "scatterers", "trajectories", "study_area"},
                        "scene");
    scene sc;
    sc.trajectories = default_measurement_trajectories();
    sc.scatterers = default_scatterers();

    if (j.contains("bs_position"))
        sc.bs_position = detail::parse_vec3(j["bs_position"], "bs_position");
    if (j.contains("ura"))
    {
        const auto &u = j["ura"];
        detail::expect_keys(u, {"rows", "cols", "spacing_wl"}, "ura");
        if (u.contains("rows"))
            sc.ura.rows = u["rows"].get<std::size_t>();
        if (u.contains("cols"))
            sc.ura.cols = u["cols"].get<std::size_t>();
        if (u.contains("spacing_wl"))
            sc.ura.spacing_wl = u["spacing_wl"].get<double>();
    }
    if (j.contains("carrier_hz"))
        sc.carrier_hz = j["carrier_hz"].get<double>();
    if (j.contains("bandwidth_hz"))
        sc.bandwidth_hz = j["bandwidth_hz"].get<double>();
    if (j.contains("n_sub"))
        sc.n_sub = j["n_sub"].get<std::size_t>();
    if (j.contains("snr_db"))
    {
        if (j["snr_db"].is_string() && j["snr_db"].get<std::string>() == "inf")
            sc.snr_db = std::numeric_limits<double>::infinity();
        else
            sc.snr_db = j["snr_db"].get<double>();
    }
    if (j.contains("los_enabled"))
        sc.los_enabled = j["los_enabled"].get<bool>();
    if (j.contains("los_disabled_regions"))
    {
        sc.los_disabled_regions.clear();
        for (const auto &r : j["los_disabled_regions"])
            sc.los_disabled_regions.push_back(detail::parse_box(r, "los_disabled_regions[]"));
    }
    if (j.contains("scatterers"))
    {
        sc.scatterers.clear();
        for (const auto &s : j["scatterers"])
        {
            detail::expect_keys(s, {"position", "gain"}, "scatterers[]");
            scatterer sct;
            sct.position = detail::parse_vec3(s["position"], "scatterers[].position");
            if (s.contains("gain"))
            {
                if (!s["gain"].is_array() || s["gain"].size() != 2)
                    throw config_error("scatterers[].gain must be [re, im]");
                sct.gain = {s["gain"][0].get<double>(), s["gain"][1].get<double>()};
            }
            sc.scatterers.push_back(sct);
        }
    }
    if (j.contains("trajectories"))
    {
        sc.trajectories.clear();
        for (const auto &t : j["trajectories"])
        {
            detail::expect_keys(t, {"start", "velocity", "n_snapshots", "snapshot_interval_s"}, "trajectories[]");
            trajectory tr;
            tr.start = detail::parse_vec3(t["start"], "trajectories[].start");
            tr.velocity = detail::parse_vec3(t["velocity"], "trajectories[].velocity");
            if (t.contains("n_snapshots"))
                tr.n_snapshots = t["n_snapshots"].get<std::size_t>();
            if (t.contains("snapshot_interval_s"))
                tr.snapshot_interval_s = t["snapshot_interval_s"].get<double>();
            sc.trajectories.push_back(tr);
        }
    }
    if (j.contains("study_area"))
    {
        const auto &s = j["study_area"];
        detail::expect_keys(
            s, {"min", "max", "n_samples", "velocity_range", "snapshot_range", "snapshot_interval_s"}, "study_area");
        if (s.contains("min") || s.contains("max"))
        {
            if (!s.contains("min") || !s.contains("max"))
                throw config_error("study_area needs both 'min' and 'max'");
            box3 b{detail::parse_vec3(s["min"], "study_area.min"), detail::parse_vec3(s["max"], "study_area.max")};
            for (int i = 0; i < 3; ++i)
                if (b.max[i] < b.min[i])
                    throw config_error("study_area: max must be >= min on every axis");
            sc.study.area = b;
        }
        if (s.contains("n_samples"))
            sc.study.n_samples = s["n_samples"].get<std::size_t>();
        if (s.contains("velocity_range"))
        {
            if (!s["velocity_range"].is_array() || s["velocity_range"].size() != 2)
                throw config_error("study_area.velocity_range must be [lo, hi]");
            sc.study.velocity_min = s["velocity_range"][0].get<double>();
            sc.study.velocity_max = s["velocity_range"][1].get<double>();
        }
        if (s.contains("snapshot_range"))
        {
            if (!s["snapshot_range"].is_array() || s["snapshot_range"].size() != 2)
                throw config_error("study_area.snapshot_range must be [lo, hi]");
            sc.study.snapshots_min = s["snapshot_range"][0].get<std::size_t>();
            sc.study.snapshots_max = s["snapshot_range"][1].get<std::size_t>();
        }
        if (s.contains("snapshot_interval_s"))
            sc.study.snapshot_interval_s = s["snapshot_interval_s"].get<double>();
    }
    sc.validate();
    return sc;
}

inline scene load_scene(const std::filesystem::path &path)
{
    std::ifstream f(path);
    if (!f)
        throw io_error("cannot open config: " + path.string());
    nlohmann::json j;
    try
    {
        f >> j;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw config_error("config parse error in " + path.string() + ": " + e.what());
    }
    return parse_scene(j);
}

} // namespace csir
