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
#include <random>
#include <string_view>

namespace csir {

// All randomness flows through this header so that a run is reproducible
// bit-for-bit from one master seed. std::mt19937_64 is fully specified by
// the standard; the value transformations below are our own because the
// std distributions are implementation-defined.

inline std::uint64_t splitmix64(std::uint64_t &state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(const void *bytes, std::size_t n, std::uint64_t hash = 0xcbf29ce484222325ULL)
{
    const auto *p = static_cast<const unsigned char *>(bytes);
    for (std::size_t i = 0; i < n; ++i)
    {
        hash ^= p[i];
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t hash = 0xcbf29ce484222325ULL)
{
    return fnv1a64(s.data(), s.size(), hash);
}

// Stable fan-out of one master seed into named sub-streams (stage names,
// trajectory indices, chunk ids, ...). Serial and parallel runs agree.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view name, std::uint64_t index = 0)
{
    std::uint64_t s = master ^ fnv1a64(name);
    s ^= 0x9e3779b97f4a7c15ULL * (index + 1);
    return splitmix64(s);
}

class rng_stream {
  public:
    explicit rng_stream(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t integer(std::uint64_t n) { return gen_() % n; }

    // standard normal via Box-Muller (pair cached)
    double normal()
    {
        if (have_spare_)
        {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // (0, 1], keeps log() finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace csir
