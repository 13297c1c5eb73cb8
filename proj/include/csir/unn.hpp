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

#include <string>
#include <vector>

#include "autodiff.hpp"
#include "errors.hpp"
#include "optim.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace csir {

// Underparameterized decoder fitted per measurement chunk: a fixed random
// seed tensor is pushed through L layers of 1x1 convolutions (3-mode
// products), fixed bilinear upsampling on the snapshot and subcarrier modes,
// ReLU + batch normalization, and a final TanH. Only the convolution
// weights and the per-filter normalization pairs are trained, against the
// MSE to the preprocessed measurement.

struct unn_config {
    std::size_t n_layers = 6;        // L: inner layers are 1..L-2
    std::size_t inner_filters = 64;  // k_0 .. k_{L-2}
    std::size_t preout_filters = 64; // k_{L-1}
    std::size_t output_filters = 72; // k_L = 2 * N_ant
    double seed_range = 0.15;        // seed entries ~ U(-a, +a)
    std::size_t chunk_snapshots = 64;
    std::size_t n_sub = 64;
    double scale_factor = 1.0; // per-snapshot Frobenius norm after preprocessing
    std::size_t iterations = 25000;
    double learning_rate = 5e-3;

    std::size_t upsample_factor() const { return std::size_t(1) << (n_layers - 2); }
    std::size_t seed_rows() const { return chunk_snapshots / upsample_factor(); }
    std::size_t seed_cols() const { return n_sub / upsample_factor(); }

    // k_0 .. k_L
    std::vector<std::size_t> filters() const
    {
        std::vector<std::size_t> k(n_layers + 1, inner_filters);
        k[n_layers - 1] = preout_filters;
        k[n_layers] = output_filters;
        return k;
    }

    void validate() const
    {
        if (n_layers < 3)
            throw config_error("unn: n_layers must be >= 3");
        const std::size_t up = upsample_factor();
        if (chunk_snapshots % up != 0 || n_sub % up != 0)
            throw config_error("unn: chunk_snapshots and n_sub must be divisible by 2^(L-2)");
        if (output_filters % 2 != 0)
            throw config_error("unn: output_filters must be even (re/im stacking)");
        if (seed_range <= 0 || scale_factor <= 0 || learning_rate <= 0)
            throw config_error("unn: seed_range, scale_factor and learning_rate must be positive");
    }
};

inline std::size_t param_count(const unn_config &cfg)
{
    const auto k = cfg.filters();
    std::size_t n = 0;
    for (std::size_t l = 1; l <= cfg.n_layers; ++l)
        n += k[l - 1] * k[l];
    for (std::size_t l = 1; l + 1 <= cfg.n_layers; ++l)
        n += 2 * k[l];
    return n;
}

struct compression_report {
    double complex_ratio; // params / complex channel coefficients
    double real_ratio;    // params / real scalars (twice the denominator)
};

inline compression_report compression_ratio(const unn_config &cfg, std::size_t n_sp, std::size_t n_sub,
                                            std::size_t n_ant)
{
    const double p = static_cast<double>(param_count(cfg));
    const double coeffs = static_cast<double>(n_sp) * static_cast<double>(n_sub) * static_cast<double>(n_ant);
    return {p / coeffs, p / (2.0 * coeffs)};
}

// Clamped-edge bilinear upsampler: row 2i = e_i, row 2i+1 = (e_i + e_{i+1})/2,
// last row repeats e_{n-1}. Every row sums to one.
template <typename T>
tensor<T> bilinear_upsample_matrix(std::size_t n)
{
    if (n < 1)
        throw std::invalid_argument("bilinear_upsample_matrix: n must be >= 1");
    tensor<T> m({2 * n, n});
    for (std::size_t i = 0; i < n; ++i)
    {
        m.at({2 * i, i}) = T(1);
        if (i + 1 < n)
        {
            m.at({2 * i + 1, i}) = T(0.5);
            m.at({2 * i + 1, i + 1}) = T(0.5);
        }
        else
        {
            m.at({2 * i + 1, i}) = T(1);
        }
    }
    return m;
}

// ---- measurement preprocessing -------------------------------------------

template <typename T>
struct preprocessed_measurement {
    tensor<T> data;                     // N_sp x N_sub x 2 N_ant
    std::vector<double> snapshot_norms; // per-snapshot Frobenius norms of the input
    double scale = 1.0;
};

// Per-snapshot normalization to the scale factor, then re/im stacking along
// the antenna mode: real parts in slots 0..N_ant-1, imaginary after.
template <typename T>
preprocessed_measurement<T> preprocess_measurement(const tensor<std::complex<double>> &h, double scale_factor)
{
    if (h.order() != 3)
        throw std::invalid_argument("preprocess_measurement: {n_sp, n_sub, n_ant} expected");
    const std::size_t n_sp = h.extent(1), n_sub = h.extent(2), n_ant = h.extent(3);
    preprocessed_measurement<T> out{tensor<T>({n_sp, n_sub, 2 * n_ant}), std::vector<double>(n_sp), scale_factor};
    for (std::size_t t = 0; t < n_sp; ++t)
    {
        double energy = 0.0;
        const std::complex<double> *src = h.data() + t * n_sub * n_ant;
        for (std::size_t i = 0; i < n_sub * n_ant; ++i)
            energy += std::norm(src[i]);
        if (energy <= 0.0)
            throw numeric_error("preprocess_measurement: zero-energy snapshot " + std::to_string(t));
        const double nrm = std::sqrt(energy);
        out.snapshot_norms[t] = nrm;
        const double g = scale_factor / nrm;
        T *dst = out.data.data() + t * n_sub * 2 * n_ant;
        for (std::size_t f = 0; f < n_sub; ++f)
            for (std::size_t a = 0; a < n_ant; ++a)
            {
                dst[f * 2 * n_ant + a] = static_cast<T>(src[f * n_ant + a].real() * g);
                dst[f * 2 * n_ant + n_ant + a] = static_cast<T>(src[f * n_ant + a].imag() * g);
            }
    }
    return out;
}

// Largest scale factor keeping all preprocessed entries within +-cap.
inline double auto_scale_factor(const tensor<std::complex<double>> &h, double cap = 0.95)
{
    auto unit = preprocess_measurement<double>(h, 1.0);
    double max_abs = 0.0;
    for (std::size_t i = 0; i < unit.data.size(); ++i)
        max_abs = std::max(max_abs, std::abs(unit.data[i]));
    if (max_abs <= 0.0)
        throw numeric_error("auto_scale_factor: all-zero input");
    return cap / max_abs;
}

// Inverse of preprocess_measurement: recombines re/im and restores the
// stored per-snapshot norms.
template <typename T>
tensor<std::complex<double>> postprocess_inverse(const tensor<T> &r, const std::vector<double> &snapshot_norms,
                                                 double scale_factor)
{
    const std::size_t n_sp = r.extent(1), n_sub = r.extent(2), n_ant2 = r.extent(3);
    const std::size_t n_ant = n_ant2 / 2;
    tensor<std::complex<double>> out({n_sp, n_sub, n_ant});
    for (std::size_t t = 0; t < n_sp; ++t)
    {
        const double g = snapshot_norms[t] / scale_factor;
        const T *src = r.data() + t * n_sub * n_ant2;
        std::complex<double> *dst = out.data() + t * n_sub * n_ant;
        for (std::size_t f = 0; f < n_sub; ++f)
            for (std::size_t a = 0; a < n_ant; ++a)
                dst[f * n_ant + a] = {static_cast<double>(src[f * n_ant2 + a]) * g,
                                      static_cast<double>(src[f * n_ant2 + n_ant + a]) * g};
    }
    return out;
}

// ---- parameters and forward pass ------------------------------------------

template <typename T>
struct unn_params {
    std::vector<tensor<T>> conv;  // L matrices {k_l, k_{l-1}} (4-mode unfolding of W_l)
    std::vector<tensor<T>> gamma; // L-1 vectors {k_l}
    std::vector<tensor<T>> beta;  // L-1 vectors {k_l}
};

inline constexpr double unn_bn_eps = 1e-5;

template <typename T>
tensor<T> make_seed_tensor(const unn_config &cfg, std::uint64_t rng_seed)
{
    rng_stream rng(rng_seed);
    tensor<T> z({cfg.seed_rows(), cfg.seed_cols(), cfg.filters()[0]});
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = static_cast<T>(rng.uniform(-cfg.seed_range, cfg.seed_range));
    return z;
}

// Uniform fan-in scaled init for the convolutions; identity normalization.
template <typename T>
unn_params<T> init_unn_params(const unn_config &cfg, std::uint64_t rng_seed)
{
    rng_stream rng(rng_seed);
    const auto k = cfg.filters();
    unn_params<T> p;
    for (std::size_t l = 1; l <= cfg.n_layers; ++l)
    {
        tensor<T> w({k[l], k[l - 1]});
        const double bound = 1.0 / std::sqrt(static_cast<double>(k[l - 1]));
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = static_cast<T>(rng.uniform(-bound, bound));
        p.conv.push_back(std::move(w));
        if (l + 1 <= cfg.n_layers)
        {
            p.gamma.emplace_back(std::vector<std::size_t>{k[l]}, T(1));
            p.beta.emplace_back(std::vector<std::size_t>{k[l]}, T(0));
        }
    }
    return p;
}

template <typename T>
struct unn_param_vars {
    std::vector<typename gradient_tape<T>::var> conv, gamma, beta;
};

template <typename T>
unn_param_vars<T> register_unn_params(gradient_tape<T> &tape, const unn_params<T> &p, bool trainable)
{
    unn_param_vars<T> v;
    for (const auto &w : p.conv)
        v.conv.push_back(trainable ? tape.parameter(w) : tape.constant(w));
    for (const auto &g : p.gamma)
        v.gamma.push_back(trainable ? tape.parameter(g) : tape.constant(g));
    for (const auto &b : p.beta)
        v.beta.push_back(trainable ? tape.parameter(b) : tape.constant(b));
    return v;
}

// Inner layers: conv, mode-1/mode-2 upsampling, ReLU, BatchNorm. Pre-output
// drops the upsampling; the output layer is conv + TanH.
template <typename T>
typename gradient_tape<T>::var unn_forward(gradient_tape<T> &tape, const unn_param_vars<T> &pv,
                                           typename gradient_tape<T>::var seed, const unn_config &cfg)
{
    cfg.validate();
    typename gradient_tape<T>::var x = seed;
    const std::size_t b = cfg.seed_rows(), c = cfg.seed_cols();
    for (std::size_t l = 1; l <= cfg.n_layers; ++l)
    {
        x = tape.mode_product(x, pv.conv[l - 1], 3);
        if (l + 2 <= cfg.n_layers)
        {
            const std::size_t f = std::size_t(1) << (l - 1);
            x = tape.mode_product(x, bilinear_upsample_matrix<T>(b * f), 1);
            x = tape.mode_product(x, bilinear_upsample_matrix<T>(c * f), 2);
        }
        if (l + 1 <= cfg.n_layers)
        {
            x = tape.relu(x);
            x = tape.batch_norm_train(x, pv.gamma[l - 1], pv.beta[l - 1], static_cast<T>(unn_bn_eps));
        }
        else
        {
            x = tape.tanh_act(x);
        }
    }
    return x;
}

// Plain forward pass on fitted parameters.
template <typename T>
tensor<T> unn_evaluate(const unn_params<T> &p, const tensor<T> &seed, const unn_config &cfg)
{
    gradient_tape<T> tape;
    unn_param_vars<T> pv = register_unn_params(tape, p, false);
    auto out = unn_forward(tape, pv, tape.constant(seed), cfg);
    return tape.value(out);
}

// ---- fitting ---------------------------------------------------------------

struct unn_fit_result {
    unn_params<float> params;
    tensor<float> seed;
    std::vector<double> loss_history;
};

// I first-order iterations against the preprocessed chunk; seed tensor and
// weight init derive from rng_seed, the seed stays fixed throughout.
inline unn_fit_result fit_unn(const tensor<float> &target, const unn_config &cfg, std::uint64_t rng_seed)
{
    cfg.validate();
    if (target.order() != 3 || target.extent(1) != cfg.chunk_snapshots || target.extent(2) != cfg.n_sub ||
        target.extent(3) != cfg.output_filters)
        throw std::invalid_argument("fit_unn: target dims do not match the configuration");

    unn_fit_result res;
    res.seed = make_seed_tensor<float>(cfg, derive_seed(rng_seed, "unn-seed"));
    res.params = init_unn_params<float>(cfg, derive_seed(rng_seed, "unn-init"));
    res.loss_history.reserve(cfg.iterations);

    adam<float> opt(static_cast<float>(cfg.learning_rate));
    for (std::size_t it = 0; it < cfg.iterations; ++it)
    {
        gradient_tape<float> tape;
        unn_param_vars<float> pv = register_unn_params(tape, res.params, true);
        auto out = unn_forward(tape, pv, tape.constant(res.seed), cfg);
        auto loss = tape.mse(out, tape.constant(target));
        const double loss_value = static_cast<double>(tape.value(loss)[0]);
        if (!std::isfinite(loss_value))
            throw numeric_error("fit_unn: non-finite loss at iteration " + std::to_string(it));
        res.loss_history.push_back(loss_value);
        tape.backward(loss);

        std::vector<tensor<float> *> params;
        std::vector<const tensor<float> *> grads;
        auto push = [&](std::vector<tensor<float>> &ps, std::vector<typename gradient_tape<float>::var> &vs) {
            for (std::size_t i = 0; i < ps.size(); ++i)
            {
                params.push_back(&ps[i]);
                grads.push_back(&tape.grad(vs[i]));
            }
        };
        push(res.params.conv, pv.conv);
        push(res.params.gamma, pv.gamma);
        push(res.params.beta, pv.beta);
        opt.step(params, grads);
    }
    return res;
}

// ---- prior-CSI assembly and quality ----------------------------------------

struct prior_csi {
    tensor<float> channel;   // chunk_snapshots x n_sub x 2 N_ant, fitted output
    tensor<double> locations; // chunk_snapshots x 3
    std::string source;      // campaign / chunk id
};

inline prior_csi estimate_prior(const unn_params<float> &params, const tensor<float> &seed, const unn_config &cfg,
                                tensor<double> locations, std::string source)
{
    prior_csi p{unn_evaluate(params, seed, cfg), std::move(locations), std::move(source)};
    if (p.locations.order() != 2 || p.locations.extent(1) != cfg.chunk_snapshots || p.locations.extent(2) != 3)
        throw std::invalid_argument("estimate_prior: locations must be {chunk_snapshots, 3}");
    return p;
}

inline constexpr double db_cap = 300.0;

// Per-snapshot output SNR in dB: -10 log10 NSE against the ground truth,
// both sides in the normalized per-snapshot scale and in the estimate's
// precision (a bit-exact estimate reads back as the +300 dB sentinel).
template <typename T>
std::vector<double> output_snr(const tensor<T> &prior, const tensor<std::complex<double>> &truth,
                               double scale_factor)
{
    auto truth_pre = preprocess_measurement<T>(truth, scale_factor);
    if (prior.dims() != truth_pre.data.dims())
        throw std::invalid_argument("output_snr: dims mismatch after re/im stacking");
    const std::size_t n_sp = prior.extent(1);
    const std::size_t block = prior.extent(2) * prior.extent(3);
    std::vector<double> snr(n_sp);
    for (std::size_t t = 0; t < n_sp; ++t)
    {
        double err = 0.0, ref = 0.0;
        const T *p = prior.data() + t * block;
        const T *q = truth_pre.data.data() + t * block;
        for (std::size_t i = 0; i < block; ++i)
        {
            const double d = static_cast<double>(p[i]) - static_cast<double>(q[i]);
            err += d * d;
            ref += static_cast<double>(q[i]) * static_cast<double>(q[i]);
        }
        if (ref <= 0.0)
            throw numeric_error("output_snr: zero-energy truth snapshot " + std::to_string(t));
        const double nse = err / ref;
        snr[t] = nse <= 0.0 ? db_cap : std::min(db_cap, std::max(-db_cap, -10.0 * std::log10(nse)));
    }
    return snr;
}

} // namespace csir
