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
#include <vector>

#include "tensor.hpp"

namespace csir {

// Adaptive-moment first-order optimizer with bias correction.
template <typename T>
class adam {
  public:
    adam(T lr, T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8))
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps)
    {
    }

    void step(std::vector<tensor<T> *> params, const std::vector<const tensor<T> *> &grads)
    {
        if (m_.empty())
        {
            for (auto *p : params)
            {
                m_.emplace_back(p->dims());
                v_.emplace_back(p->dims());
            }
        }
        ++t_;
        const T bc1 = T(1) - static_cast<T>(std::pow(static_cast<double>(beta1_), static_cast<double>(t_)));
        const T bc2 = T(1) - static_cast<T>(std::pow(static_cast<double>(beta2_), static_cast<double>(t_)));
        for (std::size_t pi = 0; pi < params.size(); ++pi)
        {
            tensor<T> &p = *params[pi];
            const tensor<T> &g = *grads[pi];
            tensor<T> &m = m_[pi];
            tensor<T> &v = v_[pi];
            for (std::size_t i = 0; i < p.size(); ++i)
            {
                m[i] = beta1_ * m[i] + (T(1) - beta1_) * g[i];
                v[i] = beta2_ * v[i] + (T(1) - beta2_) * g[i] * g[i];
                const T mh = m[i] / bc1;
                const T vh = v[i] / bc2;
                p[i] -= lr_ * mh / (std::sqrt(vh) + eps_);
            }
        }
    }

  private:
    T lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::vector<tensor<T>> m_, v_;
};

} // namespace csir
