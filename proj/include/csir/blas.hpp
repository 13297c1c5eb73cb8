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

#include <cblas.h>
#include <cstddef>

namespace csir {

// Row-major GEMM: C = alpha * op(A) * op(B) + beta * C.
// All dense contractions (mode products, im2col convolutions) funnel through
// here; run-to-run determinism holds for a fixed thread count.

inline void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, float alpha, const float *a,
                 std::size_t lda, const float *b, std::size_t ldb, float beta, float *c, std::size_t ldc)
{
    cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha, a, static_cast<int>(lda), b,
                static_cast<int>(ldb), beta, c, static_cast<int>(ldc));
}

inline void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha,
                 const double *a, std::size_t lda, const double *b, std::size_t ldb, double beta, double *c,
                 std::size_t ldc)
{
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha, a, static_cast<int>(lda), b,
                static_cast<int>(ldb), beta, c, static_cast<int>(ldc));
}

inline void set_compute_threads(int n)
{
#ifdef OPENBLAS_VERSION
    openblas_set_num_threads(n > 0 ? n : 1);
#else
    (void)n;
#endif
}

} // namespace csir
