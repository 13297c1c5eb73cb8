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

#include <stdexcept>
#include <string>

namespace csir {

// Error taxonomy mirrored by the CLI exit codes:
//   config_error  -> 2, numeric_error -> 3, io_error -> 4.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace csir
