// Copyright 2026 The nnmm Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NNMM_CONFIG_H_
#define NNMM_CONFIG_H_

#include <string>
#include <string_view>

#include "nnmm/enhancer.h"

namespace nnmm {

// Flat "key = value" text, '#' starts a comment. Keys: sample_rate,
// frame_length, beta, alpha, noise_prefix, estimator, posterior,
// adapt_noise. Unknown keys or bad values throw std::invalid_argument.
EnhancerConfig parse_config(std::string_view text, EnhancerConfig base = {});
EnhancerConfig load_config(const std::string& path, EnhancerConfig base = {});

// Round-trips through parse_config.
std::string format_config(const EnhancerConfig& config);

}  // namespace nnmm

#endif  // NNMM_CONFIG_H_
