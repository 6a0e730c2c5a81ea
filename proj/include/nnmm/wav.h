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

#ifndef NNMM_WAV_H_
#define NNMM_WAV_H_

#include <string>

#include "nnmm/dsp.h"

namespace nnmm {

// 16-bit PCM mono RIFF/WAVE. Anything else is rejected with DataError.
Waveform read_wav(const std::string& path);

// Same, but also rejects files whose rate differs from expected_rate; there
// is no resampler.
Waveform read_wav(const std::string& path, int expected_rate);

// Samples are scaled by 32768, rounded, and clipped to the int16 range.
void write_wav(const std::string& path, const Waveform& w);

}  // namespace nnmm

#endif  // NNMM_WAV_H_
