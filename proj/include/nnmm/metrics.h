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

#ifndef NNMM_METRICS_H_
#define NNMM_METRICS_H_

#include "nnmm/dsp.h"

namespace nnmm {

inline constexpr double kSegSnrFloorDb = -10.0;
inline constexpr double kSegSnrCeilingDb = 35.0;
// Frames more than this far below the loudest clean frame count as silent.
inline constexpr double kSilenceRelativeDb = -50.0;

// Mean over non-silent frames of the clamped per-frame SNR between the clean
// signal and the residual clean - enhanced. Non-overlapping frames.
// Throws DataError on length mismatch or an all-silent reference.
double segmental_snr(const Waveform& clean, const Waveform& enhanced,
                     double frame_ms = 32.0);

// RMS over non-silent STFT frames and all bins of the dB difference between
// the two log-magnitude spectra. Throws DataError on length mismatch.
double log_spectral_distance(const Waveform& clean, const Waveform& enhanced,
                             int frame_length = 512);

}  // namespace nnmm

#endif  // NNMM_METRICS_H_
