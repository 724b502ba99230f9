// Copyright 2026 The DRVC Authors.
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

#ifndef DRVC_GRIFFIN_LIM_HPP
#define DRVC_GRIFFIN_LIM_HPP

#include <vector>

#include "drvc/mel.hpp"

namespace drvc {

// Ridge least-squares inversion of the mel filterbank back to a linear power
// spectrum, clamped to be non-negative. [T x M] log-mel -> [T x n_bins] power.
Tensor mel_to_linear_power(const Tensor& log_mel, const MelConfig& cfg);

// Iterative phase reconstruction from a magnitude spectrogram (zero initial
// phase, deterministic across runs).
std::vector<double> griffin_lim(const Tensor& magnitude, const MelConfig& cfg, int iters);

// Vocoder stand-in for audible output: denormalized log-mel straight to a
// waveform. Quality is limited next to a neural vocoder.
std::vector<double> mel_to_audio(const MelSpectrogram& mel, const MelConfig& cfg, int iters);

}  // namespace drvc

#endif  // DRVC_GRIFFIN_LIM_HPP
