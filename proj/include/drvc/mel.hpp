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

#ifndef DRVC_MEL_HPP
#define DRVC_MEL_HPP

#include <string>
#include <vector>

#include "drvc/audio.hpp"
#include "drvc/tensor.hpp"

namespace drvc {

struct MelConfig {
  int sample_rate = 22050;
  int n_mels = 80;
  int n_fft = 1024;
  int win_length = 1024;
  int hop_length = 256;
  bool center = false;       // center-padding adds roughly win/hop frames
  double log_floor = 1e-5;   // clamp before log compression
  double fmin = 0.0;
  double fmax = 0.0;         // 0 selects sample_rate / 2
};

struct MelSpectrogram {
  Tensor frames;  // [T, M] log-mel values
  int sample_rate = 0;
  int hop_length = 0;
  std::string speaker_id;
  std::string utterance_id;

  int64_t n_frames() const { return frames.shape.empty() ? 0 : frames.dim(0); }
  int64_t n_mels() const { return frames.shape.empty() ? 0 : frames.dim(1); }
};

// Slaney-scale triangular filterbank with slaney area normalization,
// [n_mels x (n_fft/2 + 1)].
std::vector<std::vector<double>> mel_filterbank(const MelConfig& cfg);

int64_t mel_frame_count(int64_t n_samples, const MelConfig& cfg);

MelSpectrogram compute_mel(const AudioClip& clip, const MelConfig& cfg);

// Per-mel-bin z-score statistics, computed over the training split only.
struct MelStats {
  std::vector<double> mean;
  std::vector<double> std;
};

MelStats compute_mel_stats(const std::vector<MelSpectrogram>& mels);
MelSpectrogram normalize_mel(const MelSpectrogram& mel, const MelStats& stats);
MelSpectrogram denormalize_mel(const MelSpectrogram& mel, const MelStats& stats);

enum class CropPolicy { kReflect, kTile };

// Fixed-length training segment; short inputs are extended per policy and the
// crop start is drawn uniformly from the valid range.
MelSpectrogram crop_segment(const MelSpectrogram& mel, int64_t length, Rng& rng,
                            CropPolicy policy = CropPolicy::kReflect);

}  // namespace drvc

#endif  // DRVC_MEL_HPP
