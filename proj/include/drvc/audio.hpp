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

#ifndef DRVC_AUDIO_HPP
#define DRVC_AUDIO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "drvc/common.hpp"

namespace drvc {

struct AudioClip {
  std::vector<double> samples;  // mono, amplitudes within [-1, 1]
  int sample_rate = 0;
  std::string speaker_id;
  std::string utterance_id;
};

// RIFF/WAVE, PCM 16/24/32-bit and IEEE float32; multi-channel is averaged to
// mono on read.
std::vector<double> read_wav(const std::filesystem::path& path, int* sample_rate);
void write_wav_pcm16(const std::filesystem::path& path, const std::vector<double>& samples,
                     int sample_rate);

// Band-limited windowed-sinc resampler; output length rounds n * to / from.
std::vector<double> resample(const std::vector<double>& in, int from_rate, int to_rate);

// Reads, resamples to target_rate, and rescales so that |amplitude| <= 1.
AudioClip load_audio(const std::filesystem::path& path, int target_rate);

}  // namespace drvc

#endif  // DRVC_AUDIO_HPP
