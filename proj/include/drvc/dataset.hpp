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

#ifndef DRVC_DATASET_HPP
#define DRVC_DATASET_HPP

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "drvc/mel.hpp"

namespace drvc {

struct UtteranceRecord {
  std::string audio_path;
  std::string speaker_id;
  std::string split;  // "train" or "eval"

  std::string utterance_id() const {
    return std::filesystem::path(audio_path).stem().string();
  }
};

struct SpeakerManifest {
  std::vector<UtteranceRecord> records;
  std::vector<std::string> speakers;  // ordered, unique

  int speaker_index(const std::string& id) const;
  std::vector<const UtteranceRecord*> of_split(const std::string& split) const;
};

// Scans speaker-id subdirectories of root; per speaker the lexicographically
// last eval_count files become the eval split. Deterministic across runs.
SpeakerManifest build_manifest(const std::filesystem::path& root, int eval_count_per_speaker);

// JSON-lines, one record per line: {audio_path, speaker_id, split}.
void save_manifest(const SpeakerManifest& manifest, const std::filesystem::path& path);
SpeakerManifest load_manifest(const std::filesystem::path& path);

// Per-utterance binary feature cache:
//   bytes 0..7   magic "DRVCMEL1"
//   bytes 8..23  uint32 LE: T, M, sample_rate, hop_length
//   then T*M float64 LE, row-major [T x M]
void write_feature_cache(const std::filesystem::path& path, const MelSpectrogram& mel);
MelSpectrogram read_feature_cache(const std::filesystem::path& path);

std::filesystem::path feature_cache_path(const std::filesystem::path& dir,
                                         const UtteranceRecord& rec);

struct SampledPair {
  MelSpectrogram a;
  MelSpectrogram b;
  int label_a = -1;  // indices into manifest.speakers
  int label_b = -1;
};

// Draws speaker pairs uniformly without replacement and utterances uniformly
// within each speaker's train split; crops both to the segment length.
class PairSampler {
 public:
  PairSampler(const SpeakerManifest& manifest, std::vector<MelSpectrogram> features,
              std::vector<int> feature_speaker, int64_t segment_frames, CropPolicy policy,
              uint64_t seed);

  SampledPair sample();

  Rng& rng() { return rng_; }
  int num_speakers() const { return static_cast<int>(per_speaker_.size()); }

 private:
  std::vector<MelSpectrogram> features_;
  std::vector<std::vector<size_t>> per_speaker_;  // feature indices by speaker
  int64_t segment_frames_;
  CropPolicy policy_;
  Rng rng_;
};

// Loads the cached train-split features of a manifest, z-scored with stats.
// Returns features plus their speaker indices, in manifest record order.
std::pair<std::vector<MelSpectrogram>, std::vector<int>> load_train_features(
    const SpeakerManifest& manifest, const std::filesystem::path& feature_dir,
    const MelStats& stats);

}  // namespace drvc

#endif  // DRVC_DATASET_HPP
