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

#include "drvc/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace drvc {

namespace fs = std::filesystem;
using nlohmann::json;

int SpeakerManifest::speaker_index(const std::string& id) const {
  for (size_t i = 0; i < speakers.size(); ++i)
    if (speakers[i] == id) return static_cast<int>(i);
  return -1;
}

std::vector<const UtteranceRecord*> SpeakerManifest::of_split(const std::string& split) const {
  std::vector<const UtteranceRecord*> out;
  for (const auto& r : records)
    if (r.split == split) out.push_back(&r);
  return out;
}

SpeakerManifest build_manifest(const fs::path& root, int eval_count_per_speaker) {
  if (eval_count_per_speaker < 0)
    throw ConfigError("build_manifest: eval count must be non-negative");
  if (!fs::is_directory(root))
    throw ConfigError("build_manifest: data root is not a directory: " + root.string());

  std::vector<std::string> speaker_dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) speaker_dirs.push_back(e.path().filename().string());
  std::sort(speaker_dirs.begin(), speaker_dirs.end());
  if (speaker_dirs.empty())
    throw ConfigError("build_manifest: no speaker subdirectories under " + root.string());

  SpeakerManifest manifest;
  for (const auto& speaker : speaker_dirs) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(root / speaker)) {
      if (e.is_regular_file() && e.path().extension() == ".wav")
        files.push_back(e.path().filename().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw ConfigError("build_manifest: speaker '" + speaker + "' has no audio files");
    if (static_cast<int>(files.size()) < eval_count_per_speaker)
      throw ConfigError("build_manifest: speaker '" + speaker + "' has " +
                        std::to_string(files.size()) + " files, fewer than eval count " +
                        std::to_string(eval_count_per_speaker));
    const size_t train_count = files.size() - static_cast<size_t>(eval_count_per_speaker);
    for (size_t i = 0; i < files.size(); ++i) {
      UtteranceRecord rec;
      rec.audio_path = (root / speaker / files[i]).string();
      rec.speaker_id = speaker;
      rec.split = i < train_count ? "train" : "eval";
      manifest.records.push_back(std::move(rec));
    }
    manifest.speakers.push_back(speaker);
  }
  return manifest;
}

void save_manifest(const SpeakerManifest& manifest, const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write manifest: " + path.string());
  for (const auto& r : manifest.records) {
    json j{{"audio_path", r.audio_path}, {"speaker_id", r.speaker_id}, {"split", r.split}};
    f << j.dump() << "\n";
  }
}

SpeakerManifest load_manifest(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read manifest: " + path.string());
  SpeakerManifest manifest;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    UtteranceRecord rec;
    rec.audio_path = j.at("audio_path").get<std::string>();
    rec.speaker_id = j.at("speaker_id").get<std::string>();
    rec.split = j.at("split").get<std::string>();
    if (rec.split != "train" && rec.split != "eval")
      throw ConfigError("manifest: invalid split value '" + rec.split + "'");
    if (manifest.speaker_index(rec.speaker_id) < 0) manifest.speakers.push_back(rec.speaker_id);
    manifest.records.push_back(std::move(rec));
  }
  return manifest;
}

namespace {
constexpr char kCacheMagic[8] = {'D', 'R', 'V', 'C', 'M', 'E', 'L', '1'};
}

void write_feature_cache(const fs::path& path, const MelSpectrogram& mel) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write feature cache: " + path.string());
  f.write(kCacheMagic, 8);
  const uint32_t header[4] = {static_cast<uint32_t>(mel.n_frames()), static_cast<uint32_t>(mel.n_mels()),
                              static_cast<uint32_t>(mel.sample_rate),
                              static_cast<uint32_t>(mel.hop_length)};
  f.write(reinterpret_cast<const char*>(header), sizeof(header));
  f.write(reinterpret_cast<const char*>(mel.frames.data.data()),
          static_cast<std::streamsize>(mel.frames.data.size() * sizeof(double)));
  if (!f) throw IoError("short write on feature cache: " + path.string());
}

MelSpectrogram read_feature_cache(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read feature cache: " + path.string());
  char magic[8];
  uint32_t header[4];
  f.read(magic, 8);
  f.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!f || std::memcmp(magic, kCacheMagic, 8) != 0)
    throw IoError("bad feature cache header: " + path.string());
  MelSpectrogram mel;
  mel.frames = Tensor({static_cast<int64_t>(header[0]), static_cast<int64_t>(header[1])});
  mel.sample_rate = static_cast<int>(header[2]);
  mel.hop_length = static_cast<int>(header[3]);
  f.read(reinterpret_cast<char*>(mel.frames.data.data()),
         static_cast<std::streamsize>(mel.frames.data.size() * sizeof(double)));
  if (!f) throw IoError("truncated feature cache: " + path.string());
  mel.utterance_id = path.stem().string();
  return mel;
}

fs::path feature_cache_path(const fs::path& dir, const UtteranceRecord& rec) {
  return dir / (rec.speaker_id + "__" + rec.utterance_id() + ".mel");
}

PairSampler::PairSampler(const SpeakerManifest& manifest, std::vector<MelSpectrogram> features,
                         std::vector<int> feature_speaker, int64_t segment_frames,
                         CropPolicy policy, uint64_t seed)
    : features_(std::move(features)),
      segment_frames_(segment_frames),
      policy_(policy),
      rng_(seed) {
  per_speaker_.resize(manifest.speakers.size());
  if (features_.size() != feature_speaker.size())
    throw ContractError("pair sampler: feature/speaker list size mismatch");
  for (size_t i = 0; i < features_.size(); ++i) {
    const int s = feature_speaker[i];
    if (s < 0 || s >= static_cast<int>(per_speaker_.size()))
      throw ContractError("pair sampler: speaker index out of range");
    per_speaker_[static_cast<size_t>(s)].push_back(i);
  }
  int with_data = 0;
  for (const auto& v : per_speaker_)
    if (!v.empty()) ++with_data;
  if (with_data < 2)
    throw ConfigError("pair sampler: need train utterances from at least 2 speakers, have " +
                      std::to_string(with_data));
}

SampledPair PairSampler::sample() {
  // Uniform unordered speaker pair: ordered draw without replacement.
  std::vector<int> nonempty;
  for (size_t s = 0; s < per_speaker_.size(); ++s)
    if (!per_speaker_[s].empty()) nonempty.push_back(static_cast<int>(s));
  std::uniform_int_distribution<size_t> d1(0, nonempty.size() - 1);
  const size_t i = d1(rng_);
  std::uniform_int_distribution<size_t> d2(0, nonempty.size() - 2);
  size_t j = d2(rng_);
  if (j >= i) ++j;
  const int sa = nonempty[i];
  const int sb = nonempty[j];

  auto pick = [&](int speaker) -> const MelSpectrogram& {
    const auto& pool = per_speaker_[static_cast<size_t>(speaker)];
    std::uniform_int_distribution<size_t> d(0, pool.size() - 1);
    return features_[pool[d(rng_)]];
  };

  SampledPair pair;
  pair.a = crop_segment(pick(sa), segment_frames_, rng_, policy_);
  pair.b = crop_segment(pick(sb), segment_frames_, rng_, policy_);
  pair.label_a = sa;
  pair.label_b = sb;
  return pair;
}

std::pair<std::vector<MelSpectrogram>, std::vector<int>> load_train_features(
    const SpeakerManifest& manifest, const fs::path& feature_dir, const MelStats& stats) {
  std::vector<MelSpectrogram> features;
  std::vector<int> speaker_of;
  for (const auto& rec : manifest.records) {
    if (rec.split != "train") continue;
    MelSpectrogram mel = read_feature_cache(feature_cache_path(feature_dir, rec));
    mel.speaker_id = rec.speaker_id;
    features.push_back(normalize_mel(mel, stats));
    speaker_of.push_back(manifest.speaker_index(rec.speaker_id));
  }
  return {std::move(features), std::move(speaker_of)};
}

}  // namespace drvc
