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

#ifndef DRVC_CHECKPOINT_HPP
#define DRVC_CHECKPOINT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "drvc/mel.hpp"
#include "drvc/nn.hpp"

namespace drvc {

// Everything beyond raw parameters needed to resume training bit-compatibly
// or to run inference: schedule counters, sampler RNG state, normalization
// stats, speaker ordering, and the full config snapshot.
struct CheckpointMeta {
  uint32_t version = 1;
  int64_t epoch = 0;
  int64_t global_step = 0;
  int64_t total_steps = 0;
  std::string sampler_rng_state;
  std::vector<std::string> speakers;
  MelStats stats;
  std::string config_json;
};

// Single-archive format:
//   bytes 0..7   magic "DRVCCKPT"
//   u32 LE       container version
//   u64 LE       JSON header length
//   JSON header  meta plus an array directory {name, shape}
//   then, per directory entry in order: value, adam_m, adam_v as float64 LE
void save_checkpoint(const std::filesystem::path& path, const nn::ParamStore& store,
                     const CheckpointMeta& meta);

// Fills parameters and optimizer moments by name; every directory entry must
// match an existing parameter of the same shape.
CheckpointMeta load_checkpoint(const std::filesystem::path& path, nn::ParamStore* store);

// Reads only the JSON header (for config/speaker recovery before the model
// exists).
CheckpointMeta peek_checkpoint(const std::filesystem::path& path);

}  // namespace drvc

#endif  // DRVC_CHECKPOINT_HPP
