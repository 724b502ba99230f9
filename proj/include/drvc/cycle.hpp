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

#ifndef DRVC_CYCLE_HPP
#define DRVC_CYCLE_HPP

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "drvc/dataset.hpp"
#include "drvc/losses.hpp"
#include "drvc/model.hpp"

namespace drvc {

// Test hook for the cycle-wiring oracle: flipping a swap off reproduces the
// deliberate-bug variants the wiring tests must catch. Defaults are the
// correct double exchange.
struct CycleWiring {
  bool swap_first = true;
  bool swap_second = true;
};

// Node handles for one double-exchange pass over a batch pair.
struct CycleNodes {
  ad::NodeId a = -1, b = -1;
  ad::NodeId a_content = -1, b_content = -1;
  ad::NodeId a_style = -1, b_style = -1;
  ad::NodeId a_tilde = -1, b_tilde = -1;  // first conversion outputs
  // re-encodings of the first conversion
  ad::NodeId at_content = -1, bt_content = -1, at_style = -1, bt_style = -1;
  ad::NodeId a_hat = -1, b_hat = -1;  // second conversion outputs
  bool second_done = false;
};

// Eq-level wiring: encode both inputs and exchange styles once.
CycleNodes first_conversion_nodes(nn::GraphBinding& gb, VcModelApi& model, ad::NodeId a,
                                  ad::NodeId b, const CycleWiring& wiring = {});
// Re-encode the first-conversion outputs and exchange styles again.
void second_conversion_nodes(nn::GraphBinding& gb, VcModelApi& model, CycleNodes& nodes,
                             const CycleWiring& wiring = {});

// Value-level double exchange over a single utterance pair.
struct CycleBatch {
  MelSpectrogram a, b;
  ContentEmbedding a_content, b_content;
  StyleEmbedding a_style, b_style;
  MelSpectrogram a_tilde, b_tilde;
  ContentEmbedding at_content, bt_content;
  StyleEmbedding at_style, bt_style;
  MelSpectrogram a_hat, b_hat;
  bool second_done = false;
};

CycleBatch first_conversion(VcModelApi& model, nn::ParamStore& params, const MelSpectrogram& a,
                            const MelSpectrogram& b, const CycleWiring& wiring = {});
void second_conversion(VcModelApi& model, nn::ParamStore& params, CycleBatch& batch,
                       const CycleWiring& wiring = {});

struct TrainingConfig {
  LossWeights weights;
  LossToggles toggles;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.99;
  double adam_eps = 1e-9;
  double lr_initial = 1e-4;
  double lr_decay_per_epoch = 5e-6;
  double lr_floor = 1e-6;
  std::string lr_decay_mode = "subtractive";  // or "multiplicative"
  int64_t epochs = 10;
  int64_t steps_per_epoch = 0;  // 0: ceil(train utterances / batch_size)
  int64_t batch_size = 8;
  int64_t segment_frames = 128;
  std::string same_loss_stage = "second";       // or "first"
  std::string grl_placement = "discriminator";  // classifier | both | none
  uint64_t seed = 1234;
  int64_t checkpoint_every_epochs = 1;
};

// Subtractive by default: lr(epoch) = max(lr_initial - epoch*decay, floor);
// multiplicative mode scales by (1 - decay) per epoch instead.
double lr_schedule(int64_t epoch, const TrainingConfig& cfg);

// One Adam update over every parameter group; t is the 1-based update count.
void adam_step(nn::ParamStore& store, const std::vector<Tensor>& grads, double lr,
               const TrainingConfig& cfg, int64_t t);

// Builds the full double-exchange graph (cycle, identity, heads, GRL) for one
// batch, evaluates every enabled loss, and optionally returns per-parameter
// gradients of the weighted total.
LossReport compute_step_losses(DrvcModel& model, const Tensor& a, const Tensor& b,
                               const Tensor& label_a, const Tensor& label_b,
                               const TrainingConfig& cfg, double lambda_grl,
                               std::vector<Tensor>* grads);

// compute_step_losses + divergence checks + one Adam step.
LossReport training_step(DrvcModel& model, const Tensor& a, const Tensor& b,
                         const Tensor& label_a, const Tensor& label_b, const TrainingConfig& cfg,
                         double k, double lr, int64_t adam_t);

// Inference-mode conversion: generate(E_con(source), E_s(target)).
MelSpectrogram convert(DrvcModel& model, const MelSpectrogram& source_mel,
                       const MelSpectrogram& target_mel);

struct TrainContext {
  SpeakerManifest manifest;
  std::filesystem::path feature_dir;
  MelStats stats;
  CropPolicy crop_policy = CropPolicy::kReflect;
  std::filesystem::path checkpoint_path;
  std::filesystem::path log_path;
  bool resume = false;
  // Polled once per step; a true return checkpoints and stops cleanly.
  std::function<bool()> interrupted;
  // Full config snapshot stored inside checkpoints (JSON text).
  std::string config_snapshot;
};

struct TrainResult {
  int64_t epoch = 0;
  int64_t global_step = 0;
  LossReport last_report;
};

// Runs epochs x steps_per_epoch training steps with per-step JSONL logging,
// per-epoch checkpoints, and mid-run resume that reproduces the uninterrupted
// loss sequence exactly.
TrainResult run_training(DrvcModel& model, const ModelConfig& model_cfg, TrainingConfig train_cfg,
                         const TrainContext& ctx);

}  // namespace drvc

#endif  // DRVC_CYCLE_HPP
