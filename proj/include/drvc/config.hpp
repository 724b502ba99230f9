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

#ifndef DRVC_CONFIG_HPP
#define DRVC_CONFIG_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "drvc/cycle.hpp"
#include "drvc/mel.hpp"
#include "drvc/model.hpp"

namespace drvc {

struct EvalConfig {
  int mcep_order = 34;
  double mcep_alpha = 0.455;  // frequency-warping factor at 22.05 kHz
  bool mcd_include_c0 = false;
  int griffin_lim_iters = 32;
};

// Union of the feature, model, training, and evaluation settings plus paths.
// The on-disk form is a single flat JSON object whose keys mirror the field
// names; unknown keys are rejected.
struct AppConfig {
  std::string data_root;
  std::string work_dir = "work";
  std::string checkpoint_path;  // optional override

  MelConfig mel;
  int eval_count_per_speaker = 35;
  std::string crop_policy = "reflect";  // or "tile"

  ModelConfig model;
  TrainingConfig train;
  EvalConfig eval;

  CropPolicy crop_policy_enum() const;
};

AppConfig load_app_config(const std::filesystem::path& path);
AppConfig app_config_from_json(const nlohmann::json& j);
nlohmann::json app_config_to_json(const AppConfig& cfg);

}  // namespace drvc

#endif  // DRVC_CONFIG_HPP
