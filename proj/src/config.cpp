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

#include "drvc/config.hpp"

#include <fstream>
#include <set>

namespace drvc {

using nlohmann::json;

CropPolicy AppConfig::crop_policy_enum() const {
  if (crop_policy == "reflect") return CropPolicy::kReflect;
  if (crop_policy == "tile") return CropPolicy::kTile;
  throw ConfigError("crop_policy must be 'reflect' or 'tile', got '" + crop_policy + "'");
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      // paths
      "data_root", "work_dir", "checkpoint_path",
      // features
      "sample_rate", "n_mels", "n_fft", "win_length", "hop_length", "center", "log_floor",
      "fmin", "fmax", "segment_frames", "eval_count_per_speaker", "crop_policy",
      // model
      "d_c", "d_s", "content_channels", "content_hidden", "style_channels", "dv_channels",
      "head_hidden", "conv_kernel", "leaky_slope", "style_conditioning", "num_speakers",
      // training
      "w_cycle", "w_id", "w_adv", "w_domain", "w_same", "adam_beta1", "adam_beta2", "adam_eps",
      "lr_initial", "lr_decay_per_epoch", "lr_floor", "lr_decay_mode", "epochs",
      "steps_per_epoch", "batch_size", "same_loss_stage", "grl_placement", "seed",
      "checkpoint_every_epochs", "ablate",
      // evaluation
      "mcep_order", "mcep_alpha", "mcd_include_c0", "griffin_lim_iters"};
  return keys;
}

template <typename T>
void get(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

AppConfig app_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a flat JSON object");
  for (const auto& item : j.items()) {
    if (!known_keys().count(item.key()))
      throw ConfigError("unknown config key: '" + item.key() + "'");
  }

  AppConfig c;
  get(j, "data_root", c.data_root);
  get(j, "work_dir", c.work_dir);
  get(j, "checkpoint_path", c.checkpoint_path);

  get(j, "sample_rate", c.mel.sample_rate);
  get(j, "n_mels", c.mel.n_mels);
  get(j, "n_fft", c.mel.n_fft);
  get(j, "win_length", c.mel.win_length);
  get(j, "hop_length", c.mel.hop_length);
  get(j, "center", c.mel.center);
  get(j, "log_floor", c.mel.log_floor);
  get(j, "fmin", c.mel.fmin);
  get(j, "fmax", c.mel.fmax);
  get(j, "eval_count_per_speaker", c.eval_count_per_speaker);
  get(j, "crop_policy", c.crop_policy);

  get(j, "d_c", c.model.d_c);
  get(j, "d_s", c.model.d_s);
  get(j, "content_channels", c.model.content_channels);
  get(j, "content_hidden", c.model.content_hidden);
  get(j, "style_channels", c.model.style_channels);
  get(j, "dv_channels", c.model.dv_channels);
  get(j, "head_hidden", c.model.head_hidden);
  get(j, "conv_kernel", c.model.conv_kernel);
  get(j, "leaky_slope", c.model.leaky_slope);
  get(j, "num_speakers", c.model.num_speakers);
  std::string conditioning = "concat";
  get(j, "style_conditioning", conditioning);
  if (conditioning == "concat") c.model.style_conditioning = StyleConditioning::kConcat;
  else if (conditioning == "adaptive") c.model.style_conditioning = StyleConditioning::kAdaptive;
  else
    throw ConfigError("style_conditioning must be 'concat' or 'adaptive', got '" + conditioning +
                      "'");
  c.model.n_mels = c.mel.n_mels;

  get(j, "w_cycle", c.train.weights.w_cycle);
  get(j, "w_id", c.train.weights.w_id);
  get(j, "w_adv", c.train.weights.w_adv);
  get(j, "w_domain", c.train.weights.w_domain);
  get(j, "w_same", c.train.weights.w_same);
  get(j, "adam_beta1", c.train.adam_beta1);
  get(j, "adam_beta2", c.train.adam_beta2);
  get(j, "adam_eps", c.train.adam_eps);
  get(j, "lr_initial", c.train.lr_initial);
  get(j, "lr_decay_per_epoch", c.train.lr_decay_per_epoch);
  get(j, "lr_floor", c.train.lr_floor);
  get(j, "lr_decay_mode", c.train.lr_decay_mode);
  get(j, "epochs", c.train.epochs);
  get(j, "steps_per_epoch", c.train.steps_per_epoch);
  get(j, "batch_size", c.train.batch_size);
  get(j, "segment_frames", c.train.segment_frames);
  get(j, "same_loss_stage", c.train.same_loss_stage);
  get(j, "grl_placement", c.train.grl_placement);
  get(j, "seed", c.train.seed);
  get(j, "checkpoint_every_epochs", c.train.checkpoint_every_epochs);
  if (j.contains("ablate")) {
    for (const auto& name : j.at("ablate")) c.train.toggles.ablate(name.get<std::string>());
  }

  get(j, "mcep_order", c.eval.mcep_order);
  get(j, "mcep_alpha", c.eval.mcep_alpha);
  get(j, "mcd_include_c0", c.eval.mcd_include_c0);
  get(j, "griffin_lim_iters", c.eval.griffin_lim_iters);

  if (c.train.lr_decay_mode != "subtractive" && c.train.lr_decay_mode != "multiplicative")
    throw ConfigError("lr_decay_mode must be 'subtractive' or 'multiplicative'");
  if (c.train.same_loss_stage != "first" && c.train.same_loss_stage != "second")
    throw ConfigError("same_loss_stage must be 'first' or 'second'");
  if (c.train.grl_placement != "discriminator" && c.train.grl_placement != "classifier" &&
      c.train.grl_placement != "both" && c.train.grl_placement != "none")
    throw ConfigError("grl_placement must be discriminator, classifier, both, or none");
  c.crop_policy_enum();  // validates
  if (c.mel.sample_rate <= 0 || c.mel.n_mels <= 0 || c.mel.hop_length <= 0 ||
      c.mel.win_length <= 0 || c.mel.n_fft < c.mel.win_length)
    throw ConfigError("invalid feature extraction settings");
  if ((c.mel.n_fft & (c.mel.n_fft - 1)) != 0)
    throw ConfigError("n_fft must be a power of two");
  if (c.train.batch_size < 1 || c.train.segment_frames < 1 || c.train.epochs < 0)
    throw ConfigError("invalid training settings");
  return c;
}

AppConfig load_app_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return app_config_from_json(j);
}

json app_config_to_json(const AppConfig& c) {
  json j;
  j["data_root"] = c.data_root;
  j["work_dir"] = c.work_dir;
  if (!c.checkpoint_path.empty()) j["checkpoint_path"] = c.checkpoint_path;

  j["sample_rate"] = c.mel.sample_rate;
  j["n_mels"] = c.mel.n_mels;
  j["n_fft"] = c.mel.n_fft;
  j["win_length"] = c.mel.win_length;
  j["hop_length"] = c.mel.hop_length;
  j["center"] = c.mel.center;
  j["log_floor"] = c.mel.log_floor;
  j["fmin"] = c.mel.fmin;
  j["fmax"] = c.mel.fmax;
  j["eval_count_per_speaker"] = c.eval_count_per_speaker;
  j["crop_policy"] = c.crop_policy;

  j["d_c"] = c.model.d_c;
  j["d_s"] = c.model.d_s;
  j["content_channels"] = c.model.content_channels;
  j["content_hidden"] = c.model.content_hidden;
  j["style_channels"] = c.model.style_channels;
  j["dv_channels"] = c.model.dv_channels;
  j["head_hidden"] = c.model.head_hidden;
  j["conv_kernel"] = c.model.conv_kernel;
  j["leaky_slope"] = c.model.leaky_slope;
  j["num_speakers"] = c.model.num_speakers;
  j["style_conditioning"] =
      c.model.style_conditioning == StyleConditioning::kConcat ? "concat" : "adaptive";

  j["w_cycle"] = c.train.weights.w_cycle;
  j["w_id"] = c.train.weights.w_id;
  j["w_adv"] = c.train.weights.w_adv;
  j["w_domain"] = c.train.weights.w_domain;
  j["w_same"] = c.train.weights.w_same;
  j["adam_beta1"] = c.train.adam_beta1;
  j["adam_beta2"] = c.train.adam_beta2;
  j["adam_eps"] = c.train.adam_eps;
  j["lr_initial"] = c.train.lr_initial;
  j["lr_decay_per_epoch"] = c.train.lr_decay_per_epoch;
  j["lr_floor"] = c.train.lr_floor;
  j["lr_decay_mode"] = c.train.lr_decay_mode;
  j["epochs"] = c.train.epochs;
  j["steps_per_epoch"] = c.train.steps_per_epoch;
  j["batch_size"] = c.train.batch_size;
  j["segment_frames"] = c.train.segment_frames;
  j["same_loss_stage"] = c.train.same_loss_stage;
  j["grl_placement"] = c.train.grl_placement;
  j["seed"] = c.train.seed;
  j["checkpoint_every_epochs"] = c.train.checkpoint_every_epochs;
  json ablate = json::array();
  const LossToggles& t = c.train.toggles;
  if (!t.cycle) ablate.push_back("cycle");
  if (!t.identity) ablate.push_back("identity");
  if (!t.domain) ablate.push_back("domain");
  if (!t.same_style) ablate.push_back("same-style");
  if (!t.same_content) ablate.push_back("same-content");
  if (!t.adversarial) ablate.push_back("adversarial");
  j["ablate"] = ablate;

  j["mcep_order"] = c.eval.mcep_order;
  j["mcep_alpha"] = c.eval.mcep_alpha;
  j["mcd_include_c0"] = c.eval.mcd_include_c0;
  j["griffin_lim_iters"] = c.eval.griffin_lim_iters;
  return j;
}

}  // namespace drvc
