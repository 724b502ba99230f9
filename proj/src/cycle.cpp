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

#include "drvc/cycle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "drvc/checkpoint.hpp"

namespace drvc {

CycleNodes first_conversion_nodes(nn::GraphBinding& gb, VcModelApi& model, ad::NodeId a,
                                  ad::NodeId b, const CycleWiring& wiring) {
  CycleNodes n;
  n.a = a;
  n.b = b;
  n.a_content = model.encode_content(gb, a);
  n.b_content = model.encode_content(gb, b);
  n.a_style = model.encode_style(gb, a);
  n.b_style = model.encode_style(gb, b);
  // exchange the style information
  const ad::NodeId style_for_a = wiring.swap_first ? n.b_style : n.a_style;
  const ad::NodeId style_for_b = wiring.swap_first ? n.a_style : n.b_style;
  n.a_tilde = model.generate(gb, n.a_content, style_for_a);
  n.b_tilde = model.generate(gb, n.b_content, style_for_b);
  return n;
}

void second_conversion_nodes(nn::GraphBinding& gb, VcModelApi& model, CycleNodes& n,
                             const CycleWiring& wiring) {
  if (n.a_tilde < 0 || n.b_tilde < 0)
    throw ContractError("second_conversion: first conversion not completed");
  n.at_content = model.encode_content(gb, n.a_tilde);
  n.bt_content = model.encode_content(gb, n.b_tilde);
  n.at_style = model.encode_style(gb, n.a_tilde);
  n.bt_style = model.encode_style(gb, n.b_tilde);
  // swap the style information again
  const ad::NodeId style_for_a = wiring.swap_second ? n.bt_style : n.at_style;
  const ad::NodeId style_for_b = wiring.swap_second ? n.at_style : n.bt_style;
  n.a_hat = model.generate(gb, n.at_content, style_for_a);
  n.b_hat = model.generate(gb, n.bt_content, style_for_b);
  n.second_done = true;
}

namespace {

ad::NodeId single_mel_node(ad::Graph& g, const MelSpectrogram& mel) {
  return g.input(Tensor({1, mel.n_frames(), mel.n_mels()}, mel.frames.data));
}

MelSpectrogram mel_from_node(const ad::Graph& g, ad::NodeId id, const MelSpectrogram& like) {
  const Tensor& v = g.value(id);
  MelSpectrogram out;
  out.frames = Tensor({v.dim(1), v.dim(2)}, v.data);
  out.sample_rate = like.sample_rate;
  out.hop_length = like.hop_length;
  return out;
}

ContentEmbedding content_from_node(const ad::Graph& g, ad::NodeId id) {
  const Tensor& v = g.value(id);
  ContentEmbedding e;
  e.values = Tensor({v.dim(1), v.dim(2)}, v.data);
  return e;
}

StyleEmbedding style_from_node(const ad::Graph& g, ad::NodeId id) {
  const Tensor& v = g.value(id);
  StyleEmbedding e;
  e.values = Tensor({v.dim(1)}, v.data);
  return e;
}

void check_finite_outputs(const ad::Graph& g, std::initializer_list<ad::NodeId> ids,
                          const char* stage) {
  for (ad::NodeId id : ids) {
    if (!g.value(id).all_finite())
      throw DivergenceError(std::string(stage) + " produced a non-finite output");
  }
}

}  // namespace

CycleBatch first_conversion(VcModelApi& model, nn::ParamStore& params, const MelSpectrogram& a,
                            const MelSpectrogram& b, const CycleWiring& wiring) {
  if (a.n_frames() != b.n_frames())
    throw ContractError("first_conversion: inputs must share the segment length");
  ad::Graph g;
  nn::GraphBinding gb(g, params);
  CycleNodes n = first_conversion_nodes(gb, model, single_mel_node(g, a), single_mel_node(g, b),
                                        wiring);
  check_finite_outputs(g, {n.a_tilde, n.b_tilde}, "first conversion");

  CycleBatch batch;
  batch.a = a;
  batch.b = b;
  batch.a_content = content_from_node(g, n.a_content);
  batch.a_content.source_speaker = a.speaker_id;
  batch.b_content = content_from_node(g, n.b_content);
  batch.b_content.source_speaker = b.speaker_id;
  batch.a_style = style_from_node(g, n.a_style);
  batch.b_style = style_from_node(g, n.b_style);
  batch.a_tilde = mel_from_node(g, n.a_tilde, a);
  batch.a_tilde.speaker_id = b.speaker_id;  // converted into the target domain
  batch.a_tilde.utterance_id = a.utterance_id;
  batch.b_tilde = mel_from_node(g, n.b_tilde, b);
  batch.b_tilde.speaker_id = a.speaker_id;
  batch.b_tilde.utterance_id = b.utterance_id;
  return batch;
}

void second_conversion(VcModelApi& model, nn::ParamStore& params, CycleBatch& batch,
                       const CycleWiring& wiring) {
  if (batch.a_tilde.n_frames() == 0 || batch.b_tilde.n_frames() == 0)
    throw ContractError("second_conversion: first conversion not completed");
  ad::Graph g;
  nn::GraphBinding gb(g, params);
  CycleNodes n;
  n.a_tilde = single_mel_node(g, batch.a_tilde);
  n.b_tilde = single_mel_node(g, batch.b_tilde);
  second_conversion_nodes(gb, model, n, wiring);
  check_finite_outputs(g, {n.a_hat, n.b_hat}, "second conversion");

  batch.at_content = content_from_node(g, n.at_content);
  batch.bt_content = content_from_node(g, n.bt_content);
  batch.at_style = style_from_node(g, n.at_style);
  batch.bt_style = style_from_node(g, n.bt_style);
  batch.a_hat = mel_from_node(g, n.a_hat, batch.a);
  batch.a_hat.speaker_id = batch.a.speaker_id;
  batch.a_hat.utterance_id = batch.a.utterance_id;
  batch.b_hat = mel_from_node(g, n.b_hat, batch.b);
  batch.b_hat.speaker_id = batch.b.speaker_id;
  batch.b_hat.utterance_id = batch.b.utterance_id;
  batch.second_done = true;
}

double lr_schedule(int64_t epoch, const TrainingConfig& cfg) {
  if (epoch < 0) throw ContractError("lr_schedule: negative epoch");
  double lr;
  if (cfg.lr_decay_mode == "multiplicative") {
    lr = cfg.lr_initial * std::pow(1.0 - cfg.lr_decay_per_epoch, static_cast<double>(epoch));
  } else {
    lr = cfg.lr_initial - static_cast<double>(epoch) * cfg.lr_decay_per_epoch;
  }
  return std::max(lr, cfg.lr_floor);
}

void adam_step(nn::ParamStore& store, const std::vector<Tensor>& grads, double lr,
               const TrainingConfig& cfg, int64_t t) {
  if (static_cast<int>(grads.size()) != store.count())
    throw ContractError("adam_step: gradient list does not match parameter store");
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2, eps = cfg.adam_eps;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (int i = 0; i < store.count(); ++i) {
    auto& e = store.entry(i);
    const Tensor& g = grads[static_cast<size_t>(i)];
    for (size_t j = 0; j < e.value.data.size(); ++j) {
      const double gj = g.data[j];
      e.m.data[j] = b1 * e.m.data[j] + (1.0 - b1) * gj;
      e.v.data[j] = b2 * e.v.data[j] + (1.0 - b2) * gj * gj;
      const double m_hat = e.m.data[j] / bc1;
      const double v_hat = e.v.data[j] / bc2;
      e.value.data[j] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

LossReport compute_step_losses(DrvcModel& model, const Tensor& a, const Tensor& b,
                               const Tensor& label_a, const Tensor& label_b,
                               const TrainingConfig& cfg, double lambda_grl,
                               std::vector<Tensor>* grads) {
  ad::Graph g;
  nn::GraphBinding gb(g, model.params());
  const ad::NodeId an = g.input(a);
  const ad::NodeId bn = g.input(b);

  CycleNodes cn = first_conversion_nodes(gb, model, an, bn);
  check_finite_outputs(g, {cn.a_tilde, cn.b_tilde}, "first conversion");
  second_conversion_nodes(gb, model, cn);
  check_finite_outputs(g, {cn.a_hat, cn.b_hat}, "second conversion");

  LossReport report;
  report.enabled = cfg.toggles;
  report.lambda_grl = lambda_grl;

  const bool grl_on_disc = cfg.grl_placement == "discriminator" || cfg.grl_placement == "both";
  const bool grl_on_cls = cfg.grl_placement == "classifier" || cfg.grl_placement == "both";

  struct Term {
    ad::NodeId node;
    double weight;
  };
  std::vector<Term> terms;

  if (cfg.toggles.cycle) {
    const ad::NodeId cycle = recon_pair_loss(g, an, cn.a_hat, bn, cn.b_hat);
    report.cycle = g.value(cycle).data[0];
    terms.push_back({cycle, cfg.weights.w_cycle});
  }

  if (cfg.toggles.identity) {
    const ad::NodeId a_rec = model.generate(gb, cn.a_content, cn.a_style);
    const ad::NodeId b_rec = model.generate(gb, cn.b_content, cn.b_style);
    const ad::NodeId identity = recon_pair_loss(g, an, a_rec, bn, b_rec);
    report.identity = g.value(identity).data[0];
    terms.push_back({identity, cfg.weights.w_id});
  }

  if (cfg.toggles.adversarial) {
    // The GRL sits at the discriminator input, so the same backward pass that
    // trains D_v pushes reversed gradients into the generator. With the GRL
    // moved elsewhere the fake path is detached instead.
    const ad::NodeId fake_a = grl_on_disc ? g.grl(cn.a_tilde, lambda_grl) : g.detach(cn.a_tilde);
    const ad::NodeId fake_b = grl_on_disc ? g.grl(cn.b_tilde, lambda_grl) : g.detach(cn.b_tilde);
    const ad::NodeId logit_real_a = model.discriminate_voice(gb, an);
    const ad::NodeId logit_fake_a = model.discriminate_voice(gb, fake_a);
    const ad::NodeId logit_real_b = model.discriminate_voice(gb, bn);
    const ad::NodeId logit_fake_b = model.discriminate_voice(gb, fake_b);
    ad::NodeId adv = g.add(bce_logits_mean(g, logit_real_a, 1.0), bce_logits_mean(g, logit_fake_a, 0.0));
    adv = g.add(adv, bce_logits_mean(g, logit_real_b, 1.0));
    adv = g.add(adv, bce_logits_mean(g, logit_fake_b, 0.0));
    report.adversarial = g.value(adv).data[0];
    terms.push_back({adv, cfg.weights.w_adv});

    // Diagnostic: what a separate generator objective would read on the
    // batch-mean fake logits.
    auto mean_of = [&](ad::NodeId id) {
      const Tensor& v = g.value(id);
      double s = 0.0;
      for (double x : v.data) s += x;
      return s / static_cast<double>(v.numel());
    };
    report.adversarial_gen =
        adversarial_loss(mean_of(logit_real_a), mean_of(logit_fake_a), mean_of(logit_real_b),
                         mean_of(logit_fake_b))
            .second;
  }

  if (cfg.toggles.domain) {
    const ad::NodeId style_a = grl_on_cls ? g.grl(cn.a_style, lambda_grl) : cn.a_style;
    const ad::NodeId style_b = grl_on_cls ? g.grl(cn.b_style, lambda_grl) : cn.b_style;
    const ad::NodeId probs_a = model.classify_domain(gb, style_a);
    const ad::NodeId probs_b = model.classify_domain(gb, style_b);
    const ad::NodeId domain =
        domain_loss_node(g, probs_a, g.input(label_a), probs_b, g.input(label_b));
    report.domain = g.value(domain).data[0];
    terms.push_back({domain, cfg.weights.w_domain});
  }

  if (cfg.toggles.same_content || cfg.toggles.same_style) {
    ad::NodeId ref_content_a, ref_content_b, ref_style_a, ref_style_b;
    if (cfg.same_loss_stage == "second") {
      // Compare against the re-encodings of the cycle outputs, which carry
      // the original content and style after the double exchange.
      ref_content_a = model.encode_content(gb, cn.a_hat);
      ref_content_b = model.encode_content(gb, cn.b_hat);
      ref_style_a = model.encode_style(gb, cn.a_hat);
      ref_style_b = model.encode_style(gb, cn.b_hat);
    } else {
      // First-conversion reading: a-tilde carries a's content, while b-tilde
      // carries a's style (and vice versa).
      ref_content_a = cn.at_content;
      ref_content_b = cn.bt_content;
      ref_style_a = cn.bt_style;
      ref_style_b = cn.at_style;
    }
    if (cfg.toggles.same_content) {
      const ad::NodeId same_c =
          g.add(l1_mean(g, cn.a_content, ref_content_a), l1_mean(g, cn.b_content, ref_content_b));
      report.same_content = g.value(same_c).data[0];
      terms.push_back({same_c, cfg.weights.w_same});
    }
    if (cfg.toggles.same_style) {
      const ad::NodeId same_s =
          g.add(l1_mean(g, cn.a_style, ref_style_a), l1_mean(g, cn.b_style, ref_style_b));
      report.same_style = g.value(same_s).data[0];
      terms.push_back({same_s, cfg.weights.w_same});
    }
  }

  report.total = total_loss(report, cfg.weights);  // throws naming any non-finite term

  if (grads) {
    ad::NodeId total_node = g.input(Tensor::scalar(0.0));
    bool first = true;
    for (const auto& term : terms) {
      const ad::NodeId weighted = g.scale(term.node, term.weight);
      total_node = first ? weighted : g.add(total_node, weighted);
      first = false;
    }
    g.backward(total_node);
    grads->clear();
    grads->reserve(static_cast<size_t>(model.params().count()));
    for (int i = 0; i < model.params().count(); ++i) grads->push_back(gb.grad_of(i));
  }
  return report;
}

LossReport training_step(DrvcModel& model, const Tensor& a, const Tensor& b, const Tensor& label_a,
                         const Tensor& label_b, const TrainingConfig& cfg, double k, double lr,
                         int64_t adam_t) {
  const double lambda = grl_lambda_schedule(k);
  std::vector<Tensor> grads;
  LossReport report = compute_step_losses(model, a, b, label_a, label_b, cfg, lambda, &grads);
  for (int i = 0; i < model.params().count(); ++i) {
    if (!grads[static_cast<size_t>(i)].all_finite())
      throw DivergenceError("non-finite gradient in parameter group '" +
                            model.params().entry(i).name + "'");
  }
  adam_step(model.params(), grads, lr, cfg, adam_t);
  for (int i = 0; i < model.params().count(); ++i) {
    if (!model.params().entry(i).value.all_finite())
      throw DivergenceError("non-finite parameters in group '" + model.params().entry(i).name +
                            "' after update");
  }
  report.lr = lr;
  return report;
}

MelSpectrogram convert(DrvcModel& model, const MelSpectrogram& source_mel,
                       const MelSpectrogram& target_mel) {
  for (int i = 0; i < model.params().count(); ++i) {
    if (!model.params().entry(i).value.all_finite())
      throw ContractError("convert: model parameters are not finite (group '" +
                          model.params().entry(i).name + "')");
  }
  ad::Graph g;
  nn::GraphBinding gb(g, model.params());
  const ad::NodeId src = single_mel_node(g, source_mel);
  const ad::NodeId tgt = single_mel_node(g, target_mel);
  const ad::NodeId out =
      model.generate(gb, model.encode_content(gb, src), model.encode_style(gb, tgt));
  MelSpectrogram mel = mel_from_node(g, out, source_mel);
  mel.speaker_id = target_mel.speaker_id;
  mel.utterance_id = source_mel.utterance_id;
  return mel;
}

namespace {

std::string rng_to_string(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

void rng_from_string(Rng& rng, const std::string& s) {
  std::istringstream is(s);
  is >> rng;
  if (!is) throw IoError("could not restore RNG state from checkpoint");
}

struct Batch {
  Tensor a, b, label_a, label_b;
};

Batch stack_batch(PairSampler& sampler, int64_t batch_size, int64_t segment, int64_t n_mels,
                  int num_speakers) {
  Batch batch;
  batch.a = Tensor({batch_size, segment, n_mels});
  batch.b = Tensor({batch_size, segment, n_mels});
  batch.label_a = Tensor({batch_size, static_cast<int64_t>(num_speakers)});
  batch.label_b = Tensor({batch_size, static_cast<int64_t>(num_speakers)});
  for (int64_t i = 0; i < batch_size; ++i) {
    SampledPair pair = sampler.sample();
    if (pair.a.n_frames() != segment || pair.a.n_mels() != n_mels)
      throw ContractError("sampled segment has unexpected shape");
    std::copy(pair.a.frames.data.begin(), pair.a.frames.data.end(),
              batch.a.data.begin() + i * segment * n_mels);
    std::copy(pair.b.frames.data.begin(), pair.b.frames.data.end(),
              batch.b.data.begin() + i * segment * n_mels);
    batch.label_a.at(i, pair.label_a) = 1.0;
    batch.label_b.at(i, pair.label_b) = 1.0;
  }
  return batch;
}

}  // namespace

TrainResult run_training(DrvcModel& model, const ModelConfig& model_cfg, TrainingConfig train_cfg,
                         const TrainContext& ctx) {
  auto [features, feature_speaker] =
      load_train_features(ctx.manifest, ctx.feature_dir, ctx.stats);
  if (features.empty()) throw ConfigError("run_training: manifest has no train records");

  if (train_cfg.steps_per_epoch <= 0)
    train_cfg.steps_per_epoch = (static_cast<int64_t>(features.size()) + train_cfg.batch_size - 1) /
                                train_cfg.batch_size;
  const int64_t total_steps = train_cfg.epochs * train_cfg.steps_per_epoch;

  PairSampler sampler(ctx.manifest, std::move(features), feature_speaker,
                      train_cfg.segment_frames, ctx.crop_policy, train_cfg.seed);

  CheckpointMeta meta;
  meta.total_steps = total_steps;
  meta.speakers = ctx.manifest.speakers;
  meta.stats = ctx.stats;
  meta.config_json = ctx.config_snapshot;

  int64_t global_step = 0;
  if (ctx.resume) {
    if (!std::filesystem::exists(ctx.checkpoint_path))
      throw ConfigError("resume requested but checkpoint does not exist: " +
                        ctx.checkpoint_path.string());
    CheckpointMeta loaded = load_checkpoint(ctx.checkpoint_path, &model.params());
    rng_from_string(sampler.rng(), loaded.sampler_rng_state);
    global_step = loaded.global_step;
    meta.total_steps = loaded.total_steps > 0 ? loaded.total_steps : total_steps;
    log::info("resumed from step " + std::to_string(global_step));
  }

  const auto checkpoint_dir = ctx.checkpoint_path.parent_path();
  if (!checkpoint_dir.empty()) std::filesystem::create_directories(checkpoint_dir);
  auto save_state = [&](int64_t step_now) {
    meta.global_step = step_now;
    meta.epoch = train_cfg.steps_per_epoch > 0 ? step_now / train_cfg.steps_per_epoch : 0;
    meta.sampler_rng_state = rng_to_string(sampler.rng());
    save_checkpoint(ctx.checkpoint_path, model.params(), meta);
  };

  std::ofstream log_file;
  if (!ctx.log_path.empty()) {
    log_file.open(ctx.log_path, ctx.resume ? std::ios::app : std::ios::trunc);
    if (!log_file) throw IoError("cannot open training log: " + ctx.log_path.string());
  }

  TrainResult result;
  if (total_steps == 0) {
    save_state(0);
    return result;
  }

  const int64_t n_mels = model_cfg.n_mels;
  while (global_step < meta.total_steps) {
    const int64_t epoch = global_step / train_cfg.steps_per_epoch;
    const double lr = lr_schedule(epoch, train_cfg);
    const double k = static_cast<double>(global_step) / static_cast<double>(meta.total_steps);

    Batch batch = stack_batch(sampler, train_cfg.batch_size, train_cfg.segment_frames, n_mels,
                              model_cfg.num_speakers);
    LossReport report;
    try {
      report = training_step(model, batch.a, batch.b, batch.label_a, batch.label_b, train_cfg, k,
                             lr, global_step + 1);
    } catch (const DivergenceError&) {
      // keep the last good checkpoint on divergence
      save_state(global_step);
      throw;
    }
    report.step = global_step;
    report.epoch = epoch;
    if (log_file) log_file << report.to_jsonl() << "\n";

    ++global_step;
    result.last_report = report;

    const bool epoch_done = global_step % train_cfg.steps_per_epoch == 0;
    if (epoch_done) {
      const int64_t finished_epoch = global_step / train_cfg.steps_per_epoch;  // 1-based
      if (train_cfg.checkpoint_every_epochs > 0 &&
          (finished_epoch % train_cfg.checkpoint_every_epochs == 0 ||
           global_step == meta.total_steps)) {
        save_state(global_step);
        char tag[32];
        std::snprintf(tag, sizeof(tag), "epoch_%04lld.ckpt", static_cast<long long>(finished_epoch));
        std::filesystem::copy_file(ctx.checkpoint_path, checkpoint_dir / tag,
                                   std::filesystem::copy_options::overwrite_existing);
      }
      if (log_file) log_file.flush();
    }
    if (ctx.interrupted && ctx.interrupted()) {
      save_state(global_step);
      log::info("interrupted; checkpoint written at step " + std::to_string(global_step));
      break;
    }
  }

  result.epoch = global_step / train_cfg.steps_per_epoch;
  result.global_step = global_step;
  return result;
}

}  // namespace drvc
