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

#include "drvc/model.hpp"

#include <cmath>

namespace drvc {

double grl_lambda_schedule(double k) {
  if (k < 0.0 || k > 1.0) {
    log::warn("grl_lambda_schedule: progress " + std::to_string(k) + " outside [0,1], clamping");
    k = std::min(std::max(k, 0.0), 1.0);
  }
  return 2.0 / (1.0 + std::exp(-10.0 * k)) - 1.0;
}

Tensor grl_apply(const Tensor& x, const GrlConfig&) { return x; }

DrvcModel::DrvcModel(const ModelConfig& cfg, Rng& rng) : cfg_(cfg) {
  const int64_t m = cfg.n_mels;
  const int64_t ch = cfg.content_channels;
  const int64_t hid = cfg.content_hidden;
  const int64_t k = cfg.conv_kernel;

  ec_lstm_in_ = nn::Lstm::create(store_, "e_con.lstm_in", m, hid, rng);
  ec_conv1_ = nn::Conv1d::create(store_, "e_con.conv1", hid, ch, k, rng);
  ec_conv2_ = nn::Conv1d::create(store_, "e_con.conv2", ch, ch, k, rng);
  ec_conv3_ = nn::Conv1d::create(store_, "e_con.conv3", ch, ch, k, rng);
  ec_lstm_out_ = nn::Lstm::create(store_, "e_con.lstm_out", ch, hid, rng);
  ec_proj_ = nn::Linear::create(store_, "e_con.proj", hid, cfg.d_c, rng);

  const int64_t sch = cfg.style_channels;
  es_conv1_ = nn::Conv1d::create(store_, "e_s.conv1", m, sch, k, rng);
  es_conv2_ = nn::Conv1d::create(store_, "e_s.conv2", sch, sch, k, rng);
  es_conv3_ = nn::Conv1d::create(store_, "e_s.conv3", sch, sch, k, rng);
  es_proj_ = nn::Linear::create(store_, "e_s.proj", sch, cfg.d_s, rng);

  const int64_t gen_in =
      cfg.style_conditioning == StyleConditioning::kConcat ? cfg.d_c + cfg.d_s : cfg.d_c;
  gen_lstm_in_ = nn::Lstm::create(store_, "gen.lstm_in", gen_in, hid, rng);
  gen_conv1_ = nn::Conv1d::create(store_, "gen.conv1", hid, ch, k, rng);
  gen_conv2_ = nn::Conv1d::create(store_, "gen.conv2", ch, ch, k, rng);
  gen_conv3_ = nn::Conv1d::create(store_, "gen.conv3", ch, ch, k, rng);
  gen_lstm_out_ = nn::Lstm::create(store_, "gen.lstm_out", ch, hid, rng);
  gen_proj_ = nn::Linear::create(store_, "gen.proj", hid, m, rng);
  if (cfg.style_conditioning == StyleConditioning::kAdaptive) {
    gen_film1_ = nn::Linear::create(store_, "gen.film1", cfg.d_s, 2 * ch, rng);
    gen_film2_ = nn::Linear::create(store_, "gen.film2", cfg.d_s, 2 * ch, rng);
    gen_film3_ = nn::Linear::create(store_, "gen.film3", cfg.d_s, 2 * ch, rng);
  }

  const int64_t dvc = cfg.dv_channels;
  const int64_t hh = cfg.head_hidden;
  dv_conv1_ = nn::Conv1d::create(store_, "d_v.conv1", m, dvc, k, rng);
  dv_conv2_ = nn::Conv1d::create(store_, "d_v.conv2", dvc, dvc, k, rng);
  dv_fc1_ = nn::Linear::create(store_, "d_v.fc1", dvc, hh, rng);
  dv_fc2_ = nn::Linear::create(store_, "d_v.fc2", hh, hh, rng);
  dv_out_ = nn::Linear::create(store_, "d_v.out", hh, 1, rng);

  ds_fc1_ = nn::Linear::create(store_, "d_s.fc1", cfg.d_s, hh, rng);
  ds_fc2_ = nn::Linear::create(store_, "d_s.fc2", hh, hh, rng);
  ds_out_ = nn::Linear::create(store_, "d_s.out", hh, cfg.num_speakers, rng);
}

ad::NodeId DrvcModel::encode_content(nn::GraphBinding& gb, ad::NodeId mel) {
  auto& g = gb.graph();
  const Tensor& v = g.value(mel);
  if (v.rank() != 3 || v.dim(2) != cfg_.n_mels)
    throw ContractError("encode_content: expected [B,T," + std::to_string(cfg_.n_mels) + "] input");
  const int64_t b = v.dim(0), t = v.dim(1);
  const double slope = cfg_.leaky_slope;

  ad::NodeId h = ec_lstm_in_.forward(gb, mel);
  h = g.leaky_relu(ec_conv1_.forward(gb, h), slope);
  h = g.leaky_relu(ec_conv2_.forward(gb, h), slope);
  h = g.leaky_relu(ec_conv3_.forward(gb, h), slope);
  h = ec_lstm_out_.forward(gb, h);
  ad::NodeId flat = ec_proj_.forward(gb, g.reshape(h, {b * t, cfg_.content_hidden}));
  return g.reshape(flat, {b, t, cfg_.d_c});
}

ad::NodeId DrvcModel::encode_style(nn::GraphBinding& gb, ad::NodeId mel) {
  auto& g = gb.graph();
  const Tensor& v = g.value(mel);
  if (v.rank() != 3 || v.dim(2) != cfg_.n_mels)
    throw ContractError("encode_style: expected [B,T," + std::to_string(cfg_.n_mels) + "] input");
  const double slope = cfg_.leaky_slope;

  ad::NodeId h = g.leaky_relu(es_conv1_.forward(gb, mel), slope);
  h = g.leaky_relu(es_conv2_.forward(gb, h), slope);
  h = g.leaky_relu(es_conv3_.forward(gb, h), slope);
  return es_proj_.forward(gb, g.mean_time(h));
}

ad::NodeId DrvcModel::generate(nn::GraphBinding& gb, ad::NodeId content, ad::NodeId style) {
  auto& g = gb.graph();
  const Tensor& vc = g.value(content);
  const Tensor& vs = g.value(style);
  if (vc.rank() != 3 || vc.dim(2) != cfg_.d_c)
    throw ContractError("generate: content shape mismatch");
  if (vs.rank() != 2 || vs.dim(1) != cfg_.d_s || vs.dim(0) != vc.dim(0))
    throw ContractError("generate: style shape mismatch");
  const int64_t b = vc.dim(0), t = vc.dim(1);
  const int64_t ch = cfg_.content_channels;
  const double slope = cfg_.leaky_slope;
  const bool adaptive = cfg_.style_conditioning == StyleConditioning::kAdaptive;

  ad::NodeId x;
  if (adaptive) {
    x = content;
  } else {
    // style vector repeated at every content timestep
    ad::NodeId style_t = g.broadcast_time(style, t);
    x = g.reshape(g.concat_cols(g.reshape(content, {b * t, cfg_.d_c}),
                                g.reshape(style_t, {b * t, cfg_.d_s})),
                  {b, t, cfg_.d_c + cfg_.d_s});
  }

  // per-channel scale/shift from the style code, broadcast over time
  auto film = [&](ad::NodeId h, const nn::Linear& lin) {
    ad::NodeId gb2 = lin.forward(gb, style);  // [B, 2*ch]
    ad::NodeId gamma = g.broadcast_time(g.slice_cols(gb2, 0, ch), t);
    ad::NodeId beta = g.broadcast_time(g.slice_cols(gb2, ch, ch), t);
    ad::NodeId one = g.input(Tensor::full({b, t, ch}, 1.0));
    return g.add(g.mul(h, g.add(one, gamma)), beta);
  };

  ad::NodeId h = gen_lstm_in_.forward(gb, x);
  h = gen_conv1_.forward(gb, h);
  if (adaptive) h = film(h, gen_film1_);
  h = g.leaky_relu(h, slope);
  h = gen_conv2_.forward(gb, h);
  if (adaptive) h = film(h, gen_film2_);
  h = g.leaky_relu(h, slope);
  h = gen_conv3_.forward(gb, h);
  if (adaptive) h = film(h, gen_film3_);
  h = g.leaky_relu(h, slope);
  h = gen_lstm_out_.forward(gb, h);
  ad::NodeId flat = gen_proj_.forward(gb, g.reshape(h, {b * t, cfg_.content_hidden}));
  return g.reshape(flat, {b, t, cfg_.n_mels});
}

ad::NodeId DrvcModel::discriminate_voice(nn::GraphBinding& gb, ad::NodeId mel) {
  auto& g = gb.graph();
  const Tensor& v = g.value(mel);
  if (v.rank() != 3 || v.dim(2) != cfg_.n_mels)
    throw ContractError("discriminate_voice: expected [B,T," + std::to_string(cfg_.n_mels) +
                        "] input");
  const double slope = cfg_.leaky_slope;
  ad::NodeId h = g.leaky_relu(dv_conv1_.forward(gb, mel), slope);
  h = g.leaky_relu(dv_conv2_.forward(gb, h), slope);
  h = g.mean_time(h);
  h = g.leaky_relu(dv_fc1_.forward(gb, h), slope);
  h = g.leaky_relu(dv_fc2_.forward(gb, h), slope);
  return dv_out_.forward(gb, h);
}

ad::NodeId DrvcModel::classify_domain(nn::GraphBinding& gb, ad::NodeId style) {
  auto& g = gb.graph();
  const Tensor& v = g.value(style);
  if (v.rank() != 2 || v.dim(1) != cfg_.d_s)
    throw ContractError("classify_domain: expected [B," + std::to_string(cfg_.d_s) + "] input");
  const double slope = cfg_.leaky_slope;
  ad::NodeId h = g.leaky_relu(ds_fc1_.forward(gb, style), slope);
  h = g.leaky_relu(ds_fc2_.forward(gb, h), slope);
  return g.softmax_rows(ds_out_.forward(gb, h));
}

ad::NodeId DrvcModel::mel_node(ad::Graph& g, const MelSpectrogram& mel) const {
  if (mel.n_mels() != cfg_.n_mels)
    throw ContractError("model: mel bin count " + std::to_string(mel.n_mels()) +
                        " does not match configured " + std::to_string(cfg_.n_mels));
  Tensor t({1, mel.n_frames(), mel.n_mels()}, mel.frames.data);
  return g.input(std::move(t));
}

ContentEmbedding DrvcModel::encode_content(const MelSpectrogram& mel) {
  ad::Graph g;
  nn::GraphBinding gb(g, store_);
  ad::NodeId out = encode_content(gb, mel_node(g, mel));
  const Tensor& v = g.value(out);
  ContentEmbedding emb;
  emb.values = Tensor({v.dim(1), v.dim(2)}, v.data);
  emb.source_speaker = mel.speaker_id;
  return emb;
}

StyleEmbedding DrvcModel::encode_style(const MelSpectrogram& mel) {
  ad::Graph g;
  nn::GraphBinding gb(g, store_);
  ad::NodeId out = encode_style(gb, mel_node(g, mel));
  const Tensor& v = g.value(out);
  StyleEmbedding emb;
  emb.values = Tensor({v.dim(1)}, v.data);
  return emb;
}

MelSpectrogram DrvcModel::generate(const ContentEmbedding& content, const StyleEmbedding& style) {
  ad::Graph g;
  nn::GraphBinding gb(g, store_);
  const int64_t t = content.values.dim(0);
  ad::NodeId c = g.input(Tensor({1, t, cfg_.d_c}, content.values.data));
  ad::NodeId s = g.input(Tensor({1, cfg_.d_s}, style.values.data));
  ad::NodeId out = generate(gb, c, s);
  const Tensor& v = g.value(out);
  MelSpectrogram mel;
  mel.frames = Tensor({v.dim(1), v.dim(2)}, v.data);
  return mel;
}

double DrvcModel::discriminate_voice(const MelSpectrogram& mel) {
  ad::Graph g;
  nn::GraphBinding gb(g, store_);
  ad::NodeId out = discriminate_voice(gb, mel_node(g, mel));
  return g.value(out).data[0];
}

std::vector<double> DrvcModel::classify_domain(const StyleEmbedding& style) {
  ad::Graph g;
  nn::GraphBinding gb(g, store_);
  ad::NodeId s = g.input(Tensor({1, cfg_.d_s}, style.values.data));
  ad::NodeId out = classify_domain(gb, s);
  return g.value(out).data;
}

}  // namespace drvc
