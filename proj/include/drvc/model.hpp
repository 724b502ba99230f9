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

#ifndef DRVC_MODEL_HPP
#define DRVC_MODEL_HPP

#include <memory>
#include <string>
#include <vector>

#include "drvc/mel.hpp"
#include "drvc/nn.hpp"

namespace drvc {

// Time-varying content code [T' x d_c]; T' equals the input frame count
// (stride-1 stack).
struct ContentEmbedding {
  Tensor values;
  std::string source_speaker;
};

// Time-invariant style code [d_s], fixed dimension for any input length.
struct StyleEmbedding {
  Tensor values;
};

struct GrlConfig {
  double lambda_value = 0.0;
};

// lambda(k) = 2 / (1 + exp(-10 k)) - 1, monotone from 0 toward 1 over the
// training progress k in [0, 1]; out-of-range k is clamped with a warning.
double grl_lambda_schedule(double k);

// Identity mapping; the gradient-reversing counterpart lives on the graph.
Tensor grl_apply(const Tensor& x, const GrlConfig& cfg);

enum class StyleConditioning { kConcat, kAdaptive };

struct ModelConfig {
  int n_mels = 80;
  int d_c = 128;             // content code dimension
  int d_s = 128;             // style code dimension
  int content_channels = 512;
  int content_hidden = 512;  // recurrent hidden size in encoder/generator
  int style_channels = 256;
  int dv_channels = 256;     // voice discriminator conv stem
  int head_hidden = 256;     // MLP heads: two hidden layers
  int conv_kernel = 5;
  int num_speakers = 2;
  double leaky_slope = 0.2;
  StyleConditioning style_conditioning = StyleConditioning::kConcat;
};

// Abstract view of the three conversion components so the cycle wiring can be
// exercised against closed-form stand-ins in tests.
class VcModelApi {
 public:
  virtual ~VcModelApi() = default;
  // mel [B,T,M] -> content [B,T,d_c]
  virtual ad::NodeId encode_content(nn::GraphBinding& gb, ad::NodeId mel) = 0;
  // mel [B,T,M] -> style [B,d_s]
  virtual ad::NodeId encode_style(nn::GraphBinding& gb, ad::NodeId mel) = 0;
  // content [B,T,d_c] + style [B,d_s] -> mel [B,T,M]
  virtual ad::NodeId generate(nn::GraphBinding& gb, ad::NodeId content, ad::NodeId style) = 0;
};

// The five trainable components. Parameter names are prefixed per component
// (e_con, e_s, gen, d_v, d_s) so checkpoints and the optimizer can report
// groups.
class DrvcModel : public VcModelApi {
 public:
  DrvcModel(const ModelConfig& cfg, Rng& rng);

  ad::NodeId encode_content(nn::GraphBinding& gb, ad::NodeId mel) override;
  ad::NodeId encode_style(nn::GraphBinding& gb, ad::NodeId mel) override;
  ad::NodeId generate(nn::GraphBinding& gb, ad::NodeId content, ad::NodeId style) override;
  // mel [B,T,M] -> logits [B,1]
  ad::NodeId discriminate_voice(nn::GraphBinding& gb, ad::NodeId mel);
  // style [B,d_s] -> probabilities [B,K]
  ad::NodeId classify_domain(nn::GraphBinding& gb, ad::NodeId style);

  // Inference-mode value wrappers over single utterances.
  ContentEmbedding encode_content(const MelSpectrogram& mel);
  StyleEmbedding encode_style(const MelSpectrogram& mel);
  MelSpectrogram generate(const ContentEmbedding& content, const StyleEmbedding& style);
  double discriminate_voice(const MelSpectrogram& mel);
  std::vector<double> classify_domain(const StyleEmbedding& style);

  nn::ParamStore& params() { return store_; }
  const ModelConfig& config() const { return cfg_; }

 private:
  ad::NodeId mel_node(ad::Graph& g, const MelSpectrogram& mel) const;

  ModelConfig cfg_;
  nn::ParamStore store_;

  // content encoder: LSTM head, three convs, LSTM tail, linear projection
  nn::Lstm ec_lstm_in_, ec_lstm_out_;
  nn::Conv1d ec_conv1_, ec_conv2_, ec_conv3_;
  nn::Linear ec_proj_;

  // style encoder: conv stack, average-over-time pooling, linear
  nn::Conv1d es_conv1_, es_conv2_, es_conv3_;
  nn::Linear es_proj_;

  // generator mirrors the content encoder topology
  nn::Lstm gen_lstm_in_, gen_lstm_out_;
  nn::Conv1d gen_conv1_, gen_conv2_, gen_conv3_;
  nn::Linear gen_proj_;
  nn::Linear gen_film1_, gen_film2_, gen_film3_;  // adaptive conditioning (optional)

  // voice discriminator: conv stem, time pooling, two-hidden-layer MLP
  nn::Conv1d dv_conv1_, dv_conv2_;
  nn::Linear dv_fc1_, dv_fc2_, dv_out_;

  // domain classifier: two-hidden-layer MLP over style codes
  nn::Linear ds_fc1_, ds_fc2_, ds_out_;
};

}  // namespace drvc

#endif  // DRVC_MODEL_HPP
