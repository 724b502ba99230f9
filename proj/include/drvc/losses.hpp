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

#ifndef DRVC_LOSSES_HPP
#define DRVC_LOSSES_HPP

#include <string>
#include <utility>

#include "drvc/graph.hpp"
#include "drvc/model.hpp"

namespace drvc {

// Weighted-total coefficients; defaults are the published training weights.
struct LossWeights {
  double w_cycle = 5.0;
  double w_id = 2.0;
  double w_adv = 1.0;
  double w_domain = 10.0;
  double w_same = 50.0;
};

// Per-term ablation switches; a disabled term contributes nothing to the
// total and no gradient flows through it.
struct LossToggles {
  bool cycle = true;
  bool identity = true;
  bool domain = true;
  bool same_style = true;
  bool same_content = true;
  bool adversarial = true;

  // Accepts the CLI ablation names: cycle, identity, domain, same-style,
  // same-content, adversarial.
  void ablate(const std::string& name);
};

struct LossReport {
  double cycle = 0.0;
  double identity = 0.0;
  double same_content = 0.0;
  double same_style = 0.0;
  double domain = 0.0;
  double adversarial = 0.0;      // discriminator term of the adversarial loss
  double adversarial_gen = 0.0;  // diagnostic only; generator side via GRL
  double total = 0.0;
  double lambda_grl = 0.0;
  double lr = 0.0;
  int64_t step = 0;
  int64_t epoch = 0;
  LossToggles enabled;

  std::string to_jsonl() const;
};

// Logits are clamped to this range before any binary cross-entropy.
constexpr double kLogitClamp = 30.0;
// Probability floor applied before logarithms.
constexpr double kProbFloor = 1e-12;

// --- graph builders (used by the training step) ---

// mean |a - b| over all elements
ad::NodeId l1_mean(ad::Graph& g, ad::NodeId a, ad::NodeId b);
// mean-per-element L1 of both reconstruction pairs, summed
ad::NodeId recon_pair_loss(ad::Graph& g, ad::NodeId a, ad::NodeId a_hat, ad::NodeId b,
                           ad::NodeId b_hat);
// -1/2 (E[sum y_a log p_a] + E[sum y_b log p_b]), expectation over the batch
ad::NodeId domain_loss_node(ad::Graph& g, ad::NodeId probs_a, ad::NodeId labels_a,
                            ad::NodeId probs_b, ad::NodeId labels_b);
// mean over the batch of BCE-with-logits toward target (1 real, 0 fake)
ad::NodeId bce_logits_mean(ad::Graph& g, ad::NodeId logits, double target);

// --- value-level operations ---

double same_loss_content(const ContentEmbedding& orig, const ContentEmbedding& reenc);
double same_loss_style(const StyleEmbedding& orig, const StyleEmbedding& reenc);
double domain_loss(const std::vector<double>& probs_a, const std::vector<double>& label_a,
                   const std::vector<double>& probs_b, const std::vector<double>& label_b);
double cycle_loss(const MelSpectrogram& a, const MelSpectrogram& a_hat, const MelSpectrogram& b,
                  const MelSpectrogram& b_hat);
double identity_loss(const MelSpectrogram& a, const MelSpectrogram& a_rec, const MelSpectrogram& b,
                     const MelSpectrogram& b_rec);
// Returns (discriminator term, generator term). The generator term is
// reported for logging; its gradient reaches the generator through the
// gradient reversal layer rather than a separate objective.
std::pair<double, double> adversarial_loss(double logit_real_a, double logit_fake_a,
                                           double logit_real_b, double logit_fake_b);

// Weighted total over the enabled terms; throws DivergenceError naming the
// first non-finite term.
double total_loss(const LossReport& report, const LossWeights& weights);

}  // namespace drvc

#endif  // DRVC_LOSSES_HPP
