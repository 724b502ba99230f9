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

#include "drvc/losses.hpp"

#include <cmath>
#include <sstream>

namespace drvc {

void LossToggles::ablate(const std::string& name) {
  if (name == "cycle") cycle = false;
  else if (name == "identity") identity = false;
  else if (name == "domain") domain = false;
  else if (name == "same-style") same_style = false;
  else if (name == "same-content") same_content = false;
  else if (name == "adversarial") adversarial = false;
  else
    throw ConfigError("unknown loss name for ablation: '" + name +
                      "' (expected cycle, identity, domain, same-style, same-content, "
                      "adversarial)");
}

std::string LossReport::to_jsonl() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"step\":" << step << ",\"epoch\":" << epoch << ",\"cycle\":" << cycle
     << ",\"identity\":" << identity << ",\"same_content\":" << same_content
     << ",\"same_style\":" << same_style << ",\"domain\":" << domain
     << ",\"adversarial\":" << adversarial << ",\"total\":" << total
     << ",\"lambda_grl\":" << lambda_grl << ",\"lr\":" << lr << "}";
  return os.str();
}

ad::NodeId l1_mean(ad::Graph& g, ad::NodeId a, ad::NodeId b) {
  if (!g.value(a).same_shape(g.value(b))) throw ContractError("l1 loss: shape mismatch");
  return g.mean_all(g.abs_op(g.sub(a, b)));
}

ad::NodeId recon_pair_loss(ad::Graph& g, ad::NodeId a, ad::NodeId a_hat, ad::NodeId b,
                           ad::NodeId b_hat) {
  return g.add(l1_mean(g, a_hat, a), l1_mean(g, b_hat, b));
}

ad::NodeId domain_loss_node(ad::Graph& g, ad::NodeId probs_a, ad::NodeId labels_a,
                            ad::NodeId probs_b, ad::NodeId labels_b) {
  const Tensor& pa = g.value(probs_a);
  if (!pa.same_shape(g.value(labels_a)) || !g.value(probs_b).same_shape(g.value(labels_b)))
    throw ContractError("domain loss: probability/label shape mismatch");
  const double batch = static_cast<double>(pa.rows());
  ad::NodeId ce_a = g.sum_all(g.mul(labels_a, g.safe_log(probs_a, kProbFloor)));
  ad::NodeId ce_b = g.sum_all(g.mul(labels_b, g.safe_log(probs_b, kProbFloor)));
  return g.scale(g.add(ce_a, ce_b), -0.5 / batch);
}

ad::NodeId bce_logits_mean(ad::Graph& g, ad::NodeId logits, double target) {
  // BCE(z, y) = softplus(z) - y*z, numerically stable in both tails.
  ad::NodeId z = g.clamp(logits, -kLogitClamp, kLogitClamp);
  ad::NodeId loss = g.softplus(z);
  if (target != 0.0) loss = g.sub(loss, g.scale(z, target));
  return g.mean_all(loss);
}

namespace {

double tensor_l1_mean(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) throw ContractError(std::string(what) + ": shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) acc += std::abs(a.data[i] - b.data[i]);
  return acc / static_cast<double>(a.data.size());
}

void check_one_hot(const std::vector<double>& label, const char* what) {
  int ones = 0;
  for (double v : label) {
    if (v == 1.0) ++ones;
    else if (v != 0.0)
      throw ContractError(std::string(what) + ": label is not one-hot");
  }
  if (ones != 1) throw ContractError(std::string(what) + ": label is not one-hot");
}

double cross_entropy(const std::vector<double>& probs, const std::vector<double>& label) {
  if (probs.size() != label.size())
    throw ContractError("domain_loss: probability/label size mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < probs.size(); ++i)
    acc += label[i] * std::log(std::max(probs[i], kProbFloor));
  return acc;
}

double bce_logit(double z, double target) {
  z = std::min(std::max(z, -kLogitClamp), kLogitClamp);
  const double sp = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
  return sp - target * z;
}

}  // namespace

double same_loss_content(const ContentEmbedding& orig, const ContentEmbedding& reenc) {
  return tensor_l1_mean(orig.values, reenc.values, "same_loss_content");
}

double same_loss_style(const StyleEmbedding& orig, const StyleEmbedding& reenc) {
  return tensor_l1_mean(orig.values, reenc.values, "same_loss_style");
}

double domain_loss(const std::vector<double>& probs_a, const std::vector<double>& label_a,
                   const std::vector<double>& probs_b, const std::vector<double>& label_b) {
  check_one_hot(label_a, "domain_loss");
  check_one_hot(label_b, "domain_loss");
  return -0.5 * (cross_entropy(probs_a, label_a) + cross_entropy(probs_b, label_b));
}

double cycle_loss(const MelSpectrogram& a, const MelSpectrogram& a_hat, const MelSpectrogram& b,
                  const MelSpectrogram& b_hat) {
  return tensor_l1_mean(a_hat.frames, a.frames, "cycle_loss") +
         tensor_l1_mean(b_hat.frames, b.frames, "cycle_loss");
}

double identity_loss(const MelSpectrogram& a, const MelSpectrogram& a_rec, const MelSpectrogram& b,
                     const MelSpectrogram& b_rec) {
  return tensor_l1_mean(a_rec.frames, a.frames, "identity_loss") +
         tensor_l1_mean(b_rec.frames, b.frames, "identity_loss");
}

std::pair<double, double> adversarial_loss(double logit_real_a, double logit_fake_a,
                                           double logit_real_b, double logit_fake_b) {
  const double disc = bce_logit(logit_real_a, 1.0) + bce_logit(logit_fake_a, 0.0) +
                      bce_logit(logit_real_b, 1.0) + bce_logit(logit_fake_b, 0.0);
  // What a separate non-saturating generator objective would read; reported
  // for logging only.
  const double gen = bce_logit(logit_fake_a, 1.0) + bce_logit(logit_fake_b, 1.0);
  return {disc, gen};
}

double total_loss(const LossReport& report, const LossWeights& weights) {
  const LossToggles& on = report.enabled;
  struct Term {
    const char* name;
    bool enabled;
    double weight;
    double value;
  };
  const Term terms[] = {
      {"cycle", on.cycle, weights.w_cycle, report.cycle},
      {"identity", on.identity, weights.w_id, report.identity},
      {"adversarial", on.adversarial, weights.w_adv, report.adversarial},
      {"domain", on.domain, weights.w_domain, report.domain},
      {"same_content", on.same_content, weights.w_same, report.same_content},
      {"same_style", on.same_style, weights.w_same, report.same_style},
  };
  double total = 0.0;
  for (const auto& t : terms) {
    if (!t.enabled) continue;
    if (!std::isfinite(t.value))
      throw DivergenceError(std::string("total_loss: non-finite term '") + t.name + "'");
    total += t.weight * t.value;
  }
  return total;
}

}  // namespace drvc
