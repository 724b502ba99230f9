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

#include "drvc/nn.hpp"

#include <cmath>

namespace drvc::nn {

int ParamStore::add(const std::string& name, std::vector<int64_t> shape) {
  if (index_.count(name)) throw ContractError("param store: duplicate name " + name);
  entries_.push_back(Entry{name, Tensor(shape), Tensor(shape), Tensor(shape)});
  const int idx = static_cast<int>(entries_.size() - 1);
  index_[name] = idx;
  return idx;
}

int ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

int64_t ParamStore::total_params() const {
  int64_t n = 0;
  for (const auto& e : entries_) n += e.value.numel();
  return n;
}

ad::NodeId GraphBinding::of(int entry_idx) {
  ad::NodeId& id = ids_[static_cast<size_t>(entry_idx)];
  if (id < 0) id = g_.param(store_.entry(entry_idx).value);
  return id;
}

Tensor GraphBinding::grad_of(int entry_idx) const {
  const ad::NodeId id = ids_[static_cast<size_t>(entry_idx)];
  if (id < 0) return Tensor::zeros(store_.entry(entry_idx).value.shape);
  return g_.grad(id);
}

void init_uniform(Tensor& t, int64_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.data) v = dist(rng);
}

Linear Linear::create(ParamStore& store, const std::string& name, int64_t in, int64_t out, Rng& rng) {
  Linear l;
  l.in = in;
  l.out = out;
  l.w = store.add(name + ".w", {in, out});
  l.b = store.add(name + ".b", {out});
  init_uniform(store.entry(l.w).value, in, rng);
  return l;
}

ad::NodeId Linear::forward(GraphBinding& gb, ad::NodeId x) const {
  auto& g = gb.graph();
  return g.add_bias(g.matmul(x, gb.of(w)), gb.of(b));
}

Conv1d Conv1d::create(ParamStore& store, const std::string& name, int64_t in, int64_t out, int64_t k,
                      Rng& rng) {
  Conv1d c;
  c.in = in;
  c.out = out;
  c.k = k;
  c.w = store.add(name + ".w", {k * in, out});
  c.b = store.add(name + ".b", {out});
  init_uniform(store.entry(c.w).value, k * in, rng);
  return c;
}

ad::NodeId Conv1d::forward(GraphBinding& gb, ad::NodeId x) const {
  auto& g = gb.graph();
  const Tensor& vx = g.value(x);
  const int64_t batch = vx.dim(0), t_len = vx.dim(1);
  ad::NodeId cols = g.im2col_time(x, k);
  ad::NodeId y = g.add_bias(g.matmul(cols, gb.of(w)), gb.of(b));
  return g.reshape(y, {batch, t_len, out});
}

Lstm Lstm::create(ParamStore& store, const std::string& name, int64_t in, int64_t hidden, Rng& rng) {
  Lstm l;
  l.in = in;
  l.hidden = hidden;
  l.wx = store.add(name + ".wx", {in, 4 * hidden});
  l.wh = store.add(name + ".wh", {hidden, 4 * hidden});
  l.b = store.add(name + ".b", {4 * hidden});
  init_uniform(store.entry(l.wx).value, in, rng);
  init_uniform(store.entry(l.wh).value, hidden, rng);
  return l;
}

ad::NodeId Lstm::forward(GraphBinding& gb, ad::NodeId x) const {
  auto& g = gb.graph();
  const Tensor& vx = g.value(x);
  const int64_t batch = vx.dim(0), t_len = vx.dim(1);
  // Input projections for all timesteps in one matmul.
  ad::NodeId xw = g.add_bias(g.matmul(g.reshape(x, {batch * t_len, in}), gb.of(wx)), gb.of(b));
  xw = g.reshape(xw, {batch, t_len, 4 * hidden});

  ad::NodeId h = g.input(Tensor::zeros({batch, hidden}));
  ad::NodeId c = g.input(Tensor::zeros({batch, hidden}));
  std::vector<ad::NodeId> hs;
  hs.reserve(static_cast<size_t>(t_len));
  for (int64_t t = 0; t < t_len; ++t) {
    ad::NodeId gates = g.add(g.time_slice(xw, t), g.matmul(h, gb.of(wh)));
    ad::NodeId i_gate = g.sigmoid(g.slice_cols(gates, 0, hidden));
    ad::NodeId f_gate = g.sigmoid(g.slice_cols(gates, hidden, hidden));
    ad::NodeId g_gate = g.tanh_op(g.slice_cols(gates, 2 * hidden, hidden));
    ad::NodeId o_gate = g.sigmoid(g.slice_cols(gates, 3 * hidden, hidden));
    c = g.add(g.mul(f_gate, c), g.mul(i_gate, g_gate));
    h = g.mul(o_gate, g.tanh_op(c));
    hs.push_back(h);
  }
  return g.time_stack(hs);
}

}  // namespace drvc::nn
