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

#ifndef DRVC_NN_HPP
#define DRVC_NN_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "drvc/graph.hpp"

namespace drvc::nn {

// Named parameter registry. Iteration order is creation order and drives the
// optimizer update sequence, so updates are deterministic.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor m;  // Adam first moment
    Tensor v;  // Adam second moment
  };

  int add(const std::string& name, std::vector<int64_t> shape);
  int find(const std::string& name) const;  // -1 if absent

  Entry& entry(int idx) { return entries_[static_cast<size_t>(idx)]; }
  const Entry& entry(int idx) const { return entries_[static_cast<size_t>(idx)]; }
  int count() const { return static_cast<int>(entries_.size()); }
  int64_t total_params() const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> index_;
};

// Per-step bridge between the persistent ParamStore and one Graph: binds each
// parameter at most once and remembers the node for gradient readback.
class GraphBinding {
 public:
  GraphBinding(ad::Graph& g, ParamStore& store)
      : g_(g), store_(store), ids_(static_cast<size_t>(store.count()), -1) {}

  ad::Graph& graph() { return g_; }
  ParamStore& store() { return store_; }

  ad::NodeId of(int entry_idx);
  // Gradient of the bound parameter after backward (zeros if never bound).
  Tensor grad_of(int entry_idx) const;

 private:
  ad::Graph& g_;
  ParamStore& store_;
  std::vector<ad::NodeId> ids_;
};

// Fan-in-scaled uniform for weights; callers leave biases at zero.
void init_uniform(Tensor& t, int64_t fan_in, Rng& rng);

struct Linear {
  int w = -1, b = -1;
  int64_t in = 0, out = 0;
  static Linear create(ParamStore& store, const std::string& name, int64_t in, int64_t out, Rng& rng);
  // x [R,in] -> [R,out]
  ad::NodeId forward(GraphBinding& gb, ad::NodeId x) const;
};

// 1-D convolution over time, stride 1, zero-padded to same length.
struct Conv1d {
  int w = -1, b = -1;
  int64_t in = 0, out = 0, k = 0;
  static Conv1d create(ParamStore& store, const std::string& name, int64_t in, int64_t out, int64_t k,
                       Rng& rng);
  // x [B,T,in] -> [B,T,out]
  ad::NodeId forward(GraphBinding& gb, ad::NodeId x) const;
};

// Single-direction LSTM, zero initial state, gate order (i, f, g, o).
struct Lstm {
  int wx = -1, wh = -1, b = -1;
  int64_t in = 0, hidden = 0;
  static Lstm create(ParamStore& store, const std::string& name, int64_t in, int64_t hidden, Rng& rng);
  // x [B,T,in] -> [B,T,hidden]
  ad::NodeId forward(GraphBinding& gb, ad::NodeId x) const;
};

}  // namespace drvc::nn

#endif  // DRVC_NN_HPP
