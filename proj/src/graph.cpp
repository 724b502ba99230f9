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

#include "drvc/graph.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <utility>

namespace drvc::ad {

namespace {

void check(bool cond, const std::string& what) {
  if (!cond) throw ContractError("graph: " + what);
}

}  // namespace

NodeId Graph::push(Tensor value, bool requires_grad,
                   std::function<void(Graph&, NodeId)> backward_fn) {
  nodes_.push_back(Node{std::move(value), Tensor{}, std::move(backward_fn), requires_grad});
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::leaf(Tensor v, bool requires_grad) {
  return push(std::move(v), requires_grad, nullptr);
}

Tensor& Graph::grad_buf(NodeId id) {
  Node& n = node(id);
  if (n.grad.data.empty()) n.grad = Tensor::zeros(n.value.shape);
  return n.grad;
}

Tensor Graph::grad(NodeId id) const {
  const Node& n = node(id);
  if (n.grad.data.empty()) return Tensor::zeros(n.value.shape);
  return n.grad;
}

void Graph::backward(NodeId root) {
  check(node(root).value.numel() == 1, "backward root must be scalar");
  grad_buf(root).data[0] = 1.0;
  for (NodeId id = root; id >= 0; --id) {
    Node& n = node(id);
    if (!n.requires_grad || n.grad.data.empty() || !n.backward_fn) continue;
    n.backward_fn(*this, id);
  }
}

NodeId Graph::add(NodeId a, NodeId b) {
  check(value(a).same_shape(value(b)), "add: shape mismatch");
  Tensor out = value(a);
  const Tensor& vb = value(b);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += vb.data[i];
  return push(std::move(out), wants(a) || wants(b), [a, b](Graph& g, NodeId self) {
    const Tensor& go = g.node(self).grad;
    if (g.wants(a)) {
      Tensor& ga = g.grad_buf(a);
      for (size_t i = 0; i < go.data.size(); ++i) ga.data[i] += go.data[i];
    }
    if (g.wants(b)) {
      Tensor& gb = g.grad_buf(b);
      for (size_t i = 0; i < go.data.size(); ++i) gb.data[i] += go.data[i];
    }
  });
}

NodeId Graph::sub(NodeId a, NodeId b) {
  check(value(a).same_shape(value(b)), "sub: shape mismatch");
  Tensor out = value(a);
  const Tensor& vb = value(b);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= vb.data[i];
  return push(std::move(out), wants(a) || wants(b), [a, b](Graph& g, NodeId self) {
    const Tensor& go = g.node(self).grad;
    if (g.wants(a)) {
      Tensor& ga = g.grad_buf(a);
      for (size_t i = 0; i < go.data.size(); ++i) ga.data[i] += go.data[i];
    }
    if (g.wants(b)) {
      Tensor& gb = g.grad_buf(b);
      for (size_t i = 0; i < go.data.size(); ++i) gb.data[i] -= go.data[i];
    }
  });
}

NodeId Graph::mul(NodeId a, NodeId b) {
  check(value(a).same_shape(value(b)), "mul: shape mismatch");
  Tensor out = value(a);
  const Tensor& vb = value(b);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= vb.data[i];
  return push(std::move(out), wants(a) || wants(b), [a, b](Graph& g, NodeId self) {
    const Tensor& go = g.node(self).grad;
    if (g.wants(a)) {
      Tensor& ga = g.grad_buf(a);
      const Tensor& vb2 = g.value(b);
      for (size_t i = 0; i < go.data.size(); ++i) ga.data[i] += go.data[i] * vb2.data[i];
    }
    if (g.wants(b)) {
      Tensor& gb = g.grad_buf(b);
      const Tensor& va2 = g.value(a);
      for (size_t i = 0; i < go.data.size(); ++i) gb.data[i] += go.data[i] * va2.data[i];
    }
  });
}

NodeId Graph::scale(NodeId a, double s) {
  Tensor out = value(a);
  for (auto& v : out.data) v *= s;
  return push(std::move(out), wants(a), [a, s](Graph& g, NodeId self) {
    if (!g.wants(a)) return;
    const Tensor& go = g.node(self).grad;
    Tensor& ga = g.grad_buf(a);
    for (size_t i = 0; i < go.data.size(); ++i) ga.data[i] += s * go.data[i];
  });
}

NodeId Graph::add_bias(NodeId x, NodeId bias) {
  const Tensor& vx = value(x);
  const Tensor& vb = value(bias);
  check(vx.rank() == 2 && vb.rank() == 1 && vx.cols() == vb.dim(0), "add_bias: shape mismatch");
  Tensor out = vx;
  const int64_t r = vx.rows(), c = vx.cols();
  for (int64_t i = 0; i < r; ++i)
    for (int64_t j = 0; j < c; ++j) out.data[static_cast<size_t>(i * c + j)] += vb.data[static_cast<size_t>(j)];
  return push(std::move(out), wants(x) || wants(bias), [x, bias, r, c](Graph& g, NodeId self) {
    const Tensor& go = g.node(self).grad;
    if (g.wants(x)) {
      Tensor& gx = g.grad_buf(x);
      for (size_t i = 0; i < go.data.size(); ++i) gx.data[i] += go.data[i];
    }
    if (g.wants(bias)) {
      Tensor& gb = g.grad_buf(bias);
      for (int64_t i = 0; i < r; ++i)
        for (int64_t j = 0; j < c; ++j) gb.data[static_cast<size_t>(j)] += go.data[static_cast<size_t>(i * c + j)];
    }
  });
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  check(va.rank() == 2 && vb.rank() == 2 && va.cols() == vb.rows(), "matmul: shape mismatch");
  const int64_t m = va.rows(), k = va.cols(), n = vb.cols();
  Tensor out({m, n});
  matmul_nn(va.data.data(), vb.data.data(), out.data.data(), m, k, n);
  return push(std::move(out), wants(a) || wants(b), [a, b, m, k, n](Graph& g, NodeId self) {
    const Tensor& go = g.node(self).grad;
    if (g.wants(a)) {
      // dA += dC * B^T
      Tensor da({m, k});
      matmul_nt(go.data.data(), g.value(b).data.data(), da.data.data(), m, n, k);
      Tensor& ga = g.grad_buf(a);
      for (size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += da.data[i];
    }
    if (g.wants(b)) {
      // dB += A^T * dC
      Tensor db({k, n});
      matmul_tn(g.value(a).data.data(), go.data.data(), db.data.data(), m, k, n);
      Tensor& gb = g.grad_buf(b);
      for (size_t i = 0; i < gb.data.size(); ++i) gb.data[i] += db.data[i];
    }
  });
}

NodeId Graph::tanh_op(NodeId x) {
  Tensor out = value(x);
  for (auto& v : out.data) v = std::tanh(v);
  return push(std::move(out), wants(x), [x](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const Tensor& go = g.node(self).grad;
    const Tensor& y = g.value(self);
    Tensor& gx = g.grad_buf(x);
    for (size_t i = 0; i < go.data.size(); ++i)
      gx.data[i] += go.data[i] * (1.0 - y.data[i] * y.data[i]);
  });
}

NodeId Graph::sigmoid(NodeId x) {
  Tensor out = value(x);
  for (auto& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
  return push(std::move(out), wants(x), [x](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const Tensor& go = g.node(self).grad;
    const Tensor& y = g.value(self);
    Tensor& gx = g.grad_buf(x);
    for (size_t i = 0; i < go.data.size(); ++i)
      gx.data[i] += go.data[i] * y.data[i] * (1.0 - y.data[i]);
  });
}

NodeId Graph::leaky_relu(NodeId x, double slope) {
  Tensor out = value(x);
  for (auto& v : out.data) v = v >= 0.0 ? v : slope * v;
  return push(std::move(out), wants(x), [x, slope](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const Tensor& go = g.node(self).grad;
    const Tensor& vx = g.value(x);
    Tensor& gx = g.grad_buf(x);
    for (size_t i = 0; i < go.data.size(); ++i)
      gx.data[i] += go.data[i] * (vx.data[i] >= 0.0 ? 1.0 : slope);
  });
}

NodeId Graph::softplus(NodeId x) {
  Tensor out = value(x);
  for (auto& v : out.data) v = std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
  return push(std::move(out), wants(x), [x](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const Tensor& go = g.node(self).grad;
    const Tensor& vx = g.value(x);
    Tensor& gx = g.grad_buf(x);
    for (size_t i = 0; i < go.data.size(); ++i)
      gx.data[i] += go.data[i] / (1.0 + std::exp(-vx.data[i]));
  });
}

NodeId Graph::clamp(NodeId x, double lo, double hi) {
  Tensor out = value(x);
  for (auto& v : out.data) v = std::min(std::max(v, lo), hi);
  return push(std::move(out), wants(x), [x, lo, hi](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const Tensor& go = g.node(self).grad;
    const Tensor& vx = g.value(x);
    Tensor& gx = g.grad_buf(x);
    for (size_t i = 0; i < go.data.size(); ++i)
      if (vx.data[i] >= lo && vx.data[i] <= hi) gx.data[i] += go.data[i];
  });
}

NodeId Graph::safe_log(NodeId x, double floor) {
  Tensor out = value(x);
  for (auto& v : out.data) v = std::log(std::max(v, floor));
  return push(std::move(out), wants(x), [x, floor](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const Tensor& go = g.node(self).grad;
    const Tensor& vx = g.value(x);
    Tensor& gx = g.grad_buf(x);
    for (size_t i = 0; i < go.data.size(); ++i)
      if (vx.data[i] > floor) gx.data[i] += go.data[i] / vx.data[i];
  });
}

NodeId Graph::abs_op(NodeId x) {
  Tensor out = value(x);
  for (auto& v : out.data) v = std::abs(v);
  return push(std::move(out), wants(x), [x](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const Tensor& go = g.node(self).grad;
    const Tensor& vx = g.value(x);
    Tensor& gx = g.grad_buf(x);
    for (size_t i = 0; i < go.data.size(); ++i) {
      if (vx.data[i] > 0.0) gx.data[i] += go.data[i];
      else if (vx.data[i] < 0.0) gx.data[i] -= go.data[i];
    }
  });
}

NodeId Graph::softmax_rows(NodeId x) {
  const Tensor& vx = value(x);
  check(vx.rank() == 2, "softmax_rows: rank-2 input expected");
  Tensor out = vx;
  const int64_t r = vx.rows(), c = vx.cols();
  for (int64_t i = 0; i < r; ++i) {
    double mx = out.at(i, 0);
    for (int64_t j = 1; j < c; ++j) mx = std::max(mx, out.at(i, j));
    double sum = 0.0;
    for (int64_t j = 0; j < c; ++j) {
      out.at(i, j) = std::exp(out.at(i, j) - mx);
      sum += out.at(i, j);
    }
    for (int64_t j = 0; j < c; ++j) out.at(i, j) /= sum;
  }
  return push(std::move(out), wants(x), [x, r, c](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const Tensor& go = g.node(self).grad;
    const Tensor& y = g.value(self);
    Tensor& gx = g.grad_buf(x);
    for (int64_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (int64_t j = 0; j < c; ++j) dot += go.at(i, j) * y.at(i, j);
      for (int64_t j = 0; j < c; ++j)
        gx.at(i, j) += y.at(i, j) * (go.at(i, j) - dot);
    }
  });
}

NodeId Graph::mean_all(NodeId x) {
  const Tensor& vx = value(x);
  const double n = static_cast<double>(vx.numel());
  double s = 0.0;
  for (double v : vx.data) s += v;
  return push(Tensor::scalar(s / n), wants(x), [x, n](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const double go = g.node(self).grad.data[0];
    Tensor& gx = g.grad_buf(x);
    const double d = go / n;
    for (auto& v : gx.data) v += d;
  });
}

NodeId Graph::sum_all(NodeId x) {
  const Tensor& vx = value(x);
  double s = 0.0;
  for (double v : vx.data) s += v;
  return push(Tensor::scalar(s), wants(x), [x](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const double go = g.node(self).grad.data[0];
    Tensor& gx = g.grad_buf(x);
    for (auto& v : gx.data) v += go;
  });
}

NodeId Graph::reshape(NodeId x, std::vector<int64_t> shape) {
  const Tensor& vx = value(x);
  check(Tensor::numel_of(shape) == vx.numel(), "reshape: element count mismatch");
  Tensor out(shape, vx.data);
  return push(std::move(out), wants(x), [x](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const Tensor& go = g.node(self).grad;
    Tensor& gx = g.grad_buf(x);
    for (size_t i = 0; i < go.data.size(); ++i) gx.data[i] += go.data[i];
  });
}

NodeId Graph::concat_cols(NodeId a, NodeId b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  check(va.rank() == 2 && vb.rank() == 2 && va.rows() == vb.rows(), "concat_cols: shape mismatch");
  const int64_t r = va.rows(), ca = va.cols(), cb = vb.cols();
  Tensor out({r, ca + cb});
  for (int64_t i = 0; i < r; ++i) {
    std::memcpy(&out.data[static_cast<size_t>(i * (ca + cb))], &va.data[static_cast<size_t>(i * ca)],
                static_cast<size_t>(ca) * sizeof(double));
    std::memcpy(&out.data[static_cast<size_t>(i * (ca + cb) + ca)], &vb.data[static_cast<size_t>(i * cb)],
                static_cast<size_t>(cb) * sizeof(double));
  }
  return push(std::move(out), wants(a) || wants(b), [a, b, r, ca, cb](Graph& g, NodeId self) {
    const Tensor& go = g.node(self).grad;
    if (g.wants(a)) {
      Tensor& ga = g.grad_buf(a);
      for (int64_t i = 0; i < r; ++i)
        for (int64_t j = 0; j < ca; ++j)
          ga.data[static_cast<size_t>(i * ca + j)] += go.data[static_cast<size_t>(i * (ca + cb) + j)];
    }
    if (g.wants(b)) {
      Tensor& gb = g.grad_buf(b);
      for (int64_t i = 0; i < r; ++i)
        for (int64_t j = 0; j < cb; ++j)
          gb.data[static_cast<size_t>(i * cb + j)] += go.data[static_cast<size_t>(i * (ca + cb) + ca + j)];
    }
  });
}

NodeId Graph::slice_cols(NodeId x, int64_t off, int64_t w) {
  const Tensor& vx = value(x);
  check(vx.rank() == 2 && off >= 0 && w >= 1 && off + w <= vx.cols(), "slice_cols: out of range");
  const int64_t r = vx.rows(), c = vx.cols();
  Tensor out({r, w});
  for (int64_t i = 0; i < r; ++i)
    std::memcpy(&out.data[static_cast<size_t>(i * w)], &vx.data[static_cast<size_t>(i * c + off)],
                static_cast<size_t>(w) * sizeof(double));
  return push(std::move(out), wants(x), [x, off, w, r, c](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const Tensor& go = g.node(self).grad;
    Tensor& gx = g.grad_buf(x);
    for (int64_t i = 0; i < r; ++i)
      for (int64_t j = 0; j < w; ++j)
        gx.data[static_cast<size_t>(i * c + off + j)] += go.data[static_cast<size_t>(i * w + j)];
  });
}

NodeId Graph::broadcast_time(NodeId v, int64_t t_len) {
  const Tensor& vv = value(v);
  check(vv.rank() == 2 && t_len >= 1, "broadcast_time: rank-2 input expected");
  const int64_t b = vv.rows(), c = vv.cols();
  Tensor out({b, t_len, c});
  for (int64_t i = 0; i < b; ++i)
    for (int64_t t = 0; t < t_len; ++t)
      std::memcpy(&out.data[static_cast<size_t>((i * t_len + t) * c)], &vv.data[static_cast<size_t>(i * c)],
                  static_cast<size_t>(c) * sizeof(double));
  return push(std::move(out), wants(v), [v, b, t_len, c](Graph& g, NodeId self) {
    if (!g.wants(v)) return;
    const Tensor& go = g.node(self).grad;
    Tensor& gv = g.grad_buf(v);
    for (int64_t i = 0; i < b; ++i)
      for (int64_t t = 0; t < t_len; ++t)
        for (int64_t j = 0; j < c; ++j)
          gv.data[static_cast<size_t>(i * c + j)] += go.data[static_cast<size_t>((i * t_len + t) * c + j)];
  });
}

NodeId Graph::mean_time(NodeId x) {
  const Tensor& vx = value(x);
  check(vx.rank() == 3, "mean_time: rank-3 input expected");
  const int64_t b = vx.dim(0), t_len = vx.dim(1), c = vx.dim(2);
  Tensor out({b, c});
  for (int64_t i = 0; i < b; ++i)
    for (int64_t t = 0; t < t_len; ++t)
      for (int64_t j = 0; j < c; ++j) out.at(i, j) += vx.at(i, t, j);
  for (auto& v : out.data) v /= static_cast<double>(t_len);
  return push(std::move(out), wants(x), [x, b, t_len, c](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const Tensor& go = g.node(self).grad;
    Tensor& gx = g.grad_buf(x);
    const double inv = 1.0 / static_cast<double>(t_len);
    for (int64_t i = 0; i < b; ++i)
      for (int64_t t = 0; t < t_len; ++t)
        for (int64_t j = 0; j < c; ++j) gx.at(i, t, j) += go.at(i, j) * inv;
  });
}

NodeId Graph::time_slice(NodeId x, int64_t t) {
  const Tensor& vx = value(x);
  check(vx.rank() == 3 && t >= 0 && t < vx.dim(1), "time_slice: out of range");
  const int64_t b = vx.dim(0), t_len = vx.dim(1), c = vx.dim(2);
  Tensor out({b, c});
  for (int64_t i = 0; i < b; ++i)
    std::memcpy(&out.data[static_cast<size_t>(i * c)], &vx.data[static_cast<size_t>((i * t_len + t) * c)],
                static_cast<size_t>(c) * sizeof(double));
  return push(std::move(out), wants(x), [x, t, b, t_len, c](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const Tensor& go = g.node(self).grad;
    Tensor& gx = g.grad_buf(x);
    for (int64_t i = 0; i < b; ++i)
      for (int64_t j = 0; j < c; ++j)
        gx.data[static_cast<size_t>((i * t_len + t) * c + j)] += go.data[static_cast<size_t>(i * c + j)];
  });
}

NodeId Graph::time_stack(const std::vector<NodeId>& xs) {
  check(!xs.empty(), "time_stack: empty input");
  const Tensor& v0 = value(xs[0]);
  check(v0.rank() == 2, "time_stack: rank-2 slices expected");
  const int64_t b = v0.rows(), c = v0.cols();
  const int64_t t_len = static_cast<int64_t>(xs.size());
  bool any = false;
  for (NodeId id : xs) {
    check(value(id).same_shape(v0), "time_stack: slice shape mismatch");
    any = any || wants(id);
  }
  Tensor out({b, t_len, c});
  for (int64_t t = 0; t < t_len; ++t) {
    const Tensor& vt = value(xs[static_cast<size_t>(t)]);
    for (int64_t i = 0; i < b; ++i)
      std::memcpy(&out.data[static_cast<size_t>((i * t_len + t) * c)], &vt.data[static_cast<size_t>(i * c)],
                  static_cast<size_t>(c) * sizeof(double));
  }
  std::vector<NodeId> ids = xs;
  return push(std::move(out), any, [ids, b, t_len, c](Graph& g, NodeId self) {
    const Tensor& go = g.node(self).grad;
    for (int64_t t = 0; t < t_len; ++t) {
      NodeId src = ids[static_cast<size_t>(t)];
      if (!g.wants(src)) continue;
      Tensor& gx = g.grad_buf(src);
      for (int64_t i = 0; i < b; ++i)
        for (int64_t j = 0; j < c; ++j)
          gx.data[static_cast<size_t>(i * c + j)] += go.data[static_cast<size_t>((i * t_len + t) * c + j)];
    }
  });
}

NodeId Graph::im2col_time(NodeId x, int64_t k) {
  const Tensor& vx = value(x);
  check(vx.rank() == 3 && k >= 1 && k % 2 == 1, "im2col_time: rank-3 input and odd k expected");
  const int64_t b = vx.dim(0), t_len = vx.dim(1), c = vx.dim(2);
  const int64_t half = k / 2;
  Tensor out({b * t_len, k * c});
  for (int64_t i = 0; i < b; ++i) {
    for (int64_t t = 0; t < t_len; ++t) {
      double* row = &out.data[static_cast<size_t>((i * t_len + t) * k * c)];
      for (int64_t w = 0; w < k; ++w) {
        const int64_t src_t = t + w - half;
        if (src_t < 0 || src_t >= t_len) continue;  // zero pad
        std::memcpy(row + w * c, &vx.data[static_cast<size_t>((i * t_len + src_t) * c)],
                    static_cast<size_t>(c) * sizeof(double));
      }
    }
  }
  return push(std::move(out), wants(x), [x, b, t_len, c, k, half](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const Tensor& go = g.node(self).grad;
    Tensor& gx = g.grad_buf(x);
    for (int64_t i = 0; i < b; ++i) {
      for (int64_t t = 0; t < t_len; ++t) {
        const double* row = &go.data[static_cast<size_t>((i * t_len + t) * k * c)];
        for (int64_t w = 0; w < k; ++w) {
          const int64_t src_t = t + w - half;
          if (src_t < 0 || src_t >= t_len) continue;
          double* dst = &gx.data[static_cast<size_t>((i * t_len + src_t) * c)];
          const double* src = row + w * c;
          for (int64_t j = 0; j < c; ++j) dst[j] += src[j];
        }
      }
    }
  });
}

NodeId Graph::grl(NodeId x, double lambda) {
  Tensor out = value(x);  // identity forward
  return push(std::move(out), wants(x), [x, lambda](Graph& g, NodeId self) {
    if (!g.wants(x)) return;
    const Tensor& go = g.node(self).grad;
    Tensor& gx = g.grad_buf(x);
    for (size_t i = 0; i < go.data.size(); ++i) gx.data[i] -= lambda * go.data[i];
  });
}

NodeId Graph::detach(NodeId x) { return push(value(x), false, nullptr); }

}  // namespace drvc::ad
