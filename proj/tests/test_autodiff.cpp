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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "drvc/graph.hpp"
#include "drvc/nn.hpp"
#include "support.hpp"

using drvc::Rng;
using drvc::Tensor;
using drvc::ad::Graph;
using drvc::ad::NodeId;

namespace {

// Reduces any op output to a scalar with fixed random weights so that every
// output element contributes to the checked gradient.
double weighted_sum(Graph& g, NodeId y, const Tensor& w) {
  NodeId wn = g.input(w);
  NodeId s = g.sum_all(g.mul(y, wn));
  return g.value(s).data[0];
}

void check_op(const std::string& name, std::function<NodeId(Graph&, NodeId)> op,
              std::vector<int64_t> shape, double input_scale = 1.0) {
  Rng rng(42);
  Tensor x = testsup::random_tensor(shape, rng, input_scale);

  Graph g;
  NodeId xn = g.leaf(x, true);
  NodeId y = op(g, xn);
  Tensor w = testsup::random_tensor(g.value(y).shape, rng);
  NodeId wn = g.input(w);
  NodeId loss = g.sum_all(g.mul(y, wn));
  g.backward(loss);
  Tensor analytic = g.grad(xn);

  auto f = [&](const Tensor& xt) {
    Graph g2;
    NodeId xn2 = g2.leaf(xt, false);
    NodeId y2 = op(g2, xn2);
    return weighted_sum(g2, y2, w);
  };
  const double err = testsup::max_grad_error(f, x, analytic);
  INFO("op ", name, " worst relative gradient error ", err);
  CHECK(err < 1e-5);
}

}  // namespace

TEST_CASE("elementwise and reduction gradients match finite differences") {
  check_op("scale", [](Graph& g, NodeId x) { return g.scale(x, -2.5); }, {3, 4});
  check_op("tanh", [](Graph& g, NodeId x) { return g.tanh_op(x); }, {3, 4});
  check_op("sigmoid", [](Graph& g, NodeId x) { return g.sigmoid(x); }, {3, 4});
  check_op("softplus", [](Graph& g, NodeId x) { return g.softplus(x); }, {3, 4});
  check_op("leaky_relu", [](Graph& g, NodeId x) { return g.leaky_relu(x, 0.2); }, {5, 7});
  check_op("abs", [](Graph& g, NodeId x) { return g.abs_op(x); }, {5, 7});
  check_op("mean_all", [](Graph& g, NodeId x) { return g.mean_all(x); }, {6, 3});
  check_op("sum_all", [](Graph& g, NodeId x) { return g.sum_all(x); }, {6, 3});
  check_op("softmax", [](Graph& g, NodeId x) { return g.softmax_rows(x); }, {4, 5}, 2.0);
  check_op("safe_log", [](Graph& g, NodeId x) {
    // keep inputs away from the floor kink
    return g.safe_log(g.add(g.mul(x, x), g.input(drvc::Tensor::full({4, 4}, 0.5))), 1e-12);
  }, {4, 4});
  check_op("clamp", [](Graph& g, NodeId x) { return g.clamp(x, -0.5, 0.5); }, {4, 4});
}

TEST_CASE("binary op gradients match finite differences") {
  Rng rng(7);
  Tensor b = testsup::random_tensor({3, 4}, rng);
  check_op("add", [&](Graph& g, NodeId x) { return g.add(x, g.input(b)); }, {3, 4});
  check_op("sub", [&](Graph& g, NodeId x) { return g.sub(g.input(b), x); }, {3, 4});
  check_op("mul", [&](Graph& g, NodeId x) { return g.mul(x, g.input(b)); }, {3, 4});
  check_op("mul_self", [](Graph& g, NodeId x) { return g.mul(x, x); }, {3, 4});

  Tensor w = testsup::random_tensor({4, 6}, rng);
  check_op("matmul_lhs", [&](Graph& g, NodeId x) { return g.matmul(x, g.input(w)); }, {3, 4});
  Tensor a = testsup::random_tensor({5, 3}, rng);
  check_op("matmul_rhs", [&](Graph& g, NodeId x) { return g.matmul(g.input(a), x); }, {3, 4});
  Tensor bias = testsup::random_tensor({4}, rng);
  check_op("add_bias_x", [&](Graph& g, NodeId x) { return g.add_bias(x, g.input(bias)); }, {3, 4});
  Tensor x2 = testsup::random_tensor({3, 4}, rng);
  check_op("add_bias_b", [&](Graph& g, NodeId x) { return g.add_bias(g.input(x2), x); }, {4});
}

TEST_CASE("shape op gradients match finite differences") {
  Rng rng(11);
  Tensor mate = testsup::random_tensor({4, 3}, rng);
  check_op("reshape", [](Graph& g, NodeId x) { return g.reshape(x, {2, 2, 3}); }, {4, 3});
  check_op("concat_a", [&](Graph& g, NodeId x) { return g.concat_cols(x, g.input(mate)); }, {4, 5});
  check_op("concat_b", [&](Graph& g, NodeId x) { return g.concat_cols(g.input(mate), x); }, {4, 5});
  check_op("slice_cols", [](Graph& g, NodeId x) { return g.slice_cols(x, 1, 3); }, {4, 6});
  check_op("broadcast_time", [](Graph& g, NodeId x) { return g.broadcast_time(x, 5); }, {2, 3});
  check_op("mean_time", [](Graph& g, NodeId x) { return g.mean_time(x); }, {2, 5, 3});
  check_op("time_slice", [](Graph& g, NodeId x) { return g.time_slice(x, 2); }, {2, 5, 3});
  check_op("im2col", [](Graph& g, NodeId x) { return g.im2col_time(x, 3); }, {2, 5, 3});
  check_op("time_stack", [](Graph& g, NodeId x) {
    std::vector<NodeId> slices;
    for (int t = 0; t < 4; ++t) slices.push_back(g.time_slice(x, t));
    std::reverse(slices.begin(), slices.end());
    return g.time_stack(slices);
  }, {2, 4, 3});
}

TEST_CASE("layer gradients match finite differences") {
  Rng rng(13);
  drvc::nn::ParamStore store;
  auto lin = drvc::nn::Linear::create(store, "lin", 4, 3, rng);
  auto conv = drvc::nn::Conv1d::create(store, "conv", 3, 2, 3, rng);
  auto lstm = drvc::nn::Lstm::create(store, "lstm", 3, 4, rng);

  // gradient w.r.t. the input
  check_op("linear", [&](Graph& g, NodeId x) {
    drvc::nn::GraphBinding gb(g, store);
    return lin.forward(gb, x);
  }, {5, 4});
  check_op("conv1d", [&](Graph& g, NodeId x) {
    drvc::nn::GraphBinding gb(g, store);
    return conv.forward(gb, x);
  }, {2, 6, 3});
  check_op("lstm", [&](Graph& g, NodeId x) {
    drvc::nn::GraphBinding gb(g, store);
    return lstm.forward(gb, x);
  }, {2, 5, 3});

  // gradient w.r.t. every parameter of the LSTM, through a weighted sum loss
  Tensor x = testsup::random_tensor({2, 5, 3}, rng);
  Tensor w;
  {
    Graph g;
    drvc::nn::GraphBinding gb(g, store);
    NodeId y = lstm.forward(gb, g.input(x));
    w = testsup::random_tensor(g.value(y).shape, rng);
  }
  for (const char* pname : {"lstm.wx", "lstm.wh", "lstm.b"}) {
    const int idx = store.find(pname);
    REQUIRE(idx >= 0);
    Graph g;
    drvc::nn::GraphBinding gb(g, store);
    NodeId y = lstm.forward(gb, g.input(x));
    NodeId loss = g.sum_all(g.mul(y, g.input(w)));
    g.backward(loss);
    Tensor analytic = gb.grad_of(idx);

    Tensor saved = store.entry(idx).value;
    auto f = [&](const Tensor& pt) {
      store.entry(idx).value = pt;
      Graph g2;
      drvc::nn::GraphBinding gb2(g2, store);
      NodeId y2 = lstm.forward(gb2, g2.input(x));
      NodeId loss2 = g2.sum_all(g2.mul(y2, g2.input(w)));
      double out = g2.value(loss2).data[0];
      store.entry(idx).value = saved;
      return out;
    };
    const double err = testsup::max_grad_error(f, saved, analytic);
    INFO("param ", pname, " worst relative gradient error ", err);
    CHECK(err < 1e-5);
  }
}

TEST_CASE("grl forward is bitwise identity and backward reverses scaled gradient") {
  Graph g;
  Tensor x({2}, {1.0, -2.0});
  NodeId xn = g.leaf(x, true);
  NodeId y = g.grl(xn, 0.7);
  CHECK(g.value(y).data[0] == 1.0);
  CHECK(g.value(y).data[1] == -2.0);

  // backward: upstream gradient [0.5, -0.2] with lambda 1 -> [-0.5, 0.2]
  Graph g2;
  NodeId xn2 = g2.leaf(Tensor({2}, {3.0, 4.0}), true);
  NodeId y2 = g2.grl(xn2, 1.0);
  NodeId loss2 = g2.sum_all(g2.mul(y2, g2.input(Tensor({2}, {0.5, -0.2}))));
  g2.backward(loss2);
  CHECK(g2.grad(xn2).data[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(g2.grad(xn2).data[1] == doctest::Approx(0.2).epsilon(1e-12));

  // upstream gradient [2.0] with lambda 0.25 -> [-0.5]
  Graph g3;
  NodeId xn3 = g3.leaf(Tensor({1}, {1.5}), true);
  NodeId y3 = g3.grl(xn3, 0.25);
  NodeId loss3 = g3.sum_all(g3.mul(y3, g3.input(Tensor({1}, {2.0}))));
  g3.backward(loss3);
  CHECK(g3.grad(xn3).data[0] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("detach blocks gradient flow") {
  Graph g;
  NodeId xn = g.leaf(Tensor({2}, {1.0, 2.0}), true);
  NodeId y = g.detach(g.scale(xn, 3.0));
  NodeId loss = g.sum_all(y);
  g.backward(loss);
  CHECK(g.grad(xn).data[0] == 0.0);
  CHECK(g.grad(xn).data[1] == 0.0);
}

TEST_CASE("matmul kernels agree with naive reference") {
  Rng rng(3);
  Tensor a = testsup::random_tensor({7, 5}, rng);
  Tensor b = testsup::random_tensor({5, 6}, rng);
  Tensor c({7, 6});
  drvc::matmul_nn(a.data.data(), b.data.data(), c.data.data(), 7, 5, 6);
  for (int64_t i = 0; i < 7; ++i) {
    for (int64_t j = 0; j < 6; ++j) {
      double acc = 0.0;
      for (int64_t k = 0; k < 5; ++k) acc += a.at(i, k) * b.at(k, j);
      CHECK(c.at(i, j) == doctest::Approx(acc).epsilon(1e-12));
    }
  }
}
