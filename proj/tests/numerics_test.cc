// tests/numerics_test.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <vector>

#include <doctest.h>

#include "numerics/graph.h"
#include "numerics/tensor.h"
#include "oracles.h"
#include "test_support.h"
#include "util/error.h"
#include "util/rng.h"

using cjt::numerics::GraphD;
using cjt::numerics::GraphF;
using cjt::numerics::Tensor;
using cjt::tests::fd_check;
using cjt::tests::rand_tensor_d;
using cjt::tests::rand_tensor_d_offzero;
using cjt::tests::smoothed_ce_oracle;
using cjt::tests::TensorD;
using cjt::util::Rng;

namespace {

// Collapses any rank-2 node to a scalar through a fixed random weighting, so
// the finite-difference loss exercises the full jacobian of the op under
// test instead of just row/column sums.
GraphD::Var weighted_sum(GraphD& g, GraphD::Var v, uint64_t seed) {
  const auto& shape = g.value(v).shape();
  Rng rng(seed);
  TensorD w = rand_tensor_d(rng, {shape[0], shape[1]}, 0.2, 1.0);
  GraphD::Var prod = g.mul(v, g.input(w));
  TensorD ones_row({1, shape[0]});
  ones_row.fill(1.0);
  TensorD ones_col({shape[1], 1});
  ones_col.fill(1.0);
  return g.matmul(g.input(ones_row), g.matmul(prod, g.input(ones_col)));
}

}  // namespace

TEST_CASE("softmax of equal logits is uniform") {
  GraphD g(GraphD::Mode::eval);
  auto v = g.softmax_rows(g.input(TensorD({1, 2})));
  CHECK(g.value(v).at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g.value(v).at(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("dropout at rate zero is the identity in train mode") {
  Rng data(1), draw(2);
  TensorD x = rand_tensor_d(data, {3, 4});
  GraphD g(GraphD::Mode::train, &draw);
  auto v = g.dropout(g.input(x), 0.0);
  for (size_t i = 0; i < x.numel(); ++i) CHECK(g.value(v).data()[i] == x.data()[i]);
}

TEST_CASE("dropout is the identity in eval mode at any rate") {
  Rng data(3);
  TensorD x = rand_tensor_d(data, {2, 5});
  GraphD g(GraphD::Mode::eval);
  auto v = g.dropout(g.input(x), 0.5);
  for (size_t i = 0; i < x.numel(); ++i) CHECK(g.value(v).data()[i] == x.data()[i]);
}

TEST_CASE("matmul gradient matches finite differences tightly") {
  Rng rng(11);
  std::vector<TensorD> in = {rand_tensor_d(rng, {2, 3}), rand_tensor_d(rng, {3, 4})};
  auto rep = fd_check(in, [](GraphD& g, const std::vector<GraphD::Var>& xs) {
    return weighted_sum(g, g.matmul(xs[0], xs[1]), 101);
  });
  CHECK(rep.max_rel_err < 1e-6);
}

TEST_CASE("every differentiable op matches central finite differences") {
  Rng rng(12);
  struct Case {
    const char* name;
    std::vector<TensorD> inputs;
    cjt::tests::LossBuilder build;
  };
  std::vector<Case> cases;

  cases.push_back({"matmul_nt",
                   {rand_tensor_d(rng, {3, 4}), rand_tensor_d(rng, {5, 4})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.matmul_nt(xs[0], xs[1]), 1);
                   }});
  cases.push_back({"add",
                   {rand_tensor_d(rng, {3, 4}), rand_tensor_d(rng, {3, 4})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.add(xs[0], xs[1]), 2);
                   }});
  cases.push_back({"add row broadcast",
                   {rand_tensor_d(rng, {3, 4}), rand_tensor_d(rng, {1, 4})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.add(xs[0], xs[1]), 3);
                   }});
  cases.push_back({"mul",
                   {rand_tensor_d(rng, {2, 6}), rand_tensor_d(rng, {2, 6})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.mul(xs[0], xs[1]), 4);
                   }});
  cases.push_back({"scale",
                   {rand_tensor_d(rng, {4, 3})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.scale(xs[0], -1.7), 5);
                   }});
  cases.push_back({"relu",
                   {rand_tensor_d_offzero(rng, {4, 5})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.relu(xs[0]), 6);
                   }});
  cases.push_back({"softmax_rows",
                   {rand_tensor_d(rng, {3, 5})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.softmax_rows(xs[0]), 7);
                   }});
  cases.push_back({"attn_softmax causal",
                   {rand_tensor_d(rng, {4, 4})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.attn_softmax(xs[0], {}, true), 8);
                   }});
  cases.push_back({"attn_softmax key mask",
                   {rand_tensor_d(rng, {3, 5})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.attn_softmax(xs[0], {1, 1, 0, 1, 0}, false), 9);
                   }});
  cases.push_back({"layer_norm",
                   {rand_tensor_d(rng, {3, 6}), rand_tensor_d(rng, {1, 6}, 0.5, 1.5),
                    rand_tensor_d(rng, {1, 6})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.layer_norm(xs[0], xs[1], xs[2]), 10);
                   }});
  cases.push_back({"embedding",
                   {rand_tensor_d(rng, {7, 4})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.embedding(xs[0], {2, 0, 6, 2}), 11);
                   }});
  cases.push_back({"conv2d",
                   {rand_tensor_d(rng, {6, 4}), rand_tensor_d(rng, {2, 3, 3}),
                    rand_tensor_d(rng, {1, 2})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.conv2d(xs[0], xs[1], xs[2], 2), 12);
                   }});
  cases.push_back({"conv1d_causal",
                   {rand_tensor_d(rng, {5, 3}), rand_tensor_d(rng, {4, 3, 2}),
                    rand_tensor_d(rng, {1, 4})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.conv1d_causal(xs[0], xs[1], xs[2]), 13);
                   }});
  cases.push_back({"dropout",
                   {rand_tensor_d(rng, {4, 6})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.dropout(xs[0], 0.3), 14);
                   }});
  cases.push_back({"concat_cols",
                   {rand_tensor_d(rng, {3, 2}), rand_tensor_d(rng, {3, 5})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.concat_cols(xs[0], xs[1]), 15);
                   }});
  cases.push_back({"slice_cols",
                   {rand_tensor_d(rng, {3, 6})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.slice_cols(xs[0], 1, 4), 16);
                   }});
  cases.push_back({"reshape",
                   {rand_tensor_d(rng, {3, 4})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.reshape(xs[0], {2, 6}), 17);
                   }});
  cases.push_back({"grad_gate open",
                   {rand_tensor_d(rng, {3, 4})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.grad_gate(xs[0], true), 18);
                   }});
  cases.push_back({"relative_bias",
                   {rand_tensor_d(rng, {4, 5})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return weighted_sum(g, g.relative_bias(xs[0], 6, 2), 19);
                   }});
  cases.push_back({"smoothed_cross_entropy",
                   {rand_tensor_d(rng, {4, 6})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return g.smoothed_cross_entropy(xs[0], {1, 4, 0, 5}, 0.1, {}).loss;
                   }});
  cases.push_back({"smoothed_cross_entropy with exclusions",
                   {rand_tensor_d(rng, {4, 6})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     return g.smoothed_cross_entropy(xs[0], {1, 4, 0, 5}, 0.1, {0, 1, 0, 0}).loss;
                   }});
  cases.push_back({"composite mlp",
                   {rand_tensor_d(rng, {3, 4}), rand_tensor_d(rng, {4, 5}),
                    rand_tensor_d(rng, {1, 5}), rand_tensor_d(rng, {5, 6})},
                   [](GraphD& g, const std::vector<GraphD::Var>& xs) {
                     auto h = g.relu(g.add(g.matmul(xs[0], xs[1]), xs[2]));
                     auto o = g.matmul(g.dropout(h, 0.25), xs[3]);
                     return g.smoothed_cross_entropy(o, {2, 0, 5}, 0.1, {}).loss;
                   }});

  for (auto& c : cases) {
    CAPTURE(c.name);
    auto rep = fd_check(c.inputs, c.build);
    CHECK_MESSAGE(rep.max_rel_err < 1e-4, c.name, " rel err ", rep.max_rel_err);
  }
}

TEST_CASE("closed gate separates a network into live and frozen segments") {
  Rng rng(21);
  TensorD x = rand_tensor_d(rng, {2, 3});
  TensorD w1 = rand_tensor_d(rng, {3, 4});
  TensorD w2 = rand_tensor_d(rng, {4, 3});
  TensorD s_w1(w1.shape()), s_w2(w2.shape());

  GraphD g(GraphD::Mode::eval);
  auto h = g.relu(g.matmul(g.input(x), g.param(w1, &s_w1)));
  auto gated = g.grad_gate(h, false);
  auto out = g.matmul(gated, g.param(w2, &s_w2));
  g.backward(g.smoothed_cross_entropy(out, {0, 2}, 0.0, {}).loss);

  for (size_t i = 0; i < s_w1.numel(); ++i) CHECK(s_w1.data()[i] == 0.0);
  double mag = 0.0;
  for (size_t i = 0; i < s_w2.numel(); ++i) mag += std::abs(s_w2.data()[i]);
  CHECK(mag > 0.0);
}

TEST_CASE("open gate leaves gradients bit-equal to the gate-free network") {
  Rng rng(22);
  TensorD x = rand_tensor_d(rng, {3, 4});
  TensorD w1 = rand_tensor_d(rng, {4, 4});
  TensorD w2 = rand_tensor_d(rng, {4, 5});

  auto run = [&](bool with_gate) {
    TensorD s_x(x.shape()), s_w1(w1.shape()), s_w2(w2.shape());
    GraphD g(GraphD::Mode::eval);
    auto xin = g.param(x, &s_x);
    auto h = g.relu(g.matmul(xin, g.param(w1, &s_w1)));
    if (with_gate) h = g.grad_gate(h, true);
    // Two consumers force the gate node to merge gradient contributions the
    // same way the encoder memory does.
    auto o = g.add(g.matmul(h, g.param(w2, &s_w2)), g.slice_cols(h, 0, 5));
    g.backward(g.smoothed_cross_entropy(o, {1, 3, 0}, 0.1, {}).loss);
    std::vector<double> flat;
    for (const TensorD* s : {&s_x, &s_w1, &s_w2}) {
      flat.insert(flat.end(), s->data(), s->data() + s->numel());
    }
    return flat;
  };

  std::vector<double> gated = run(true);
  std::vector<double> plain = run(false);
  REQUIRE(gated.size() == plain.size());
  for (size_t i = 0; i < gated.size(); ++i) CHECK(gated[i] == plain[i]);
}

TEST_CASE("uniform logits make the unsmoothed loss ln V") {
  TensorD logits({3, 10});
  logits.fill(0.7);  // equal rows, any constant
  GraphD g(GraphD::Mode::eval);
  auto ce = g.smoothed_cross_entropy(g.input(logits), {4, 0, 9}, 0.0, {});
  CHECK(g.value(ce.loss).item() == doctest::Approx(std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("excluding a position reproduces the loss over the kept positions") {
  Rng rng(23);
  TensorD logits = rand_tensor_d(rng, {3, 7});
  std::vector<int> targets = {2, 6, 1};

  GraphD g(GraphD::Mode::eval);
  auto part = g.smoothed_cross_entropy(g.input(logits), targets, 0.0, {0, 1, 0});
  CHECK(part.counted == 2);

  // The same two rows scored directly.
  TensorD kept({2, 7});
  for (int c = 0; c < 7; ++c) {
    kept.at(0, c) = logits.at(0, c);
    kept.at(1, c) = logits.at(2, c);
  }
  GraphD g2(GraphD::Mode::eval);
  auto full = g2.smoothed_cross_entropy(g2.input(kept), {2, 1}, 0.0, {});
  CHECK(g.value(part.loss).item() == doctest::Approx(g2.value(full.loss).item()).epsilon(1e-12));
}

TEST_CASE("label smoothing matches the per-class summation oracle") {
  Rng rng(24);
  for (int rep = 0; rep < 10; ++rep) {
    TensorD logits = rand_tensor_d(rng, {4, 5}, -2.0, 2.0);
    std::vector<int> targets;
    for (int t = 0; t < 4; ++t) targets.push_back(static_cast<int>(rng.uniform_int(0, 4)));
    GraphD g(GraphD::Mode::eval);
    auto ce = g.smoothed_cross_entropy(g.input(logits), targets, 0.1, {});
    CHECK(g.value(ce.loss).item() ==
          doctest::Approx(smoothed_ce_oracle(logits, targets, 0.1, {})).epsilon(1e-6));
  }
}

TEST_CASE("excluding every position yields zero loss and a flag") {
  TensorD logits({2, 4});
  GraphD g(GraphD::Mode::eval);
  auto ce = g.smoothed_cross_entropy(g.input(logits), {1, 2}, 0.1, {1, 1});
  CHECK(ce.all_excluded);
  CHECK(ce.counted == 0);
  CHECK(g.value(ce.loss).item() == 0.0);
}

TEST_CASE("shape mismatches raise errors that name the op") {
  GraphD g(GraphD::Mode::eval);
  auto a = g.input(TensorD({2, 3}));
  auto b = g.input(TensorD({4, 5}));
  CHECK_THROWS_WITH_AS(g.matmul(a, b), doctest::Contains("matmul"), cjt::ShapeError);
  CHECK_THROWS_AS(g.add(a, b), cjt::ShapeError);
}

TEST_CASE("identical seeds replay identical stochastic losses") {
  auto run = [] {
    Rng data(31);
    TensorD x = rand_tensor_d(data, {4, 6});
    TensorD w = rand_tensor_d(data, {6, 5});
    Rng draws(77);
    GraphD g(GraphD::Mode::train, &draws);
    auto h = g.dropout(g.matmul(g.input(x), g.input(w)), 0.4);
    auto ce = g.smoothed_cross_entropy(h, {0, 1, 2, 3}, 0.1, {});
    return g.value(ce.loss).item();
  };
  CHECK(run() == run());
}

TEST_CASE("float and double graphs agree on a composite forward") {
  Rng rng(32);
  TensorD xd = rand_tensor_d(rng, {3, 5});
  TensorD wd = rand_tensor_d(rng, {5, 4});
  Tensor<float> xf({3, 5}), wf({5, 4});
  for (size_t i = 0; i < xd.numel(); ++i) xf.data()[i] = static_cast<float>(xd.data()[i]);
  for (size_t i = 0; i < wd.numel(); ++i) wf.data()[i] = static_cast<float>(wd.data()[i]);

  GraphD gd(GraphD::Mode::eval);
  auto ld = gd.smoothed_cross_entropy(gd.relu(gd.matmul(gd.input(xd), gd.input(wd))),
                                      {1, 0, 3}, 0.1, {});
  GraphF gf(GraphF::Mode::eval);
  auto lf = gf.smoothed_cross_entropy(gf.relu(gf.matmul(gf.input(xf), gf.input(wf))),
                                      {1, 0, 3}, 0.1, {});
  CHECK(static_cast<double>(gf.value(lf.loss).item()) ==
        doctest::Approx(gd.value(ld.loss).item()).epsilon(1e-5));
}
