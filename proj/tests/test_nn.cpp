// numeric core tests: activation/loss closed forms, Adam behavior, attention
// contracts, and finite-difference verification of every backward rule.

// Copyright 2026  The nacorr authors

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

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "nacorr/attention.hpp"
#include "nacorr/gradcheck.hpp"
#include "nacorr/nn.hpp"
#include "nacorr/optimizer.hpp"

using namespace nacorr;

namespace {

double weighted_sum(const Matrix& y, const Matrix& w) {
  double s = 0.0;
  for (int r = 0; r < y.rows(); ++r)
    for (int c = 0; c < y.cols(); ++c) s += y.at(r, c) * w.at(r, c);
  return s;
}

Matrix random_matrix(Rng& rng, int r, int c, double sigma = 1.0) {
  Matrix m(r, c);
  m.fill_gaussian(rng, sigma);
  return m;
}

}  // namespace

TEST_CASE("sigmoid and softmax closed forms") {
  Matrix z(1, 1);
  REQUIRE(sigmoid(z).at(0, 0) == 0.5);

  Matrix c(2, 5, 3.7);
  Matrix s = softmax_rows(c);
  for (int r = 0; r < 2; ++r)
    for (int j = 0; j < 5; ++j) REQUIRE(s.at(r, j) == Catch::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("layer_norm rows have mean zero, unit variance") {
  Rng rng(3);
  LayerNorm ln("ln", 16);
  Matrix x = random_matrix(rng, 4, 16, 2.0);
  LayerNorm::Cache c;
  Matrix y = ln.forward(x, &c);
  for (int r = 0; r < y.rows(); ++r) {
    double mu = 0.0, var = 0.0;
    for (int j = 0; j < 16; ++j) mu += y.at(r, j);
    mu /= 16;
    for (int j = 0; j < 16; ++j) var += (y.at(r, j) - mu) * (y.at(r, j) - mu);
    var /= 16;
    REQUIRE(std::abs(mu) < 1e-12);
    REQUIRE(var == Catch::Approx(1.0).epsilon(1e-3));  // up to the eps regularizer
  }
}

TEST_CASE("linear rejects mismatched shapes naming both") {
  LinearLayer lin("lin", 4, 3);
  Matrix x(2, 5);
  try {
    lin.forward(x);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    REQUIRE(msg.find("2x5") != std::string::npos);
    REQUIRE(msg.find("4x3") != std::string::npos);
  }
}

TEST_CASE("bce closed forms") {
  std::vector<uint8_t> c{1, 1, 0, 1};
  std::vector<double> half(4, 0.5);
  REQUIRE(bce_loss(c, half) == Catch::Approx(std::log(2.0)).margin(1e-12));

  std::vector<double> p{0.9, 0.9, 0.1, 0.9};
  REQUIRE(bce_loss(c, p) == Catch::Approx(-std::log(0.9)).margin(1e-12));

  std::vector<double> perfect{1.0, 1.0, 0.0, 1.0};
  REQUIRE(bce_loss(c, perfect) < 1e-6);
  REQUIRE(bce_loss(c, perfect) >= 0.0);

  REQUIRE_THROWS_AS(bce_loss({1, 0}, {0.5}), ValidationError);
}

TEST_CASE("ce closed forms and redundant-computation oracle") {
  const int V = 7;
  Matrix uniform(3, V, 0.42);
  REQUIRE(ce_loss(uniform, {0, 3, 6}) == Catch::Approx(std::log(double(V))).margin(1e-12));

  // Large-margin logits drive the loss to zero.
  Matrix margin(2, V, 0.0);
  margin.at(0, 2) = 50.0;
  margin.at(1, 5) = 50.0;
  REQUIRE(ce_loss(margin, {2, 5}) < 1e-12);

  // Random case against an explicit two-pass softmax-then-log evaluation.
  Rng rng(9);
  Matrix logits = random_matrix(rng, 5, V, 2.0);
  TokenSeq t{1, 0, 6, 3, 3};
  Matrix sm = softmax_rows(logits);
  double expect = 0.0;
  for (int r = 0; r < 5; ++r) expect -= std::log(sm.at(r, t[r]));
  expect /= 5;
  REQUIRE(ce_loss(logits, t) == Catch::Approx(expect).margin(1e-10));
}

TEST_CASE("adam fixed point and limit behavior") {
  Parameter w("w", 1, 4);
  w.value.fill(1.5);
  Adam adam({&w}, 0.1);

  // Zero gradient: parameters unchanged.
  adam.zero_grads();
  adam.step();
  for (int j = 0; j < 4; ++j) REQUIRE(w.value.at(0, j) == 1.5);

  // Constant gradient: per-step update magnitude approaches lr.
  Parameter u("u", 1, 1);
  Adam adam2({&u}, 0.01);
  double prev = u.value.at(0, 0);
  double delta = 0.0;
  for (int i = 0; i < 500; ++i) {
    u.zero_grad();
    u.grad_buf().at(0, 0) = 3.0;
    adam2.step();
    delta = prev - u.value.at(0, 0);
    prev = u.value.at(0, 0);
  }
  REQUIRE(delta == Catch::Approx(0.01).epsilon(1e-3));
}

TEST_CASE("adam converges on a quadratic bowl") {
  Rng rng(17);
  Parameter w("w", 1, 8);
  w.value.fill_gaussian(rng, 1.0);
  Adam adam({&w}, 1e-2);
  for (int step = 0; step < 2000; ++step) {
    w.zero_grad();
    for (int j = 0; j < 8; ++j) w.grad_buf().at(0, j) = 2.0 * w.value.at(0, j);
    adam.step();
  }
  for (int j = 0; j < 8; ++j) REQUIRE(std::abs(w.value.at(0, j)) < 1e-3);
}

TEST_CASE("attention with a single key collapses to a value projection") {
  Rng rng(21);
  AttentionBlock attn("attn", 16, 4);
  attn.init(rng);
  Matrix kv = random_matrix(rng, 1, 16);
  Matrix q = random_matrix(rng, 5, 16);
  AttentionBlock::Cache c;
  Matrix out = attn.forward(q, kv, &c);
  Matrix expected = attn.o_proj.forward(attn.v_proj.forward(kv));
  for (int r = 0; r < out.rows(); ++r)
    for (int j = 0; j < out.cols(); ++j)
      REQUIRE(out.at(r, j) == Catch::Approx(expected.at(0, j)).margin(1e-12));
}

TEST_CASE("attention weight rows sum to one") {
  Rng rng(22);
  AttentionBlock attn("attn", 16, 2);
  attn.init(rng);
  Matrix q = random_matrix(rng, 6, 16);
  Matrix kv = random_matrix(rng, 9, 16);
  AttentionBlock::Cache c;
  attn.forward(q, kv, &c);
  for (const Matrix& a : c.attn) {
    for (int r = 0; r < a.rows(); ++r) {
      double s = 0.0;
      for (int j = 0; j < a.cols(); ++j) {
        s += a.at(r, j);
        REQUIRE(a.at(r, j) >= 0.0);
      }
      REQUIRE(s == Catch::Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("attention output is invariant to kv row permutation") {
  Rng rng(23);
  AttentionBlock attn("attn", 16, 4);
  attn.init(rng);
  Matrix q = random_matrix(rng, 4, 16);
  Matrix kv = random_matrix(rng, 7, 16);
  AttentionBlock::Cache c1, c2;
  Matrix out1 = attn.forward(q, kv, &c1);

  Matrix shuffled(7, 16);
  std::vector<int> perm{3, 0, 6, 2, 5, 1, 4};
  for (int r = 0; r < 7; ++r)
    for (int j = 0; j < 16; ++j) shuffled.at(r, j) = kv.at(perm[r], j);
  Matrix out2 = attn.forward(q, shuffled, &c2);
  for (int r = 0; r < out1.rows(); ++r)
    for (int j = 0; j < out1.cols(); ++j)
      REQUIRE(out1.at(r, j) == Catch::Approx(out2.at(r, j)).margin(1e-10));
}

TEST_CASE("masked positions receive zero attention weight") {
  Rng rng(24);
  AttentionBlock attn("attn", 8, 2);
  attn.init(rng);
  Matrix q = random_matrix(rng, 3, 8);
  Matrix kv = random_matrix(rng, 4, 8);
  Matrix mask(3, 4, 1.0);
  mask.at(0, 2) = 0.0;
  mask.at(2, 0) = 0.0;
  AttentionBlock::Cache c;
  attn.forward(q, kv, &c, &mask);
  for (const Matrix& a : c.attn) {
    REQUIRE(a.at(0, 2) == 0.0);
    REQUIRE(a.at(2, 0) == 0.0);
  }
}

// --------------------------------------------------------------------------
// Finite-difference checks, block by block.  Inputs are wrapped in
// Parameters so input gradients are verified alongside weight gradients.

TEST_CASE("gradcheck: linear plus bce toy model") {
  Rng rng(31);
  LinearLayer lin("lin", 6, 1);
  lin.init(rng);
  Parameter px("x", 4, 6);
  px.value.fill_gaussian(rng, 1.0);
  std::vector<uint8_t> targets{1, 0, 1, 1};

  auto fwd = [&]() {
    Matrix z = lin.forward(px.value);
    std::vector<double> p(4);
    for (int r = 0; r < 4; ++r) p[r] = 1.0 / (1.0 + std::exp(-z.at(r, 0)));
    return bce_loss(targets, p);
  };
  auto fwd_bwd = [&]() {
    LinearLayer::Cache c;
    Matrix z = lin.forward(px.value, &c);
    std::vector<double> p(4);
    for (int r = 0; r < 4; ++r) p[r] = 1.0 / (1.0 + std::exp(-z.at(r, 0)));
    double loss = bce_loss(targets, p);
    std::vector<double> dp = bce_loss_grad(targets, p);
    Matrix dz(4, 1);
    for (int r = 0; r < 4; ++r) dz.at(r, 0) = dp[r] * p[r] * (1.0 - p[r]);
    px.grad_buf().add_in_place(lin.backward(dz, c));
    return loss;
  };
  ParamList ps{&lin.w, &lin.b, &px};
  GradCheckReport rep = grad_check(fwd, fwd_bwd, ps, rng);
  INFO(rep.worst_param);
  REQUIRE(rep.max_rel_err < 1e-6);
}

TEST_CASE("gradcheck: layer norm") {
  Rng rng(32);
  LayerNorm ln("ln", 12);
  Parameter px("x", 3, 12);
  px.value.fill_gaussian(rng, 1.5);
  Matrix gw = random_matrix(rng, 3, 12);

  auto fwd = [&]() {
    LayerNorm::Cache c;
    return weighted_sum(ln.forward(px.value, &c), gw);
  };
  auto fwd_bwd = [&]() {
    LayerNorm::Cache c;
    Matrix y = ln.forward(px.value, &c);
    px.grad_buf().add_in_place(ln.backward(gw, c));
    return weighted_sum(y, gw);
  };
  ParamList ps{&ln.gain, &ln.bias, &px};
  REQUIRE(grad_check(fwd, fwd_bwd, ps, rng).max_rel_err < 1e-6);
}

TEST_CASE("gradcheck: feed-forward") {
  Rng rng(33);
  FeedForward ffn("ffn", 10);
  ffn.init(rng);
  Parameter px("x", 3, 10);
  px.value.fill_gaussian(rng, 1.0);
  Matrix gw = random_matrix(rng, 3, 10);

  auto fwd = [&]() {
    FeedForward::Cache c;
    return weighted_sum(ffn.forward(px.value, &c), gw);
  };
  auto fwd_bwd = [&]() {
    FeedForward::Cache c;
    Matrix y = ffn.forward(px.value, &c);
    px.grad_buf().add_in_place(ffn.backward(gw, c));
    return weighted_sum(y, gw);
  };
  ParamList ps;
  ffn.collect(ps);
  ps.push_back(&px);
  REQUIRE(grad_check(fwd, fwd_bwd, ps, rng).max_rel_err < 1e-6);
}

TEST_CASE("gradcheck: multi-head attention, cross wiring") {
  Rng rng(34);
  AttentionBlock attn("attn", 12, 3);
  attn.init(rng);
  Parameter pq("q", 4, 12), pkv("kv", 6, 12);
  pq.value.fill_gaussian(rng, 1.0);
  pkv.value.fill_gaussian(rng, 1.0);
  Matrix gw = random_matrix(rng, 4, 12);

  auto fwd = [&]() {
    AttentionBlock::Cache c;
    return weighted_sum(attn.forward(pq.value, pkv.value, &c), gw);
  };
  auto fwd_bwd = [&]() {
    AttentionBlock::Cache c;
    Matrix y = attn.forward(pq.value, pkv.value, &c);
    auto [dq, dkv] = attn.backward(gw, c);
    pq.grad_buf().add_in_place(dq);
    pkv.grad_buf().add_in_place(dkv);
    return weighted_sum(y, gw);
  };
  ParamList ps;
  attn.collect(ps);
  ps.push_back(&pq);
  ps.push_back(&pkv);
  GradCheckReport rep = grad_check(fwd, fwd_bwd, ps, rng);
  INFO(rep.worst_param);
  REQUIRE(rep.max_rel_err < 1e-6);
}

TEST_CASE("gradcheck: self-attention shares the input gradient") {
  Rng rng(35);
  AttentionBlock attn("attn", 8, 2);
  attn.init(rng);
  Parameter px("x", 5, 8);
  px.value.fill_gaussian(rng, 1.0);
  Matrix gw = random_matrix(rng, 5, 8);

  auto fwd = [&]() {
    AttentionBlock::Cache c;
    return weighted_sum(attn.forward(px.value, px.value, &c), gw);
  };
  auto fwd_bwd = [&]() {
    AttentionBlock::Cache c;
    Matrix y = attn.forward(px.value, px.value, &c);
    auto [dq, dkv] = attn.backward(gw, c);
    dq.add_in_place(dkv);
    px.grad_buf().add_in_place(dq);
    return weighted_sum(y, gw);
  };
  ParamList ps;
  attn.collect(ps);
  ps.push_back(&px);
  REQUIRE(grad_check(fwd, fwd_bwd, ps, rng).max_rel_err < 1e-6);
}

TEST_CASE("gradcheck: embedding scatter") {
  Rng rng(36);
  Embedding emb("emb", 9, 6);
  emb.init(rng);
  TokenSeq ids{0, 3, 3, 8};
  Matrix gw = random_matrix(rng, 4, 6);

  auto fwd = [&]() { return weighted_sum(emb.forward(ids), gw); };
  auto fwd_bwd = [&]() {
    Matrix y = emb.forward(ids);
    emb.backward(gw, ids);
    return weighted_sum(y, gw);
  };
  ParamList ps{&emb.table};
  REQUIRE(grad_check(fwd, fwd_bwd, ps, rng).max_rel_err < 1e-6);
}

TEST_CASE("gradcheck detects a corrupted backward") {
  Rng rng(37);
  LinearLayer lin("lin", 5, 2);
  lin.init(rng);
  Matrix x = random_matrix(rng, 3, 5);
  Matrix gw = random_matrix(rng, 3, 2);

  auto fwd = [&]() { return weighted_sum(lin.forward(x), gw); };
  auto corrupted = [&]() {
    LinearLayer::Cache c;
    Matrix y = lin.forward(x, &c);
    lin.backward(gw, c);
    lin.w.grad_buf().at(0, 0) += 0.5;  // deliberate sabotage
    return weighted_sum(y, gw);
  };
  ParamList ps{&lin.w, &lin.b};
  GradCheckReport rep = grad_check(fwd, corrupted, ps, rng);
  REQUIRE(rep.max_rel_err > 1e-2);
  REQUIRE(rep.worst_param == "lin.w");
}

TEST_CASE("gradcheck rejects a non-deterministic closure") {
  Rng rng(38);
  Parameter w("w", 1, 1);
  double counter = 0.0;
  auto fwd = [&]() {
    counter += 1.0;
    return counter;
  };
  REQUIRE_THROWS_AS(grad_check(fwd, fwd, {&w}, rng), ValidationError);
}

TEST_CASE("dropout scales and masks, backward mirrors the mask") {
  Rng rng(39);
  Dropout drop(0.5);
  Matrix x(20, 20, 1.0);
  Dropout::Cache c;
  Matrix y = drop.forward(x, &c, &rng);
  int zeros = 0;
  for (int r = 0; r < 20; ++r)
    for (int j = 0; j < 20; ++j) {
      if (y.at(r, j) == 0.0) {
        ++zeros;
      } else {
        REQUIRE(y.at(r, j) == Catch::Approx(2.0));
      }
    }
  REQUIRE(zeros > 100);
  REQUIRE(zeros < 300);
  Matrix g(20, 20, 1.0);
  Matrix dx = drop.backward(g, c);
  for (int r = 0; r < 20; ++r)
    for (int j = 0; j < 20; ++j) REQUIRE(dx.at(r, j) == c.mask.at(r, j));

  // Inactive without an rng.
  Dropout::Cache c2;
  Matrix y2 = drop.forward(x, &c2, nullptr);
  REQUIRE(y2.at(3, 3) == 1.0);
}
