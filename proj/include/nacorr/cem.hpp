// nacorr/cem.hpp
//
// Confidence Module: a three-layer full-sequence (non-autoregressive)
// decoder scoring per-token correctness.  Self-attention over the hypothesis
// embedding, cross-attention to projected text features, sigmoid head.  The
// last-layer hidden states are the confidence embedding consumed by the
// corrector.

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

#ifndef NACORR_CEM_HPP_
#define NACORR_CEM_HPP_

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nacorr/attention.hpp"
#include "nacorr/nn.hpp"

namespace nacorr {

struct CemConfig {
  int vocab_size = 0;
  int feat_dim = 0;  // width of the text features
  int dim = 64;
  int heads = 4;
  int layers = 3;
  double dropout = 0.0;
};

struct ConfidenceOutput {
  std::vector<double> scores;  // per token, strictly inside (0,1)
  Matrix hidden;               // L x d confidence embedding
};

class CemLayer {
 public:
  struct Cache {
    LayerNorm::Cache ln_s, ln_c, ln_f;
    AttentionBlock::Cache at_s, at_c;
    FeedForward::Cache ff;
    Dropout::Cache dr_s, dr_c, dr_f;
  };

  CemLayer(const std::string& name, int dim, int heads, double dropout)
      : ln_self(name + ".ln_self", dim),
        ln_cross(name + ".ln_cross", dim),
        ln_ffn(name + ".ln_ffn", dim),
        self_attn(name + ".self", dim, heads),
        cross_attn(name + ".cross", dim, heads),
        ffn(name + ".ffn", dim),
        drop(dropout) {}

  void init(Rng& rng) {
    self_attn.init(rng);
    cross_attn.init(rng);
    ffn.init(rng);
  }

  Matrix forward(const Matrix& x, const Matrix& feats, Cache* c, Rng* rng) const {
    Matrix a = ln_self.forward(x, &c->ln_s);
    Matrix x1 = x;
    x1.add_in_place(drop.forward(self_attn.forward(a, a, &c->at_s), &c->dr_s, rng));
    Matrix x2 = x1;
    x2.add_in_place(drop.forward(
        cross_attn.forward(ln_cross.forward(x1, &c->ln_c), feats, &c->at_c), &c->dr_c, rng));
    Matrix x3 = x2;
    x3.add_in_place(
        drop.forward(ffn.forward(ln_ffn.forward(x2, &c->ln_f), &c->ff), &c->dr_f, rng));
    return x3;
  }

  // Returns {dx, dfeats}.
  std::pair<Matrix, Matrix> backward(const Matrix& g, const Cache& c) {
    Matrix dx2 = ln_ffn.backward(ffn.backward(drop.backward(g, c.dr_f), c.ff), c.ln_f);
    dx2.add_in_place(g);

    auto [dq_c, dfeats] = cross_attn.backward(drop.backward(dx2, c.dr_c), c.at_c);
    Matrix dx1 = ln_cross.backward(dq_c, c.ln_c);
    dx1.add_in_place(dx2);

    auto [dq_s, dkv_s] = self_attn.backward(drop.backward(dx1, c.dr_s), c.at_s);
    dq_s.add_in_place(dkv_s);
    Matrix dx = ln_self.backward(dq_s, c.ln_s);
    dx.add_in_place(dx1);
    return {std::move(dx), std::move(dfeats)};
  }

  void collect(ParamList& ps) {
    ln_self.collect(ps);
    self_attn.collect(ps);
    ln_cross.collect(ps);
    cross_attn.collect(ps);
    ln_ffn.collect(ps);
    ffn.collect(ps);
  }

  LayerNorm ln_self, ln_cross, ln_ffn;
  AttentionBlock self_attn, cross_attn;
  FeedForward ffn;
  Dropout drop;
};

class CemModel {
 public:
  explicit CemModel(const CemConfig& cfg)
      : cfg_(cfg),
        embed("cem.embed", cfg.vocab_size, cfg.dim),
        feat_proj("cem.feat_proj", cfg.feat_dim, cfg.dim),
        final_ln("cem.final_ln", cfg.dim),
        head("cem.head", cfg.dim, 1) {
    NACORR_CHECK(cfg.layers >= 1, "cem: needs at least one layer");
    layers_.reserve(cfg.layers);
    for (int i = 0; i < cfg.layers; ++i)
      layers_.emplace_back("cem.layer" + std::to_string(i), cfg.dim, cfg.heads, cfg.dropout);
  }

  const CemConfig& config() const { return cfg_; }

  void init(Rng& rng) {
    embed.init(rng);
    feat_proj.init(rng);
    for (CemLayer& l : layers_) l.init(rng);
    head.init(rng);
  }

  ParamList params() {
    ParamList ps;
    embed.collect(ps);
    feat_proj.collect(ps);
    for (CemLayer& l : layers_) l.collect(ps);
    final_ln.collect(ps);
    head.collect(ps);
    return ps;
  }

  void freeze() {
    for (Parameter* p : params()) p->frozen = true;
    frozen_ = true;
  }

  bool frozen() const { return frozen_; }

  struct Trace {
    TokenSeq tokens;
    LinearLayer::Cache feat_c;
    std::vector<CemLayer::Cache> layer_c;
    LayerNorm::Cache final_c;
    LinearLayer::Cache head_c;
    std::vector<double> scores;
  };

  // tokens may contain blanks (aligned rows); text feature rows must pair
  // one-to-one with tokens, zero rows at blank positions.
  ConfidenceOutput forward(const TokenSeq& tokens, const Matrix& feats, Trace* trace = nullptr,
                           Rng* dropout_rng = nullptr) const {
    NACORR_CHECK(static_cast<size_t>(feats.rows()) == tokens.size(),
                 "cem_forward: ", tokens.size(), " tokens vs ", feats.rows(),
                 " text feature rows");
    NACORR_CHECK(feats.cols() == cfg_.feat_dim, "cem_forward: feature width ", feats.cols(),
                 " vs config ", cfg_.feat_dim);
    Trace local;
    Trace& t = trace != nullptr ? *trace : local;
    t.tokens = tokens;
    t.layer_c.assign(layers_.size(), {});

    Matrix x = embed.forward(tokens);
    add_positional_encoding(x);
    Matrix f = feat_proj.forward(feats, &t.feat_c);
    add_positional_encoding(f);
    for (size_t i = 0; i < layers_.size(); ++i)
      x = layers_[i].forward(x, f, &t.layer_c[i], dropout_rng);

    ConfidenceOutput out;
    out.hidden = final_ln.forward(x, &t.final_c);
    Matrix z = head.forward(out.hidden, &t.head_c);
    out.scores.resize(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i)
      out.scores[i] = 1.0 / (1.0 + std::exp(-z.at(static_cast<int>(i), 0)));
    t.scores = out.scores;
    return out;
  }

  // Backward from dL/dscores; accumulates gradients into all CEM parameters.
  void backward(const std::vector<double>& dscores, const Trace& t) {
    NACORR_CHECK(dscores.size() == t.scores.size(), "cem backward: score length mismatch");
    Matrix dz(static_cast<int>(dscores.size()), 1);
    for (size_t i = 0; i < dscores.size(); ++i) {
      double s = t.scores[i];
      dz.at(static_cast<int>(i), 0) = dscores[i] * s * (1.0 - s);
    }
    Matrix dh = head.backward(dz, t.head_c);
    Matrix dx = final_ln.backward(dh, t.final_c);
    Matrix dfeats_total;
    for (size_t i = layers_.size(); i-- > 0;) {
      auto [dxi, dfi] = layers_[i].backward(dx, t.layer_c[i]);
      dx = std::move(dxi);
      if (dfeats_total.rows() == 0) {
        dfeats_total = std::move(dfi);
      } else {
        dfeats_total.add_in_place(dfi);
      }
    }
    embed.backward(dx, t.tokens);
    feat_proj.backward(dfeats_total, t.feat_c);
  }

  Embedding embed;
  LinearLayer feat_proj;
  LayerNorm final_ln;
  LinearLayer head;

  std::vector<CemLayer>& layers() { return layers_; }
  const std::vector<CemLayer>& layers() const { return layers_; }

 private:
  CemConfig cfg_;
  std::vector<CemLayer> layers_;
  bool frozen_ = false;
};

// Read-only handle over a trained CEM; construction freezes the parameters,
// so any later gradient write throws at the access point.
class FrozenCem {
 public:
  explicit FrozenCem(std::shared_ptr<CemModel> model) : model_(std::move(model)) {
    model_->freeze();
  }

  ConfidenceOutput forward(const TokenSeq& tokens, const Matrix& feats) const {
    return model_->forward(tokens, feats);
  }

  const CemModel& model() const { return *model_; }
  CemModel& mutable_model() { return *model_; }  // for checksum/param access in tests

 private:
  std::shared_ptr<CemModel> model_;
};

}  // namespace nacorr

#endif  // NACORR_CEM_HPP_
