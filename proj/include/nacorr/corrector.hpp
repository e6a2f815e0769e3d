// nacorr/corrector.hpp
//
// N-best fusion and the non-autoregressive corrector.  Fusion learns one
// weight distribution per aligned position from the concatenated word and
// confidence embeddings of all candidates; both fused streams use the same
// weights.  Each corrector layer runs self-attention plus two
// cross-attentions (acoustic, fused confidence), sums the three attention
// outputs, then a feed-forward.  The classifier covers the full vocabulary
// including blank, so the model can delete insertions and keep blank columns
// blank.

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

#ifndef NACORR_CORRECTOR_HPP_
#define NACORR_CORRECTOR_HPP_

#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "nacorr/attention.hpp"
#include "nacorr/nn.hpp"

namespace nacorr {

struct CorrectorConfig {
  int vocab_size = 0;
  int acoustic_dim = 0;
  int dim = 64;
  int heads = 4;
  int layers = 3;
  int n_candidates = 3;
  double dropout = 0.0;
};

struct FusedEmbeddings {
  Matrix emb_w;    // L x d
  Matrix emb_c;    // L x d
  Matrix weights;  // L x N, rows nonnegative, each summing to 1
};

class FusionModule {
 public:
  struct Cache {
    std::vector<Matrix> word, conf;
    LinearLayer::Cache score_c;
    Matrix weights;
  };

  FusionModule(const std::string& name, int n_candidates, int dim)
      : score(name + ".score", n_candidates * 2 * dim, n_candidates),
        n_(n_candidates),
        dim_(dim) {}

  void init(Rng& rng) { score.init(rng); }

  FusedEmbeddings forward(const std::vector<Matrix>& word, const std::vector<Matrix>& conf,
                          Cache* c) const {
    NACORR_CHECK(static_cast<int>(word.size()) == n_ && static_cast<int>(conf.size()) == n_,
                 "fuse: expected ", n_, " candidates, got ", word.size(), "/", conf.size());
    const int L = word[0].rows();
    for (int k = 0; k < n_; ++k) {
      NACORR_CHECK(word[k].rows() == L && conf[k].rows() == L && word[k].cols() == dim_ &&
                       conf[k].cols() == dim_,
                   "fuse: candidate ", k, " has shape ", word[k].shape_str(), "/",
                   conf[k].shape_str(), ", expected ", L, "x", dim_);
    }
    Matrix z(L, n_ * 2 * dim_);
    for (int l = 0; l < L; ++l) {
      double* zr = z.row_ptr(l);
      for (int k = 0; k < n_; ++k) {
        const double* wr = word[k].row_ptr(l);
        const double* cr = conf[k].row_ptr(l);
        for (int j = 0; j < dim_; ++j) zr[k * dim_ + j] = wr[j];
        for (int j = 0; j < dim_; ++j) zr[(n_ + k) * dim_ + j] = cr[j];
      }
    }
    Matrix scores = score.forward(z, &c->score_c);
    FusedEmbeddings out;
    out.weights = softmax_rows(scores);
    out.emb_w = Matrix(L, dim_);
    out.emb_c = Matrix(L, dim_);
    for (int l = 0; l < L; ++l) {
      for (int k = 0; k < n_; ++k) {
        double w = out.weights.at(l, k);
        const double* wr = word[k].row_ptr(l);
        const double* cr = conf[k].row_ptr(l);
        double* ew = out.emb_w.row_ptr(l);
        double* ec = out.emb_c.row_ptr(l);
        for (int j = 0; j < dim_; ++j) {
          ew[j] += w * wr[j];
          ec[j] += w * cr[j];
        }
      }
    }
    c->word = word;
    c->conf = conf;
    c->weights = out.weights;
    return out;
  }

  // Confidence embeddings are frozen CEM outputs: gradients flow into the
  // scoring layer and the word embeddings only.
  std::vector<Matrix> backward(const Matrix& d_emb_w, const Matrix& d_emb_c, const Cache& c) {
    const int L = d_emb_w.rows();
    Matrix dw(L, n_);
    std::vector<Matrix> dword(n_, Matrix(L, dim_));
    for (int l = 0; l < L; ++l) {
      const double* gw = d_emb_w.row_ptr(l);
      const double* gc = d_emb_c.row_ptr(l);
      for (int k = 0; k < n_; ++k) {
        const double* wr = c.word[k].row_ptr(l);
        const double* cr = c.conf[k].row_ptr(l);
        double acc = 0.0;
        double wlk = c.weights.at(l, k);
        double* dwr = dword[k].row_ptr(l);
        for (int j = 0; j < dim_; ++j) {
          acc += gw[j] * wr[j] + gc[j] * cr[j];
          dwr[j] += wlk * gw[j];
        }
        dw.at(l, k) = acc;
      }
    }
    Matrix ds = softmax_rows_backward(c.weights, dw);
    Matrix dz = score.backward(ds, c.score_c);
    for (int l = 0; l < L; ++l) {
      const double* zr = dz.row_ptr(l);
      for (int k = 0; k < n_; ++k) {
        double* dwr = dword[k].row_ptr(l);
        for (int j = 0; j < dim_; ++j) dwr[j] += zr[k * dim_ + j];
      }
    }
    return dword;
  }

  void collect(ParamList& ps) { score.collect(ps); }

  int n_candidates() const { return n_; }

  LinearLayer score;

 private:
  int n_, dim_;
};

class CorrectorLayer {
 public:
  struct Cache {
    LayerNorm::Cache ln_s, ln_a, ln_c, ln_f;
    AttentionBlock::Cache at_s, at_a, at_c;
    FeedForward::Cache ff;
    Dropout::Cache dr_s, dr_a, dr_c, dr_f;
  };

  CorrectorLayer(const std::string& name, int dim, int heads, double dropout)
      : ln_self(name + ".ln_self", dim),
        ln_acoustic(name + ".ln_acoustic", dim),
        ln_conf(name + ".ln_conf", dim),
        ln_ffn(name + ".ln_ffn", dim),
        self_attn(name + ".self", dim, heads),
        cross_acoustic(name + ".cross_acoustic", dim, heads),
        cross_conf(name + ".cross_conf", dim, heads),
        ffn(name + ".ffn", dim),
        drop(dropout) {}

  void init(Rng& rng) {
    self_attn.init(rng);
    cross_acoustic.init(rng);
    cross_conf.init(rng);
    ffn.init(rng);
  }

  Matrix forward(const Matrix& x, const Matrix& ac_kv, const Matrix& conf_kv, Cache* c,
                 Rng* rng) const {
    Matrix a = ln_self.forward(x, &c->ln_s);
    Matrix y = x;
    y.add_in_place(drop.forward(self_attn.forward(a, a, &c->at_s), &c->dr_s, rng));
    y.add_in_place(drop.forward(
        cross_acoustic.forward(ln_acoustic.forward(x, &c->ln_a), ac_kv, &c->at_a), &c->dr_a,
        rng));
    y.add_in_place(drop.forward(
        cross_conf.forward(ln_conf.forward(x, &c->ln_c), conf_kv, &c->at_c), &c->dr_c, rng));
    Matrix z = y;
    z.add_in_place(
        drop.forward(ffn.forward(ln_ffn.forward(y, &c->ln_f), &c->ff), &c->dr_f, rng));
    return z;
  }

  // Returns {dx, d ac_kv, d conf_kv}.
  std::tuple<Matrix, Matrix, Matrix> backward(const Matrix& g, const Cache& c) {
    Matrix dy = ln_ffn.backward(ffn.backward(drop.backward(g, c.dr_f), c.ff), c.ln_f);
    dy.add_in_place(g);

    auto [dq_s, dkv_s] = self_attn.backward(drop.backward(dy, c.dr_s), c.at_s);
    dq_s.add_in_place(dkv_s);
    Matrix dx = ln_self.backward(dq_s, c.ln_s);

    auto [dq_a, d_ac] = cross_acoustic.backward(drop.backward(dy, c.dr_a), c.at_a);
    dx.add_in_place(ln_acoustic.backward(dq_a, c.ln_a));

    auto [dq_c, d_conf] = cross_conf.backward(drop.backward(dy, c.dr_c), c.at_c);
    dx.add_in_place(ln_conf.backward(dq_c, c.ln_c));

    dx.add_in_place(dy);
    return {std::move(dx), std::move(d_ac), std::move(d_conf)};
  }

  void collect(ParamList& ps) {
    ln_self.collect(ps);
    self_attn.collect(ps);
    ln_acoustic.collect(ps);
    cross_acoustic.collect(ps);
    ln_conf.collect(ps);
    cross_conf.collect(ps);
    ln_ffn.collect(ps);
    ffn.collect(ps);
  }

  LayerNorm ln_self, ln_acoustic, ln_conf, ln_ffn;
  AttentionBlock self_attn, cross_acoustic, cross_conf;
  FeedForward ffn;
  Dropout drop;
};

class CorrectorModel {
 public:
  explicit CorrectorModel(const CorrectorConfig& cfg)
      : cfg_(cfg),
        embed("corrector.embed", cfg.vocab_size, cfg.dim),
        ac_proj("corrector.ac_proj", cfg.acoustic_dim, cfg.dim),
        fusion("fusion", cfg.n_candidates, cfg.dim),
        final_ln("corrector.final_ln", cfg.dim),
        head("corrector.head", cfg.dim, cfg.vocab_size) {
    layers_.reserve(cfg.layers);
    for (int i = 0; i < cfg.layers; ++i)
      layers_.emplace_back("corrector.layer" + std::to_string(i), cfg.dim, cfg.heads,
                           cfg.dropout);
  }

  const CorrectorConfig& config() const { return cfg_; }

  void init(Rng& rng) {
    embed.init(rng);
    ac_proj.init(rng);
    fusion.init(rng);
    for (CorrectorLayer& l : layers_) l.init(rng);
    head.init(rng);
  }

  ParamList params() {
    ParamList ps;
    embed.collect(ps);
    ac_proj.collect(ps);
    fusion.collect(ps);
    for (CorrectorLayer& l : layers_) l.collect(ps);
    final_ln.collect(ps);
    head.collect(ps);
    return ps;
  }

  struct Trace {
    std::vector<TokenSeq> rows;
    FusionModule::Cache fuse_c;
    LinearLayer::Cache ac_c;
    bool acoustic_active = false;
    std::vector<CorrectorLayer::Cache> layer_c;
    LayerNorm::Cache final_c;
    LinearLayer::Cache head_c;
  };

  // rows: N aligned candidate rows of equal length; conf_embs: N matrices
  // L x d (zeros when the confidence reference is ablated); acoustic: raw
  // frames F x acoustic_dim.  use_acoustic=false zeroes the acoustic KV
  // stream entirely, leaving the acoustic projection untouched.
  Matrix forward(const std::vector<TokenSeq>& rows, const std::vector<Matrix>& conf_embs,
                 const Matrix& acoustic, bool use_acoustic, Trace* trace = nullptr,
                 Rng* dropout_rng = nullptr) const {
    NACORR_CHECK(static_cast<int>(rows.size()) == cfg_.n_candidates, "corrector_forward: ",
                 rows.size(), " rows vs ", cfg_.n_candidates, " configured candidates");
    NACORR_CHECK(!rows[0].empty(), "corrector_forward: empty aligned grid");
    Trace local;
    Trace& t = trace != nullptr ? *trace : local;
    t.rows = rows;
    t.layer_c.assign(layers_.size(), {});

    std::vector<Matrix> word;
    word.reserve(rows.size());
    for (const TokenSeq& row : rows) {
      NACORR_CHECK(row.size() == rows[0].size(), "corrector_forward: ragged aligned rows");
      Matrix e = embed.forward(row);
      add_positional_encoding(e);
      word.push_back(std::move(e));
    }
    FusedEmbeddings fused = fusion.forward(word, conf_embs, &t.fuse_c);

    Matrix ac_kv;
    t.acoustic_active = use_acoustic && acoustic.rows() > 0;
    if (t.acoustic_active) {
      NACORR_CHECK(acoustic.cols() == cfg_.acoustic_dim, "corrector_forward: acoustic width ",
                   acoustic.cols(), " vs config ", cfg_.acoustic_dim);
      ac_kv = ac_proj.forward(acoustic, &t.ac_c);
      add_positional_encoding(ac_kv);
    } else {
      ac_kv = Matrix(std::max(acoustic.rows(), 1), cfg_.dim);
    }

    Matrix x = fused.emb_w;
    for (size_t i = 0; i < layers_.size(); ++i)
      x = layers_[i].forward(x, ac_kv, fused.emb_c, &t.layer_c[i], dropout_rng);
    Matrix h = final_ln.forward(x, &t.final_c);
    return head.forward(h, &t.head_c);
  }

  void backward(const Matrix& dlogits, const Trace& t) {
    Matrix dh = head.backward(dlogits, t.head_c);
    Matrix dx = final_ln.backward(dh, t.final_c);
    Matrix d_ac, d_conf;
    for (size_t i = layers_.size(); i-- > 0;) {
      auto [dxi, dai, dci] = layers_[i].backward(dx, t.layer_c[i]);
      dx = std::move(dxi);
      if (d_ac.rows() == 0) {
        d_ac = std::move(dai);
        d_conf = std::move(dci);
      } else {
        d_ac.add_in_place(dai);
        d_conf.add_in_place(dci);
      }
    }
    std::vector<Matrix> dword = fusion.backward(dx, d_conf, t.fuse_c);
    for (size_t k = 0; k < t.rows.size(); ++k) embed.backward(dword[k], t.rows[k]);
    if (t.acoustic_active) ac_proj.backward(d_ac, t.ac_c);
  }

  Embedding embed;
  LinearLayer ac_proj;
  FusionModule fusion;
  LayerNorm final_ln;
  LinearLayer head;

  std::vector<CorrectorLayer>& layers() { return layers_; }

 private:
  CorrectorConfig cfg_;
  std::vector<CorrectorLayer> layers_;
};

}  // namespace nacorr

#endif  // NACORR_CORRECTOR_HPP_
