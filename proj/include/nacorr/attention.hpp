// nacorr/attention.hpp
//
// Multi-head scaled dot-product attention.  One block serves both
// self-attention (q_src == kv_src) and cross-attention.

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

#ifndef NACORR_ATTENTION_HPP_
#define NACORR_ATTENTION_HPP_

#include <cmath>
#include <utility>
#include <vector>

#include "nacorr/nn.hpp"

namespace nacorr {

class AttentionBlock {
 public:
  struct Cache {
    LinearLayer::Cache qc, kc, vc, oc;
    Matrix q, k, v;             // projected, seq x dim
    std::vector<Matrix> attn;   // per head, Lq x Lk, post-softmax
  };

  AttentionBlock(const std::string& name, int dim, int heads)
      : q_proj(name + ".q", dim, dim),
        k_proj(name + ".k", dim, dim),
        v_proj(name + ".v", dim, dim),
        o_proj(name + ".o", dim, dim),
        dim_(dim),
        heads_(heads) {
    NACORR_CHECK(heads > 0 && dim % heads == 0, "attention: dim ", dim,
                 " not divisible by heads ", heads);
    head_dim_ = dim / heads;
  }

  void init(Rng& rng) {
    q_proj.init(rng);
    k_proj.init(rng);
    v_proj.init(rng);
    o_proj.init(rng);
  }

  int dim() const { return dim_; }
  int heads() const { return heads_; }

  // mask, when given, is Lq x Lk with 0 = forbidden; masked positions get
  // zero attention weight.
  Matrix forward(const Matrix& q_src, const Matrix& kv_src, Cache* cache,
                 const Matrix* mask = nullptr) const {
    NACORR_CHECK(q_src.cols() == dim_ && kv_src.cols() == dim_,
                 "attention: input widths ", q_src.shape_str(), " / ", kv_src.shape_str(),
                 " vs model dim ", dim_);
    if (mask != nullptr) {
      NACORR_CHECK(mask->rows() == q_src.rows() && mask->cols() == kv_src.rows(),
                   "attention: mask ", mask->shape_str(), " vs ", q_src.rows(), "x",
                   kv_src.rows());
    }
    cache->q = q_proj.forward(q_src, &cache->qc);
    cache->k = k_proj.forward(kv_src, &cache->kc);
    cache->v = v_proj.forward(kv_src, &cache->vc);
    cache->attn.clear();
    cache->attn.reserve(heads_);

    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
    Matrix heads_out(q_src.rows(), dim_);
    for (int h = 0; h < heads_; ++h) {
      Matrix qh = cache->q.col_block(h * head_dim_, head_dim_);
      Matrix kh = cache->k.col_block(h * head_dim_, head_dim_);
      Matrix vh = cache->v.col_block(h * head_dim_, head_dim_);
      Matrix scores = matmul_nt(qh, kh);
      scores.scale(scale);
      if (mask != nullptr) {
        for (int r = 0; r < scores.rows(); ++r)
          for (int c = 0; c < scores.cols(); ++c)
            if (mask->at(r, c) == 0.0) scores.at(r, c) = -1e30;
      }
      Matrix a = softmax_rows(scores);
      heads_out.add_col_block(h * head_dim_, matmul(a, vh));
      cache->attn.push_back(std::move(a));
    }
    return o_proj.forward(heads_out, &cache->oc);
  }

  // Returns {d q_src, d kv_src}.
  std::pair<Matrix, Matrix> backward(const Matrix& g, const Cache& cache) {
    Matrix dheads = o_proj.backward(g, cache.oc);
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
    Matrix dq(cache.q.rows(), dim_), dk(cache.k.rows(), dim_), dv(cache.v.rows(), dim_);
    for (int h = 0; h < heads_; ++h) {
      Matrix dhh = dheads.col_block(h * head_dim_, head_dim_);
      const Matrix& a = cache.attn[h];
      Matrix vh = cache.v.col_block(h * head_dim_, head_dim_);
      Matrix da = matmul_nt(dhh, vh);
      Matrix dvh = matmul_tn(a, dhh);
      Matrix ds = softmax_rows_backward(a, da);
      ds.scale(scale);
      Matrix qh = cache.q.col_block(h * head_dim_, head_dim_);
      Matrix kh = cache.k.col_block(h * head_dim_, head_dim_);
      dq.add_col_block(h * head_dim_, matmul(ds, kh));
      dk.add_col_block(h * head_dim_, matmul_tn(ds, qh));
      dv.add_col_block(h * head_dim_, dvh);
    }
    Matrix dq_src = q_proj.backward(dq, cache.qc);
    Matrix dkv_src = k_proj.backward(dk, cache.kc);
    dkv_src.add_in_place(v_proj.backward(dv, cache.vc));
    return {std::move(dq_src), std::move(dkv_src)};
  }

  void collect(ParamList& ps) {
    q_proj.collect(ps);
    k_proj.collect(ps);
    v_proj.collect(ps);
    o_proj.collect(ps);
  }

  LinearLayer q_proj, k_proj, v_proj, o_proj;

 private:
  int dim_, heads_, head_dim_;
};

}  // namespace nacorr

#endif  // NACORR_ATTENTION_HPP_
