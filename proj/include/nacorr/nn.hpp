// nacorr/nn.hpp
//
// Trainable building blocks with hand-written backward passes.  Every layer
// follows the same shape: forward(x, Cache*) saves what backward needs,
// backward(grad_out, cache) accumulates parameter gradients and returns the
// input gradient.  Each backward rule is finite-difference verified in the
// test suite.

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

#ifndef NACORR_NN_HPP_
#define NACORR_NN_HPP_

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nacorr/matrix.hpp"
#include "nacorr/rng.hpp"
#include "nacorr/vocab.hpp"

namespace nacorr {

// A trainable weight with an attached gradient buffer.  Frozen parameters
// reject any gradient access; that is the enforcement point of the CEM
// freeze contract.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool frozen = false;

  Parameter(std::string n, int rows, int cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols) {}

  Matrix& grad_buf() {
    NACORR_CHECK(!frozen, "gradient write to frozen parameter \"", name, "\"");
    return grad;
  }

  void zero_grad() { grad_buf().set_zero(); }
};

using ParamList = std::vector<Parameter*>;

inline void zero_grads(const ParamList& ps) {
  for (Parameter* p : ps) p->zero_grad();
}

// ---------------------------------------------------------------------------
// Elementwise and row-wise primitives.

inline Matrix sigmoid(const Matrix& x) {
  Matrix y = x;
  for (int r = 0; r < y.rows(); ++r)
    for (int c = 0; c < y.cols(); ++c) y.at(r, c) = 1.0 / (1.0 + std::exp(-y.at(r, c)));
  return y;
}

inline Matrix softmax_rows(const Matrix& x) {
  Matrix y = x;
  for (int r = 0; r < y.rows(); ++r) {
    double* row = y.row_ptr(r);
    double mx = row[0];
    for (int c = 1; c < y.cols(); ++c) mx = std::max(mx, row[c]);
    double sum = 0.0;
    for (int c = 0; c < y.cols(); ++c) {
      row[c] = std::exp(row[c] - mx);
      sum += row[c];
    }
    for (int c = 0; c < y.cols(); ++c) row[c] /= sum;
  }
  return y;
}

// dL/dx given y = softmax_rows(x) and g = dL/dy.
inline Matrix softmax_rows_backward(const Matrix& y, const Matrix& g) {
  NACORR_CHECK(y.same_shape(g), "softmax backward: shape mismatch");
  Matrix dx(y.rows(), y.cols());
  for (int r = 0; r < y.rows(); ++r) {
    const double* yr = y.row_ptr(r);
    const double* gr = g.row_ptr(r);
    double dot = 0.0;
    for (int c = 0; c < y.cols(); ++c) dot += yr[c] * gr[c];
    double* dr = dx.row_ptr(r);
    for (int c = 0; c < y.cols(); ++c) dr[c] = yr[c] * (gr[c] - dot);
  }
  return dx;
}

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

inline double gelu_grad(double x) {
  double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return cdf + x * pdf;
}

// Sinusoidal positions added in place to token (or feature) embeddings.
inline void add_positional_encoding(Matrix& x) {
  const int d = x.cols();
  for (int pos = 0; pos < x.rows(); ++pos) {
    for (int i = 0; 2 * i < d; ++i) {
      double f = std::pow(10000.0, -2.0 * i / d);
      x.at(pos, 2 * i) += std::sin(pos * f);
      if (2 * i + 1 < d) x.at(pos, 2 * i + 1) += std::cos(pos * f);
    }
  }
}

// ---------------------------------------------------------------------------
// Linear layer: y = x W + b.

class LinearLayer {
 public:
  struct Cache {
    Matrix x;
  };

  LinearLayer(const std::string& name, int in, int out)
      : w(name + ".w", in, out), b(name + ".b", 1, out) {}

  void init(Rng& rng) {
    w.value.fill_xavier_uniform(rng, w.value.rows(), w.value.cols());
    b.value.set_zero();
  }

  int in_dim() const { return w.value.rows(); }
  int out_dim() const { return w.value.cols(); }

  Matrix forward(const Matrix& x) const {
    NACORR_CHECK(x.cols() == w.value.rows(), "linear \"", w.name, "\": input ", x.shape_str(),
                 " incompatible with weight ", w.value.shape_str());
    Matrix y = matmul(x, w.value);
    for (int r = 0; r < y.rows(); ++r) {
      double* row = y.row_ptr(r);
      const double* bp = b.value.row_ptr(0);
      for (int c = 0; c < y.cols(); ++c) row[c] += bp[c];
    }
    return y;
  }

  Matrix forward(const Matrix& x, Cache* cache) const {
    cache->x = x;
    return forward(x);
  }

  Matrix backward(const Matrix& g, const Cache& cache) {
    matmul_tn_acc(cache.x, g, w.grad_buf());
    Matrix& db = b.grad_buf();
    for (int r = 0; r < g.rows(); ++r) {
      const double* gr = g.row_ptr(r);
      double* bp = db.row_ptr(0);
      for (int c = 0; c < g.cols(); ++c) bp[c] += gr[c];
    }
    return matmul_nt(g, w.value);
  }

  void collect(ParamList& ps) {
    ps.push_back(&w);
    ps.push_back(&b);
  }

  Parameter w, b;
};

// ---------------------------------------------------------------------------
// Row-wise layer norm with affine gain/bias.

class LayerNorm {
 public:
  static constexpr double kEps = 1e-5;

  struct Cache {
    Matrix xhat;
    std::vector<double> inv_std;
  };

  LayerNorm(const std::string& name, int dim)
      : gain(name + ".gain", 1, dim), bias(name + ".bias", 1, dim) {
    gain.value.fill(1.0);
  }

  Matrix forward(const Matrix& x, Cache* cache) const {
    const int d = x.cols();
    NACORR_CHECK(d == gain.value.cols(), "layer_norm: width ", d, " vs ", gain.value.cols());
    Matrix y(x.rows(), d);
    cache->xhat = Matrix(x.rows(), d);
    cache->inv_std.assign(x.rows(), 0.0);
    for (int r = 0; r < x.rows(); ++r) {
      const double* xr = x.row_ptr(r);
      double mu = 0.0;
      for (int c = 0; c < d; ++c) mu += xr[c];
      mu /= d;
      double var = 0.0;
      for (int c = 0; c < d; ++c) var += (xr[c] - mu) * (xr[c] - mu);
      var /= d;
      double inv = 1.0 / std::sqrt(var + kEps);
      cache->inv_std[r] = inv;
      double* hr = cache->xhat.row_ptr(r);
      double* yr = y.row_ptr(r);
      const double* gp = gain.value.row_ptr(0);
      const double* bp = bias.value.row_ptr(0);
      for (int c = 0; c < d; ++c) {
        hr[c] = (xr[c] - mu) * inv;
        yr[c] = gp[c] * hr[c] + bp[c];
      }
    }
    return y;
  }

  Matrix backward(const Matrix& g, const Cache& cache) {
    const int d = g.cols();
    Matrix dx(g.rows(), d);
    Matrix& dgain = gain.grad_buf();
    Matrix& dbias = bias.grad_buf();
    for (int r = 0; r < g.rows(); ++r) {
      const double* gr = g.row_ptr(r);
      const double* hr = cache.xhat.row_ptr(r);
      const double* gp = gain.value.row_ptr(0);
      double* dgp = dgain.row_ptr(0);
      double* dbp = dbias.row_ptr(0);
      double mean_dh = 0.0, mean_dh_h = 0.0;
      for (int c = 0; c < d; ++c) {
        dgp[c] += gr[c] * hr[c];
        dbp[c] += gr[c];
        double dh = gr[c] * gp[c];
        mean_dh += dh;
        mean_dh_h += dh * hr[c];
      }
      mean_dh /= d;
      mean_dh_h /= d;
      double inv = cache.inv_std[r];
      double* dxr = dx.row_ptr(r);
      for (int c = 0; c < d; ++c) {
        double dh = gr[c] * gp[c];
        dxr[c] = inv * (dh - mean_dh - hr[c] * mean_dh_h);
      }
    }
    return dx;
  }

  void collect(ParamList& ps) {
    ps.push_back(&gain);
    ps.push_back(&bias);
  }

  Parameter gain, bias;
};

// ---------------------------------------------------------------------------
// Token embedding lookup.

class Embedding {
 public:
  Embedding(const std::string& name, int vocab, int dim) : table(name + ".table", vocab, dim) {}

  void init(Rng& rng) { table.value.fill_gaussian(rng, 1.0); }

  Matrix forward(const TokenSeq& ids) const {
    Matrix out(static_cast<int>(ids.size()), table.value.cols());
    for (size_t r = 0; r < ids.size(); ++r) {
      NACORR_CHECK(ids[r] >= 0 && ids[r] < table.value.rows(), "embedding: id ", ids[r],
                   " out of range");
      const double* src = table.value.row_ptr(ids[r]);
      double* dst = out.row_ptr(static_cast<int>(r));
      for (int c = 0; c < out.cols(); ++c) dst[c] = src[c];
    }
    return out;
  }

  void backward(const Matrix& g, const TokenSeq& ids) {
    Matrix& dt = table.grad_buf();
    for (size_t r = 0; r < ids.size(); ++r) {
      const double* gr = g.row_ptr(static_cast<int>(r));
      double* dst = dt.row_ptr(ids[r]);
      for (int c = 0; c < g.cols(); ++c) dst[c] += gr[c];
    }
  }

  void collect(ParamList& ps) { ps.push_back(&table); }

  Parameter table;
};

// ---------------------------------------------------------------------------
// Position-wise feed-forward, width 2d, GELU.

class FeedForward {
 public:
  struct Cache {
    LinearLayer::Cache c1, c2;
    Matrix pre;
  };

  FeedForward(const std::string& name, int dim)
      : lin1(name + ".lin1", dim, 2 * dim), lin2(name + ".lin2", 2 * dim, dim) {}

  void init(Rng& rng) {
    lin1.init(rng);
    lin2.init(rng);
  }

  Matrix forward(const Matrix& x, Cache* cache) const {
    cache->pre = lin1.forward(x, &cache->c1);
    Matrix a = cache->pre;
    for (int r = 0; r < a.rows(); ++r)
      for (int c = 0; c < a.cols(); ++c) a.at(r, c) = gelu(a.at(r, c));
    return lin2.forward(a, &cache->c2);
  }

  Matrix backward(const Matrix& g, const Cache& cache) {
    Matrix da = lin2.backward(g, cache.c2);
    for (int r = 0; r < da.rows(); ++r)
      for (int c = 0; c < da.cols(); ++c) da.at(r, c) *= gelu_grad(cache.pre.at(r, c));
    return lin1.backward(da, cache.c1);
  }

  void collect(ParamList& ps) {
    lin1.collect(ps);
    lin2.collect(ps);
  }

  LinearLayer lin1, lin2;
};

// ---------------------------------------------------------------------------
// Inverted dropout.  Inactive (identity) when rate == 0 or no rng is given.

class Dropout {
 public:
  struct Cache {
    Matrix mask;
    bool active = false;
  };

  explicit Dropout(double rate) : rate_(rate) {
    NACORR_CHECK(rate >= 0.0 && rate < 1.0, "dropout rate must be in [0,1), got ", rate);
  }

  Matrix forward(const Matrix& x, Cache* cache, Rng* rng) const {
    if (rate_ <= 0.0 || rng == nullptr) {
      cache->active = false;
      return x;
    }
    cache->active = true;
    cache->mask = Matrix(x.rows(), x.cols());
    Matrix y(x.rows(), x.cols());
    double keep = 1.0 - rate_;
    for (int r = 0; r < x.rows(); ++r)
      for (int c = 0; c < x.cols(); ++c) {
        double m = rng->uniform() < rate_ ? 0.0 : 1.0 / keep;
        cache->mask.at(r, c) = m;
        y.at(r, c) = x.at(r, c) * m;
      }
    return y;
  }

  Matrix backward(const Matrix& g, const Cache& cache) const {
    if (!cache.active) return g;
    Matrix dx = g;
    for (int r = 0; r < dx.rows(); ++r)
      for (int c = 0; c < dx.cols(); ++c) dx.at(r, c) *= cache.mask.at(r, c);
    return dx;
  }

  double rate() const { return rate_; }

 private:
  double rate_;
};

// ---------------------------------------------------------------------------
// Losses.

constexpr double kProbClamp = 1e-7;

inline double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

// Mean binary cross-entropy over the sequence.
inline double bce_loss(const std::vector<uint8_t>& c, const std::vector<double>& p) {
  NACORR_CHECK(c.size() == p.size(), "bce_loss: length mismatch ", c.size(), " vs ", p.size());
  NACORR_CHECK(!c.empty(), "bce_loss: empty input");
  double loss = 0.0;
  for (size_t i = 0; i < c.size(); ++i) {
    double pi = clamp_prob(p[i]);
    loss += c[i] ? std::log(pi) : std::log(1.0 - pi);
  }
  return -loss / static_cast<double>(c.size());
}

// dL/dp; zero where the clamp is pinned.
inline std::vector<double> bce_loss_grad(const std::vector<uint8_t>& c,
                                         const std::vector<double>& p) {
  NACORR_CHECK(c.size() == p.size(), "bce_loss_grad: length mismatch");
  std::vector<double> g(p.size(), 0.0);
  double inv_l = 1.0 / static_cast<double>(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= kProbClamp || p[i] >= 1.0 - kProbClamp) continue;
    g[i] = (c[i] ? -1.0 / p[i] : 1.0 / (1.0 - p[i])) * inv_l;
  }
  return g;
}

// Mean cross-entropy of logits rows against target ids.
inline double ce_loss(const Matrix& logits, const TokenSeq& targets) {
  NACORR_CHECK(static_cast<size_t>(logits.rows()) == targets.size(),
               "ce_loss: ", logits.rows(), " logit rows vs ", targets.size(), " targets");
  NACORR_CHECK(!targets.empty(), "ce_loss: empty input");
  double loss = 0.0;
  for (int r = 0; r < logits.rows(); ++r) {
    NACORR_CHECK(targets[r] >= 0 && targets[r] < logits.cols(), "ce_loss: target ", targets[r],
                 " out of range for ", logits.cols(), " classes");
    const double* row = logits.row_ptr(r);
    double mx = row[0];
    for (int c = 1; c < logits.cols(); ++c) mx = std::max(mx, row[c]);
    double lse = 0.0;
    for (int c = 0; c < logits.cols(); ++c) lse += std::exp(row[c] - mx);
    lse = mx + std::log(lse);
    loss += lse - row[targets[r]];
  }
  return loss / logits.rows();
}

// dL/dlogits = (softmax - onehot) / L.
inline Matrix ce_loss_grad(const Matrix& logits, const TokenSeq& targets) {
  Matrix g = softmax_rows(logits);
  double inv_l = 1.0 / logits.rows();
  for (int r = 0; r < g.rows(); ++r) {
    g.at(r, targets[r]) -= 1.0;
    double* row = g.row_ptr(r);
    for (int c = 0; c < g.cols(); ++c) row[c] *= inv_l;
  }
  return g;
}

}  // namespace nacorr

#endif  // NACORR_NN_HPP_
