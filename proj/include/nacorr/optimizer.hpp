// nacorr/optimizer.hpp
//
// Adam with bias correction.

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

#ifndef NACORR_OPTIMIZER_HPP_
#define NACORR_OPTIMIZER_HPP_

#include <cmath>
#include <vector>

#include "nacorr/nn.hpp"

namespace nacorr {

class Adam {
 public:
  explicit Adam(ParamList params, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
    for (Parameter* p : params_) {
      NACORR_CHECK(!p->frozen, "Adam: frozen parameter \"", p->name, "\" registered");
      m_.emplace_back(p->value.rows(), p->value.cols());
      v_.emplace_back(p->value.rows(), p->value.cols());
    }
  }

  void zero_grads() { nacorr::zero_grads(params_); }

  void step() {
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, t_);
    double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < params_.size(); ++i) {
      Matrix& w = params_[i]->value;
      const Matrix& g = params_[i]->grad;
      Matrix& m = m_[i];
      Matrix& v = v_[i];
      for (size_t k = 0; k < w.size(); ++k) {
        double gk = g.data()[k];
        m.data()[k] = beta1_ * m.data()[k] + (1.0 - beta1_) * gk;
        v.data()[k] = beta2_ * v.data()[k] + (1.0 - beta2_) * gk * gk;
        double mh = m.data()[k] / bc1;
        double vh = v.data()[k] / bc2;
        w.data()[k] -= lr_ * mh / (std::sqrt(vh) + eps_);
      }
    }
  }

  long step_count() const { return t_; }

 private:
  ParamList params_;
  std::vector<Matrix> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace nacorr

#endif  // NACORR_OPTIMIZER_HPP_
