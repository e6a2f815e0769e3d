// nacorr/gradcheck.hpp
//
// Central finite-difference verification of analytic gradients.  Guards every
// hand-written backward pass in the repository; any trainable module must
// pass with max relative error < 1e-4 at random initialization.

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

#ifndef NACORR_GRADCHECK_HPP_
#define NACORR_GRADCHECK_HPP_

#include <algorithm>
#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "nacorr/nn.hpp"
#include "nacorr/rng.hpp"

namespace nacorr {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  long coords_checked = 0;
};

// `loss` is a pure forward evaluation; `loss_with_grads` additionally
// accumulates analytic gradients into the parameters (which are zeroed here
// first).  Coordinates are subsampled to at most `max_coords_per_param`.
inline GradCheckReport grad_check(const std::function<double()>& loss,
                                  const std::function<double()>& loss_with_grads,
                                  const ParamList& params, Rng& rng, double epsilon = 1e-5,
                                  int max_coords_per_param = 200) {
  // A non-deterministic closure makes finite differences meaningless.
  double f1 = loss();
  double f2 = loss();
  NACORR_CHECK(f1 == f2, "grad_check: closure is non-deterministic (", f1, " vs ", f2, ")");

  zero_grads(params);
  loss_with_grads();

  GradCheckReport report;
  for (Parameter* p : params) {
    const size_t n = p->value.size();
    std::vector<size_t> coords;
    if (n <= static_cast<size_t>(max_coords_per_param)) {
      coords.resize(n);
      for (size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      std::unordered_set<size_t> seen;
      while (seen.size() < static_cast<size_t>(max_coords_per_param)) {
        seen.insert(static_cast<size_t>(rng.next_u64() % n));
      }
      coords.assign(seen.begin(), seen.end());
      std::sort(coords.begin(), coords.end());
    }
    for (size_t idx : coords) {
      double* slot = p->value.data() + idx;
      const double saved = *slot;
      *slot = saved + epsilon;
      double fp = loss();
      *slot = saved - epsilon;
      double fm = loss();
      *slot = saved;
      double numeric = (fp - fm) / (2.0 * epsilon);
      double analytic = p->grad.data()[idx];
      double rel = std::abs(analytic - numeric) /
                   std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      ++report.coords_checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = p->name;
      }
    }
  }
  return report;
}

}  // namespace nacorr

#endif  // NACORR_GRADCHECK_HPP_
