// nacorr/metrics.hpp
//
// Evaluation: CER/CERR, normalized cross-entropy of confidence scores,
// thresholded binary classification metrics and the latency harness.
// Degenerate denominators surface as empty optionals, never as silent zeros.

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

#ifndef NACORR_METRICS_HPP_
#define NACORR_METRICS_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "nacorr/alignment.hpp"
#include "nacorr/nn.hpp"
#include "nacorr/vocab.hpp"

namespace nacorr {

// Levenshtein distance over reference length.  Can exceed 1 on insertions.
inline double cer(const TokenSeq& hyp, const TokenSeq& ref) {
  NACORR_CHECK(!ref.empty(), "cer: empty reference");
  NACORR_CHECK(!contains_blank(hyp) && !contains_blank(ref), "cer: inputs must be blank-free");
  return static_cast<double>(edit_cost(hyp, ref)) / static_cast<double>(ref.size());
}

// Micro-averaged corpus CER: sum of distances over sum of reference lengths.
struct CerAccumulator {
  long long errors = 0;
  long long ref_tokens = 0;

  void add(const TokenSeq& hyp, const TokenSeq& ref) {
    NACORR_CHECK(!ref.empty(), "cer: empty reference");
    errors += edit_cost(hyp, ref);
    ref_tokens += static_cast<long long>(ref.size());
  }

  double value() const {
    NACORR_CHECK(ref_tokens > 0, "corpus CER over zero reference tokens");
    return static_cast<double>(errors) / static_cast<double>(ref_tokens);
  }
};

// Relative CER reduction; empty when before == 0.
inline std::optional<double> cerr(double before, double after) {
  if (before <= 0.0) return std::nullopt;
  return (before - after) / before;
}

// Normalized cross-entropy of confidence scores (natural log).  H(c) uses the
// empirical positive rate of the evaluated set; undefined when H(c) = 0.
inline std::optional<double> nce(const std::vector<uint8_t>& c, const std::vector<double>& p) {
  NACORR_CHECK(c.size() == p.size(), "nce: length mismatch ", c.size(), " vs ", p.size());
  NACORR_CHECK(!c.empty(), "nce: empty input");
  double positives = 0.0;
  for (uint8_t ci : c) positives += ci;
  double q = positives / static_cast<double>(c.size());
  if (q <= 0.0 || q >= 1.0) return std::nullopt;
  double h_c = -(q * std::log(q) + (1.0 - q) * std::log(1.0 - q));
  double h_cp = bce_loss(c, p);
  return (h_c - h_cp) / h_c;
}

// Positive class = "token is correct" (c = 1).
struct ConfusionCounts {
  long long tp = 0, fp = 0, tn = 0, fn = 0;

  long long total() const { return tp + fp + tn + fn; }
};

struct BinaryMetrics {
  ConfusionCounts counts;
  std::optional<double> accuracy, precision, recall, specificity, f1;
};

inline BinaryMetrics binary_metrics(const std::vector<uint8_t>& c, const std::vector<double>& p,
                                    double threshold = 0.5) {
  NACORR_CHECK(c.size() == p.size(), "binary_metrics: length mismatch ", c.size(), " vs ",
               p.size());
  BinaryMetrics m;
  for (size_t i = 0; i < c.size(); ++i) {
    bool predicted_positive = p[i] >= threshold;
    if (c[i]) {
      predicted_positive ? ++m.counts.tp : ++m.counts.fn;
    } else {
      predicted_positive ? ++m.counts.fp : ++m.counts.tn;
    }
  }
  auto ratio = [](long long num, long long den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  const ConfusionCounts& k = m.counts;
  m.accuracy = ratio(k.tp + k.tn, k.total());
  m.precision = ratio(k.tp, k.tp + k.fp);
  m.recall = ratio(k.tp, k.tp + k.fn);
  m.specificity = ratio(k.tn, k.tn + k.fp);
  if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  }
  return m;
}

// Wall-clock mean per call after warmup discards.  Single-threaded by
// contract; the closure corrects one utterance per invocation.
inline std::optional<double> measure_latency_ms(const std::function<void(size_t)>& correct_one,
                                                size_t corpus_size, int warmup = 10) {
  using clock = std::chrono::steady_clock;
  size_t measured = 0;
  double total_ms = 0.0;
  for (size_t i = 0; i < corpus_size; ++i) {
    auto t0 = clock::now();
    correct_one(i);
    auto t1 = clock::now();
    if (static_cast<int>(i) < warmup) continue;
    total_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
    ++measured;
  }
  if (measured == 0) return std::nullopt;
  return total_ms / static_cast<double>(measured);
}

struct EvalReport {
  double cer_before = 0.0;
  double cer_after = 0.0;
  std::optional<double> cerr_value;
  std::optional<double> nce_value;
  double asr_accuracy = 0.0;  // positive rate of the confidence targets
  BinaryMetrics confidence;
  std::optional<double> latency_ms_per_sentence;
};

}  // namespace nacorr

#endif  // NACORR_METRICS_HPP_
