// nacorr/pipeline.hpp
//
// Glue between the channel, alignment and the two models: training example
// assembly, the CEM and corrector training loops, single-pass correction and
// the autoregressive-readout ablation used by the latency harness.

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

#ifndef NACORR_PIPELINE_HPP_
#define NACORR_PIPELINE_HPP_

#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nacorr/alignment.hpp"
#include "nacorr/cem.hpp"
#include "nacorr/channel.hpp"
#include "nacorr/config.hpp"
#include "nacorr/corrector.hpp"
#include "nacorr/dataset.hpp"
#include "nacorr/metrics.hpp"
#include "nacorr/optimizer.hpp"

namespace nacorr {

// Spreads the raw per-hypothesis feature rows over an aligned row: non-blank
// positions take the next raw row, blank positions a zero row.
inline Matrix expand_features_to_row(const Matrix& raw, const TokenSeq& aligned_row) {
  Matrix out(static_cast<int>(aligned_row.size()), raw.cols());
  int next = 0;
  for (size_t i = 0; i < aligned_row.size(); ++i) {
    if (aligned_row[i] == kBlankId) continue;
    NACORR_CHECK(next < raw.rows(), "expand_features_to_row: feature rows exhausted");
    const double* src = raw.row_ptr(next++);
    double* dst = out.row_ptr(static_cast<int>(i));
    for (int c = 0; c < raw.cols(); ++c) dst[c] = src[c];
  }
  NACORR_CHECK(next == raw.rows(), "expand_features_to_row: ", raw.rows() - next,
               " feature rows left over");
  return out;
}

// ---------------------------------------------------------------------------
// CEM training.

struct CemExample {
  TokenSeq tokens;  // aligned row, blanks allowed
  Matrix feats;     // same length, zero rows at blanks
  std::vector<uint8_t> targets;
};

inline std::vector<TokenSeq> hypothesis_rows(const Utterance& u, int n) {
  std::vector<TokenSeq> rows;
  rows.reserve(n);
  for (int k = 0; k < n; ++k) rows.push_back(u.hyps[k].tokens);
  return rows;
}

// Every aligned row of every utterance becomes one training example.
inline std::vector<CemExample> build_cem_examples(const NoisyChannel& ch,
                                                  const std::vector<const Utterance*>& utts) {
  std::vector<CemExample> out;
  out.reserve(utts.size() * 3);
  for (const Utterance* u : utts) {
    AlignedNBest aligned = align_nbest(hypothesis_rows(*u, static_cast<int>(u->hyps.size())));
    if (aligned.length() == 0) continue;
    AlignedTargets targets = aligned_targets(aligned, u->reference);
    for (size_t k = 0; k < aligned.rows.size(); ++k) {
      CemExample ex;
      ex.tokens = aligned.rows[k];
      ex.feats = expand_features_to_row(ch.utterance_text_features(*u, static_cast<int>(k)),
                                        aligned.rows[k]);
      ex.targets = targets.confidence[k];
      out.push_back(std::move(ex));
    }
  }
  return out;
}

struct TrainLogEntry {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  std::optional<double> dev_nce;
  std::optional<double> dev_f1;
};

inline std::string format_epoch_log(const TrainLogEntry& e) {
  auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return std::string(buf);
  };
  char buf[64];
  std::string line = "epoch=" + std::to_string(e.epoch);
  std::snprintf(buf, sizeof(buf), " train_loss=%.6f", e.train_loss);
  line += buf;
  std::snprintf(buf, sizeof(buf), " dev_loss=%.6f", e.dev_loss);
  line += buf;
  line += " dev_nce=" + opt(e.dev_nce) + " dev_f1=" + opt(e.dev_f1);
  return line;
}

inline TrainLogEntry parse_epoch_log(const std::string& line) {
  TrainLogEntry e;
  auto field = [&line](const std::string& key) -> std::string {
    size_t pos = line.find(key + "=");
    NACORR_CHECK(pos != std::string::npos, "log line missing field ", key, ": ", line);
    size_t start = pos + key.size() + 1;
    size_t end = line.find(' ', start);
    return line.substr(start, end == std::string::npos ? std::string::npos : end - start);
  };
  e.epoch = std::stoi(field("epoch"));
  e.train_loss = std::stod(field("train_loss"));
  e.dev_loss = std::stod(field("dev_loss"));
  std::string nce_s = field("dev_nce");
  if (nce_s != "n/a") e.dev_nce = std::stod(nce_s);
  std::string f1_s = field("dev_f1");
  if (f1_s != "n/a") e.dev_f1 = std::stod(f1_s);
  return e;
}

struct CemTrainResult {
  std::shared_ptr<CemModel> model;
  std::vector<TrainLogEntry> log;
  int best_epoch = 0;
};

// Minimizes mean binary cross-entropy over all aligned rows.  Keeps the
// best-dev-NCE epoch (dev loss when NCE is undefined on the dev set).
inline CemTrainResult train_cem(
    const NoisyChannel& ch, const std::vector<Utterance>& corpus, const ExperimentConfig& cfg,
    const std::function<void(CemModel&, const TrainLogEntry&)>& per_epoch = nullptr) {
  NACORR_CHECK(!corpus.empty(), "train_cem: empty corpus");
  std::vector<CemExample> train_ex =
      build_cem_examples(ch, select_split(corpus, SplitPart::kTrain));
  std::vector<CemExample> dev_ex = build_cem_examples(ch, select_split(corpus, SplitPart::kDev));
  NACORR_CHECK(!train_ex.empty(), "train_cem: empty training split");

  long error_tokens = 0;
  for (const CemExample& ex : train_ex)
    for (uint8_t t : ex.targets) error_tokens += (t == 0);
  if (error_tokens == 0) {
    std::fprintf(stderr,
                 "warning: training corpus has zero error tokens; NCE will be undefined\n");
  }

  CemConfig mc;
  mc.vocab_size = ch.vocab().size();
  mc.feat_dim = ch.config().acoustic_dim;
  mc.dim = cfg.model_dim;
  mc.heads = cfg.model_heads;
  mc.layers = cfg.model_layers;
  mc.dropout = cfg.dropout;
  auto model = std::make_shared<CemModel>(mc);
  Rng init_rng(derive_seed(cfg.train_seed, "cem-init"));
  model->init(init_rng);

  ParamList params = model->params();
  Adam adam(params, cfg.lr);
  Rng shuffle_rng(derive_seed(cfg.train_seed, "cem-shuffle"));
  Rng dropout_rng(derive_seed(cfg.train_seed, "cem-dropout"));
  Rng* drop = cfg.dropout > 0.0 ? &dropout_rng : nullptr;

  CemTrainResult result;
  result.model = model;
  std::vector<Matrix> best_values;
  double best_key = 0.0;
  bool best_is_nce = false, have_best = false;

  std::vector<size_t> order(train_ex.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.cem_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double train_loss = 0.0;
    size_t done = 0;
    while (done < order.size()) {
      size_t batch = std::min<size_t>(cfg.batch_size, order.size() - done);
      adam.zero_grads();
      for (size_t b = 0; b < batch; ++b) {
        const CemExample& ex = train_ex[order[done + b]];
        CemModel::Trace trace;
        ConfidenceOutput out = model->forward(ex.tokens, ex.feats, &trace, drop);
        train_loss += bce_loss(ex.targets, out.scores);
        model->backward(bce_loss_grad(ex.targets, out.scores), trace);
      }
      double inv = 1.0 / static_cast<double>(batch);
      for (Parameter* p : params) p->grad_buf().scale(inv);
      adam.step();
      done += batch;
    }
    train_loss /= static_cast<double>(train_ex.size());

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.train_loss = train_loss;
    std::vector<uint8_t> dev_c;
    std::vector<double> dev_p;
    double dev_loss = 0.0;
    for (const CemExample& ex : dev_ex) {
      ConfidenceOutput out = model->forward(ex.tokens, ex.feats);
      dev_loss += bce_loss(ex.targets, out.scores);
      dev_c.insert(dev_c.end(), ex.targets.begin(), ex.targets.end());
      dev_p.insert(dev_p.end(), out.scores.begin(), out.scores.end());
    }
    entry.dev_loss = dev_ex.empty() ? 0.0 : dev_loss / static_cast<double>(dev_ex.size());
    if (!dev_c.empty()) {
      entry.dev_nce = nce(dev_c, dev_p);
      entry.dev_f1 = binary_metrics(dev_c, dev_p).f1;
    }
    result.log.push_back(entry);

    bool better;
    if (entry.dev_nce.has_value()) {
      better = !have_best || !best_is_nce || *entry.dev_nce > best_key;
      if (better) {
        best_key = *entry.dev_nce;
        best_is_nce = true;
      }
    } else {
      better = !have_best || (!best_is_nce && entry.dev_loss < best_key);
      if (better && !best_is_nce) best_key = entry.dev_loss;
    }
    if (better) {
      have_best = true;
      result.best_epoch = epoch;
      best_values.clear();
      for (Parameter* p : params) best_values.push_back(p->value);
    }
    if (per_epoch) per_epoch(*model, entry);
  }

  if (!best_values.empty()) {
    for (size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
  }
  return result;
}

// ---------------------------------------------------------------------------
// Corrector training and inference.

struct CorrectorExample {
  std::vector<TokenSeq> rows;  // aligned candidate rows, N per mode
  std::vector<Matrix> conf;    // N confidence embeddings (zeros when ablated)
  Matrix acoustic;             // raw frames
  TokenSeq target;             // training only
};

// Assembles the mode's aligned grid, the frozen confidence embeddings and the
// acoustic frames for one utterance.  `cem` may be null only when the mode
// does not use the confidence reference.
inline CorrectorExample build_corrector_inputs(const NoisyChannel& ch, const Utterance& u,
                                               Mode mode, const FrozenCem* cem, int model_dim) {
  const int n = mode_candidates(mode, static_cast<int>(u.hyps.size()));
  CorrectorExample ex;
  AlignedNBest aligned = align_nbest(hypothesis_rows(u, n));
  ex.rows = aligned.rows;
  const int L = static_cast<int>(aligned.length());
  ex.acoustic = ch.utterance_acoustic(u);
  ex.conf.reserve(n);
  for (int k = 0; k < n; ++k) {
    if (mode_uses_confidence(mode)) {
      NACORR_CHECK(cem != nullptr, "mode ", mode_name(mode), " requires a trained CEM");
      Matrix feats =
          expand_features_to_row(ch.utterance_text_features(u, k), aligned.rows[k]);
      ex.conf.push_back(cem->forward(aligned.rows[k], feats).hidden);
    } else {
      ex.conf.emplace_back(L, model_dim);
    }
  }
  return ex;
}

struct CorrectorTrainResult {
  std::shared_ptr<CorrectorModel> model;
  std::vector<TrainLogEntry> log;
  int best_epoch = 0;
  double dropped_ref_token_rate = 0.0;
};

inline CorrectorTrainResult train_corrector(
    const NoisyChannel& ch, const std::vector<Utterance>& corpus, const ExperimentConfig& cfg,
    const FrozenCem* cem,
    const std::function<void(CorrectorModel&, const TrainLogEntry&)>& per_epoch = nullptr) {
  const Mode mode = cfg.mode;
  NACORR_CHECK(!mode_uses_confidence(mode) || cem != nullptr,
               "train_corrector: mode ", mode_name(mode), " requires a CEM checkpoint");

  auto build_split = [&](SplitPart part, long* dropped, long* ref_tokens) {
    std::vector<CorrectorExample> exs;
    for (const Utterance* u : select_split(corpus, part)) {
      const int n = mode_candidates(mode, static_cast<int>(u->hyps.size()));
      AlignedNBest aligned = align_nbest(hypothesis_rows(*u, n));
      if (aligned.length() == 0) continue;
      CorrectorExample ex = build_corrector_inputs(ch, *u, mode, cem, cfg.model_dim);
      AlignedTargets tg = aligned_targets(aligned, u->reference);
      ex.target = tg.corrector_row;
      if (dropped != nullptr) {
        *dropped += tg.dropped_ref_tokens;
        *ref_tokens += static_cast<long>(u->reference.size());
      }
      exs.push_back(std::move(ex));
    }
    return exs;
  };

  long dropped = 0, ref_tokens = 0;
  std::vector<CorrectorExample> train_ex = build_split(SplitPart::kTrain, &dropped, &ref_tokens);
  std::vector<CorrectorExample> dev_ex = build_split(SplitPart::kDev, nullptr, nullptr);
  NACORR_CHECK(!train_ex.empty(), "train_corrector: empty training split");

  CorrectorConfig mc;
  mc.vocab_size = ch.vocab().size();
  mc.acoustic_dim = ch.config().acoustic_dim;
  mc.dim = cfg.model_dim;
  mc.heads = cfg.model_heads;
  mc.layers = cfg.model_layers;
  mc.n_candidates = mode_candidates(mode, ch.config().n_best);
  mc.dropout = cfg.dropout;
  auto model = std::make_shared<CorrectorModel>(mc);
  Rng init_rng(derive_seed(cfg.train_seed, "corrector-init"));
  model->init(init_rng);

  ParamList params = model->params();
  Adam adam(params, cfg.lr);
  Rng shuffle_rng(derive_seed(cfg.train_seed, "corrector-shuffle"));
  Rng dropout_rng(derive_seed(cfg.train_seed, "corrector-dropout"));
  Rng* drop = cfg.dropout > 0.0 ? &dropout_rng : nullptr;
  const bool use_ac = mode_uses_acoustic(mode);

  CorrectorTrainResult result;
  result.model = model;
  result.dropped_ref_token_rate =
      ref_tokens > 0 ? static_cast<double>(dropped) / static_cast<double>(ref_tokens) : 0.0;

  std::vector<size_t> order(train_ex.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<Matrix> best_values;
  double best_dev = 0.0;

  for (int epoch = 1; epoch <= cfg.corrector_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double train_loss = 0.0;
    size_t done = 0;
    while (done < order.size()) {
      size_t batch = std::min<size_t>(cfg.batch_size, order.size() - done);
      adam.zero_grads();
      for (size_t b = 0; b < batch; ++b) {
        const CorrectorExample& ex = train_ex[order[done + b]];
        CorrectorModel::Trace trace;
        Matrix logits = model->forward(ex.rows, ex.conf, ex.acoustic, use_ac, &trace, drop);
        train_loss += ce_loss(logits, ex.target);
        model->backward(ce_loss_grad(logits, ex.target), trace);
      }
      double inv = 1.0 / static_cast<double>(batch);
      for (Parameter* p : params) p->grad_buf().scale(inv);
      adam.step();
      done += batch;
    }
    train_loss /= static_cast<double>(train_ex.size());

    double dev_loss = 0.0;
    for (const CorrectorExample& ex : dev_ex) {
      Matrix logits = model->forward(ex.rows, ex.conf, ex.acoustic, use_ac);
      dev_loss += ce_loss(logits, ex.target);
    }
    if (!dev_ex.empty()) dev_loss /= static_cast<double>(dev_ex.size());

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.train_loss = train_loss;
    entry.dev_loss = dev_loss;
    result.log.push_back(entry);
    if (epoch == 1 || dev_loss < best_dev) {
      best_dev = dev_loss;
      result.best_epoch = epoch;
      best_values.clear();
      for (Parameter* p : params) best_values.push_back(p->value);
    }
    if (per_epoch) per_epoch(*model, entry);
  }
  if (!best_values.empty()) {
    for (size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
  }
  return result;
}

// Single forward pass: align, score, fuse, classify, argmax, strip blanks.
inline TokenSeq correct_utterance(const NoisyChannel& ch, const Utterance& u,
                                  const FrozenCem* cem, const CorrectorModel& corrector,
                                  Mode mode) {
  CorrectorExample ex =
      build_corrector_inputs(ch, u, mode, cem, corrector.config().dim);
  if (ex.rows[0].empty()) return {};
  Matrix logits = corrector.forward(ex.rows, ex.conf, ex.acoustic, mode_uses_acoustic(mode));
  TokenSeq out;
  out.reserve(ex.rows[0].size());
  for (int r = 0; r < logits.rows(); ++r) {
    const double* row = logits.row_ptr(r);
    int32_t best = 0;
    for (int c = 1; c < logits.cols(); ++c)
      if (row[c] > row[best]) best = c;
    if (best != kBlankId) out.push_back(best);
  }
  return out;
}

// Autoregressive-readout ablation: position i comes from a fresh full forward
// pass, L passes total.  Output is identical to the single pass; only the
// cost differs.  readout_order, when given, permutes the order positions are
// decided in (used by the non-autoregressive invariance test).
inline TokenSeq ar_readout_correct(const NoisyChannel& ch, const Utterance& u,
                                   const FrozenCem* cem, const CorrectorModel& corrector,
                                   Mode mode, const std::vector<int>* readout_order = nullptr) {
  CorrectorExample ex =
      build_corrector_inputs(ch, u, mode, cem, corrector.config().dim);
  if (ex.rows[0].empty()) return {};
  const int L = static_cast<int>(ex.rows[0].size());
  std::vector<int32_t> decided(L, -1);
  for (int step = 0; step < L; ++step) {
    int pos = readout_order != nullptr ? (*readout_order)[step] : step;
    Matrix logits =
        corrector.forward(ex.rows, ex.conf, ex.acoustic, mode_uses_acoustic(mode));
    const double* row = logits.row_ptr(pos);
    int32_t best = 0;
    for (int c = 1; c < logits.cols(); ++c)
      if (row[c] > row[best]) best = c;
    decided[pos] = best;
  }
  TokenSeq out;
  for (int32_t id : decided)
    if (id != kBlankId) out.push_back(id);
  return out;
}

}  // namespace nacorr

#endif  // NACORR_PIPELINE_HPP_
