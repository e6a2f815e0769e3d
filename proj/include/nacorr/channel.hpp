// nacorr/channel.hpp
//
// Synthetic stand-in for the ASR front end.  Corrupts references into N-best
// hypotheses with per-token provenance, and emits pseudo-acoustic frames and
// pseudo decoder text features.  Everything is a pure function of
// (master_seed, utt_id, config, reference); features are regenerated from the
// seed on demand and never serialized.

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

#ifndef NACORR_CHANNEL_HPP_
#define NACORR_CHANNEL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nacorr/alignment.hpp"
#include "nacorr/matrix.hpp"
#include "nacorr/rng.hpp"
#include "nacorr/vocab.hpp"

namespace nacorr {

struct ChannelConfig {
  double sub_rate = 0.10;
  double del_rate = 0.025;
  double ins_rate = 0.015;
  double confusion_temperature = 0.15;
  int n_best = 3;
  int frames_per_token = 2;
  int acoustic_dim = 32;
  double acoustic_noise_sigma = 0.15;
  double text_feature_noise_sigma = 0.15;
  uint64_t master_seed = 42;

  void validate() const {
    NACORR_CHECK(sub_rate >= 0 && del_rate >= 0 && ins_rate >= 0,
                 "channel: negative corruption rate");
    NACORR_CHECK(sub_rate + del_rate + ins_rate < 1.0,
                 "channel: sub_rate + del_rate + ins_rate must be < 1, got ",
                 sub_rate + del_rate + ins_rate);
    NACORR_CHECK(confusion_temperature > 0, "channel: confusion_temperature must be positive");
    NACORR_CHECK(n_best >= 1, "channel: n_best must be >= 1");
    NACORR_CHECK(frames_per_token >= 1, "channel: frames_per_token must be >= 1");
    NACORR_CHECK(acoustic_dim >= 1, "channel: acoustic_dim must be >= 1");
    NACORR_CHECK(acoustic_noise_sigma >= 0 && text_feature_noise_sigma >= 0,
                 "channel: negative noise sigma");
  }
};

// Unit-norm pronunciation row per non-blank token; the blank row is zero.
// Pure function of (master_seed, vocab size, acoustic_dim).
class PronunciationTable {
 public:
  PronunciationTable(uint64_t master_seed, int vocab_size, int acoustic_dim)
      : rows_(vocab_size, acoustic_dim) {
    Rng rng(derive_seed(master_seed, "pronunciation"));
    for (int t = 1; t < vocab_size; ++t) {
      double norm2 = 0.0;
      do {
        norm2 = 0.0;
        for (int c = 0; c < acoustic_dim; ++c) {
          double v = rng.gaussian();
          rows_.at(t, c) = v;
          norm2 += v * v;
        }
      } while (norm2 == 0.0);
      double inv = 1.0 / std::sqrt(norm2);
      for (int c = 0; c < acoustic_dim; ++c) rows_.at(t, c) *= inv;
    }
  }

  const Matrix& rows() const { return rows_; }
  int vocab_size() const { return rows_.rows(); }
  int dim() const { return rows_.cols(); }

  double cosine(int32_t a, int32_t b) const { return dot_rows(rows_, a, rows_, b); }

 private:
  Matrix rows_;
};

// What the channel actually heard at each emitted position.
enum class TokenOrigin : uint8_t { kCorrect, kSubstituted, kInserted };

struct TokenProvenance {
  TokenOrigin origin;
  int32_t true_id;  // reference token for kCorrect/kSubstituted, blank for kInserted
};

struct CorruptedSeq {
  TokenSeq tokens;
  std::vector<TokenProvenance> provenance;
  double log_score = 0.0;
};

struct Utterance {
  std::string utt_id;
  uint64_t seed = 0;
  TokenSeq reference;
  std::vector<CorruptedSeq> hyps;  // sorted best-first
};

class NoisyChannel {
 public:
  NoisyChannel(const Vocabulary& vocab, const ChannelConfig& cfg)
      : vocab_(vocab),
        cfg_(cfg),
        table_(cfg.master_seed, vocab.size(), cfg.acoustic_dim) {
    cfg_.validate();
    NACORR_CHECK(vocab.size() >= 3, "channel: vocabulary too small");
  }

  const ChannelConfig& config() const { return cfg_; }
  const Vocabulary& vocab() const { return vocab_; }
  const PronunciationTable& table() const { return table_; }

  // One pass of the noisy channel over a blank-free reference.  Deletion
  // first, else substitution by a pronunciation-confusable token, else the
  // true token; after each reference position one uniform random token may be
  // inserted.  log_score sums the log-probabilities of every choice made.
  CorruptedSeq corrupt(const TokenSeq& reference, Rng& rng) const {
    NACORR_CHECK(!reference.empty(), "corrupt: empty reference");
    NACORR_CHECK(!contains_blank(reference), "corrupt: reference contains blank");
    CorruptedSeq out;
    out.tokens.reserve(reference.size() + 2);
    const double keep_rate = 1.0 - cfg_.sub_rate - cfg_.del_rate;
    const int n_real = vocab_.size() - 1;
    for (int32_t ref_tok : reference) {
      double u = rng.uniform();
      if (u < cfg_.del_rate) {
        out.log_score += std::log(cfg_.del_rate);
      } else if (u < cfg_.del_rate + cfg_.sub_rate) {
        auto [tok, logp] = sample_confusion(ref_tok, rng);
        out.tokens.push_back(tok);
        out.provenance.push_back({TokenOrigin::kSubstituted, ref_tok});
        out.log_score += std::log(cfg_.sub_rate) + logp;
      } else {
        out.tokens.push_back(ref_tok);
        out.provenance.push_back({TokenOrigin::kCorrect, ref_tok});
        out.log_score += std::log(keep_rate);
      }
      if (cfg_.ins_rate > 0.0 && rng.uniform() < cfg_.ins_rate) {
        int32_t tok = static_cast<int32_t>(1 + rng.uniform_int(n_real));
        out.tokens.push_back(tok);
        out.provenance.push_back({TokenOrigin::kInserted, kBlankId});
        out.log_score += std::log(cfg_.ins_rate) - std::log(static_cast<double>(n_real));
      } else if (cfg_.ins_rate > 0.0) {
        out.log_score += std::log1p(-cfg_.ins_rate);
      }
    }
    return out;
  }

  // n_best independent corruptions, deduplicated by resampling (at most 20
  // retries per slot, then duplicates are accepted), sorted best-first:
  // ascending edit distance to the reference, ties by descending log score,
  // then by draw index.
  std::vector<CorruptedSeq> gen_nbest(const TokenSeq& reference, Rng& rng) const {
    struct Draw {
      CorruptedSeq seq;
      int cost;
      int index;
    };
    std::vector<Draw> draws;
    draws.reserve(cfg_.n_best);
    for (int k = 0; k < cfg_.n_best; ++k) {
      CorruptedSeq cand = corrupt(reference, rng);
      for (int retry = 0; retry < 20; ++retry) {
        bool dup = false;
        for (const Draw& d : draws) {
          if (d.seq.tokens == cand.tokens) {
            dup = true;
            break;
          }
        }
        if (!dup) break;
        cand = corrupt(reference, rng);
      }
      draws.push_back({std::move(cand), 0, k});
      draws.back().cost = edit_cost(draws.back().seq.tokens, reference);
    }
    std::sort(draws.begin(), draws.end(), [](const Draw& a, const Draw& b) {
      if (a.cost != b.cost) return a.cost < b.cost;
      if (a.seq.log_score != b.seq.log_score) return a.seq.log_score > b.seq.log_score;
      return a.index < b.index;
    });
    std::vector<CorruptedSeq> out;
    out.reserve(draws.size());
    for (Draw& d : draws) out.push_back(std::move(d.seq));
    return out;
  }

  // frames_per_token rows per reference token: the true token's pronunciation
  // row plus i.i.d. Gaussian noise.
  Matrix gen_acoustic(const TokenSeq& reference, Rng& rng) const {
    NACORR_CHECK(!contains_blank(reference), "gen_acoustic: reference contains blank");
    Matrix out(static_cast<int>(reference.size()) * cfg_.frames_per_token, cfg_.acoustic_dim);
    int r = 0;
    for (int32_t tok : reference) {
      for (int f = 0; f < cfg_.frames_per_token; ++f, ++r) {
        const double* src = table_.rows().row_ptr(tok);
        double* dst = out.row_ptr(r);
        for (int c = 0; c < cfg_.acoustic_dim; ++c)
          dst[c] = src[c] + cfg_.acoustic_noise_sigma * rng.gaussian();
      }
    }
    return out;
  }

  // Per hypothesis token: the pronunciation row of what the channel actually
  // heard (the reference token under a substitution, the token itself when
  // correct, the zero row for an insertion), plus Gaussian noise.
  Matrix gen_text_features(const CorruptedSeq& hyp, Rng& rng) const {
    NACORR_CHECK(hyp.provenance.size() == hyp.tokens.size(),
                 "gen_text_features: hypothesis without channel provenance");
    Matrix out(static_cast<int>(hyp.tokens.size()), cfg_.acoustic_dim);
    for (size_t i = 0; i < hyp.tokens.size(); ++i) {
      int32_t heard = hyp.provenance[i].origin == TokenOrigin::kInserted
                          ? kBlankId
                          : hyp.provenance[i].true_id;
      const double* src = table_.rows().row_ptr(heard);
      double* dst = out.row_ptr(static_cast<int>(i));
      for (int c = 0; c < cfg_.acoustic_dim; ++c)
        dst[c] = src[c] + cfg_.text_feature_noise_sigma * rng.gaussian();
    }
    return out;
  }

  // --- seed-addressed entry points -----------------------------------------
  // Utterance content is a pure function of (master_seed, utt_id, config,
  // reference); hypotheses, acoustic frames and text features draw from
  // independent substreams so each can be regenerated on its own.

  uint64_t utterance_seed(const std::string& utt_id) const {
    return hash_mix(cfg_.master_seed, fnv1a64(utt_id));
  }

  Utterance make_utterance(const std::string& utt_id, TokenSeq reference) const {
    Utterance u;
    u.utt_id = utt_id;
    u.seed = utterance_seed(utt_id);
    u.reference = std::move(reference);
    Rng rng(derive_seed(u.seed, "nbest"));
    u.hyps = gen_nbest(u.reference, rng);
    return u;
  }

  Matrix utterance_acoustic(const Utterance& u) const {
    Rng rng(derive_seed(u.seed, "acoustic"));
    return gen_acoustic(u.reference, rng);
  }

  Matrix utterance_text_features(const Utterance& u, int hyp_index) const {
    NACORR_CHECK(hyp_index >= 0 && hyp_index < static_cast<int>(u.hyps.size()),
                 "utterance_text_features: bad hypothesis index ", hyp_index);
    Rng rng(hash_mix(derive_seed(u.seed, "text"), static_cast<uint64_t>(hyp_index)));
    return gen_text_features(u.hyps[hyp_index], rng);
  }

 private:
  // Softmax over pronunciation-cosine similarity / temperature, across
  // non-blank tokens excluding the true one.  Returns (token, log prob).
  std::pair<int32_t, double> sample_confusion(int32_t true_tok, Rng& rng) const {
    const int v = vocab_.size();
    std::vector<double> logits;
    std::vector<int32_t> cands;
    logits.reserve(v - 2);
    cands.reserve(v - 2);
    double mx = -1e300;
    for (int32_t t = 1; t < v; ++t) {
      if (t == true_tok) continue;
      double s = table_.cosine(true_tok, t) / cfg_.confusion_temperature;
      logits.push_back(s);
      cands.push_back(t);
      mx = std::max(mx, s);
    }
    double z = 0.0;
    for (double& s : logits) {
      s = std::exp(s - mx);
      z += s;
    }
    double u = rng.uniform() * z;
    double acc = 0.0;
    size_t pick = logits.size() - 1;
    for (size_t i = 0; i < logits.size(); ++i) {
      acc += logits[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    return {cands[pick], std::log(logits[pick] / z)};
  }

  Vocabulary vocab_;
  ChannelConfig cfg_;
  PronunciationTable table_;
};

}  // namespace nacorr

#endif  // NACORR_CHANNEL_HPP_
