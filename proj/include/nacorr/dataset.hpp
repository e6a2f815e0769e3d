// nacorr/dataset.hpp
//
// Plain-text dataset persistence and corpus generation.  One utterance per
// line, tab-separated: utt_id, seed, space-joined reference symbols, then one
// field per hypothesis "tok/C tok/S:<true_id> tok/I ...|<log_score>".
// Acoustic and text features are never serialized; they regenerate from the
// stored seed.

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

#ifndef NACORR_DATASET_HPP_
#define NACORR_DATASET_HPP_

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nacorr/channel.hpp"
#include "nacorr/common.hpp"
#include "nacorr/vocab.hpp"

namespace nacorr {

struct Dataset {
  uint64_t config_hash = 0;  // hash of the (data, channel) config sections
  uint64_t vocab_hash = 0;
  uint64_t file_hash = 0;  // content hash of the serialized file
  std::vector<Utterance> utterances;
};

namespace detail {

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string format_double_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string encode_hyp_field(const CorruptedSeq& hyp, const Vocabulary& vocab) {
  std::ostringstream os;
  for (size_t i = 0; i < hyp.tokens.size(); ++i) {
    if (i) os << ' ';
    os << vocab.symbol(hyp.tokens[i]) << '/';
    switch (hyp.provenance[i].origin) {
      case TokenOrigin::kCorrect:
        os << 'C';
        break;
      case TokenOrigin::kSubstituted:
        os << "S:" << hyp.provenance[i].true_id;
        break;
      case TokenOrigin::kInserted:
        os << 'I';
        break;
    }
  }
  os << '|' << detail::format_double_exact(hyp.log_score);
  return os.str();
}

inline CorruptedSeq decode_hyp_field(const std::string& field, const Vocabulary& vocab) {
  size_t bar = field.rfind('|');
  NACORR_CHECK(bar != std::string::npos, "dataset: hypothesis field without log score: ", field);
  CorruptedSeq out;
  out.log_score = std::stod(field.substr(bar + 1));
  std::string toks = field.substr(0, bar);
  if (!toks.empty()) {
    for (const std::string& t : detail::split_on(toks, ' ')) {
      size_t slash = t.rfind('/');
      NACORR_CHECK(slash != std::string::npos, "dataset: token without provenance: ", t);
      int32_t id = vocab.id_of(t.substr(0, slash));
      std::string prov = t.substr(slash + 1);
      TokenProvenance p{};
      if (prov == "C") {
        p = {TokenOrigin::kCorrect, id};
      } else if (prov == "I") {
        p = {TokenOrigin::kInserted, kBlankId};
      } else if (prov.size() > 2 && prov[0] == 'S' && prov[1] == ':') {
        int32_t true_id = static_cast<int32_t>(std::stol(prov.substr(2)));
        NACORR_CHECK(true_id > 0 && true_id < vocab.size(), "dataset: bad true id in ", t);
        p = {TokenOrigin::kSubstituted, true_id};
      } else {
        throw ValidationError(detail::cat("dataset: bad provenance code in ", t));
      }
      out.tokens.push_back(id);
      out.provenance.push_back(p);
    }
  }
  return out;
}

inline std::string serialize_dataset(const std::vector<Utterance>& utts, const Vocabulary& vocab,
                                     uint64_t config_hash) {
  std::ostringstream os;
  os << "# nacorr-dataset config=" << hash_hex(config_hash) << " vocab="
     << hash_hex(vocab.content_hash()) << " count=" << utts.size() << "\n";
  for (const Utterance& u : utts) {
    os << u.utt_id << '\t' << u.seed << '\t';
    for (size_t i = 0; i < u.reference.size(); ++i) {
      if (i) os << ' ';
      os << vocab.symbol(u.reference[i]);
    }
    for (const CorruptedSeq& h : u.hyps) os << '\t' << encode_hyp_field(h, vocab);
    os << '\n';
  }
  return os.str();
}

// Writes the dataset and returns its content hash (also the first header field
// of downstream artifacts).
inline uint64_t write_dataset(const std::string& path, const std::vector<Utterance>& utts,
                              const Vocabulary& vocab, uint64_t config_hash) {
  std::string content = serialize_dataset(utts, vocab, config_hash);
  std::ofstream f(path, std::ios::trunc | std::ios::binary);
  NACORR_CHECK(f.good(), "cannot write dataset file ", path);
  f << content;
  NACORR_CHECK(f.good(), "write failure on dataset file ", path);
  return fnv1a64(content);
}

inline Dataset load_dataset(const std::string& path, const Vocabulary& vocab) {
  std::ifstream f(path, std::ios::binary);
  NACORR_CHECK(f.good(), "cannot read dataset file ", path);
  std::ostringstream buf;
  buf << f.rdbuf();
  std::string content = buf.str();

  Dataset ds;
  ds.file_hash = fnv1a64(content);
  std::istringstream in(content);
  std::string line;
  NACORR_CHECK(std::getline(in, line), "dataset file ", path, " is empty");
  {
    std::istringstream hs(line);
    std::string tag, name, cfg, voc, cnt;
    hs >> tag >> name >> cfg >> voc >> cnt;
    NACORR_CHECK(tag == "#" && name == "nacorr-dataset" && cfg.rfind("config=", 0) == 0 &&
                     voc.rfind("vocab=", 0) == 0,
                 "dataset file ", path, " has a malformed header: ", line);
    ds.config_hash = std::stoull(cfg.substr(7), nullptr, 16);
    ds.vocab_hash = std::stoull(voc.substr(6), nullptr, 16);
  }
  NACORR_CHECK(ds.vocab_hash == vocab.content_hash(),
               "dataset ", path, " was generated with a different vocabulary");

  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields = detail::split_on(line, '\t');
    NACORR_CHECK(fields.size() >= 4, "dataset ", path, " line ", lineno, ": expected >= 4 fields");
    Utterance u;
    u.utt_id = fields[0];
    u.seed = std::stoull(fields[1]);
    for (const std::string& s : detail::split_on(fields[2], ' '))
      u.reference.push_back(vocab.id_of(s));
    for (size_t k = 3; k < fields.size(); ++k)
      u.hyps.push_back(decode_hyp_field(fields[k], vocab));
    ds.utterances.push_back(std::move(u));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Corpus generation and the utterance-id-hash split.

// Reference sequences are a pure function of (master_seed, utt_id): length
// uniform in [len_min, len_max], tokens uniform over the non-blank alphabet.
inline TokenSeq sample_reference(const NoisyChannel& channel, const std::string& utt_id,
                                 int len_min, int len_max) {
  NACORR_CHECK(1 <= len_min && len_min <= len_max, "bad reference length range [", len_min, ",",
               len_max, "]");
  Rng rng(derive_seed(channel.utterance_seed(utt_id), "reference"));
  int len = len_min + rng.uniform_int(len_max - len_min + 1);
  TokenSeq ref(len);
  int n_real = channel.vocab().size() - 1;
  for (int i = 0; i < len; ++i) ref[i] = static_cast<int32_t>(1 + rng.uniform_int(n_real));
  return ref;
}

inline std::string make_utt_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "u%06d", index);
  return buf;
}

enum class SplitPart { kTrain, kDev, kTest };

// 80/10/10 by utterance-id hash; stable across runs and configs.
inline SplitPart split_of(const std::string& utt_id) {
  uint64_t h = fnv1a64(utt_id) % 10;
  if (h < 8) return SplitPart::kTrain;
  return h == 8 ? SplitPart::kDev : SplitPart::kTest;
}

template <typename UttVec>
std::vector<const Utterance*> select_split(const UttVec& utts, SplitPart part) {
  std::vector<const Utterance*> out;
  for (const Utterance& u : utts)
    if (split_of(u.utt_id) == part) out.push_back(&u);
  return out;
}

}  // namespace nacorr

#endif  // NACORR_DATASET_HPP_
