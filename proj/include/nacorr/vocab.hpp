// nacorr/vocab.hpp
//
// Token alphabet with a reserved blank symbol at id 0.  Surface sequences
// (references, raw hypotheses) never contain the blank; aligned rows may.

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

#ifndef NACORR_VOCAB_HPP_
#define NACORR_VOCAB_HPP_

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "nacorr/common.hpp"

namespace nacorr {

using TokenSeq = std::vector<int32_t>;

constexpr int32_t kBlankId = 0;
inline const std::string kBlankSymbol = "*";

inline bool contains_blank(const TokenSeq& seq) {
  return std::find(seq.begin(), seq.end(), kBlankId) != seq.end();
}

inline TokenSeq strip_blanks(const TokenSeq& seq) {
  TokenSeq out;
  out.reserve(seq.size());
  for (int32_t id : seq)
    if (id != kBlankId) out.push_back(id);
  return out;
}

class Vocabulary {
 public:
  // Builds a vocabulary with "*" prepended at id 0.  Symbols must be
  // distinct, non-empty, must not equal "*" and must not contain whitespace
  // or the dataset separators '/', '|', '*'.
  static Vocabulary build(const std::vector<std::string>& symbols) {
    NACORR_CHECK(!symbols.empty(), "build_vocab: symbol list is empty");
    Vocabulary v;
    v.symbols_.reserve(symbols.size() + 1);
    v.symbols_.push_back(kBlankSymbol);
    v.index_[kBlankSymbol] = kBlankId;
    for (const std::string& s : symbols) {
      NACORR_CHECK(!s.empty(), "build_vocab: empty symbol");
      NACORR_CHECK(s != kBlankSymbol, "build_vocab: symbol \"*\" is reserved for blank");
      for (char c : s) {
        NACORR_CHECK(!std::isspace(static_cast<unsigned char>(c)) && c != '/' && c != '|' &&
                         c != '*',
                     "build_vocab: symbol \"", s, "\" contains a reserved character");
      }
      NACORR_CHECK(v.index_.find(s) == v.index_.end(), "build_vocab: duplicate symbol \"", s,
                   "\"");
      v.index_[s] = static_cast<int32_t>(v.symbols_.size());
      v.symbols_.push_back(s);
    }
    NACORR_CHECK(v.size() >= 3, "build_vocab: need at least two real tokens, got ",
                 v.size() - 1);
    return v;
  }

  int32_t size() const { return static_cast<int32_t>(symbols_.size()); }
  int32_t blank_id() const { return kBlankId; }

  const std::string& symbol(int32_t id) const {
    NACORR_CHECK(id >= 0 && id < size(), "symbol: id ", id, " out of range (size ", size(), ")");
    return symbols_[id];
  }

  bool has_symbol(const std::string& s) const { return index_.count(s) > 0; }

  int32_t id_of(const std::string& s) const {
    auto it = index_.find(s);
    NACORR_CHECK(it != index_.end(), "unknown symbol \"", s, "\"");
    return it->second;
  }

  TokenSeq encode(const std::vector<std::string>& text) const {
    TokenSeq out;
    out.reserve(text.size());
    for (const std::string& s : text) out.push_back(id_of(s));
    return out;
  }

  std::vector<std::string> decode(const TokenSeq& seq) const {
    std::vector<std::string> out;
    out.reserve(seq.size());
    for (int32_t id : seq) out.push_back(symbol(id));
    return out;
  }

  // One symbol per line, line number = id, line 0 = "*".
  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::trunc);
    NACORR_CHECK(f.good(), "cannot write vocabulary file ", path);
    for (const std::string& s : symbols_) f << s << "\n";
    NACORR_CHECK(f.good(), "write failure on vocabulary file ", path);
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream f(path);
    NACORR_CHECK(f.good(), "cannot read vocabulary file ", path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(f, line)) lines.push_back(line);
    NACORR_CHECK(!lines.empty() && lines[0] == kBlankSymbol,
                 "vocabulary file ", path, ": line 0 must be \"*\"");
    lines.erase(lines.begin());
    return build(lines);
  }

  // Stable content hash, recorded in dataset headers.
  uint64_t content_hash() const {
    uint64_t h = fnv1a64("vocab");
    for (const std::string& s : symbols_) {
      h = hash_mix(h, fnv1a64(s));
    }
    return h;
  }

  // Deterministic synthetic syllable inventory: ba, be, bi, ... with numeric
  // suffixes once the plain consonant-vowel pairs run out.
  static Vocabulary synthetic(int num_symbols) {
    NACORR_CHECK(num_symbols >= 2, "synthetic vocabulary needs >= 2 symbols, got ", num_symbols);
    static const char* kConsonants = "bcdfghjklmnpqrstvwxz";
    static const char* kVowels = "aeiou";
    std::vector<std::string> syms;
    int round = 0;
    while (static_cast<int>(syms.size()) < num_symbols) {
      for (int ci = 0; kConsonants[ci] && static_cast<int>(syms.size()) < num_symbols; ++ci) {
        for (int vi = 0; kVowels[vi] && static_cast<int>(syms.size()) < num_symbols; ++vi) {
          std::string s{kConsonants[ci], kVowels[vi]};
          if (round > 0) s += std::to_string(round);
          syms.push_back(s);
        }
      }
      ++round;
    }
    return build(syms);
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int32_t> index_;
};

}  // namespace nacorr

#endif  // NACORR_VOCAB_HPP_
