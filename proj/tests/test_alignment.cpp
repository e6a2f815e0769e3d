// Alignment tests: the DP against a memo-free recursive oracle, the worked
// confidence-target examples, N-best grid invariants and the corrector
// target row.

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

#include <catch2/catch_amalgamated.hpp>

#include "nacorr/alignment.hpp"
#include "nacorr/rng.hpp"

using namespace nacorr;

namespace {

// Independent oracle: plain recursion, no memoization, unit costs.
int lev_oracle(const TokenSeq& a, size_t i, const TokenSeq& b, size_t j) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  int best = lev_oracle(a, i + 1, b, j + 1) + (a[i] == b[j] ? 0 : 1);
  best = std::min(best, lev_oracle(a, i + 1, b, j) + 1);
  best = std::min(best, lev_oracle(a, i, b, j + 1) + 1);
  return best;
}

int lev_oracle(const TokenSeq& a, const TokenSeq& b) { return lev_oracle(a, 0, b, 0); }

TokenSeq random_seq(Rng& rng, int max_len, int alphabet) {
  int len = rng.uniform_int(max_len + 1);
  TokenSeq s(len);
  for (int i = 0; i < len; ++i) s[i] = 1 + rng.uniform_int(alphabet);
  return s;
}

int path_cost(const EditPath& p) {
  int c = 0;
  for (const EditOp& op : p.ops)
    if (op.kind != EditOpKind::kMatch) ++c;
  return c;
}

// Checks the EditPath covering invariants: hyp positions covered once by
// Match/Substitute/Insert, ref positions once by Match/Substitute/Delete,
// both monotonically.
void check_path_valid(const EditPath& p, const TokenSeq& hyp, const TokenSeq& ref) {
  size_t i = 0, j = 0;
  for (const EditOp& op : p.ops) {
    switch (op.kind) {
      case EditOpKind::kMatch:
        REQUIRE(hyp[op.hyp_pos] == ref[op.ref_pos]);
        [[fallthrough]];
      case EditOpKind::kSubstitute:
        REQUIRE(op.hyp_pos == static_cast<int>(i));
        REQUIRE(op.ref_pos == static_cast<int>(j));
        if (op.kind == EditOpKind::kSubstitute) REQUIRE(hyp[op.hyp_pos] != ref[op.ref_pos]);
        ++i, ++j;
        break;
      case EditOpKind::kDelete:
        REQUIRE(op.ref_pos == static_cast<int>(j));
        ++j;
        break;
      case EditOpKind::kInsert:
        REQUIRE(op.hyp_pos == static_cast<int>(i));
        ++i;
        break;
    }
  }
  REQUIRE(i == hyp.size());
  REQUIRE(j == ref.size());
  REQUIRE(path_cost(p) == p.cost);
}

}  // namespace

TEST_CASE("edit distance worked examples") {
  TokenSeq abcd{1, 2, 3, 4};
  EditPath same = edit_distance(abcd, abcd);
  REQUIRE(same.cost == 0);
  REQUIRE(same.ops.size() == 4);
  for (const EditOp& op : same.ops) REQUIRE(op.kind == EditOpKind::kMatch);

  // hyp A B c D vs ref A B C D -> Match, Match, Substitute, Match.
  TokenSeq hyp{1, 2, 9, 4};
  EditPath p = edit_distance(hyp, abcd);
  REQUIRE(p.cost == 1);
  REQUIRE(p.ops.size() == 4);
  REQUIRE(p.ops[0].kind == EditOpKind::kMatch);
  REQUIRE(p.ops[1].kind == EditOpKind::kMatch);
  REQUIRE(p.ops[2].kind == EditOpKind::kSubstitute);
  REQUIRE(p.ops[3].kind == EditOpKind::kMatch);
}

TEST_CASE("edit distance equals recursive oracle on random pairs") {
  Rng rng(1234);
  for (int trial = 0; trial < 3000; ++trial) {
    TokenSeq a = random_seq(rng, 6, 4);
    TokenSeq b = random_seq(rng, 6, 4);
    EditPath p = edit_distance(a, b);
    REQUIRE(p.cost == lev_oracle(a, b));
    REQUIRE(p.cost == edit_cost(a, b));
    check_path_valid(p, a, b);
  }
}

TEST_CASE("edit distance metric properties") {
  Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    TokenSeq a = random_seq(rng, 8, 4);
    TokenSeq b = random_seq(rng, 8, 4);
    TokenSeq c = random_seq(rng, 8, 4);
    int dab = edit_cost(a, b);
    REQUIRE(dab == edit_cost(b, a));
    REQUIRE((dab == 0) == (a == b));
    REQUIRE(edit_cost(a, c) <= dab + edit_cost(b, c));
  }
}

TEST_CASE("confidence targets worked examples") {
  TokenSeq ref{1, 2, 3, 4};
  REQUIRE(confidence_targets({1, 2, 9, 4}, ref) == std::vector<uint8_t>{1, 1, 0, 1});
  REQUIRE(confidence_targets(ref, ref) == std::vector<uint8_t>{1, 1, 1, 1});
  // hyp A B D vs ref A B C D: C deleted, the remaining tokens are correct.
  REQUIRE(confidence_targets({1, 2, 4}, ref) == std::vector<uint8_t>{1, 1, 1});
}

TEST_CASE("confidence targets length and zero-count bound") {
  Rng rng(55);
  for (int trial = 0; trial < 500; ++trial) {
    TokenSeq hyp = random_seq(rng, 8, 4);
    TokenSeq ref = random_seq(rng, 8, 4);
    std::vector<uint8_t> c = confidence_targets(hyp, ref);
    REQUIRE(c.size() == hyp.size());
    int zeros = 0;
    for (uint8_t x : c) zeros += (x == 0);
    REQUIRE(zeros <= edit_cost(hyp, ref));
  }
}

TEST_CASE("align_nbest single hypothesis is itself") {
  AlignedNBest a = align_nbest({{1, 2, 3}});
  REQUIRE(a.rows.size() == 1);
  REQUIRE(a.rows[0] == TokenSeq{1, 2, 3});
}

TEST_CASE("align_nbest identical hypotheses have no blanks") {
  AlignedNBest a = align_nbest({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}});
  REQUIRE(a.rows.size() == 3);
  for (const TokenSeq& row : a.rows) REQUIRE(row == TokenSeq{1, 2, 3});
}

TEST_CASE("align_nbest complements blanks at a deletion") {
  // 1-best and 2-best miss token 9 that the 3-best retains.
  TokenSeq full{1, 2, 9, 3};
  TokenSeq missing{1, 2, 3};
  AlignedNBest a = align_nbest({missing, missing, full});
  REQUIRE(a.length() == 4);
  size_t blank_col = 0;
  bool found = false;
  for (size_t c = 0; c < a.length(); ++c) {
    if (a.rows[2][c] == 9) {
      blank_col = c;
      found = true;
    }
  }
  REQUIRE(found);
  REQUIRE(a.rows[0][blank_col] == kBlankId);
  REQUIRE(a.rows[1][blank_col] == kBlankId);
}

TEST_CASE("align_nbest invariants on random corpora") {
  Rng rng(4242);
  for (int trial = 0; trial < 800; ++trial) {
    std::vector<TokenSeq> hyps;
    int n = 1 + rng.uniform_int(4);
    for (int k = 0; k < n; ++k) {
      TokenSeq h = random_seq(rng, 10, 5);
      if (k == 0 && h.empty()) h.push_back(1);  // keep most anchors nonempty
      hyps.push_back(h);
    }
    AlignedNBest a = align_nbest(hyps);
    REQUIRE(a.rows.size() == hyps.size());
    for (size_t k = 0; k < hyps.size(); ++k) {
      REQUIRE(a.rows[k].size() == a.length());
      REQUIRE(strip_blanks(a.rows[k]) == hyps[k]);
    }
    for (size_t c = 0; c < a.length(); ++c) {
      bool all_blank = true;
      for (size_t k = 0; k < hyps.size(); ++k) all_blank &= (a.rows[k][c] == kBlankId);
      REQUIRE(!all_blank);
    }
  }
}

TEST_CASE("align_nbest rejects empty input and blanks") {
  REQUIRE_THROWS_AS(align_nbest({}), ValidationError);
  REQUIRE_THROWS_AS(align_nbest({{1, 0, 2}}), ValidationError);
}

TEST_CASE("aligned_targets on the identity grid") {
  TokenSeq ref{1, 2, 3};
  AlignedNBest a = align_nbest({ref, ref});
  AlignedTargets t = aligned_targets(a, ref);
  REQUIRE(t.corrector_row == ref);
  REQUIRE(t.dropped_ref_tokens == 0);
  for (const auto& c : t.confidence) REQUIRE(c == std::vector<uint8_t>{1, 1, 1});
}

TEST_CASE("aligned_targets places a deleted token at its blank column") {
  TokenSeq ref{1, 2, 9, 3};
  TokenSeq missing{1, 2, 3};
  AlignedNBest a = align_nbest({missing, missing, ref});
  AlignedTargets t = aligned_targets(a, ref);
  REQUIRE(t.dropped_ref_tokens == 0);
  REQUIRE(t.corrector_row == TokenSeq{1, 2, 9, 3});
  // The blank column gets confidence 0 in the rows that miss the token.
  size_t blank_col = 2;
  REQUIRE(a.rows[0][blank_col] == kBlankId);
  REQUIRE(t.confidence[0][blank_col] == 0);
  REQUIRE(t.confidence[2][blank_col] == 1);
}

TEST_CASE("aligned_targets drops unplaceable deletions") {
  // All candidates miss token 9: no blank column exists, the token drops.
  TokenSeq ref{1, 2, 9, 3};
  TokenSeq missing{1, 2, 3};
  AlignedNBest a = align_nbest({missing, missing, missing});
  AlignedTargets t = aligned_targets(a, ref);
  REQUIRE(t.dropped_ref_tokens == 1);
  REQUIRE(t.corrector_row == TokenSeq{1, 2, 3});
}

TEST_CASE("aligned_targets marks extraneous anchor tokens blank") {
  // Anchor inserted token 7; the target deletes it via a blank.
  TokenSeq ref{1, 2, 3};
  TokenSeq with_ins{1, 7, 2, 3};
  AlignedNBest a = align_nbest({with_ins});
  AlignedTargets t = aligned_targets(a, ref);
  REQUIRE(t.corrector_row == TokenSeq{1, kBlankId, 2, 3});
}

TEST_CASE("aligned_targets confidence re-expansion matches stripped rows") {
  Rng rng(313);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<TokenSeq> hyps;
    int n = 1 + rng.uniform_int(3);
    for (int k = 0; k < n; ++k) {
      TokenSeq h = random_seq(rng, 8, 4);
      if (h.empty()) h.push_back(1);
      hyps.push_back(h);
    }
    TokenSeq ref = random_seq(rng, 8, 4);
    if (ref.empty()) ref.push_back(2);
    AlignedNBest a = align_nbest(hyps);
    AlignedTargets t = aligned_targets(a, ref);
    REQUIRE(t.corrector_row.size() == a.length());
    for (size_t k = 0; k < hyps.size(); ++k) {
      std::vector<uint8_t> base = confidence_targets(hyps[k], ref);
      size_t next = 0;
      for (size_t c = 0; c < a.length(); ++c) {
        if (a.rows[k][c] == kBlankId) {
          REQUIRE(t.confidence[k][c] == 0);
        } else {
          REQUIRE(t.confidence[k][c] == base[next++]);
        }
      }
    }
  }
}
