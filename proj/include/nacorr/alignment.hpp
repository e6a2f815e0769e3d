// nacorr/alignment.hpp
//
// Levenshtein machinery: canonical edit paths, binary confidence targets,
// progressive N-best alignment against the 1-best anchor, and construction of
// the corrector training row over the blank-padded grid.

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

#ifndef NACORR_ALIGNMENT_HPP_
#define NACORR_ALIGNMENT_HPP_

#include <algorithm>
#include <cstdint>
#include <vector>

#include "nacorr/common.hpp"
#include "nacorr/vocab.hpp"

namespace nacorr {

enum class EditOpKind { kMatch, kSubstitute, kDelete, kInsert };

// Delete(ref_pos): reference token absent from the hypothesis.
// Insert(hyp_pos): hypothesis token absent from the reference.
struct EditOp {
  EditOpKind kind;
  int hyp_pos;  // -1 for Delete
  int ref_pos;  // -1 for Insert
};

struct EditPath {
  std::vector<EditOp> ops;
  int cost = 0;
};

// Unit-cost Levenshtein distance, cost only (rolling rows).
inline int edit_cost(const TokenSeq& a, const TokenSeq& b) {
  const size_t m = a.size(), n = b.size();
  std::vector<int> prev(n + 1), cur(n + 1);
  for (size_t j = 0; j <= n; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= m; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= n; ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, cur[j - 1] + 1, prev[j] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

// Full DP with one canonical optimal path.  Ties during backtracking prefer
// Match > Substitute > Delete > Insert, scanning from the sequence ends, so
// the returned path is deterministic.
inline EditPath edit_distance(const TokenSeq& hyp, const TokenSeq& ref) {
  const int m = static_cast<int>(hyp.size());
  const int n = static_cast<int>(ref.size());
  std::vector<std::vector<int>> d(m + 1, std::vector<int>(n + 1));
  for (int i = 0; i <= m; ++i) d[i][0] = i;
  for (int j = 0; j <= n; ++j) d[0][j] = j;
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= n; ++j) {
      int sub = d[i - 1][j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i][j - 1] + 1, d[i - 1][j] + 1});
    }
  }
  EditPath path;
  path.cost = d[m][n];
  path.ops.reserve(static_cast<size_t>(m) + n);
  int i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && hyp[i - 1] == ref[j - 1] && d[i][j] == d[i - 1][j - 1]) {
      path.ops.push_back({EditOpKind::kMatch, i - 1, j - 1});
      --i, --j;
    } else if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + 1) {
      path.ops.push_back({EditOpKind::kSubstitute, i - 1, j - 1});
      --i, --j;
    } else if (j > 0 && d[i][j] == d[i][j - 1] + 1) {
      path.ops.push_back({EditOpKind::kDelete, -1, j - 1});
      --j;
    } else {
      path.ops.push_back({EditOpKind::kInsert, i - 1, -1});
      --i;
    }
  }
  std::reverse(path.ops.begin(), path.ops.end());
  return path;
}

// Per-hypothesis-token correctness labels: Match -> 1, Substitute/Insert -> 0.
// Deletions contribute no position.
inline std::vector<uint8_t> confidence_targets(const TokenSeq& hyp, const TokenSeq& ref) {
  NACORR_CHECK(!contains_blank(hyp) && !contains_blank(ref),
               "confidence_targets: inputs must be blank-free");
  EditPath path = edit_distance(hyp, ref);
  std::vector<uint8_t> c(hyp.size(), 0);
  for (const EditOp& op : path.ops) {
    if (op.kind == EditOpKind::kMatch) c[op.hyp_pos] = 1;
  }
  return c;
}

// Blank-padded candidate grid.  Row 0 is the 1-best anchor; later rows are
// merged in by their edit path against the anchor.  Every row strips back to
// its original hypothesis and no column is blank in every row.
struct AlignedNBest {
  std::vector<TokenSeq> rows;
  int anchor_row = 0;

  size_t length() const { return rows.empty() ? 0 : rows[0].size(); }
  size_t n_rows() const { return rows.size(); }
};

inline AlignedNBest align_nbest(const std::vector<TokenSeq>& hyps) {
  NACORR_CHECK(!hyps.empty(), "align_nbest: empty hypothesis list");
  for (const TokenSeq& h : hyps)
    NACORR_CHECK(!contains_blank(h), "align_nbest: hypotheses must be blank-free");

  const TokenSeq& anchor = hyps[0];
  // Column-major while building: columns[c][k] = token of row k at column c.
  std::vector<TokenSeq> columns;
  columns.reserve(anchor.size() * 2);
  std::vector<int> anchor_col(anchor.size());
  for (size_t j = 0; j < anchor.size(); ++j) {
    columns.push_back(TokenSeq{anchor[j]});
    anchor_col[j] = static_cast<int>(j);
  }

  for (size_t k = 1; k < hyps.size(); ++k) {
    for (TokenSeq& col : columns) col.push_back(kBlankId);
    EditPath path = edit_distance(hyps[k], anchor);
    int cursor = 0;  // where the next inserted column lands
    for (const EditOp& op : path.ops) {
      switch (op.kind) {
        case EditOpKind::kMatch:
        case EditOpKind::kSubstitute: {
          int c = anchor_col[op.ref_pos];
          columns[c][k] = hyps[k][op.hyp_pos];
          cursor = c + 1;
          break;
        }
        case EditOpKind::kDelete: {
          // Anchor token that row k lacks; row k stays blank in that column.
          cursor = anchor_col[op.ref_pos] + 1;
          break;
        }
        case EditOpKind::kInsert: {
          TokenSeq col(k + 1, kBlankId);
          col[k] = hyps[k][op.hyp_pos];
          columns.insert(columns.begin() + cursor, std::move(col));
          for (int& ac : anchor_col)
            if (ac >= cursor) ++ac;
          ++cursor;
          break;
        }
      }
    }
  }

  AlignedNBest out;
  out.rows.assign(hyps.size(), TokenSeq(columns.size(), kBlankId));
  for (size_t c = 0; c < columns.size(); ++c)
    for (size_t k = 0; k < hyps.size(); ++k) out.rows[k][c] = columns[c][k];
  return out;
}

struct AlignedTargets {
  // Per row, one 0/1 label per aligned column; blank columns carry 0.
  std::vector<std::vector<uint8_t>> confidence;
  // Corrector training row over the grid: reference tokens at their aligned
  // columns, deleted reference tokens at adjacent blank columns when one
  // exists, blank everywhere else.
  TokenSeq corrector_row;
  // Reference tokens with no adjacent blank column to land in.
  int dropped_ref_tokens = 0;
};

inline AlignedTargets aligned_targets(const AlignedNBest& aligned, const TokenSeq& ref) {
  NACORR_CHECK(!contains_blank(ref), "aligned_targets: reference must be blank-free");
  const size_t L = aligned.length();
  AlignedTargets out;

  for (const TokenSeq& row : aligned.rows) {
    TokenSeq stripped = strip_blanks(row);
    std::vector<uint8_t> base = confidence_targets(stripped, ref);
    std::vector<uint8_t> expanded(L, 0);
    size_t next = 0;
    for (size_t c = 0; c < L; ++c) {
      if (row[c] != kBlankId) expanded[c] = base[next++];
    }
    out.confidence.push_back(std::move(expanded));
  }

  const TokenSeq& anchor_row = aligned.rows[aligned.anchor_row];
  TokenSeq anchor = strip_blanks(anchor_row);
  std::vector<int> anchor_cols;
  anchor_cols.reserve(anchor.size());
  for (size_t c = 0; c < L; ++c)
    if (anchor_row[c] != kBlankId) anchor_cols.push_back(static_cast<int>(c));

  EditPath path = edit_distance(anchor, ref);
  out.corrector_row.assign(L, kBlankId);

  // Pass 1: ops that consume an anchor token fix their column's target.
  for (const EditOp& op : path.ops) {
    if (op.kind == EditOpKind::kMatch || op.kind == EditOpKind::kSubstitute) {
      out.corrector_row[anchor_cols[op.hyp_pos]] = ref[op.ref_pos];
    }
    // kInsert: extraneous anchor token, target stays blank (deletion).
  }

  // Pass 2: deleted reference tokens land in an adjacent blank column of
  // their gap: the column right after the previous anchor token if free,
  // else the column right before the next one.
  const int Li = static_cast<int>(L);
  for (size_t idx = 0; idx < path.ops.size(); ++idx) {
    if (path.ops[idx].kind != EditOpKind::kDelete) continue;
    int prev_col = -1, next_col = Li;
    for (size_t a = idx; a-- > 0;) {
      if (path.ops[a].hyp_pos >= 0) {
        prev_col = anchor_cols[path.ops[a].hyp_pos];
        break;
      }
    }
    for (size_t a = idx + 1; a < path.ops.size(); ++a) {
      if (path.ops[a].hyp_pos >= 0) {
        next_col = anchor_cols[path.ops[a].hyp_pos];
        break;
      }
    }
    const int32_t tok = ref[path.ops[idx].ref_pos];
    int following = prev_col + 1;
    int preceding = next_col - 1;
    if (following < next_col && following < Li && anchor_row[following] == kBlankId &&
        out.corrector_row[following] == kBlankId) {
      out.corrector_row[following] = tok;
    } else if (preceding > prev_col && preceding >= 0 && anchor_row[preceding] == kBlankId &&
               out.corrector_row[preceding] == kBlankId) {
      out.corrector_row[preceding] = tok;
    } else {
      ++out.dropped_ref_tokens;
    }
  }
  return out;
}

}  // namespace nacorr

#endif  // NACORR_ALIGNMENT_HPP_
