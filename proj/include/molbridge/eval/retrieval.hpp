// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "molbridge/data/alignment.hpp"
#include "molbridge/nn/encoder.hpp"
#include "molbridge/util/io.hpp"

// Cross-modal retrieval metrics. Every pair contributes one query per
// direction; the matching counterpart is the ground truth and all other
// counterparts are distractors. Ranking uses the raw cosine, which orders
// candidates identically to the temperature-scaled similarity.

namespace molbridge::eval {

struct TooFewItems : DataError {
  using DataError::DataError;
};

inline constexpr std::array<int, 4> kRecallCuts = {1, 5, 10, 20};

struct RetrievalReport {
  std::string direction;  // "mol2text" or "text2mol"
  std::map<int, double> recall_at;
  double mrr = 0;
};

// Rank of the true candidate under descending score. Ties resolve by
// candidate index, so equal-scored items ahead of the truth push it down.
inline std::size_t rank_of(const std::vector<double>& scores, std::size_t true_idx) {
  std::size_t rank = 1;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (j == true_idx) continue;
    if (scores[j] > scores[true_idx] || (scores[j] == scores[true_idx] && j < true_idx))
      ++rank;
  }
  return rank;
}

// Row i is a query whose ground truth sits in column i.
inline RetrievalReport report_from_scores(const std::vector<std::vector<double>>& sim,
                                          std::string direction) {
  std::size_t n = sim.size();
  if (n < 2) throw TooFewItems("retrieval needs at least 2 items, got " + std::to_string(n));
  for (const auto& row : sim)
    if (row.size() != n) throw DataError("retrieval score matrix must be square");

  RetrievalReport rep;
  rep.direction = std::move(direction);
  for (int k : kRecallCuts) rep.recall_at[k] = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rank = rank_of(sim[i], i);
    for (int k : kRecallCuts)
      if (rank <= std::size_t(k)) rep.recall_at[k] += 1;
    rep.mrr += 1.0 / double(rank);
  }
  for (int k : kRecallCuts) rep.recall_at[k] /= double(n);
  rep.mrr /= double(n);
  return rep;
}

// Encodes each side once, then scores both directions from one cosine matrix.
// Returned order: mol2text first, text2mol second.
inline std::pair<RetrievalReport, RetrievalReport> evaluate(
    const nn::DualEncoder& enc, const std::vector<data::AlignmentPair>& pairs) {
  std::size_t n = pairs.size();
  if (n < 2) throw TooFewItems("retrieval needs at least 2 pairs, got " + std::to_string(n));

  std::vector<nn::Mat> mols, texts;
  mols.reserve(n);
  texts.reserve(n);
  for (const auto& p : pairs) {
    mols.push_back(nn::encode_vector(enc, "mol", enc.mol_tok.encode(p.mol)));
    texts.push_back(nn::encode_vector(enc, "text", enc.text_tok.encode(p.text)));
  }

  std::vector<std::vector<double>> m2t(n, std::vector<double>(n));
  std::vector<std::vector<double>> t2m(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double c = nn::cosine(mols[i], texts[j]);
      m2t[i][j] = c;
      t2m[j][i] = c;
    }
  return {report_from_scores(m2t, "mol2text"), report_from_scores(t2m, "text2mol")};
}

inline Json report_to_json(const RetrievalReport& rep) {
  Json j;
  for (int k : kRecallCuts) j["R@" + std::to_string(k)] = rep.recall_at.at(k);
  j["MRR"] = rep.mrr;
  return j;
}

inline Json reports_to_json(const RetrievalReport& a, const RetrievalReport& b) {
  Json j;
  j[a.direction] = report_to_json(a);
  j[b.direction] = report_to_json(b);
  return j;
}

inline std::string reports_to_table(const RetrievalReport& a, const RetrievalReport& b) {
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %6s %6s %6s %6s %6s\n", "direction", "R@1",
                "R@5", "R@10", "R@20", "MRR");
  std::string out = line;
  for (const RetrievalReport* rep : {&a, &b}) {
    std::snprintf(line, sizeof line, "%-10s %6.4f %6.4f %6.4f %6.4f %6.4f\n",
                  rep->direction.c_str(), rep->recall_at.at(1), rep->recall_at.at(5),
                  rep->recall_at.at(10), rep->recall_at.at(20), rep->mrr);
    out += line;
  }
  return out;
}

}  // namespace molbridge::eval
