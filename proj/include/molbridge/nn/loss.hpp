// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "molbridge/nn/encoder.hpp"
#include "molbridge/nn/tape.hpp"

// Batch layout and the two training losses. The contrastive loss follows the
// multi-positive form with the 1/|P| factor outside the log:
//
//   per anchor i:  -(1/|P(i)|) * log( sum_{j in P(i)} sigma_ij
//                                   / sum_{k in U(i)} sigma_ik )
//
// computed in log space via masked logsumexp, averaged over anchors, and
// summed over both retrieval directions. The relation classifier is a linear
// head over the concatenated raw encoder outputs with softmax cross-entropy
// over the three pair classes.

namespace molbridge::nn {

struct NumericalOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kClassS = 0;
inline constexpr int kClassSm = 1;
inline constexpr int kClassSt = 2;

struct BatchItem {
  std::vector<int> ids;  // BOS-prefixed token ids
  std::string kind;      // mol side: whole|fragment; text side: caption|phrase
  std::string origin;
};

struct ClPair {
  std::size_t mol_idx = 0, text_idx = 0;
  int label = kClassS;
  std::string pair_id;
};

struct Batch {
  std::vector<BatchItem> mols, texts;
  // candidate masks, [anchor][other-side item], 1.0 = member
  Mat p_mol, u_mol;  // mols x texts
  Mat p_txt, u_txt;  // texts x mols
  std::vector<ClPair> cl_pairs;
};

inline void check_batch(const Batch& b) {
  std::size_t n = b.mols.size(), m = b.texts.size();
  if (b.p_mol.rows != n || b.p_mol.cols != m || b.u_mol.rows != n || b.u_mol.cols != m ||
      b.p_txt.rows != m || b.p_txt.cols != n || b.u_txt.rows != m || b.u_txt.cols != n)
    throw GradError("batch: mask shape mismatch");
  auto subset_nonempty = [](const Mat& p, const Mat& u, const char* side) {
    for (std::size_t i = 0; i < p.rows; ++i) {
      bool any = false;
      for (std::size_t j = 0; j < p.cols; ++j) {
        if (p.at(i, j) != 0.0) {
          any = true;
          if (u.at(i, j) == 0.0)
            throw GradError(std::string("batch: positive outside candidate set on ") + side);
        }
      }
      if (!any) throw GradError(std::string("batch: empty positive set on ") + side);
    }
  };
  subset_nonempty(b.p_mol, b.u_mol, "mol side");
  subset_nonempty(b.p_txt, b.u_txt, "text side");
}

// Contrastive loss from stacked unit-row embeddings. `mol_stack` is n x d,
// `text_stack` m x d, rows already normalized.
inline int contrastive_node(Tape& t, int mol_stack, int text_stack, const Batch& b,
                            int inv_tau) {
  int cos_mt = t.matmul_nt(mol_stack, text_stack);
  int cos_tm = t.matmul_nt(text_stack, mol_stack);
  int logits_mt = t.scalar_mul(cos_mt, inv_tau);
  int logits_tm = t.scalar_mul(cos_tm, inv_tau);

  auto direction = [&](int logits, const Mat& p, const Mat& u) {
    int lse_p = t.masked_lse_rows(logits, p);
    int lse_u = t.masked_lse_rows(logits, u);
    int diff = t.add(lse_u, t.scale(lse_p, -1.0));
    std::vector<double> w(p.rows);
    for (std::size_t i = 0; i < p.rows; ++i) {
      double psize = 0;
      for (std::size_t j = 0; j < p.cols; ++j) psize += p.at(i, j) != 0.0 ? 1.0 : 0.0;
      w[i] = 1.0 / (psize * double(p.rows));
    }
    return t.weighted_sum(diff, w);
  };
  return t.add(direction(logits_mt, b.p_mol, b.u_mol),
               direction(logits_tm, b.p_txt, b.u_txt));
}

// Cross-entropy of the shared relation head over concatenated raw encoder
// outputs. `mol_vecs`/`text_vecs` are 1 x d nodes indexed by the cl pairs.
// Fills `correct` (if given) with the per-pair argmax outcome.
inline int classification_node(Tape& t, const std::vector<int>& mol_vecs,
                               const std::vector<int>& text_vecs,
                               const std::vector<ClPair>& pairs, int cls_w, int cls_b,
                               std::vector<char>* correct = nullptr) {
  if (pairs.empty()) throw GradError("classification: no pairs");
  if (correct) correct->assign(pairs.size(), 0);
  std::vector<int> ce_nodes;
  Mat all(1, 3);
  all.at(0, 0) = all.at(0, 1) = all.at(0, 2) = 1.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const ClPair& p = pairs[i];
    int z = t.concat_cols(mol_vecs[p.mol_idx], text_vecs[p.text_idx]);
    int logits = t.add(t.matmul(z, cls_w), cls_b);
    int lse = t.masked_lse_rows(logits, all);
    int ce = t.add(lse, t.scale(t.select_entry(logits, 0, std::size_t(p.label)), -1.0));
    ce_nodes.push_back(ce);
    if (correct) {
      const Mat& lv = t.val(logits);
      int best = 0;
      for (int c = 1; c < 3; ++c)
        if (lv.at(0, std::size_t(c)) > lv.at(0, std::size_t(best))) best = c;
      (*correct)[i] = best == p.label ? 1 : 0;
    }
  }
  // each ce node is 1 x 1, so the stack is a k x 1 column
  int stacked = t.stack_rows(ce_nodes);
  std::vector<double> w(ce_nodes.size(), 1.0 / double(ce_nodes.size()));
  return t.weighted_sum(stacked, w);
}

// Full objective for one batch. Returns node ids plus forward values.
struct LossResult {
  double total = 0, contrastive = 0, classification = 0;
  int total_node = -1;
  std::vector<char> cl_correct;
};

inline LossResult build_objective(Tape& t, const std::map<std::string, int>& leaves,
                                  const EncoderConfig& cfg, const Batch& batch,
                                  double cl_weight) {
  check_batch(batch);
  std::vector<int> mol_raw, text_raw, mol_unit, text_unit;
  for (const BatchItem& it : batch.mols) {
    int v = encode_node(t, leaves, "mol", it.ids, cfg);
    mol_raw.push_back(v);
    mol_unit.push_back(t.normalize_rows(v));
  }
  for (const BatchItem& it : batch.texts) {
    int v = encode_node(t, leaves, "text", it.ids, cfg);
    text_raw.push_back(v);
    text_unit.push_back(t.normalize_rows(v));
  }
  int mol_stack = t.stack_rows(mol_unit);
  int text_stack = t.stack_rows(text_unit);
  int inv_tau = inv_tau_node(t, leaves);

  LossResult res;
  int contrastive = contrastive_node(t, mol_stack, text_stack, batch, inv_tau);
  int classification = classification_node(t, mol_raw, text_raw, batch.cl_pairs,
                                           leaves.at("cls.w"), leaves.at("cls.b"),
                                           &res.cl_correct);
  res.total_node = t.add(contrastive, t.scale(classification, cl_weight));
  res.contrastive = t.val(contrastive).at(0, 0);
  res.classification = t.val(classification).at(0, 0);
  res.total = t.val(res.total_node).at(0, 0);
  if (!std::isfinite(res.total))
    throw NumericalOverflow("objective is not finite: " + std::to_string(res.total));
  return res;
}

}  // namespace molbridge::nn
