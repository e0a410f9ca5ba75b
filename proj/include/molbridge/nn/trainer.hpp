// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "molbridge/data/alignment.hpp"
#include "molbridge/nn/adamw.hpp"
#include "molbridge/nn/encoder.hpp"
#include "molbridge/nn/loss.hpp"
#include "molbridge/util/config.hpp"
#include "molbridge/util/log.hpp"
#include "molbridge/util/rng.hpp"

// Contrastive training over alignment pairs with periodic self-refinement.
//
// Batches draw B origins; each contributes its whole-molecule pair plus up to
// k_m fragments and k_t phrases. Positives follow the pair classes, candidate
// sets exclude fragment-phrase cross terms. The relation classifier's argmax
// is recorded for every pair in the same forward pass that trains it; at each
// window boundary, pairs misclassified in every epoch of the window are
// retired for good.

namespace molbridge::nn {

struct EmptyDataset : DataError {
  using DataError::DataError;
};
struct DivergenceDetected : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AllFiltered : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  std::size_t d = 64;
  std::size_t max_len = 256;
  std::size_t batch_origins = 8;  // B
  std::size_t k_m = 2;
  std::size_t k_t = 2;
  std::size_t window = 10;
  std::size_t epochs = 50;
  double lr = 2e-4;
  double cl_weight = 1.0;
  std::uint64_t seed = 0;
  bool exclude_all_cross = true;  // false: drop only same-origin cross terms
};

inline TrainConfig train_config_from(const Config& c) {
  TrainConfig t;
  t.d = std::size_t(c.get_int("d", static_cast<long long>(t.d)));
  t.max_len = std::size_t(c.get_int("max_len", static_cast<long long>(t.max_len)));
  t.batch_origins = std::size_t(c.get_int("batch_origins", static_cast<long long>(t.batch_origins)));
  t.k_m = std::size_t(c.get_int("k_m", static_cast<long long>(t.k_m)));
  t.k_t = std::size_t(c.get_int("k_t", static_cast<long long>(t.k_t)));
  t.window = std::size_t(c.get_int("window", static_cast<long long>(t.window)));
  t.epochs = std::size_t(c.get_int("epochs", static_cast<long long>(t.epochs)));
  t.lr = c.get_double("lr", t.lr);
  t.cl_weight = c.get_double("cl_weight", t.cl_weight);
  t.seed = std::uint64_t(c.get_int("seed", 0));
  std::string ex = c.get_string("exclusion", "all");
  if (ex == "all")
    t.exclude_all_cross = true;
  else if (ex == "same_origin")
    t.exclude_all_cross = false;
  else
    throw ConfigError("config key 'exclusion' must be 'all' or 'same_origin', got: " + ex);
  if (t.batch_origins == 0) throw ConfigError("batch_origins must be positive");
  if (t.window == 0) throw ConfigError("window must be positive");
  return t;
}

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0;
  double loss_cl = 0;
  std::size_t n_active = 0;
  std::size_t n_filtered = 0;
};

inline std::string epoch_stats_to_json(const EpochStats& s) {
  nlohmann::json j;
  j["epoch"] = s.epoch;
  j["loss"] = s.loss;
  j["loss_cl"] = s.loss_cl;
  j["n_active"] = s.n_active;
  j["n_filtered"] = s.n_filtered;
  return j.dump();
}

class Trainer {
public:
  Trainer(std::vector<data::AlignmentPair> pairs, TrainConfig cfg)
      : pairs_(std::move(pairs)), cfg_(cfg), rng_(cfg.seed) {
    if (pairs_.empty()) throw EmptyDataset("no alignment pairs");
    group_origins();
    if (groups_.empty()) throw EmptyDataset("no S pairs in dataset");

    std::vector<std::string> mol_corpus, text_corpus;
    for (const auto& p : pairs_) {
      mol_corpus.push_back(p.mol);
      text_corpus.push_back(p.text);
    }
    EncoderConfig ecfg;
    ecfg.d = cfg_.d;
    ecfg.max_len = cfg_.max_len;
    enc_ = DualEncoder::init(ecfg, Tokenizer::build("molecule", mol_corpus, cfg_.max_len),
                             Tokenizer::build("text", text_corpus, cfg_.max_len), cfg_.seed);
    AdamWConfig ocfg;
    ocfg.lr = cfg_.lr;
    opt_ = AdamW(ocfg);
    mol_ids_.reserve(pairs_.size());
    text_ids_.reserve(pairs_.size());
    for (const auto& p : pairs_) {
      mol_ids_.push_back(enc_.mol_tok.encode(p.mol));
      text_ids_.push_back(enc_.text_tok.encode(p.text));
    }
  }

  const DualEncoder& encoder() const { return enc_; }
  DualEncoder& encoder() { return enc_; }
  const TrainConfig& config() const { return cfg_; }
  const std::vector<data::AlignmentPair>& pairs() const { return pairs_; }

  std::size_t n_active() const {
    std::size_t n = 0;
    for (const auto& p : pairs_) n += p.active ? 1 : 0;
    return n;
  }
  std::size_t n_filtered() const { return pairs_.size() - n_active(); }

  std::size_t active_origins() const {
    std::size_t n = 0;
    for (const auto& g : groups_) n += pairs_[g.s].active ? 1 : 0;
    return n;
  }

  // One pass over the active origins. Returns mean batch losses; records the
  // classifier outcome of every pair it saw.
  EpochStats run_epoch(std::size_t epoch) {
    std::vector<std::size_t> order;
    for (std::size_t gi = 0; gi < groups_.size(); ++gi)
      if (pairs_[groups_[gi].s].active) order.push_back(gi);
    if (order.empty()) throw EmptyDataset("no active S pairs");
    Rng erng = rng_.fork(epoch);
    erng.shuffle(order);

    double loss_sum = 0, cl_sum = 0;
    std::size_t batches = 0;
    for (std::size_t at = 0; at < order.size(); at += cfg_.batch_origins) {
      std::size_t take = std::min(cfg_.batch_origins, order.size() - at);
      std::vector<std::size_t> chosen(order.begin() + long(at),
                                      order.begin() + long(at + take));
      Batch b = build_batch(chosen, erng);
      double l = 0, lcl = 0;
      step_batch(b, epoch, batches, &l, &lcl);
      loss_sum += l;
      cl_sum += lcl;
      ++batches;
    }
    ++window_epochs_;
    EpochStats s;
    s.epoch = epoch;
    s.loss = loss_sum / double(batches);
    s.loss_cl = cl_sum / double(batches);
    s.n_active = n_active();
    s.n_filtered = n_filtered();
    return s;
  }

  // Window-boundary filtering: a pair leaves the active set when it was
  // misclassified in every epoch since the last refine. Irreversible.
  std::size_t refine() {
    std::size_t filtered = 0;
    for (auto& p : pairs_) {
      if (!p.active) continue;
      auto it = miss_count_.find(p.pair_id);
      if (it != miss_count_.end() && it->second == window_epochs_ && window_epochs_ > 0) {
        p.active = false;
        ++filtered;
      }
    }
    miss_count_.clear();
    window_epochs_ = 0;
    if (filtered > 0)
      log_info("refine: filtered " + std::to_string(filtered) + " pairs, " +
               std::to_string(n_active()) + " remain active");
    filtered_any_ |= filtered > 0;
    return filtered;
  }

  // Full loop: epochs 1..n with refinement at window boundaries. Per-epoch
  // stats go to `log_out` as JSON lines when given.
  std::vector<EpochStats> train(std::ostream* log_out = nullptr) {
    std::vector<EpochStats> history;
    for (std::size_t e = 1; e <= cfg_.epochs; ++e) {
      if (active_origins() == 0) {
        if (filtered_any_) throw AllFiltered("refinement removed every trainable pair");
        throw EmptyDataset("no active S pairs");
      }
      EpochStats s = run_epoch(e);
      if (e % cfg_.window == 0) {
        refine();
        s.n_active = n_active();
        s.n_filtered = n_filtered();
      }
      if (log_out) *log_out << epoch_stats_to_json(s) << '\n';
      history.push_back(s);
    }
    return history;
  }

  // Exposed for tests: assembles a batch from the given origin-group indices.
  Batch build_batch(const std::vector<std::size_t>& group_idx, Rng& rng) {
    Batch b;
    std::size_t n_orig = group_idx.size();
    struct Extra {
      std::size_t pair_idx, group_pos;
    };
    std::vector<Extra> frags, phrases;
    for (std::size_t gi = 0; gi < n_orig; ++gi) {
      const OriginGroup& g = groups_[group_idx[gi]];
      b.mols.push_back({mol_ids_[g.s], "whole", g.origin});
      b.texts.push_back({text_ids_[g.s], "caption", g.origin});
      for (std::size_t k : pick(g.frags, cfg_.k_m, rng)) frags.push_back({k, gi});
      for (std::size_t k : pick(g.phrases, cfg_.k_t, rng)) phrases.push_back({k, gi});
    }
    for (const Extra& f : frags)
      b.mols.push_back({mol_ids_[f.pair_idx], "fragment", groups_[group_idx[f.group_pos]].origin});
    for (const Extra& p : phrases)
      b.texts.push_back({text_ids_[p.pair_idx], "phrase", groups_[group_idx[p.group_pos]].origin});

    std::size_t n_mol = b.mols.size(), n_text = b.texts.size();
    b.p_mol = Mat(n_mol, n_text);
    b.u_mol = Mat(n_mol, n_text);
    b.p_txt = Mat(n_text, n_mol);
    b.u_txt = Mat(n_text, n_mol);

    // whole anchors: caption plus own phrases positive, every text a candidate
    for (std::size_t gi = 0; gi < n_orig; ++gi) {
      b.p_mol.at(gi, gi) = 1.0;
      for (std::size_t j = 0; j < n_text; ++j) b.u_mol.at(gi, j) = 1.0;
    }
    for (std::size_t pi = 0; pi < phrases.size(); ++pi)
      b.p_mol.at(phrases[pi].group_pos, n_orig + pi) = 1.0;

    // fragment anchors: own caption positive; phrases leave the candidate set
    for (std::size_t fi = 0; fi < frags.size(); ++fi) {
      std::size_t row = n_orig + fi;
      b.p_mol.at(row, frags[fi].group_pos) = 1.0;
      for (std::size_t j = 0; j < n_orig; ++j) b.u_mol.at(row, j) = 1.0;
      if (!cfg_.exclude_all_cross)
        for (std::size_t pi = 0; pi < phrases.size(); ++pi)
          if (phrases[pi].group_pos != frags[fi].group_pos)
            b.u_mol.at(row, n_orig + pi) = 1.0;
    }

    // caption anchors: whole plus own fragments positive, every mol a candidate
    for (std::size_t gi = 0; gi < n_orig; ++gi) {
      b.p_txt.at(gi, gi) = 1.0;
      for (std::size_t j = 0; j < n_mol; ++j) b.u_txt.at(gi, j) = 1.0;
    }
    for (std::size_t fi = 0; fi < frags.size(); ++fi)
      b.p_txt.at(frags[fi].group_pos, n_orig + fi) = 1.0;

    // phrase anchors: own whole positive; fragments leave the candidate set
    for (std::size_t pi = 0; pi < phrases.size(); ++pi) {
      std::size_t row = n_orig + pi;
      b.p_txt.at(row, phrases[pi].group_pos) = 1.0;
      for (std::size_t j = 0; j < n_orig; ++j) b.u_txt.at(row, j) = 1.0;
      if (!cfg_.exclude_all_cross)
        for (std::size_t fi = 0; fi < frags.size(); ++fi)
          if (frags[fi].group_pos != phrases[pi].group_pos)
            b.u_txt.at(row, n_orig + fi) = 1.0;
    }

    for (std::size_t gi = 0; gi < n_orig; ++gi) {
      const OriginGroup& g = groups_[group_idx[gi]];
      b.cl_pairs.push_back({gi, gi, kClassS, pairs_[g.s].pair_id});
    }
    for (std::size_t fi = 0; fi < frags.size(); ++fi)
      b.cl_pairs.push_back(
          {n_orig + fi, frags[fi].group_pos, kClassSm, pairs_[frags[fi].pair_idx].pair_id});
    for (std::size_t pi = 0; pi < phrases.size(); ++pi)
      b.cl_pairs.push_back(
          {phrases[pi].group_pos, n_orig + pi, kClassSt, pairs_[phrases[pi].pair_idx].pair_id});
    return b;
  }

private:
  struct OriginGroup {
    std::string origin;
    std::size_t s = 0;
    std::vector<std::size_t> frags, phrases;
  };

  void group_origins() {
    std::map<std::string, std::size_t> by_origin;  // origin -> groups_ index
    std::map<std::string, std::vector<std::size_t>> deferred;
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      const auto& p = pairs_[i];
      if (p.pair_class == "S") {
        if (by_origin.count(p.origin))
          throw DataError("origin " + p.origin + " has more than one S pair");
        by_origin[p.origin] = groups_.size();
        groups_.push_back({p.origin, i, {}, {}});
      } else if (p.pair_class == "Sm" || p.pair_class == "St") {
        deferred[p.origin].push_back(i);
      } else {
        throw DataError("pair " + p.pair_id + " has unknown class " + p.pair_class);
      }
    }
    for (const auto& [origin, idxs] : deferred) {
      auto it = by_origin.find(origin);
      if (it == by_origin.end())
        throw DataError("origin " + origin + " has fragment or phrase pairs but no S pair");
      for (std::size_t i : idxs)
        (pairs_[i].pair_class == "Sm" ? groups_[it->second].frags
                                      : groups_[it->second].phrases)
            .push_back(i);
    }
  }

  // Up to k active members, order fixed by the rng draw.
  std::vector<std::size_t> pick(const std::vector<std::size_t>& from, std::size_t k,
                                Rng& rng) {
    std::vector<std::size_t> active;
    for (std::size_t i : from)
      if (pairs_[i].active) active.push_back(i);
    std::vector<std::size_t> out;
    for (std::size_t j : rng.sample_indices(active.size(), k)) out.push_back(active[j]);
    return out;
  }

  void step_batch(const Batch& b, std::size_t epoch, std::size_t batch_idx, double* loss,
                  double* loss_cl) {
    Tape t;
    auto leaves = param_leaves(t, enc_.params);
    LossResult res;
    try {
      res = build_objective(t, leaves, enc_.cfg, b, cfg_.cl_weight);
    } catch (const NumericalOverflow& e) {
      throw DivergenceDetected(divergence_report(epoch, batch_idx, e.what()));
    }
    t.backward(res.total_node);
    std::map<std::string, Mat> grads;
    for (const auto& [name, leaf] : leaves) grads[name] = t.grad(leaf);
    opt_.step(enc_.params, grads);

    for (std::size_t i = 0; i < b.cl_pairs.size(); ++i)
      if (!res.cl_correct[i]) ++miss_count_[b.cl_pairs[i].pair_id];
    *loss = res.contrastive;
    *loss_cl = res.classification;
  }

  std::string divergence_report(std::size_t epoch, std::size_t batch_idx,
                                const std::string& why) const {
    nlohmann::json j;
    j["epoch"] = epoch;
    j["batch"] = batch_idx;
    j["n_active"] = n_active();
    j["n_filtered"] = n_filtered();
    j["optimizer_steps"] = opt_.steps();
    j["tau"] = enc_.tau();
    j["reason"] = why;
    std::string report = "training diverged: " + j.dump();
    log_info(report);
    return report;
  }

  std::vector<data::AlignmentPair> pairs_;
  TrainConfig cfg_;
  Rng rng_;
  DualEncoder enc_;
  AdamW opt_;
  std::vector<OriginGroup> groups_;
  std::vector<std::vector<int>> mol_ids_, text_ids_;
  std::map<std::string, std::size_t> miss_count_;
  std::size_t window_epochs_ = 0;
  bool filtered_any_ = false;
};

}  // namespace molbridge::nn
