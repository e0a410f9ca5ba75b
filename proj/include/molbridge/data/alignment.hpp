// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "molbridge/chem/canonical.hpp"
#include "molbridge/frag/fragmenter.hpp"
#include "molbridge/text/phrases.hpp"
#include "molbridge/util/hash.hpp"
#include "molbridge/util/io.hpp"
#include "molbridge/util/log.hpp"
#include "molbridge/util/rng.hpp"
#include "molbridge/util/text.hpp"

// Alignment-set construction. Every corpus record (M, T) contributes the
// whole pair itself, one pair per fragment of M against the full caption, and
// one pair per extracted caption phrase against the whole molecule. Oversized
// molecules skip fragmentation but keep their phrase pairs.

namespace molbridge::data {

struct CorpusRecord {
  std::string id;
  std::string smiles;
  std::string caption;
  int line = 0;  // 1-based source line, for error reporting
};

struct AlignmentPair {
  std::string pair_id;
  std::string mol;         // canonical SMILES of a molecule or fragment
  std::string text;        // caption or phrase
  std::string pair_class;  // "S", "Sm" or "St"
  std::string origin;      // id of the originating corpus record
  bool active = true;
};

struct EmptyCorpus : DataError {
  using DataError::DataError;
};

inline std::string make_pair_id(const std::string& origin, const std::string& pair_class,
                                const std::string& mol, const std::string& text) {
  return to_hex16(fnv1a64(origin + "|" + pair_class + "|" + mol + "|" + text));
}

// --- corpus loading ---------------------------------------------------------

inline std::vector<CorpusRecord> parse_corpus_tsv(const std::string& content,
                                                  const std::string& source) {
  std::vector<CorpusRecord> out;
  int lineno = 0;
  for (const std::string& raw : split(content, '\n')) {
    ++lineno;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 3)
      throw DataError(source + ":" + std::to_string(lineno) + ": expected 3 columns, got " +
                      std::to_string(cols.size()));
    out.push_back({trim(cols[0]), trim(cols[1]), cols[2], lineno});
  }
  return out;
}

inline std::vector<CorpusRecord> parse_corpus_jsonl(const std::string& path) {
  std::vector<CorpusRecord> out;
  for_each_jsonl(path, [&](int lineno, const Json& obj) {
    for (const char* key : {"id", "smiles", "caption"})
      if (!obj.contains(key) || !obj[key].is_string())
        throw DataError(path + ":" + std::to_string(lineno) + ": missing string field '" +
                        key + "'");
    out.push_back({obj["id"], obj["smiles"], obj["caption"], lineno});
  });
  return out;
}

inline std::vector<CorpusRecord> load_corpus(const std::string& path) {
  if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl")
    return parse_corpus_jsonl(path);
  return parse_corpus_tsv(read_file(path), path);
}

// --- augmentation -----------------------------------------------------------

inline std::vector<AlignmentPair> augment(const std::vector<CorpusRecord>& corpus,
                                          const std::vector<frag::CleavageRule>& rules,
                                          const text::PhraseLexicon& lexicon) {
  std::vector<AlignmentPair> out;
  std::set<std::string> seen_mols;
  std::set<std::string> seen_ids;
  std::size_t n_s = 0, n_sm = 0, n_st = 0;

  auto emit = [&](const std::string& origin, const std::string& cls, const std::string& mol,
                  const std::string& txt) {
    AlignmentPair p{make_pair_id(origin, cls, mol, txt), mol, txt, cls, origin, true};
    if (!seen_ids.insert(p.pair_id).second) return;  // exact duplicate content
    if (cls == "S") ++n_s;
    if (cls == "Sm") ++n_sm;
    if (cls == "St") ++n_st;
    out.push_back(std::move(p));
  };

  for (const CorpusRecord& rec : corpus) {
    chem::Molecule mol;
    std::string canon;
    try {
      mol = chem::parse_smiles(rec.smiles);
      canon = chem::canonical_smiles(mol);
    } catch (const chem::ParseError& e) {
      throw DataError("line " + std::to_string(rec.line) + " (" + rec.id +
                      "): " + e.what());
    }
    if (!seen_mols.insert(canon).second)
      throw DataError("line " + std::to_string(rec.line) + " (" + rec.id +
                      "): duplicate molecule " + canon);

    emit(rec.id, "S", canon, rec.caption);
    if (mol.atom_count() <= int(frag::kMaxFragmentationAtoms)) {
      for (const frag::Fragment& f : frag::fragment(mol, rules).fragments)
        emit(rec.id, "Sm", f.smiles, rec.caption);
    }
    for (const text::ChemicalPhrase& ph : text::extract_phrases(rec.caption, lexicon))
      emit(rec.id, "St", canon, ph.text);
  }

  std::sort(out.begin(), out.end(),
            [](const AlignmentPair& a, const AlignmentPair& b) { return a.pair_id < b.pair_id; });
  log_info("augment: " + std::to_string(n_s) + " whole pairs, " + std::to_string(n_sm) +
           " fragment pairs, " + std::to_string(n_st) + " phrase pairs");
  return out;
}

// --- scaffold split ---------------------------------------------------------

struct ScaffoldSplit {
  std::vector<CorpusRecord> train, valid, test;
  bool random_fallback = false;  // set when every molecule shares one scaffold class
};

inline ScaffoldSplit split_scaffold(const std::vector<CorpusRecord>& corpus,
                                    double train_ratio, double valid_ratio, double test_ratio,
                                    std::uint64_t seed) {
  if (corpus.empty()) throw EmptyCorpus("scaffold split: empty corpus");
  if (std::fabs(train_ratio + valid_ratio + test_ratio - 1.0) > 1e-9)
    throw DataError("scaffold split: ratios must sum to 1");

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::string key;
    try {
      key = chem::scaffold_key(corpus[i].smiles);
    } catch (const chem::ParseError& e) {
      throw DataError("line " + std::to_string(corpus[i].line) + " (" + corpus[i].id +
                      "): " + e.what());
    }
    groups[key].push_back(i);
  }

  ScaffoldSplit split;
  const double n = double(corpus.size());
  double target_train = train_ratio * n;
  double target_valid = valid_ratio * n;
  double target_test = test_ratio * n;

  if (groups.size() <= 1) {
    // One scaffold class only: grouping cannot separate anything, fall back to
    // a seeded random split so the ratios are still honored.
    split.random_fallback = true;
    log_info("scaffold split: single scaffold class, falling back to random split");
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    std::size_t n_train = std::size_t(std::llround(target_train));
    std::size_t n_valid = std::size_t(std::llround(target_valid));
    n_train = std::min(n_train, order.size());
    n_valid = std::min(n_valid, order.size() - n_train);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const CorpusRecord& r = corpus[order[i]];
      if (i < n_train)
        split.train.push_back(r);
      else if (i < n_train + n_valid)
        split.valid.push_back(r);
      else
        split.test.push_back(r);
    }
    return split;
  }

  // Largest group first, each into the bucket with the biggest remaining
  // deficit. Deterministic: ties break by bucket order then scaffold key.
  std::vector<std::pair<std::string, std::vector<std::size_t>>> ordered(groups.begin(),
                                                                        groups.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    if (a.second.size() != b.second.size()) return a.second.size() > b.second.size();
    return a.first < b.first;
  });
  double fill_train = 0, fill_valid = 0, fill_test = 0;
  for (const auto& [key, members] : ordered) {
    double d_train = target_train - fill_train;
    double d_valid = target_valid - fill_valid;
    double d_test = target_test - fill_test;
    std::vector<CorpusRecord>* bucket = &split.train;
    double* fill = &fill_train;
    double best = d_train;
    if (d_valid > best) {
      best = d_valid;
      bucket = &split.valid;
      fill = &fill_valid;
    }
    if (d_test > best) {
      best = d_test;
      bucket = &split.test;
      fill = &fill_test;
    }
    for (std::size_t i : members) bucket->push_back(corpus[i]);
    *fill += double(members.size());
  }
  return split;
}

// --- pair serialization -----------------------------------------------------

inline std::string pairs_to_jsonl(const std::vector<AlignmentPair>& pairs) {
  std::string out;
  for (const AlignmentPair& p : pairs) {
    Json obj;
    obj["pair_id"] = p.pair_id;
    obj["mol"] = p.mol;
    obj["text"] = p.text;
    obj["class"] = p.pair_class;
    obj["origin"] = p.origin;
    obj["active"] = p.active;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

inline void write_pairs(const std::string& path, const std::vector<AlignmentPair>& pairs) {
  atomic_write_file(path, pairs_to_jsonl(pairs));
}

inline std::vector<AlignmentPair> read_pairs(const std::string& path) {
  std::vector<AlignmentPair> out;
  for_each_jsonl(path, [&](int lineno, const Json& obj) {
    for (const char* key : {"pair_id", "mol", "text", "class", "origin"})
      if (!obj.contains(key) || !obj[key].is_string())
        throw DataError(path + ":" + std::to_string(lineno) + ": missing string field '" +
                        key + "'");
    if (!obj.contains("active") || !obj["active"].is_boolean())
      throw DataError(path + ":" + std::to_string(lineno) + ": missing boolean 'active'");
    out.push_back({obj["pair_id"], obj["mol"], obj["text"], obj["class"], obj["origin"],
                   obj["active"]});
  });
  return out;
}

}  // namespace molbridge::data
