// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "molbridge/data/alignment.hpp"
#include "molbridge/nn/encoder.hpp"
#include "molbridge/util/io.hpp"

// Substructure-phrase relation mining. Every same-origin (fragment, phrase)
// combination is scored with the trained encoders' cosine; combinations at or
// above the threshold survive. Origins without a surviving relation drop out
// of the generative export entirely.

namespace molbridge::mine {

struct UntrainedModel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MinedRelation {
  std::string origin;
  std::string sub;  // fragment SMILES, molecule side
  std::string phrase;
  double score = 0;  // cosine in [-1, 1]
};

struct GenerativeRecord {
  std::string task;  // smiles2caption | caption2smiles | sub2phrase | phrase2sub
  std::string prompt;
  std::string target;
};

inline constexpr const char* kPromptSmiles2Caption =
    "Provide a whole description of this molecule: ";
inline constexpr const char* kPromptCaption2Smiles =
    "Provide a molecule based on this description: ";
inline constexpr const char* kPromptSub2Phrase =
    "Provide a keyword of this substructure: ";
inline constexpr const char* kPromptPhrase2Sub =
    "Provide a substructure based on this keyword: ";

namespace detail {

inline void require_trained(const nn::DualEncoder& enc) {
  for (const auto& [name, mat] : enc.params) {
    if (name == "log_inv_temp") continue;
    for (double v : mat.data)
      if (v != 0.0) return;
  }
  throw UntrainedModel("model parameters are all zero");
}

struct OriginView {
  const data::AlignmentPair* s = nullptr;
  std::vector<const data::AlignmentPair*> frags, phrases;
};

// Active pairs only: relations never resurrect refined-away data.
inline std::map<std::string, OriginView> origin_views(
    const std::vector<data::AlignmentPair>& pairs) {
  std::map<std::string, OriginView> views;
  for (const auto& p : pairs) {
    if (!p.active) continue;
    OriginView& v = views[p.origin];
    if (p.pair_class == "S") {
      if (v.s) throw DataError("origin " + p.origin + " has more than one S pair");
      v.s = &p;
    } else if (p.pair_class == "Sm") {
      v.frags.push_back(&p);
    } else if (p.pair_class == "St") {
      v.phrases.push_back(&p);
    } else {
      throw DataError("pair " + p.pair_id + " has unknown class " + p.pair_class);
    }
  }
  return views;
}

}  // namespace detail

// Scores all same-origin (fragment, phrase) combinations and keeps those at
// or above theta (strictly above with inclusive=false). Output is sorted by
// (origin, sub, phrase).
inline std::vector<MinedRelation> mine(const nn::DualEncoder& enc,
                                       const std::vector<data::AlignmentPair>& pairs,
                                       double theta, bool inclusive = true) {
  if (!(theta > -1.0) || theta > 1.0)
    throw DataError("mining threshold must lie in (-1, 1], got " + std::to_string(theta));
  detail::require_trained(enc);

  std::map<std::string, nn::Mat> mol_vecs, text_vecs;
  auto mol_vec = [&](const std::string& s) -> const nn::Mat& {
    auto it = mol_vecs.find(s);
    if (it == mol_vecs.end())
      it = mol_vecs.emplace(s, nn::encode_vector(enc, "mol", enc.mol_tok.encode(s))).first;
    return it->second;
  };
  auto text_vec = [&](const std::string& s) -> const nn::Mat& {
    auto it = text_vecs.find(s);
    if (it == text_vecs.end())
      it = text_vecs.emplace(s, nn::encode_vector(enc, "text", enc.text_tok.encode(s))).first;
    return it->second;
  };

  std::vector<MinedRelation> out;
  for (const auto& [origin, view] : detail::origin_views(pairs)) {
    if (!view.s) continue;  // fragments or phrases whose S pair was filtered
    for (const auto* f : view.frags) {
      for (const auto* p : view.phrases) {
        double score = nn::cosine(mol_vec(f->mol), text_vec(p->text));
        if (inclusive ? score >= theta : score > theta)
          out.push_back({origin, f->mol, p->text, score});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const MinedRelation& a, const MinedRelation& b) {
    if (a.origin != b.origin) return a.origin < b.origin;
    if (a.sub != b.sub) return a.sub < b.sub;
    return a.phrase < b.phrase;
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const MinedRelation& a, const MinedRelation& b) {
                          return a.origin == b.origin && a.sub == b.sub &&
                                 a.phrase == b.phrase;
                        }),
            out.end());
  return out;
}

// Four records per origin-relation family: the whole pair both ways, then
// each relation both ways. Origins absent from `relations` contribute nothing.
inline std::vector<GenerativeRecord> export_generative(
    const std::vector<MinedRelation>& relations,
    const std::vector<data::AlignmentPair>& pairs) {
  std::map<std::string, std::vector<const MinedRelation*>> by_origin;
  for (const auto& r : relations) by_origin[r.origin].push_back(&r);

  auto views = detail::origin_views(pairs);
  std::vector<GenerativeRecord> out;
  for (const auto& [origin, rels] : by_origin) {
    auto vit = views.find(origin);
    if (vit == views.end() || !vit->second.s)
      throw DataError("relations reference origin " + origin + " without an S pair");
    const data::AlignmentPair& s = *vit->second.s;
    out.push_back({"smiles2caption", kPromptSmiles2Caption + s.mol, s.text});
    out.push_back({"caption2smiles", kPromptCaption2Smiles + s.text, s.mol});
    std::vector<const MinedRelation*> sorted = rels;
    std::sort(sorted.begin(), sorted.end(), [](const MinedRelation* a, const MinedRelation* b) {
      if (a->sub != b->sub) return a->sub < b->sub;
      return a->phrase < b->phrase;
    });
    for (const auto* r : sorted) {
      out.push_back({"sub2phrase", kPromptSub2Phrase + r->sub, r->phrase});
      out.push_back({"phrase2sub", kPromptPhrase2Sub + r->phrase, r->sub});
    }
  }
  return out;
}

inline std::string relations_to_jsonl(const std::vector<MinedRelation>& relations) {
  std::string out;
  for (const auto& r : relations) {
    Json j;
    j["origin"] = r.origin;
    j["sub"] = r.sub;
    j["phrase"] = r.phrase;
    j["score"] = r.score;
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline std::string generative_to_jsonl(const std::vector<GenerativeRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    Json j;
    j["task"] = r.task;
    j["prompt"] = r.prompt;
    j["target"] = r.target;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace molbridge::mine
