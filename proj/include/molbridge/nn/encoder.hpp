// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "molbridge/nn/tape.hpp"
#include "molbridge/util/rng.hpp"
#include "molbridge/util/text.hpp"

// Dual encoder over two token streams. Each modality owns embeddings, one
// single-head attention block and a two-layer feed-forward, both with
// residual connections; the sequence representation is the hidden state at
// the BOS position. The temperature (stored as a log inverse) and the
// three-way relation classifier are shared between modalities.

namespace molbridge::nn {

struct SequenceTooLong : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr int kBosId = 0;
constexpr int kPadId = 1;
constexpr int kUnkId = 2;

constexpr double kTauMin = 0.01;
constexpr double kTauMax = 1.0;

// --- tokenization -----------------------------------------------------------

// SMILES surface scanner: bracket atoms and two-digit ring references are one
// token, Cl and Br stay joined, everything else is a single character. The
// scanner never validates; unknown tokens map to UNK at encode time.
inline std::vector<std::string> mol_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == '[') {
      std::size_t j = s.find(']', i);
      if (j == std::string::npos) {
        out.push_back(s.substr(i));
        break;
      }
      out.push_back(s.substr(i, j - i + 1));
      i = j + 1;
    } else if (c == '%' && i + 2 < s.size()) {
      out.push_back(s.substr(i, 3));
      i += 3;
    } else if ((c == 'C' && i + 1 < s.size() && s[i + 1] == 'l') ||
               (c == 'B' && i + 1 < s.size() && s[i + 1] == 'r')) {
      out.push_back(s.substr(i, 2));
      i += 2;
    } else {
      out.push_back(std::string(1, c));
      ++i;
    }
  }
  return out;
}

inline std::vector<std::string> text_tokens(const std::string& s) {
  std::vector<std::string> out;
  for (const WordToken& t : tokenize_words(s)) out.push_back(t.text);
  return out;
}

struct Tokenizer {
  std::string modality;  // "molecule" or "text"
  std::map<std::string, int> vocab;
  std::vector<std::string> id_to_token;
  std::size_t max_len = 256;

  static Tokenizer build(const std::string& modality,
                         const std::vector<std::string>& corpus, std::size_t max_len = 256) {
    Tokenizer tok;
    tok.modality = modality;
    tok.max_len = max_len;
    std::set<std::string> seen;
    for (const std::string& s : corpus)
      for (const std::string& t : modality == "molecule" ? mol_tokens(s) : text_tokens(s))
        seen.insert(t);
    tok.id_to_token = {"<bos>", "<pad>", "<unk>"};
    for (const std::string& t : seen) tok.id_to_token.push_back(t);
    for (std::size_t i = 0; i < tok.id_to_token.size(); ++i)
      tok.vocab[tok.id_to_token[i]] = int(i);
    return tok;
  }

  std::vector<int> encode(const std::string& input) const {
    std::vector<int> ids = {kBosId};
    for (const std::string& t :
         modality == "molecule" ? mol_tokens(input) : text_tokens(input)) {
      if (ids.size() >= max_len) break;
      auto it = vocab.find(t);
      ids.push_back(it == vocab.end() ? kUnkId : it->second);
    }
    return ids;
  }

  std::string decode(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) {
      if (id == kBosId || id == kPadId) continue;
      if (!out.empty() && modality == "text") out += ' ';
      out += id_to_token[std::size_t(id)];
    }
    return out;
  }

  std::size_t size() const { return id_to_token.size(); }
};

// --- parameters -------------------------------------------------------------

struct EncoderConfig {
  std::size_t d = 64;
  std::size_t max_len = 256;
  std::size_t ffn_hidden = 0;  // 0 means 2*d

  std::size_t hidden() const { return ffn_hidden ? ffn_hidden : 2 * d; }
};

// Named tensors in a sorted map: iteration order is the serialization order,
// the optimizer slot order and the gradcheck order, all deterministic.
using ParamStore = std::map<std::string, Mat>;

inline const std::vector<std::string>& modality_tensor_names() {
  static const std::vector<std::string> names = {
      "embed", "pos", "wq", "wk", "wv", "wo", "ffn_w1", "ffn_b1", "ffn_w2", "ffn_b2"};
  return names;
}

struct DualEncoder {
  EncoderConfig cfg;
  Tokenizer mol_tok, text_tok;
  ParamStore params;

  static DualEncoder init(const EncoderConfig& cfg, Tokenizer mol_tok, Tokenizer text_tok,
                          std::uint64_t seed) {
    DualEncoder enc;
    enc.cfg = cfg;
    enc.mol_tok = std::move(mol_tok);
    enc.text_tok = std::move(text_tok);
    Rng rng(seed);
    auto randn = [&](std::size_t r, std::size_t c, double scale) {
      Mat m(r, c);
      for (double& v : m.data) v = scale * rng.normal();
      return m;
    };
    // Embedding tables get a small fixed scale. Weight matrices are scaled by
    // 1/sqrt(fan_in): there is no layer norm in the block, so anything much
    // smaller mutes the attention value path and token content never reaches
    // the readout row.
    std::size_t d = cfg.d, h = cfg.hidden();
    auto fan_in = [&](std::size_t rows, std::size_t cols) {
      return randn(rows, cols, 1.0 / std::sqrt(double(rows)));
    };
    auto fill = [&](const std::string& prefix, std::size_t vocab) {
      enc.params[prefix + ".embed"] = randn(vocab, d, 0.02);
      enc.params[prefix + ".pos"] = randn(cfg.max_len, d, 0.02);
      enc.params[prefix + ".wq"] = fan_in(d, d);
      enc.params[prefix + ".wk"] = fan_in(d, d);
      enc.params[prefix + ".wv"] = fan_in(d, d);
      enc.params[prefix + ".wo"] = fan_in(d, d);
      enc.params[prefix + ".ffn_w1"] = fan_in(d, h);
      enc.params[prefix + ".ffn_b1"] = Mat(1, h);
      enc.params[prefix + ".ffn_w2"] = fan_in(h, d);
      enc.params[prefix + ".ffn_b2"] = Mat(1, d);
    };
    fill("mol", enc.mol_tok.size());
    fill("text", enc.text_tok.size());
    enc.params["cls.w"] = fan_in(2 * d, 3);
    enc.params["cls.b"] = Mat(1, 3);
    Mat lit(1, 1);
    lit.at(0, 0) = -std::log(0.07);  // tau starts at 0.07
    enc.params["log_inv_temp"] = lit;
    return enc;
  }

  double tau() const {
    double t = std::exp(-params.at("log_inv_temp").at(0, 0));
    return t < kTauMin ? kTauMin : (t > kTauMax ? kTauMax : t);
  }
};

// --- tape-side forward ------------------------------------------------------

// Leaf handles for every parameter tensor, created once per tape.
inline std::map<std::string, int> param_leaves(Tape& tape, const ParamStore& params) {
  std::map<std::string, int> ids;
  for (const auto& [name, mat] : params) ids[name] = tape.leaf(mat);
  return ids;
}

// Encodes one id sequence with the tensors of `prefix`; returns a 1 x d node.
inline int encode_node(Tape& t, const std::map<std::string, int>& leaves,
                       const std::string& prefix, const std::vector<int>& ids,
                       const EncoderConfig& cfg) {
  if (ids.empty() || ids[0] != kBosId)
    throw GradError("encode: sequence must start with BOS");
  if (ids.size() > cfg.max_len)
    throw SequenceTooLong("encode: sequence of " + std::to_string(ids.size()) +
                          " tokens exceeds " + std::to_string(cfg.max_len));
  auto L = [&](const std::string& n) { return leaves.at(prefix + "." + n); };
  int x = t.add(t.gather_rows(L("embed"), ids), t.slice_rows(L("pos"), ids.size()));
  int q = t.matmul(x, L("wq"));
  int k = t.matmul(x, L("wk"));
  int v = t.matmul(x, L("wv"));
  int att = t.softmax_rows(t.scale(t.matmul_nt(q, k), 1.0 / std::sqrt(double(cfg.d))));
  int h = t.add(x, t.matmul(t.matmul(att, v), L("wo")));
  int f = t.add_rowvec(
      t.matmul(t.tanh_(t.add_rowvec(t.matmul(h, L("ffn_w1")), L("ffn_b1"))), L("ffn_w2")),
      L("ffn_b2"));
  return t.select_row(t.add(h, f), 0);
}

// 1 x 1 node holding 1/tau with the clamp applied to tau.
inline int inv_tau_node(Tape& t, const std::map<std::string, int>& leaves) {
  return t.reciprocal(t.clamp(t.exp_(t.scale(leaves.at("log_inv_temp"), -1.0)), kTauMin,
                              kTauMax));
}

// --- plain (gradient-free) helpers ------------------------------------------

inline Mat encode_vector(const DualEncoder& enc, const std::string& prefix,
                         const std::vector<int>& ids) {
  Tape t;
  auto leaves = param_leaves(t, enc.params);
  return t.val(encode_node(t, leaves, prefix, ids, enc.cfg));
}

inline double cosine(const Mat& u, const Mat& v) {
  double uu = 0, vv = 0, uv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uu += u.data[i] * u.data[i];
    vv += v.data[i] * v.data[i];
    uv += u.data[i] * v.data[i];
  }
  if (uu == 0.0 || vv == 0.0) throw ZeroVector("cosine: zero vector");
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

// sigma = exp(cos / tau); strictly positive, monotone in the cosine.
inline double similarity(const Mat& mol_vec, const Mat& text_vec, double tau) {
  double t = tau < kTauMin ? kTauMin : (tau > kTauMax ? kTauMax : tau);
  return std::exp(cosine(mol_vec, text_vec) / t);
}

}  // namespace molbridge::nn
