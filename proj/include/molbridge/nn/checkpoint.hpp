// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "molbridge/nn/encoder.hpp"
#include "molbridge/util/io.hpp"

// Model checkpoints are one JSON document: a versioned header, the encoder
// configuration, both vocabularies, and every named tensor with its shape.
// Keys serialize in sorted order, so identical models produce identical bytes.

namespace molbridge::nn {

inline constexpr const char* kCheckpointFormat = "molbridge-checkpoint";
inline constexpr int kCheckpointVersion = 1;

inline std::string checkpoint_to_json(const DualEncoder& enc) {
  nlohmann::json doc;
  doc["format"] = kCheckpointFormat;
  doc["version"] = kCheckpointVersion;
  doc["config"] = {{"d", enc.cfg.d},
                   {"max_len", enc.cfg.max_len},
                   {"ffn_hidden", enc.cfg.ffn_hidden}};
  doc["mol_vocab"] = enc.mol_tok.id_to_token;
  doc["text_vocab"] = enc.text_tok.id_to_token;
  nlohmann::json tensors;
  for (const auto& [name, mat] : enc.params)
    tensors[name] = {{"rows", mat.rows}, {"cols", mat.cols}, {"data", mat.data}};
  doc["params"] = tensors;
  return doc.dump();
}

inline void save_checkpoint(const DualEncoder& enc, const std::string& path) {
  atomic_write_file(path, checkpoint_to_json(enc) + "\n");
}

inline DualEncoder checkpoint_from_json(const std::string& text, const std::string& where) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw DataError(where + ": not valid JSON");
  auto fail = [&](const std::string& msg) -> DataError {
    return DataError(where + ": " + msg);
  };
  try {
    if (!doc.is_object() || doc.value("format", std::string()) != kCheckpointFormat)
      throw fail("missing checkpoint header");
    if (doc.value("version", -1) != kCheckpointVersion)
      throw fail("unsupported checkpoint version");
    if (!doc.contains("config") || !doc.contains("mol_vocab") ||
        !doc.contains("text_vocab") || !doc.contains("params"))
      throw fail("incomplete checkpoint");

    DualEncoder enc;
    const auto& c = doc["config"];
    if (!c.contains("d") || !c.contains("max_len") || !c.contains("ffn_hidden"))
      throw fail("incomplete config block");
    enc.cfg.d = c["d"].get<std::size_t>();
    enc.cfg.max_len = c["max_len"].get<std::size_t>();
    enc.cfg.ffn_hidden = c["ffn_hidden"].get<std::size_t>();

    auto rebuild_tok = [&](const char* key, const std::string& modality) {
      Tokenizer tok;
      tok.modality = modality;
      tok.max_len = enc.cfg.max_len;
      tok.id_to_token = doc[key].get<std::vector<std::string>>();
      if (tok.id_to_token.size() < 3 || tok.id_to_token[0] != "<bos>" ||
          tok.id_to_token[1] != "<pad>" || tok.id_to_token[2] != "<unk>")
        throw fail(std::string(key) + " lacks the reserved tokens");
      for (std::size_t i = 0; i < tok.id_to_token.size(); ++i)
        tok.vocab[tok.id_to_token[i]] = int(i);
      return tok;
    };
    enc.mol_tok = rebuild_tok("mol_vocab", "molecule");
    enc.text_tok = rebuild_tok("text_vocab", "text");

    for (const auto& [name, t] : doc["params"].items()) {
      if (!t.contains("rows") || !t.contains("cols") || !t.contains("data"))
        throw fail("tensor " + name + " is incomplete");
      Mat m(t["rows"].get<std::size_t>(), t["cols"].get<std::size_t>());
      std::vector<double> data = t["data"].get<std::vector<double>>();
      if (data.size() != m.size())
        throw fail("tensor " + name + " has " + std::to_string(data.size()) +
                   " values, expected " + std::to_string(m.size()));
      m.data = std::move(data);
      enc.params[name] = std::move(m);
    }
    for (const char* required :
         {"mol.embed", "text.embed", "cls.w", "cls.b", "log_inv_temp"})
      if (!enc.params.count(required)) throw fail(std::string("missing tensor ") + required);
    return enc;
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("malformed value: ") + e.what());
  }
}

inline DualEncoder load_checkpoint(const std::string& path) {
  return checkpoint_from_json(read_file(path), path);
}

}  // namespace molbridge::nn
