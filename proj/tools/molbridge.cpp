// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "molbridge/chem/canonical.hpp"
#include "molbridge/chem/smiles.hpp"
#include "molbridge/data/alignment.hpp"
#include "molbridge/eval/retrieval.hpp"
#include "molbridge/frag/fragmenter.hpp"
#include "molbridge/mine/miner.hpp"
#include "molbridge/nn/checkpoint.hpp"
#include "molbridge/nn/trainer.hpp"
#include "molbridge/text/phrases.hpp"
#include "molbridge/util/config.hpp"
#include "molbridge/util/io.hpp"
#include "molbridge/util/log.hpp"

// Exit codes: 0 ok, 1 data error, 2 config or usage error, 3 numerical
// divergence. Every output file is written atomically after all work
// succeeds, so failures never leave partial files behind.

namespace {

using molbridge::Config;
using molbridge::ConfigError;
using molbridge::DataError;
using molbridge::Json;

unsigned default_workers() {
  unsigned n = std::thread::hardware_concurrency();
  return n ? n : 1;
}

// Runs f(0..n-1) on up to `workers` threads into caller-owned slots. Errors
// are collected per index and the lowest-index one wins, so diagnostics do
// not depend on scheduling.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& f) {
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        f(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < std::min<std::size_t>(workers, n); ++w)
    pool.emplace_back(body);
  for (auto& t : pool) t.join();
  for (const std::string& e : errors)
    if (!e.empty()) throw DataError(e);
}

void require_output_dir(const std::string& path) {
  std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent))
    throw ConfigError("output directory does not exist: " + parent.string());
}

std::string checked_scheme(const std::string& scheme) {
  if (scheme != "brics" && scheme != "recap")
    throw ConfigError("scheme must be 'brics' or 'recap', got: " + scheme);
  return scheme;
}

struct JsonlField {
  std::string value;
  int line = 0;
};

std::vector<JsonlField> read_jsonl_field(const std::string& path, const char* key) {
  std::vector<JsonlField> rows;
  molbridge::for_each_jsonl(path, [&](int lineno, const Json& obj) {
    if (!obj.contains(key) || !obj[key].is_string())
      throw DataError(path + ":" + std::to_string(lineno) + ": missing string field '" +
                      std::string(key) + "'");
    rows.push_back({obj[key], lineno});
  });
  return rows;
}

int cmd_fragment(const std::string& input, const std::string& output,
                 const std::string& scheme, unsigned workers) {
  require_output_dir(output);
  const auto& rules = molbridge::frag::builtin_rules(checked_scheme(scheme));
  auto rows = read_jsonl_field(input, "smiles");

  std::vector<std::string> lines(rows.size());
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    try {
      molbridge::chem::Molecule m = molbridge::chem::parse_smiles(rows[i].value);
      molbridge::frag::FragmentationResult res = molbridge::frag::fragment(m, rules);
      Json j;
      j["smiles"] = molbridge::chem::canonical_smiles(m);
      Json frags = Json::array();
      for (const auto& f : res.fragments) frags.push_back(f.smiles);
      j["fragments"] = std::move(frags);
      lines[i] = j.dump();
    } catch (const std::exception& e) {
      throw DataError(input + ":" + std::to_string(rows[i].line) + ": " + e.what());
    }
  });

  std::string out;
  for (const std::string& l : lines) {
    out += l;
    out += '\n';
  }
  molbridge::atomic_write_file(output, out);
  molbridge::log_info("fragment: " + std::to_string(rows.size()) + " molecules -> " + output);
  return 0;
}

int cmd_extract_phrases(const std::string& input, const std::string& output,
                        unsigned workers) {
  require_output_dir(output);
  auto rows = read_jsonl_field(input, "text");

  std::vector<std::string> lines(rows.size());
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    Json j;
    j["text"] = rows[i].value;
    Json phrases = Json::array();
    for (const auto& ph : molbridge::text::extract_phrases(rows[i].value))
      phrases.push_back(ph.text);
    j["phrases"] = std::move(phrases);
    lines[i] = j.dump();
  });

  std::string out;
  for (const std::string& l : lines) {
    out += l;
    out += '\n';
  }
  molbridge::atomic_write_file(output, out);
  molbridge::log_info("extract-phrases: " + std::to_string(rows.size()) + " captions -> " +
                      output);
  return 0;
}

int cmd_augment(const std::string& input, const std::string& output,
                const std::string& scheme) {
  require_output_dir(output);
  auto corpus = molbridge::data::load_corpus(input);
  auto pairs = molbridge::data::augment(corpus,
                                        molbridge::frag::builtin_rules(checked_scheme(scheme)),
                                        molbridge::text::builtin_lexicon());
  molbridge::data::write_pairs(output, pairs);
  return 0;
}

int cmd_train(const std::string& input, const std::string& output, const Config& cfg) {
  require_output_dir(output);
  auto pairs = molbridge::data::read_pairs(input);
  molbridge::nn::TrainConfig tcfg = molbridge::nn::train_config_from(cfg);
  molbridge::nn::Trainer trainer(std::move(pairs), tcfg);
  trainer.train(&std::cout);
  molbridge::nn::save_checkpoint(trainer.encoder(), output);
  molbridge::log_info("train: checkpoint -> " + output);
  return 0;
}

int cmd_mine(const std::string& input, const std::string& checkpoint,
             const std::string& output, const std::string& gen_output, double theta,
             bool exclusive) {
  if (!(theta > -1.0) || theta > 1.0)
    throw ConfigError("theta must lie in (-1, 1], got " + std::to_string(theta));
  require_output_dir(output);
  if (!gen_output.empty()) require_output_dir(gen_output);

  molbridge::nn::DualEncoder enc = molbridge::nn::load_checkpoint(checkpoint);
  auto pairs = molbridge::data::read_pairs(input);
  auto relations = molbridge::mine::mine(enc, pairs, theta, !exclusive);
  molbridge::atomic_write_file(output, molbridge::mine::relations_to_jsonl(relations));
  molbridge::log_info("mine: " + std::to_string(relations.size()) + " relations -> " + output);
  if (!gen_output.empty()) {
    auto records = molbridge::mine::export_generative(relations, pairs);
    molbridge::atomic_write_file(gen_output, molbridge::mine::generative_to_jsonl(records));
    molbridge::log_info("mine: " + std::to_string(records.size()) + " records -> " +
                        gen_output);
  }
  return 0;
}

int cmd_eval(const std::string& input, const std::string& checkpoint,
             const std::string& output) {
  if (!output.empty()) require_output_dir(output);
  molbridge::nn::DualEncoder enc = molbridge::nn::load_checkpoint(checkpoint);
  auto pairs = molbridge::data::read_pairs(input);
  auto [m2t, t2m] = molbridge::eval::evaluate(enc, pairs);
  std::cout << molbridge::eval::reports_to_table(m2t, t2m);
  if (!output.empty())
    molbridge::atomic_write_file(output,
                                 molbridge::eval::reports_to_json(m2t, t2m).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MolBridge: fragment-and-phrase alignment between molecules and text"};
  app.require_subcommand(1);

  std::string input, output, checkpoint, gen_output, config_path;
  std::string scheme = "brics";
  double theta = 0.3;
  bool exclusive = false;
  std::uint64_t seed = 0;
  long long epochs = 0;
  unsigned workers = default_workers();

  auto add_common = [&](CLI::App* sub, bool needs_output) {
    sub->add_option("--input", input, "input file")->required()->check(CLI::ExistingFile);
    auto* out = sub->add_option("--output", output, "output file");
    if (needs_output) out->required();
    sub->add_option("--config", config_path, "key=value config file")
        ->check(CLI::ExistingFile);
    sub->add_option("--workers", workers, "worker threads for per-record stages");
    return sub;
  };

  auto* c_frag = add_common(app.add_subcommand("fragment", "fragment a molecule corpus"), true);
  c_frag->add_option("--scheme", scheme, "cleavage rule set: brics or recap");
  auto* c_phr =
      add_common(app.add_subcommand("extract-phrases", "extract chemical phrases"), true);
  auto* c_aug =
      add_common(app.add_subcommand("augment", "build the alignment pair sets"), true);
  c_aug->add_option("--scheme", scheme, "cleavage rule set: brics or recap");
  auto* c_train = add_common(app.add_subcommand("train", "train the dual encoder"), true);
  c_train->add_option("--seed", seed, "run seed; fixes every stochastic choice");
  c_train->add_option("--epochs", epochs, "epoch count override");
  auto* c_mine =
      add_common(app.add_subcommand("mine", "mine substructure-phrase relations"), true);
  c_mine->add_option("--checkpoint", checkpoint, "trained model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  c_mine->add_option("--theta", theta, "similarity threshold in (-1, 1]");
  c_mine->add_option("--generative-output", gen_output, "generative records file");
  c_mine->add_flag("--exclusive", exclusive, "drop relations scored exactly at theta");
  auto* c_eval =
      add_common(app.add_subcommand("eval", "report cross-modal retrieval metrics"), false);
  c_eval->add_option("--checkpoint", checkpoint, "trained model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Config cfg;
    if (!config_path.empty()) cfg = Config::load(config_path);
    // flags win over config file values
    auto flag_wins_str = [&](const CLI::App* sub, const char* flag, const std::string& v,
                             const char* key, const char* dflt) {
      return sub->count(flag) ? v : cfg.get_string(key, dflt);
    };

    if (*c_frag) {
      unsigned w = c_frag->count("--workers")
                       ? workers
                       : unsigned(cfg.get_int("workers", default_workers()));
      return cmd_fragment(input, output,
                          flag_wins_str(c_frag, "--scheme", scheme, "scheme", "brics"), w);
    }
    if (*c_phr) {
      unsigned w = c_phr->count("--workers")
                       ? workers
                       : unsigned(cfg.get_int("workers", default_workers()));
      return cmd_extract_phrases(input, output, w);
    }
    if (*c_aug)
      return cmd_augment(input, output,
                         flag_wins_str(c_aug, "--scheme", scheme, "scheme", "brics"));
    if (*c_train) {
      if (c_train->count("--seed")) cfg.set("seed", std::to_string(seed));
      if (c_train->count("--epochs")) cfg.set("epochs", std::to_string(epochs));
      return cmd_train(input, output, cfg);
    }
    if (*c_mine) {
      double th = c_mine->count("--theta") ? theta : cfg.get_double("theta", 0.3);
      return cmd_mine(input, checkpoint, output, gen_output, th, exclusive);
    }
    if (*c_eval) return cmd_eval(input, checkpoint, output);
    return 2;
  } catch (const molbridge::nn::DivergenceDetected& e) {
    std::cerr << "molbridge: divergence: " << e.what() << "\n";
    return 3;
  } catch (const molbridge::nn::NumericalOverflow& e) {
    std::cerr << "molbridge: divergence: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "molbridge: config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "molbridge: error: " << e.what() << "\n";
    return 1;
  }
}
