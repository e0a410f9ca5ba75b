// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "molbridge/chem/canonical.hpp"
#include "molbridge/frag/fragmenter.hpp"
#include "molbridge/util/io.hpp"
#include "molbridge/util/text.hpp"

using namespace molbridge;
using frag::builtin_rules;
using frag::fragment;
using frag::FragmentationResult;

namespace {

struct FixtureRow {
  std::string name;
  std::string smiles;
  std::vector<std::string> brics;  // expected canonical fragment sets
  std::vector<std::string> recap;
};

std::vector<std::string> parse_fragment_list(const std::string& field) {
  std::vector<std::string> out;
  if (field == "-") return out;
  for (const std::string& s : split(field, '|')) out.push_back(chem::canonical_smiles(s));
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<FixtureRow>& fixture_rows() {
  static const std::vector<FixtureRow> rows = [] {
    std::vector<FixtureRow> acc;
    std::string text = read_file(std::string(MOLBRIDGE_FIXTURE_DIR) + "/fragmentation.tsv");
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t nl = text.find('\n', start);
      std::string line =
          nl == std::string::npos ? text.substr(start) : text.substr(start, nl - start);
      start = nl == std::string::npos ? text.size() : nl + 1;
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> cols = split(line, '\t');
      REQUIRE(cols.size() == 4);
      acc.push_back({cols[0], cols[1], parse_fragment_list(cols[2]),
                     parse_fragment_list(cols[3])});
    }
    return acc;
  }();
  return rows;
}

std::vector<std::string> fragment_smiles(const FragmentationResult& r) {
  std::vector<std::string> out;
  for (const auto& f : r.fragments) out.push_back(f.smiles);
  return out;  // already sorted by construction
}

}  // namespace

TEST_CASE("fixture corpus: fragment sets match the hand-derived oracle") {
  REQUIRE(fixture_rows().size() >= 20);
  for (const auto& row : fixture_rows()) {
    INFO("molecule: " << row.name << "  " << row.smiles);
    FragmentationResult b = fragment(row.smiles, builtin_rules("brics"));
    FragmentationResult r = fragment(row.smiles, builtin_rules("recap"));
    CHECK(fragment_smiles(b) == row.brics);
    CHECK(fragment_smiles(r) == row.recap);
  }
}

TEST_CASE("fixture corpus: broader rule-type coverage for the 16-class table") {
  std::set<std::string> brics_types;
  std::set<std::string> recap_types;
  for (const auto& row : fixture_rows()) {
    for (const auto& c : fragment(row.smiles, builtin_rules("brics")).cuts)
      brics_types.insert(c.rule->id);
    for (const auto& c : fragment(row.smiles, builtin_rules("recap")).cuts)
      recap_types.insert(c.rule->id);
  }
  CHECK(brics_types.size() >= recap_types.size());
  // every one of the 11 recap bond types is exercised by the fixtures
  CHECK(recap_types.size() == builtin_rules("recap").size());
}

TEST_CASE("atom maps partition the molecule and count occurrences") {
  // biphenyl: one unique ring fragment, two occurrences
  FragmentationResult b = fragment("c1ccc(-c2ccccc2)cc1", builtin_rules("brics"));
  REQUIRE(b.fragments.size() == 1);
  CHECK(b.fragments[0].atom_maps.size() == 2);

  // triethylamine: ethyl appears three times
  FragmentationResult t = fragment("CCN(CC)CC", builtin_rules("recap"));
  std::map<std::string, std::size_t> occ;
  for (const auto& f : t.fragments) occ[f.smiles] = f.atom_maps.size();
  REQUIRE(occ.size() == 2);
  std::size_t mx = 0;
  for (const auto& [smi, k] : occ) mx = std::max(mx, k);
  CHECK(mx == 3);

  // all occurrences together cover every atom exactly once
  for (const auto& row : fixture_rows()) {
    chem::Molecule m = chem::parse_smiles(row.smiles);
    for (const char* scheme : {"brics", "recap"}) {
      FragmentationResult r = fragment(m, builtin_rules(scheme));
      if (r.fragments.empty()) continue;
      std::vector<int> seen(std::size_t(m.atom_count()), 0);
      for (const auto& f : r.fragments)
        for (const auto& occurrence : f.atom_maps)
          for (int a : occurrence) ++seen[std::size_t(a)];
      INFO("molecule: " << row.name << " scheme: " << scheme);
      CHECK(std::count(seen.begin(), seen.end(), 1) == m.atom_count());
    }
  }
}

TEST_CASE("cut bookkeeping") {
  CHECK(fragment("CCOC(C)=O", builtin_rules("brics")).cuts.size() == 2);
  CHECK(fragment("CCOC(C)=O", builtin_rules("recap")).cuts.size() == 1);
  CHECK(fragment("CCOC(C)=O", builtin_rules("recap")).cuts[0].rule->id == "ester");
  CHECK(fragment("CNC(=O)NC", builtin_rules("recap")).cuts[0].rule->id == "urea");
  CHECK(fragment("C", builtin_rules("brics")).cuts.empty());
  CHECK(fragment("C", builtin_rules("brics")).fragments.empty());
}

TEST_CASE("earliest table entry decides the label on shared bonds") {
  // anilide N-aryl bond: the acylated-N environment fires before the amine one
  FragmentationResult r = fragment("CC(=O)Nc1ccccc1", builtin_rules("brics"));
  bool found = false;
  for (const auto& c : r.cuts)
    if (c.rule->id == "2-16") found = true;
  CHECK(found);
  // the raw match list still contains the later rule for the same bond
  chem::Molecule m = chem::parse_smiles("CC(=O)Nc1ccccc1");
  auto all = frag::find_cuts(m, builtin_rules("brics"));
  std::map<int, int> per_bond;
  for (const auto& c : all) ++per_bond[c.bond];
  int mx = 0;
  for (const auto& [bond, k] : per_bond) mx = std::max(mx, k);
  CHECK(mx >= 2);
}

TEST_CASE("ring bonds never cleave") {
  // cyclic ester (lactone) and cyclic amide (lactam) stay whole
  CHECK(fragment("O=C1CCCCO1", builtin_rules("brics")).fragments.empty());
  CHECK(fragment("O=C1CCCCO1", builtin_rules("recap")).fragments.empty());
  CHECK(fragment("O=C1CCCCN1", builtin_rules("recap")).fragments.empty());
}

TEST_CASE("size gate") {
  std::string big(101, 'C');
  CHECK_THROWS_AS(fragment(big, builtin_rules("brics")), chem::TooLarge);
  std::string ok(100, 'C');
  CHECK(fragment(ok, builtin_rules("brics")).fragments.empty());
}

TEST_CASE("rule table parsing rejects malformed input") {
  using frag::parse_rules;
  CHECK_THROWS_AS(parse_rules("only\ttwo\n", "t"), DataError);
  CHECK_THROWS_AS(parse_rules("x\tbrics\t[1:C]\t[2:C]\tquadruple\n", "t"), DataError);
  CHECK_THROWS_AS(parse_rules("x\tbrics\t[1:C\t[2:C]\tsingle\n", "t"), DataError);
  CHECK_THROWS_AS(
      parse_rules("x\tbrics\t[1:C]\t[2:C]\tsingle\nx\tbrics\t[1:C]\t[2:C]\tsingle\n", "t"),
      DataError);
  CHECK_THROWS_AS(parse_rules("", "t"), DataError);
  // error message carries source and line number
  try {
    parse_rules("a\tbrics\t[1:C]\t[2:C]\tsingle\nbad line\n", "rules.tsv");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("rules.tsv:2") != std::string::npos);
  }
}

TEST_CASE("pattern matching primitives") {
  using frag::match_pattern;
  using frag::parse_pattern;
  chem::Molecule m = chem::parse_smiles("CS(=O)(=O)NC");  // C0 S1 O2 O3 N4 C5
  frag::Pattern sulfonyl = parse_pattern("[12:S;D4](=O)(=O)");
  CHECK(match_pattern(m, sulfonyl, 1, 4));
  CHECK_FALSE(match_pattern(m, sulfonyl, 0, 1));
  frag::Pattern amine_n = parse_pattern("[3:N;D3;!R;sat;+0]");
  CHECK_FALSE(match_pattern(m, amine_n, 4, 1));  // degree 2, not 3

  chem::Molecule e = chem::parse_smiles("CCOC(C)=O");
  frag::Pattern ether_o = parse_pattern("[5:O;D2;!R;sat;+0](!-[C;D3](=O))");
  // anchored on the ester oxygen, partner = alkyl C: acyl neighbor remains, so no
  CHECK_FALSE(match_pattern(e, ether_o, 2, 1));
  // partner = acyl C: the acyl carbon is excluded from the negated scan
  CHECK(match_pattern(e, ether_o, 2, 3));

  CHECK_THROWS_AS(parse_pattern("C"), DataError);           // anchor must be bracketed
  CHECK_THROWS_AS(parse_pattern("[1:C](=O"), DataError);    // unterminated branch
  CHECK_THROWS_AS(parse_pattern("[1:Xx]"), DataError);      // unknown element
  CHECK_THROWS_AS(parse_pattern("[1:C;D9x]"), DataError);   // bad constraint
  CHECK_THROWS_AS(parse_pattern("[1:C][2:C]"), DataError);  // trailing garbage
}

TEST_CASE("shipped rule files stay in sync with the builtin tables") {
  for (const char* scheme : {"brics", "recap"}) {
    std::string path = std::string(MOLBRIDGE_DATA_DIR) + "/rules/" + scheme + ".rules";
    CHECK(read_file(path) == frag::builtin_rules_text(scheme));
    CHECK(frag::load_rules(path).size() == builtin_rules(scheme).size());
  }
  CHECK(builtin_rules("brics").size() == 52);
  CHECK(builtin_rules("recap").size() == 11);
}
