// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "molbridge/chem/canonical.hpp"
#include "molbridge/chem/smiles.hpp"
#include "support/chem_test_utils.hpp"

using namespace molbridge;
using chem::canonical_ranks;
using chem::canonical_smiles;
using chem::Molecule;
using chem::parse_smiles;
using chem::scaffold_key;

namespace {

const std::vector<std::string>& fixture_smiles() {
  static const std::vector<std::string> list = {
      "C",
      "CCO",
      "CC(C)O",
      "CC(C)(C)C",
      "CCN(CC)CC",
      "c1ccccc1",
      "Cc1ccccc1",
      "CCc1ccccc1",
      "c1ccncc1",
      "c1cc[nH]c1",
      "c1ccoc1",
      "c1ccsc1",
      "CC(=O)OCC",
      "CC(=O)NC",
      "CC(=O)Nc1ccccc1",
      "NC(=O)N",
      "CS(=O)(=O)N",
      "COc1ccccc1",
      "C=Cc1ccccc1",
      "ClCCBr",
      "FC(F)(F)c1ccccc1",
      "C1CC1",
      "C1CCCCC1",
      "C1CCNC1",
      "CN1CCCC1=O",
      "c1ccc2ccccc2c1",
      "c1ccc(-c2ccccc2)cc1",
      "C1CCC2(CC1)CCCC2",
      "OC1OC(CO)C(O)C(O)C1O",
      "N[C@@H](C)C(=O)O",
      "[O-]c1ccccc1",
      "[NH4+]",
      "[13CH3]O",
      "[1*]CC",
      "CC(=O)[1*]",
      "C/C=C/C",
      "O=C(O)c1ccccc1",
      "Nc1ccc(O)cc1",
      "CC(C)Cc1ccc(C(C)C(=O)O)cc1",
      "CN1C=NC2=C1C(=O)N(C)C(=O)N2C",
  };
  return list;
}

}  // namespace

TEST_CASE("canonical form is idempotent") {
  for (const auto& s : fixture_smiles()) {
    INFO("input: " << s);
    std::string c1 = canonical_smiles(s);
    REQUIRE_FALSE(c1.empty());
    CHECK(canonical_smiles(c1) == c1);
  }
}

TEST_CASE("canonical form is invariant under atom reordering") {
  Rng rng(77001);
  for (const auto& s : fixture_smiles()) {
    Molecule m = parse_smiles(s);
    std::string want = canonical_smiles(m);
    for (int t = 0; t < 25; ++t) {
      std::string alt = testing::permuted_rewrite(m, rng);
      INFO("input: " << s << "  rewrite: " << alt);
      CHECK(canonical_smiles(alt) == want);
    }
  }
}

TEST_CASE("canonical form preserves the graph") {
  for (const auto& s : fixture_smiles()) {
    INFO("input: " << s);
    Molecule m = parse_smiles(s);
    CHECK(testing::same_molecule(m, parse_smiles(canonical_smiles(m))));
  }
}

TEST_CASE("equivalent spellings map to one canonical string") {
  auto eq = [](const std::string& a, const std::string& b) {
    INFO(a << " vs " << b);
    CHECK(canonical_smiles(a) == canonical_smiles(b));
  };
  eq("OCC", "CCO");
  eq("CN(C)C", "N(C)(C)C");
  eq("Cc1ccccc1", "c1ccccc1C");
  eq("C(F)(F)F", "FC(F)F");
  eq("CC(=O)OCC", "O(CC)C(C)=O");
  eq("c1ccc(-c2ccccc2)cc1", "c1ccc(cc1)-c1ccccc1");
}

TEST_CASE("distinct molecules keep distinct canonical strings") {
  std::set<std::string> seen;
  for (const auto& s : fixture_smiles()) seen.insert(canonical_smiles(s));
  CHECK(seen.size() == fixture_smiles().size());
}

TEST_CASE("single atom forms") {
  CHECK(canonical_smiles("C") == "C");
  CHECK(canonical_smiles("O") == "O");
  CHECK(canonical_smiles("[NH4+]") == "[NH4+]");
}

TEST_CASE("refined ranks expose symmetry classes") {
  std::vector<int> benzene = canonical_ranks(parse_smiles("c1ccccc1"));
  CHECK(std::set<int>(benzene.begin(), benzene.end()).size() == 1);

  std::vector<int> ethanol = canonical_ranks(parse_smiles("CCO"));
  CHECK(std::set<int>(ethanol.begin(), ethanol.end()).size() == 3);

  // neopentane: four equivalent methyls around a distinct center
  std::vector<int> neo = canonical_ranks(parse_smiles("CC(C)(C)C"));
  std::set<int> classes(neo.begin(), neo.end());
  CHECK(classes.size() == 2);
}

TEST_CASE("scaffold strips substituents down to ring systems") {
  std::string benzene = canonical_smiles("c1ccccc1");
  CHECK(scaffold_key("c1ccccc1") == benzene);
  CHECK(scaffold_key("Cc1ccccc1") == benzene);
  CHECK(scaffold_key("CCc1ccccc1") == benzene);
  CHECK(scaffold_key("CC(=O)Nc1ccccc1") == benzene);
  CHECK(scaffold_key("[O-]c1ccccc1") == benzene);

  // acyclic molecules have no scaffold
  CHECK(scaffold_key("C") == "");
  CHECK(scaffold_key("CCO") == "");
  CHECK(scaffold_key("CC(=O)NC") == "");

  // ring plus linker survives intact
  std::string biphenyl = canonical_smiles("c1ccc(-c2ccccc2)cc1");
  CHECK(scaffold_key("c1ccc(-c2ccccc2)cc1") == biphenyl);
  CHECK(scaffold_key("Cc1ccc(-c2ccccc2)cc1") == biphenyl);

  // N-alkyl lactams share the bare ring scaffold
  CHECK(scaffold_key("CN1CCCC1=O") == scaffold_key("CCN1CCCC1=O"));
  CHECK(scaffold_key("CN1CCCC1=O") == canonical_smiles("C1CCNC1"));
}
