// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0
//
// Rule-driven single-bond fragmentation.
//
// A rule names two environment patterns and a bond order. A bond is cleavable
// when some rule matches it in either orientation; ring bonds never cleave.
// All cleavable bonds are cut simultaneously; each cut inserts one attachment
// point per side, labeled with that side's environment number and bonded with
// the original order. When several rules hit one bond the earliest rule in
// table order decides the labels.

#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "molbridge/chem/canonical.hpp"
#include "molbridge/chem/molecule.hpp"
#include "molbridge/frag/pattern.hpp"
#include "molbridge/util/io.hpp"
#include "molbridge/util/text.hpp"

namespace molbridge::frag {

inline constexpr int kMaxFragmentationAtoms = 100;

struct CleavageRule {
  std::string id;
  std::string scheme;
  Pattern left;
  Pattern right;
  chem::BondOrder order = chem::BondOrder::Single;
};

inline std::vector<CleavageRule> parse_rules(const std::string& text,
                                             const std::string& source) {
  std::vector<CleavageRule> rules;
  std::size_t lineno = 0;
  std::size_t start = 0;
  std::map<std::string, bool> seen_ids;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    std::string line = nl == std::string::npos ? text.substr(start)
                                               : text.substr(start, nl - start);
    start = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;

    std::vector<std::string> cols = split(line, '\t');
    auto fail = [&](const std::string& msg) {
      throw DataError(source + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (cols.size() != 5) fail("expected 5 tab-separated columns, got " +
                               std::to_string(cols.size()));
    CleavageRule r;
    r.id = trim(cols[0]);
    r.scheme = trim(cols[1]);
    if (r.id.empty()) fail("empty rule id");
    if (seen_ids.count(r.id)) fail("duplicate rule id '" + r.id + "'");
    seen_ids[r.id] = true;
    try {
      r.left = parse_pattern(trim(cols[2]));
      r.right = parse_pattern(trim(cols[3]));
    } catch (const DataError& e) {
      fail(e.what());
    }
    std::string ord = trim(cols[4]);
    if (ord == "single") {
      r.order = chem::BondOrder::Single;
    } else if (ord == "double") {
      r.order = chem::BondOrder::Double;
    } else if (ord == "triple") {
      r.order = chem::BondOrder::Triple;
    } else if (ord == "aromatic") {
      r.order = chem::BondOrder::Aromatic;
    } else {
      fail("unknown bond order '" + ord + "'");
    }
    rules.push_back(std::move(r));
  }
  if (rules.empty()) throw DataError(source + ": no rules found");
  return rules;
}

inline std::vector<CleavageRule> load_rules(const std::string& path) {
  return parse_rules(read_file(path), path);
}

// Embedded copies of the shipped rule tables. The data files are the source
// of truth for the CLI; these keep the library usable without an install
// prefix and are checked against the files by the test suite.
inline const std::string& builtin_rules_text(const std::string& scheme) {
  static const std::string brics =
      "# Retrosynthetically interesting bond cleavage table.\n"
      "# Columns: id, scheme, left environment, right environment, bond order.\n"
      "# Environment labels follow the 16-class numbering; ring bonds never cleave.\n"
      "1-3\tbrics\t[1:C;D3](=O)\t[3:O;D2;sat]\tsingle\n"
      "1-5\tbrics\t[1:C;D3](=O)\t[5:N;D2+;sat;+0](!~[^C,S])(!-[S;D4](=O)(=O))(!-@[C;R](=O))\tsingle\n"
      "1-10\tbrics\t[1:C;D3](=O)\t[10:N;R](-@[C;R](=O))(-@[C,N,O,S])\tsingle\n"
      "2-14\tbrics\t[2:N;!R;sat;+0](-[C;D3](=O))\t[14:c](:[c,n,o,s])(:[n,o,s])\tsingle\n"
      "2-16\tbrics\t[2:N;!R;sat;+0](-[C;D3](=O))\t[16:c](:c)(:c)\tsingle\n"
      "3-4\tbrics\t[3:O;D2;sat]\t[4:C;D2+;!R;sat](-[C,c])\tsingle\n"
      "3-13\tbrics\t[3:O;D2;sat]\t[13:C](-@[C,N,O,S])(-@[N,O,S])\tsingle\n"
      "3-14\tbrics\t[3:O;D2;sat]\t[14:c](:[c,n,o,s])(:[n,o,s])\tsingle\n"
      "3-15\tbrics\t[3:O;D2;sat]\t[15:C](-@C)(-@C)\tsingle\n"
      "3-16\tbrics\t[3:O;D2;sat]\t[16:c](:c)(:c)\tsingle\n"
      "4-5\tbrics\t[4:C;D2+;!R;sat](-[C,c])\t[5:N;D2+;sat;+0](!~[^C,S])(!-[S;D4](=O)(=O))(!-@[C;R](=O))\tsingle\n"
      "4-11\tbrics\t[4:C;D2+;!R;sat](-[C,c])\t[11:S;D2;sat]\tsingle\n"
      "5-12\tbrics\t[5:N;D2+;sat;+0](!~[^C,S])(!-[S;D4](=O)(=O))(!-@[C;R](=O))\t[12:S;D4](=O)(=O)\tsingle\n"
      "5-13\tbrics\t[5:N;D2+;sat;+0](!~[^C,S])(!-[S;D4](=O)(=O))(!-@[C;R](=O))\t[13:C](-@[C,N,O,S])(-@[N,O,S])\tsingle\n"
      "5-14\tbrics\t[5:N;D2+;sat;+0](!~[^C,S])(!-[S;D4](=O)(=O))(!-@[C;R](=O))\t[14:c](:[c,n,o,s])(:[n,o,s])\tsingle\n"
      "5-15\tbrics\t[5:N;D2+;sat;+0](!~[^C,S])(!-[S;D4](=O)(=O))(!-@[C;R](=O))\t[15:C](-@C)(-@C)\tsingle\n"
      "5-16\tbrics\t[5:N;D2+;sat;+0](!~[^C,S])(!-[S;D4](=O)(=O))(!-@[C;R](=O))\t[16:c](:c)(:c)\tsingle\n"
      "6-13\tbrics\t[6:C;D3;!R](=O)\t[13:C](-@[C,N,O,S])(-@[N,O,S])\tsingle\n"
      "6-14\tbrics\t[6:C;D3;!R](=O)\t[14:c](:[c,n,o,s])(:[n,o,s])\tsingle\n"
      "6-15\tbrics\t[6:C;D3;!R](=O)\t[15:C](-@C)(-@C)\tsingle\n"
      "6-16\tbrics\t[6:C;D3;!R](=O)\t[16:c](:c)(:c)\tsingle\n"
      "7-7\tbrics\t[7:C;D2+](-[C,c])\t[7:C;D2+](-[C,c])\tdouble\n"
      "8-9\tbrics\t[8:C;!R;D2+;sat]\t[9:n;+0](:[c,n,o,s])(:[c,n,o,s])\tsingle\n"
      "8-10\tbrics\t[8:C;!R;D2+;sat]\t[10:N;R](-@[C;R](=O))(-@[C,N,O,S])\tsingle\n"
      "8-13\tbrics\t[8:C;!R;D2+;sat]\t[13:C](-@[C,N,O,S])(-@[N,O,S])\tsingle\n"
      "8-14\tbrics\t[8:C;!R;D2+;sat]\t[14:c](:[c,n,o,s])(:[n,o,s])\tsingle\n"
      "8-15\tbrics\t[8:C;!R;D2+;sat]\t[15:C](-@C)(-@C)\tsingle\n"
      "8-16\tbrics\t[8:C;!R;D2+;sat]\t[16:c](:c)(:c)\tsingle\n"
      "9-13\tbrics\t[9:n;+0](:[c,n,o,s])(:[c,n,o,s])\t[13:C](-@[C,N,O,S])(-@[N,O,S])\tsingle\n"
      "9-14\tbrics\t[9:n;+0](:[c,n,o,s])(:[c,n,o,s])\t[14:c](:[c,n,o,s])(:[n,o,s])\tsingle\n"
      "9-15\tbrics\t[9:n;+0](:[c,n,o,s])(:[c,n,o,s])\t[15:C](-@C)(-@C)\tsingle\n"
      "9-16\tbrics\t[9:n;+0](:[c,n,o,s])(:[c,n,o,s])\t[16:c](:c)(:c)\tsingle\n"
      "10-13\tbrics\t[10:N;R](-@[C;R](=O))(-@[C,N,O,S])\t[13:C](-@[C,N,O,S])(-@[N,O,S])\tsingle\n"
      "10-14\tbrics\t[10:N;R](-@[C;R](=O))(-@[C,N,O,S])\t[14:c](:[c,n,o,s])(:[n,o,s])\tsingle\n"
      "10-15\tbrics\t[10:N;R](-@[C;R](=O))(-@[C,N,O,S])\t[15:C](-@C)(-@C)\tsingle\n"
      "10-16\tbrics\t[10:N;R](-@[C;R](=O))(-@[C,N,O,S])\t[16:c](:c)(:c)\tsingle\n"
      "11-13\tbrics\t[11:S;D2;sat]\t[13:C](-@[C,N,O,S])(-@[N,O,S])\tsingle\n"
      "11-14\tbrics\t[11:S;D2;sat]\t[14:c](:[c,n,o,s])(:[n,o,s])\tsingle\n"
      "11-15\tbrics\t[11:S;D2;sat]\t[15:C](-@C)(-@C)\tsingle\n"
      "11-16\tbrics\t[11:S;D2;sat]\t[16:c](:c)(:c)\tsingle\n"
      "12-13\tbrics\t[12:S;D4](=O)(=O)\t[13:C](-@[C,N,O,S])(-@[N,O,S])\tsingle\n"
      "12-14\tbrics\t[12:S;D4](=O)(=O)\t[14:c](:[c,n,o,s])(:[n,o,s])\tsingle\n"
      "12-15\tbrics\t[12:S;D4](=O)(=O)\t[15:C](-@C)(-@C)\tsingle\n"
      "12-16\tbrics\t[12:S;D4](=O)(=O)\t[16:c](:c)(:c)\tsingle\n"
      "13-14\tbrics\t[13:C](-@[C,N,O,S])(-@[N,O,S])\t[14:c](:[c,n,o,s])(:[n,o,s])\tsingle\n"
      "13-15\tbrics\t[13:C](-@[C,N,O,S])(-@[N,O,S])\t[15:C](-@C)(-@C)\tsingle\n"
      "13-16\tbrics\t[13:C](-@[C,N,O,S])(-@[N,O,S])\t[16:c](:c)(:c)\tsingle\n"
      "14-14\tbrics\t[14:c](:[c,n,o,s])(:[n,o,s])\t[14:c](:[c,n,o,s])(:[n,o,s])\tsingle\n"
      "14-15\tbrics\t[14:c](:[c,n,o,s])(:[n,o,s])\t[15:C](-@C)(-@C)\tsingle\n"
      "14-16\tbrics\t[14:c](:[c,n,o,s])(:[n,o,s])\t[16:c](:c)(:c)\tsingle\n"
      "15-16\tbrics\t[15:C](-@C)(-@C)\t[16:c](:c)(:c)\tsingle\n"
      "16-16\tbrics\t[16:c](:c)(:c)\t[16:c](:c)(:c)\tsingle\n";
  static const std::string recap =
      "# Retrosynthetic combinatorial analysis table.\n"
      "# Columns: id, scheme, left environment, right environment, bond order.\n"
      "# Both attachment points carry the rule number. Order matters: urea\n"
      "# outranks amide and ester outranks ether on shared bonds.\n"
      "urea\trecap\t[4:N;sat;+0]\t[4:C;D3;!R](=O)(-N)\tsingle\n"
      "amide\trecap\t[1:C;D3;!R](=O)\t[1:N;+0;sat]\tsingle\n"
      "ester\trecap\t[2:C;D3;!R](=O)\t[2:O;D2;sat]\tsingle\n"
      "sulfonamide\trecap\t[11:N;sat;+0]\t[11:S;D4](=O)(=O)\tsingle\n"
      "amine\trecap\t[3:N;D3;!R;sat;+0](!-[C;D3](=O))(!-[S;D4](=O)(=O))\t[3:C,c;D2+]\tsingle\n"
      "ether\trecap\t[5:O;D2;!R;sat;+0](!-[C;D3](=O))\t[5:C,c;D2+]\tsingle\n"
      "olefin\trecap\t[6:C;D2+;!R]\t[6:C;D2+;!R]\tdouble\n"
      "quaternary-n\trecap\t[7:N;D4;+;sat]\t[7:C,c]\tsingle\n"
      "aromatic-n-to-c\trecap\t[8:n]\t[8:C;!R]\tsingle\n"
      "lactam-n-to-c\trecap\t[9:N;R](-@[C;R](=O))\t[9:C;!R]\tsingle\n"
      "aryl-aryl\trecap\t[10:c]\t[10:c]\tsingle\n";
  static const std::string empty;
  if (scheme == "brics") return brics;
  if (scheme == "recap") return recap;
  return empty;
}

inline const std::vector<CleavageRule>& builtin_rules(const std::string& scheme) {
  static const std::vector<CleavageRule> brics =
      parse_rules(builtin_rules_text("brics"), "<builtin brics>");
  static const std::vector<CleavageRule> recap =
      parse_rules(builtin_rules_text("recap"), "<builtin recap>");
  static const std::vector<CleavageRule> none;
  if (scheme == "brics") return brics;
  if (scheme == "recap") return recap;
  return none;
}

struct BondCut {
  int bond = -1;
  const CleavageRule* rule = nullptr;
  int left_atom = -1;   // endpoint the rule's left environment anchored on
  int right_atom = -1;
};

// Every (bond, rule) match, rule-major within each bond so the first entry
// per bond is the one fragment() applies.
inline std::vector<BondCut> find_cuts(const chem::Molecule& m,
                                      const std::vector<CleavageRule>& rules) {
  std::vector<BondCut> cuts;
  for (std::size_t bi = 0; bi < m.bonds.size(); ++bi) {
    if (m.bond_in_ring(int(bi))) continue;
    const chem::Bond& b = m.bonds[bi];
    for (const CleavageRule& r : rules) {
      if (b.order != r.order) continue;
      if (match_pattern(m, r.left, b.a, b.b) && match_pattern(m, r.right, b.b, b.a)) {
        cuts.push_back({int(bi), &r, b.a, b.b});
      } else if (match_pattern(m, r.left, b.b, b.a) &&
                 match_pattern(m, r.right, b.a, b.b)) {
        cuts.push_back({int(bi), &r, b.b, b.a});
      }
    }
  }
  return cuts;
}

struct Fragment {
  std::string smiles;                          // canonical, attachment points included
  std::vector<std::vector<int>> atom_maps;     // parent atom indices per occurrence
};

struct FragmentationResult {
  std::vector<Fragment> fragments;  // unique, sorted by SMILES
  std::vector<BondCut> cuts;        // one entry per cleaved bond
};

inline FragmentationResult fragment(const chem::Molecule& m,
                                    const std::vector<CleavageRule>& rules) {
  if (m.atom_count() > kMaxFragmentationAtoms)
    throw chem::TooLarge("molecule exceeds " + std::to_string(kMaxFragmentationAtoms) +
                         " atoms");
  FragmentationResult result;
  std::vector<BondCut> all = find_cuts(m, rules);
  std::vector<char> bond_cut(m.bonds.size(), 0);
  for (const BondCut& c : all) {
    if (bond_cut[std::size_t(c.bond)]) continue;  // earliest rule keeps the bond
    bond_cut[std::size_t(c.bond)] = 1;
    result.cuts.push_back(c);
  }
  if (result.cuts.empty()) return result;

  // connected components over the uncut bonds
  std::size_t n = m.atoms.size();
  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (comp[seed] >= 0) continue;
    std::vector<int> stack{int(seed)};
    comp[seed] = ncomp;
    while (!stack.empty()) {
      int a = stack.back();
      stack.pop_back();
      for (int bi : m.bonds_of(a)) {
        if (bond_cut[std::size_t(bi)]) continue;
        int nb = m.bonds[std::size_t(bi)].other(a);
        if (comp[std::size_t(nb)] < 0) {
          comp[std::size_t(nb)] = ncomp;
          stack.push_back(nb);
        }
      }
    }
    ++ncomp;
  }

  std::map<std::string, Fragment> by_smiles;
  std::vector<std::pair<std::string, std::vector<int>>> pieces;
  for (int c = 0; c < ncomp; ++c) {
    chem::Molecule sub;
    std::vector<int> remap(n, -1);
    std::vector<int> atoms;
    for (std::size_t i = 0; i < n; ++i) {
      if (comp[i] != c) continue;
      remap[i] = int(sub.atoms.size());
      sub.atoms.push_back(m.atoms[i]);
      atoms.push_back(int(i));
    }
    for (const chem::Bond& b : m.bonds) {
      if (comp[std::size_t(b.a)] != c || comp[std::size_t(b.b)] != c) continue;
      int bi = m.find_bond(b.a, b.b);
      if (bond_cut[std::size_t(bi)]) continue;
      sub.bonds.push_back({remap[std::size_t(b.a)], remap[std::size_t(b.b)], b.order});
    }
    // attachment points for the cut bonds touching this component
    for (const BondCut& cut : result.cuts) {
      const chem::Bond& b = m.bonds[std::size_t(cut.bond)];
      for (int end : {b.a, b.b}) {
        if (comp[std::size_t(end)] != c) continue;
        int label = end == cut.left_atom ? cut.rule->left.label : cut.rule->right.label;
        chem::Atom dummy;
        dummy.element = 0;
        dummy.isotope = std::int16_t(label);
        int di = int(sub.atoms.size());
        sub.atoms.push_back(dummy);
        sub.bonds.push_back({remap[std::size_t(end)], di, b.order});
      }
    }
    sub.invalidate_caches();
    pieces.emplace_back(chem::canonical_smiles(sub), std::move(atoms));
  }

  for (auto& [smi, atoms] : pieces) {
    Fragment& f = by_smiles[smi];
    f.smiles = smi;
    f.atom_maps.push_back(std::move(atoms));
  }
  for (auto& [smi, f] : by_smiles) result.fragments.push_back(std::move(f));
  return result;
}

inline FragmentationResult fragment(const std::string& smiles,
                                    const std::vector<CleavageRule>& rules) {
  return fragment(chem::parse_smiles(smiles), rules);
}

}  // namespace molbridge::frag
