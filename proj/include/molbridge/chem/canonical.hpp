// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0
//
// Canonical atom ranking and canonical SMILES output.
//
// Ranking is iterative neighborhood refinement: atoms start from a local
// invariant tuple and are re-partitioned by sorted neighbor signatures until
// the partition is stable. Remaining ties are broken by bumping one atom of
// the first tied class and re-refining; every member of the tied class is
// tried (bounded) and the lexicographically smallest serialization wins, so
// the result does not depend on input atom order.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "molbridge/chem/molecule.hpp"
#include "molbridge/chem/smiles.hpp"

namespace molbridge::chem {

namespace detail {

// Local invariant: everything about an atom that does not depend on ranks.
using AtomInvariant = std::tuple<int, int, int, int, int, int, int>;

inline AtomInvariant atom_invariant(const Molecule& m, int i) {
  const Atom& a = m.atoms[std::size_t(i)];
  return AtomInvariant{int(a.element), a.aromatic ? 1 : 0, int(a.charge),
                       int(a.h_count), m.degree(i), int(a.isotope),
                       int(a.stereo)};
}

inline std::vector<int> dense_rank(const std::vector<std::vector<std::int64_t>>& keys) {
  std::size_t n = keys.size();
  std::vector<int> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = int(i);
  std::sort(idx.begin(), idx.end(), [&](int x, int y) {
    return keys[std::size_t(x)] < keys[std::size_t(y)];
  });
  std::vector<int> ranks(n, 0);
  int r = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0 && keys[std::size_t(idx[k])] != keys[std::size_t(idx[k - 1])]) ++r;
    ranks[std::size_t(idx[k])] = r;
  }
  return ranks;
}

// Refine ranks until the partition stops splitting.
inline void refine_ranks(const Molecule& m, std::vector<int>& ranks) {
  std::size_t n = m.atoms.size();
  int classes = 1 + (n ? *std::max_element(ranks.begin(), ranks.end()) : -1);
  while (true) {
    std::vector<std::vector<std::int64_t>> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
      keys[i].push_back(ranks[i]);
      std::vector<std::int64_t> nbr;
      for (int bi : m.bonds_of(int(i))) {
        const Bond& b = m.bonds[std::size_t(bi)];
        nbr.push_back(std::int64_t(b.order) * 1000000 +
                      ranks[std::size_t(b.other(int(i)))]);
      }
      std::sort(nbr.begin(), nbr.end());
      keys[i].insert(keys[i].end(), nbr.begin(), nbr.end());
    }
    std::vector<int> next = dense_rank(keys);
    int next_classes = 1 + (n ? *std::max_element(next.begin(), next.end()) : -1);
    ranks = std::move(next);
    if (next_classes == classes) break;
    classes = next_classes;
  }
}

inline std::vector<int> initial_ranks(const Molecule& m) {
  std::size_t n = m.atoms.size();
  std::vector<std::vector<std::int64_t>> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    AtomInvariant inv = atom_invariant(m, int(i));
    keys[i] = {std::get<0>(inv), std::get<1>(inv), std::get<2>(inv),
               std::get<3>(inv), std::get<4>(inv), std::get<5>(inv),
               std::get<6>(inv)};
  }
  return dense_rank(keys);
}

// Enumerate tie-break choices, keeping the smallest serialization. The
// branch budget keeps pathological symmetry from exploding; past the budget
// one deterministic choice is taken per class.
inline void canonical_explore(const Molecule& m, std::vector<int> ranks,
                              int& budget, std::string& best) {
  refine_ranks(m, ranks);
  std::size_t n = m.atoms.size();
  int classes = 1 + *std::max_element(ranks.begin(), ranks.end());
  if (std::size_t(classes) == n) {
    int start = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (ranks[i] == 0) start = int(i);
    std::string s = write_smiles_ordered(m, start, ranks);
    if (best.empty() || s < best) best = s;
    return;
  }
  // first tied class
  int tied_rank = -1;
  std::vector<int> members;
  for (int r = 0; r < classes && tied_rank < 0; ++r) {
    members.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (ranks[i] == r) members.push_back(int(i));
    if (members.size() > 1) tied_rank = r;
  }
  bool branch = budget >= int(members.size());
  if (branch) budget /= int(members.size());
  for (int pick : members) {
    std::vector<int> bumped(n);
    for (std::size_t i = 0; i < n; ++i) bumped[i] = ranks[i] * 2 + 1;
    bumped[std::size_t(pick)] -= 1;
    canonical_explore(m, std::move(bumped), budget, best);
    if (!branch) break;
  }
}

}  // namespace detail

// Refined atom ranks; ties remain for symmetry-equivalent atoms.
inline std::vector<int> canonical_ranks(const Molecule& m) {
  std::vector<int> ranks = detail::initial_ranks(m);
  detail::refine_ranks(m, ranks);
  return ranks;
}

inline std::string canonical_smiles(const Molecule& m) {
  if (m.atoms.empty()) return "";
  std::string best;
  int budget = 4096;
  detail::canonical_explore(m, detail::initial_ranks(m), budget, best);
  return best;
}

inline std::string canonical_smiles(const std::string& smiles) {
  return canonical_smiles(parse_smiles(smiles));
}

// Scaffold: iteratively strip degree<=1 atoms until only rings and the
// linkers between them remain. Acyclic molecules strip to nothing and map to
// the empty key. Hydrogen counts on the kept atoms are recomputed so the key
// does not remember the pruned substituents.
inline std::string scaffold_key(const Molecule& m) {
  std::size_t n = m.atoms.size();
  std::vector<bool> alive(n, true);
  std::vector<int> deg(n, 0);
  for (std::size_t i = 0; i < n; ++i) deg[i] = m.degree(int(i));
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i] || deg[i] > 1) continue;
      alive[i] = false;
      changed = true;
      for (int nb : m.neighbors_of(int(i)))
        if (alive[std::size_t(nb)]) --deg[std::size_t(nb)];
      deg[i] = 0;
    }
  }
  Molecule sub;
  std::vector<int> remap(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    remap[i] = int(sub.atoms.size());
    sub.atoms.push_back(m.atoms[i]);
  }
  if (sub.atoms.empty()) return "";
  for (const Bond& b : m.bonds) {
    if (!alive[std::size_t(b.a)] || !alive[std::size_t(b.b)]) continue;
    sub.bonds.push_back(Bond{remap[std::size_t(b.a)], remap[std::size_t(b.b)], b.order});
  }
  for (std::size_t i = 0; i < sub.atoms.size(); ++i) {
    Atom& a = sub.atoms[i];
    if (a.charge == 0) a.h_count = implicit_hydrogens(sub, int(i));
  }
  return canonical_smiles(sub);
}

inline std::string scaffold_key(const std::string& smiles) {
  return scaffold_key(parse_smiles(smiles));
}

}  // namespace molbridge::chem
