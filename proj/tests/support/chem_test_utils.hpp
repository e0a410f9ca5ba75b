// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0
//
// Test-only helpers: a small graph-isomorphism oracle and a randomized
// rewriter that re-serializes a molecule from a shuffled atom order. The
// oracle is independent of canonicalization so the two can check each other.

#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "molbridge/chem/molecule.hpp"
#include "molbridge/chem/smiles.hpp"
#include "molbridge/util/rng.hpp"

namespace molbridge::testing {

inline bool atoms_compatible(const chem::Atom& x, const chem::Atom& y) {
  return x.element == y.element && x.aromatic == y.aromatic &&
         x.charge == y.charge && x.h_count == y.h_count &&
         x.isotope == y.isotope && x.stereo == y.stereo;
}

// Backtracking isomorphism check. Exponential in the worst case but fine at
// test-fixture sizes; atom invariants prune almost everything.
inline bool same_molecule(const chem::Molecule& a, const chem::Molecule& b) {
  std::size_t n = a.atoms.size();
  if (n != b.atoms.size() || a.bonds.size() != b.bonds.size()) return false;
  std::vector<int> assign(n, -1);
  std::vector<bool> used(n, false);

  auto extend = [&](auto&& self, std::size_t i) -> bool {
    if (i == n) return true;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      if (!atoms_compatible(a.atoms[i], b.atoms[j])) continue;
      if (a.degree(int(i)) != b.degree(int(j))) continue;
      bool ok = true;
      for (int bi : a.bonds_of(int(i))) {
        const chem::Bond& ab = a.bonds[std::size_t(bi)];
        int nb = ab.other(int(i));
        int mapped = assign[std::size_t(nb)];
        if (mapped < 0) continue;  // neighbor not assigned yet
        int bj = b.find_bond(int(j), mapped);
        if (bj < 0 || b.bonds[std::size_t(bj)].order != ab.order) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      assign[i] = int(j);
      used[j] = true;
      if (self(self, i + 1)) return true;
      assign[i] = -1;
      used[j] = false;
    }
    return false;
  };
  return extend(extend, 0);
}

inline bool same_smiles_graph(const std::string& x, const std::string& y) {
  return same_molecule(chem::parse_smiles(x), chem::parse_smiles(y));
}

// Re-serialize from a random start atom with a random priority order. The
// result is a different string for the same graph; canonicalization must map
// all of them back to one form.
inline std::string permuted_rewrite(const chem::Molecule& m, Rng& rng) {
  std::vector<int> key(m.atoms.size());
  std::iota(key.begin(), key.end(), 0);
  rng.shuffle(key);
  int start = int(rng.bounded(m.atoms.size()));
  return chem::write_smiles_ordered(m, start, key);
}

inline std::string permuted_rewrite(const std::string& smiles, Rng& rng) {
  return permuted_rewrite(chem::parse_smiles(smiles), rng);
}

}  // namespace molbridge::testing
