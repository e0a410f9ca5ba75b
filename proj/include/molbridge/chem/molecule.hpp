// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace molbridge::chem {

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

enum class Stereo : std::uint8_t { None = 0, AntiClockwise = 1, Clockwise = 2 };  // @ / @@

// Element 0 is the wildcard attachment atom "*"; fragment boundaries are the
// only place it appears.
struct Atom {
  std::uint8_t element = 6;   // atomic number, 0 for wildcard
  bool aromatic = false;
  std::int8_t charge = 0;
  std::int16_t isotope = 0;   // 0 = unspecified; doubles as the attachment label on "*"
  std::int8_t h_count = 0;    // stored explicitly once parsing resolves implicit H
  Stereo stereo = Stereo::None;
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;

  int other(int atom) const { return atom == a ? b : a; }
};

enum class ParseErrorKind {
  EmptyInput,
  UnknownElement,
  UnbalancedRingClosure,
  DanglingBond,
  UnsupportedConstruct,
  InputTooLong,
};

class ParseError : public std::runtime_error {
public:
  ParseError(ParseErrorKind kind, std::size_t offset, const std::string& what)
      : std::runtime_error(what + " (offset " + std::to_string(offset) + ")"),
        kind_(kind),
        offset_(offset) {}

  ParseErrorKind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

private:
  ParseErrorKind kind_;
  std::size_t offset_;
};

struct TooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Molecule {
public:
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;

  int atom_count() const { return int(atoms.size()); }

  const std::vector<int>& neighbors_of(int atom) const {
    ensure_adjacency();
    return adj_[std::size_t(atom)];
  }
  const std::vector<int>& bonds_of(int atom) const {
    ensure_adjacency();
    return abonds_[std::size_t(atom)];
  }

  int degree(int atom) const { return int(neighbors_of(atom).size()); }

  int find_bond(int a, int b) const {
    for (int bi : bonds_of(a))
      if (bonds[std::size_t(bi)].other(a) == b) return bi;
    return -1;
  }

  // Ring membership via bridge detection: a bond lies in a ring iff it is not
  // a bridge of the graph.
  const std::vector<bool>& ring_bonds() const {
    ensure_adjacency();
    if (ring_bonds_.size() != bonds.size()) compute_bridges();
    return ring_bonds_;
  }

  bool bond_in_ring(int bond_index) const { return ring_bonds()[std::size_t(bond_index)]; }

  bool atom_in_ring(int atom) const {
    const auto& rb = ring_bonds();
    for (int bi : bonds_of(atom))
      if (rb[std::size_t(bi)]) return true;
    return false;
  }

  // Sum of bond orders with aromatic counted as one sigma bond.
  int bond_order_sum(int atom) const {
    int sum = 0;
    for (int bi : bonds_of(atom)) {
      switch (bonds[std::size_t(bi)].order) {
        case BondOrder::Single:
        case BondOrder::Aromatic: sum += 1; break;
        case BondOrder::Double: sum += 2; break;
        case BondOrder::Triple: sum += 3; break;
      }
    }
    return sum;
  }

  void invalidate_caches() {
    adj_.clear();
    abonds_.clear();
    ring_bonds_.clear();
  }

private:
  void ensure_adjacency() const {
    if (adj_.size() == atoms.size() && abonds_.size() == atoms.size()) return;
    adj_.assign(atoms.size(), {});
    abonds_.assign(atoms.size(), {});
    for (std::size_t i = 0; i < bonds.size(); ++i) {
      adj_[std::size_t(bonds[i].a)].push_back(bonds[i].b);
      adj_[std::size_t(bonds[i].b)].push_back(bonds[i].a);
      abonds_[std::size_t(bonds[i].a)].push_back(int(i));
      abonds_[std::size_t(bonds[i].b)].push_back(int(i));
    }
  }

  void compute_bridges() const {
    std::size_t n = atoms.size();
    ring_bonds_.assign(bonds.size(), true);
    std::vector<int> disc(n, -1), low(n, 0);
    int timer = 0;
    // Iterative DFS; (atom, parent bond, neighbor cursor).
    for (std::size_t root = 0; root < n; ++root) {
      if (disc[root] != -1) continue;
      struct Frame { int atom; int pbond; std::size_t cursor; };
      std::vector<Frame> stack;
      stack.push_back({int(root), -1, 0});
      disc[root] = low[root] = timer++;
      while (!stack.empty()) {
        Frame& f = stack.back();
        const auto& bs = abonds_[std::size_t(f.atom)];
        if (f.cursor < bs.size()) {
          int bi = bs[f.cursor++];
          if (bi == f.pbond) continue;
          int to = bonds[std::size_t(bi)].other(f.atom);
          if (disc[std::size_t(to)] == -1) {
            disc[std::size_t(to)] = low[std::size_t(to)] = timer++;
            stack.push_back({to, bi, 0});
          } else {
            low[std::size_t(f.atom)] = std::min(low[std::size_t(f.atom)], disc[std::size_t(to)]);
          }
        } else {
          int bi = f.pbond;
          int child = f.atom;
          stack.pop_back();
          if (!stack.empty()) {
            int parent = stack.back().atom;
            low[std::size_t(parent)] = std::min(low[std::size_t(parent)], low[std::size_t(child)]);
            if (low[std::size_t(child)] > disc[std::size_t(parent)])
              ring_bonds_[std::size_t(bi)] = false;  // bridge
          }
        }
      }
    }
  }

  mutable std::vector<std::vector<int>> adj_;
  mutable std::vector<std::vector<int>> abonds_;
  mutable std::vector<bool> ring_bonds_;
};

// Periodic table, indexed by atomic number. Enough for bracket atoms; the
// organic subset is what bare symbols may use.
inline const std::array<std::string_view, 119>& element_symbols() {
  static const std::array<std::string_view, 119> table = {
      "*",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al",
      "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co",
      "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb",
      "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs",
      "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm",
      "Yb", "Lu", "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
      "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk",
      "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg",
      "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};
  return table;
}

inline int element_number(std::string_view symbol) {
  const auto& table = element_symbols();
  for (std::size_t i = 0; i < table.size(); ++i)
    if (table[i] == symbol) return int(i);
  return -1;
}

inline bool organic_subset(int element) {
  switch (element) {
    case 5: case 6: case 7: case 8: case 9: case 15: case 16: case 17: case 35: case 53:
      return true;
    default:
      return false;
  }
}

// Elements the aromatic (lowercase) form is accepted for.
inline bool aromatic_capable(int element) {
  switch (element) {
    case 5: case 6: case 7: case 8: case 15: case 16: case 33: case 34:
      return true;
    default:
      return false;
  }
}

// Allowed valences for implicit-hydrogen resolution on bare organic-subset atoms.
inline const int* default_valences(int element, int& count) {
  static const int vB[] = {3}, vC[] = {4}, vN[] = {3, 5}, vO[] = {2}, vP[] = {3, 5},
                   vS[] = {2, 4, 6}, vHal[] = {1};
  switch (element) {
    case 5: count = 1; return vB;
    case 6: count = 1; return vC;
    case 7: count = 2; return vN;
    case 8: count = 1; return vO;
    case 15: count = 2; return vP;
    case 16: count = 3; return vS;
    case 9: case 17: case 35: case 53: count = 1; return vHal;
    default: count = 0; return nullptr;
  }
}

// Implicit hydrogen count for a bare (unbracketed) atom given its bonds.
// Aromatic atoms surrender one slot to the ring pi system; that reproduces the
// usual lowercase conventions (benzene cH1, pyridine nH0, pyrrole needs [nH]).
inline int implicit_hydrogens(const Molecule& m, int atom) {
  const Atom& a = m.atoms[std::size_t(atom)];
  int count = 0;
  const int* valences = default_valences(a.element, count);
  if (!valences || a.charge != 0) return 0;
  int sum = m.bond_order_sum(atom);
  int need = sum + (a.aromatic ? 1 : 0);
  for (int i = 0; i < count; ++i)
    if (valences[i] >= need) return valences[i] - need;
  return 0;
}

}  // namespace molbridge::chem
