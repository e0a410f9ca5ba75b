// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molbridge/chem/molecule.hpp"

namespace molbridge::chem {

inline constexpr std::size_t kMaxSmilesLength = 256;

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

struct RingSlot {
  int atom = -1;
  int order = 0;  // 0 = unspecified
  std::size_t offset = 0;
};

// Bond symbol codes used while scanning: 0 none, 1/2/3 orders, 4 aromatic.
inline int bond_symbol(char c) {
  switch (c) {
    case '-': return 1;
    case '=': return 2;
    case '#': return 3;
    case ':': return 4;
    case '/': case '\\': return 1;  // directional marks are accepted as single bonds
    default: return 0;
  }
}

}  // namespace detail

// Parser for the supported SMILES subset: bare organic-subset atoms, bracket
// atoms (isotope, @/@@, H count, charge in [-4,+4]), branches, ring closures
// including %nn, and aromatic lowercase forms. Wildcards must be bracketed;
// dots, reaction arrows and anything else off the subset raise typed errors
// that carry the byte offset.
inline Molecule parse_smiles(std::string_view s) {
  using detail::RingSlot;

  if (s.empty()) throw ParseError(ParseErrorKind::EmptyInput, 0, "empty SMILES input");
  if (s.size() > kMaxSmilesLength)
    throw ParseError(ParseErrorKind::InputTooLong, kMaxSmilesLength,
                     "SMILES input longer than " + std::to_string(kMaxSmilesLength) + " bytes");

  Molecule mol;
  std::vector<bool> bare;  // atoms whose H count is resolved after bonding is known
  std::vector<int> branch_stack;
  std::map<int, RingSlot> open_rings;
  int prev = -1;
  int pending_bond = 0;
  std::size_t pending_offset = 0;

  auto add_bond = [&](int a, int b, int symbol, std::size_t offset) {
    if (a == b)
      throw ParseError(ParseErrorKind::DanglingBond, offset, "bond from atom to itself");
    if (mol.find_bond(a, b) != -1)
      throw ParseError(ParseErrorKind::DanglingBond, offset, "duplicate bond between atoms");
    BondOrder order;
    bool both_aromatic =
        mol.atoms[std::size_t(a)].aromatic && mol.atoms[std::size_t(b)].aromatic;
    if (symbol == 0) {
      order = both_aromatic ? BondOrder::Aromatic : BondOrder::Single;
    } else if (symbol == 4) {
      if (!both_aromatic)
        throw ParseError(ParseErrorKind::UnsupportedConstruct, offset,
                         "aromatic bond between non-aromatic atoms");
      order = BondOrder::Aromatic;
    } else {
      order = BondOrder(symbol);
    }
    mol.bonds.push_back({a, b, order});
    mol.invalidate_caches();
  };

  auto attach_atom = [&](Atom atom, bool is_bare, std::size_t offset) {
    mol.atoms.push_back(atom);
    mol.invalidate_caches();
    bare.push_back(is_bare);
    int idx = int(mol.atoms.size()) - 1;
    if (prev >= 0) {
      add_bond(prev, idx, pending_bond, offset);
    } else if (pending_bond != 0) {
      throw ParseError(ParseErrorKind::DanglingBond, pending_offset,
                       "bond symbol with no preceding atom");
    }
    pending_bond = 0;
    prev = idx;
  };

  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c)))
      throw ParseError(ParseErrorKind::UnsupportedConstruct, i, "whitespace inside SMILES");

    if (c == '.')
      throw ParseError(ParseErrorKind::UnsupportedConstruct, i,
                       "disconnected components are not supported");
    if (c == '>')
      throw ParseError(ParseErrorKind::UnsupportedConstruct, i, "reaction SMILES not supported");
    if (c == '*')
      throw ParseError(ParseErrorKind::UnknownElement, i,
                       "wildcard atom must be written in brackets");

    if (int sym = detail::bond_symbol(c); sym != 0) {
      if (prev < 0)
        throw ParseError(ParseErrorKind::DanglingBond, i, "bond symbol with no preceding atom");
      if (pending_bond != 0)
        throw ParseError(ParseErrorKind::DanglingBond, i, "two bond symbols in a row");
      pending_bond = sym;
      pending_offset = i;
      ++i;
      continue;
    }

    if (c == '(') {
      if (prev < 0)
        throw ParseError(ParseErrorKind::DanglingBond, i, "branch with no preceding atom");
      if (pending_bond != 0)
        throw ParseError(ParseErrorKind::DanglingBond, pending_offset,
                         "bond symbol before branch open");
      branch_stack.push_back(prev);
      ++i;
      continue;
    }
    if (c == ')') {
      if (pending_bond != 0)
        throw ParseError(ParseErrorKind::DanglingBond, pending_offset,
                         "bond symbol before branch close");
      if (branch_stack.empty())
        throw ParseError(ParseErrorKind::DanglingBond, i, "unmatched branch close");
      prev = branch_stack.back();
      branch_stack.pop_back();
      ++i;
      continue;
    }

    if (detail::is_digit(c) || c == '%') {
      if (prev < 0)
        throw ParseError(ParseErrorKind::UnbalancedRingClosure, i,
                         "ring closure with no preceding atom");
      int number = 0;
      if (c == '%') {
        if (i + 2 >= s.size() || !detail::is_digit(s[i + 1]) || !detail::is_digit(s[i + 2]))
          throw ParseError(ParseErrorKind::UnbalancedRingClosure, i,
                           "% ring closure needs two digits");
        number = (s[i + 1] - '0') * 10 + (s[i + 2] - '0');
        i += 3;
      } else {
        number = c - '0';
        ++i;
      }
      auto it = open_rings.find(number);
      if (it == open_rings.end()) {
        open_rings[number] = {prev, pending_bond, i - 1};
      } else {
        RingSlot slot = it->second;
        open_rings.erase(it);
        int symbol = 0;
        if (slot.order != 0 && pending_bond != 0 && slot.order != pending_bond)
          throw ParseError(ParseErrorKind::DanglingBond, i - 1,
                           "ring closure bond order mismatch");
        symbol = slot.order != 0 ? slot.order : pending_bond;
        add_bond(slot.atom, prev, symbol, i - 1);
      }
      pending_bond = 0;
      continue;
    }

    if (c == '[') {
      std::size_t start = i;
      std::size_t j = i + 1;
      Atom atom;
      // isotope
      int isotope = 0;
      bool has_isotope = false;
      while (j < s.size() && detail::is_digit(s[j])) {
        has_isotope = true;
        isotope = isotope * 10 + (s[j] - '0');
        if (isotope > 999)
          throw ParseError(ParseErrorKind::UnsupportedConstruct, j, "isotope out of range");
        ++j;
      }
      if (has_isotope) atom.isotope = std::int16_t(isotope);
      if (j >= s.size())
        throw ParseError(ParseErrorKind::UnsupportedConstruct, start, "unterminated bracket atom");
      // element, or wildcard
      if (s[j] == '*') {
        atom.element = 0;
        ++j;
      } else if (std::isupper(static_cast<unsigned char>(s[j]))) {
        // two-letter symbol wins when it names a real element
        std::string sym(1, s[j]);
        if (j + 1 < s.size() && std::islower(static_cast<unsigned char>(s[j + 1])) &&
            element_number(sym + s[j + 1]) > 0)
          sym += s[j + 1];
        int num = element_number(sym);
        if (num <= 0)
          throw ParseError(ParseErrorKind::UnknownElement, j, "unknown element in bracket");
        atom.element = std::uint8_t(num);
        j += sym.size();
      } else if (std::islower(static_cast<unsigned char>(s[j]))) {
        // aromatic bracket atom: c n o p s b se as
        std::string sym(1, s[j]);
        std::size_t consumed = 1;
        if ((s[j] == 's' || s[j] == 'a') && j + 1 < s.size() &&
            (s[j + 1] == 'e' || s[j + 1] == 's')) {
          std::string two{char(std::toupper(static_cast<unsigned char>(s[j]))), s[j + 1]};
          int num2 = element_number(two);
          if (num2 > 0 && aromatic_capable(num2)) {
            atom.element = std::uint8_t(num2);
            atom.aromatic = true;
            consumed = 2;
          }
        }
        if (consumed == 1) {
          int num = element_number(
              std::string(1, char(std::toupper(static_cast<unsigned char>(s[j])))));
          if (num <= 0 || !aromatic_capable(num))
            throw ParseError(ParseErrorKind::UnknownElement, j,
                             "unknown aromatic element in bracket");
          atom.element = std::uint8_t(num);
          atom.aromatic = true;
        }
        j += consumed;
      } else {
        throw ParseError(ParseErrorKind::UnknownElement, j, "expected element symbol");
      }
      // stereo
      if (j < s.size() && s[j] == '@') {
        if (j + 1 < s.size() && s[j + 1] == '@') {
          atom.stereo = Stereo::Clockwise;
          j += 2;
        } else {
          atom.stereo = Stereo::AntiClockwise;
          ++j;
        }
      }
      // explicit hydrogens
      if (j < s.size() && s[j] == 'H') {
        ++j;
        int h = 1;
        if (j < s.size() && detail::is_digit(s[j])) {
          h = 0;
          while (j < s.size() && detail::is_digit(s[j])) h = h * 10 + (s[j++] - '0');
        }
        if (h > 9)
          throw ParseError(ParseErrorKind::UnsupportedConstruct, j, "hydrogen count out of range");
        atom.h_count = std::int8_t(h);
      }
      // charge
      if (j < s.size() && (s[j] == '+' || s[j] == '-')) {
        char sign = s[j];
        int magnitude = 1;
        ++j;
        if (j < s.size() && detail::is_digit(s[j])) {
          magnitude = 0;
          while (j < s.size() && detail::is_digit(s[j])) magnitude = magnitude * 10 + (s[j++] - '0');
        } else {
          while (j < s.size() && s[j] == sign) {
            ++magnitude;
            ++j;
          }
        }
        int charge = sign == '+' ? magnitude : -magnitude;
        if (charge < -4 || charge > 4)
          throw ParseError(ParseErrorKind::UnsupportedConstruct, j, "charge out of range [-4,+4]");
        atom.charge = std::int8_t(charge);
      }
      // atom class: accepted, not stored
      if (j < s.size() && s[j] == ':') {
        ++j;
        if (j >= s.size() || !detail::is_digit(s[j]))
          throw ParseError(ParseErrorKind::UnsupportedConstruct, j, "atom class needs digits");
        while (j < s.size() && detail::is_digit(s[j])) ++j;
      }
      if (j >= s.size() || s[j] != ']')
        throw ParseError(ParseErrorKind::UnsupportedConstruct, j, "unterminated bracket atom");
      if (atom.element == 0 && atom.aromatic)
        throw ParseError(ParseErrorKind::UnsupportedConstruct, start, "aromatic wildcard");
      attach_atom(atom, /*is_bare=*/false, start);
      i = j + 1;
      continue;
    }

    // bare atom (organic subset, aromatic lowercase included)
    if (std::isalpha(static_cast<unsigned char>(c))) {
      Atom atom;
      std::size_t consumed = 1;
      if (std::isupper(static_cast<unsigned char>(c))) {
        std::string sym(1, c);
        if ((c == 'C' && i + 1 < s.size() && s[i + 1] == 'l') ||
            (c == 'B' && i + 1 < s.size() && s[i + 1] == 'r')) {
          sym += s[i + 1];
          consumed = 2;
        }
        int num = element_number(sym);
        if (num <= 0 || !organic_subset(num))
          throw ParseError(ParseErrorKind::UnknownElement, i,
                           "element not in the organic subset: " + sym);
        atom.element = std::uint8_t(num);
      } else {
        int num = element_number(std::string(1, char(std::toupper(static_cast<unsigned char>(c)))));
        if (num <= 0 || !organic_subset(num) || !aromatic_capable(num))
          throw ParseError(ParseErrorKind::UnknownElement, i,
                           std::string("unknown aromatic atom: ") + c);
        atom.element = std::uint8_t(num);
        atom.aromatic = true;
      }
      attach_atom(atom, /*is_bare=*/true, i);
      i += consumed;
      continue;
    }

    throw ParseError(ParseErrorKind::UnsupportedConstruct, i,
                     std::string("unexpected character: ") + c);
  }

  if (pending_bond != 0)
    throw ParseError(ParseErrorKind::DanglingBond, pending_offset, "trailing bond symbol");
  if (!branch_stack.empty())
    throw ParseError(ParseErrorKind::DanglingBond, s.size(), "unclosed branch");
  if (!open_rings.empty())
    throw ParseError(ParseErrorKind::UnbalancedRingClosure, open_rings.begin()->second.offset,
                     "unclosed ring bond " + std::to_string(open_rings.begin()->first));
  if (mol.atoms.empty()) throw ParseError(ParseErrorKind::EmptyInput, 0, "no atoms in input");

  for (std::size_t a = 0; a < mol.atoms.size(); ++a)
    if (bare[a]) mol.atoms[a].h_count = std::int8_t(implicit_hydrogens(mol, int(a)));

  return mol;
}

inline int atom_count(const Molecule& m) { return m.atom_count(); }

namespace detail {

inline void write_atom_token(const Molecule& m, int idx, std::string& out) {
  const Atom& a = m.atoms[std::size_t(idx)];
  bool bare_ok = a.element != 0 && organic_subset(a.element) && a.charge == 0 &&
                 a.isotope == 0 && a.stereo == Stereo::None &&
                 (!a.aromatic || aromatic_capable(a.element)) &&
                 a.h_count == implicit_hydrogens(m, idx);
  std::string sym(element_symbols()[a.element]);
  if (a.aromatic)
    for (char& c : sym) c = char(std::tolower(static_cast<unsigned char>(c)));
  if (bare_ok) {
    out += sym;
    return;
  }
  out += '[';
  if (a.isotope > 0) out += std::to_string(a.isotope);
  out += sym;
  if (a.stereo == Stereo::AntiClockwise) out += '@';
  if (a.stereo == Stereo::Clockwise) out += "@@";
  if (a.h_count > 0) {
    out += 'H';
    if (a.h_count > 1) out += std::to_string(a.h_count);
  }
  if (a.charge > 0) {
    out += '+';
    if (a.charge > 1) out += std::to_string(a.charge);
  } else if (a.charge < 0) {
    out += '-';
    if (a.charge < -1) out += std::to_string(-a.charge);
  }
  out += ']';
}

inline void write_bond_token(const Molecule& m, int bond_index, std::string& out) {
  const Bond& b = m.bonds[std::size_t(bond_index)];
  bool both_aromatic =
      m.atoms[std::size_t(b.a)].aromatic && m.atoms[std::size_t(b.b)].aromatic;
  switch (b.order) {
    case BondOrder::Single:
      if (both_aromatic) out += '-';  // explicit single between aromatic atoms
      break;
    case BondOrder::Double: out += '='; break;
    case BondOrder::Triple: out += '#'; break;
    case BondOrder::Aromatic: break;  // implied between aromatic atoms
  }
}

// Emit a depth-first SMILES string for a fixed traversal plan.
// children[a] lists tree children in emission order; ring closure digits are
// assigned in encounter order with the smallest free number.
struct TraversalPlan {
  int start = 0;
  std::vector<std::vector<int>> children;           // per atom: child atom order
  std::vector<std::vector<int>> ring_openings;      // per atom: bond indices opened here
  std::vector<std::vector<int>> ring_closings;      // per atom: bond indices closed here
};

inline std::string emit_plan(const Molecule& m, const TraversalPlan& plan) {
  std::string out;
  std::vector<int> digit_of_bond(m.bonds.size(), -1);
  std::vector<bool> digit_used(100, false);
  auto alloc_digit = [&]() {
    for (int d = 1; d < 100; ++d)
      if (!digit_used[std::size_t(d)]) {
        digit_used[std::size_t(d)] = true;
        return d;
      }
    return 99;
  };
  auto emit_digit = [&](int d, std::string& dst) {
    if (d >= 10) {
      dst += '%';
      dst += char('0' + d / 10);
      dst += char('0' + d % 10);
    } else {
      dst += char('0' + d);
    }
  };

  // Recursive emission; molecule sizes are capped well below any stack risk.
  auto rec = [&](auto&& self, int atom, int from_bond) -> void {
    if (from_bond >= 0) write_bond_token(m, from_bond, out);
    write_atom_token(m, atom, out);
    for (int bi : plan.ring_openings[std::size_t(atom)]) {
      int d = alloc_digit();
      digit_of_bond[std::size_t(bi)] = d;
      write_bond_token(m, bi, out);
      emit_digit(d, out);
    }
    for (int bi : plan.ring_closings[std::size_t(atom)]) {
      int d = digit_of_bond[std::size_t(bi)];
      emit_digit(d, out);
      digit_used[std::size_t(d)] = false;
    }
    const auto& kids = plan.children[std::size_t(atom)];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      int child = kids[k];
      int bi = m.find_bond(atom, child);
      bool last = k + 1 == kids.size();
      if (!last) out += '(';
      self(self, child, bi);
      if (!last) out += ')';
    }
  };
  rec(rec, plan.start, -1);
  return out;
}

}  // namespace detail

// Serialize with a caller-chosen atom priority: depth-first traversal starts
// at `start` and explores neighbors in increasing `key` order (ties by atom
// index). Canonicalization drives this with refined ranks; tests drive it
// with identity keys to rewrite a molecule in a permuted atom order.
inline std::string write_smiles_ordered(const Molecule& m, int start,
                                        const std::vector<int>& key) {
  detail::TraversalPlan plan;
  std::size_t n = m.atoms.size();
  plan.start = start;
  plan.children.assign(n, {});
  plan.ring_openings.assign(n, {});
  plan.ring_closings.assign(n, {});

  std::vector<int> pos(n, -1);
  std::vector<bool> bond_done(m.bonds.size(), false);
  int counter = 0;
  auto visit = [&](auto&& self, int atom, int parent_bond) -> void {
    pos[std::size_t(atom)] = counter++;
    std::vector<int> nbrs = m.neighbors_of(atom);
    std::sort(nbrs.begin(), nbrs.end(), [&](int x, int y) {
      if (key[std::size_t(x)] != key[std::size_t(y)])
        return key[std::size_t(x)] < key[std::size_t(y)];
      return x < y;
    });
    for (int nb : nbrs) {
      int bi = m.find_bond(atom, nb);
      if (bi == parent_bond || bond_done[std::size_t(bi)]) continue;
      if (pos[std::size_t(nb)] >= 0) {
        // back edge: opens at the earlier-emitted endpoint, closes here
        bond_done[std::size_t(bi)] = true;
        plan.ring_openings[std::size_t(nb)].push_back(bi);
        plan.ring_closings[std::size_t(atom)].push_back(bi);
      } else {
        bond_done[std::size_t(bi)] = true;
        plan.children[std::size_t(atom)].push_back(nb);
        self(self, nb, bi);
      }
    }
  };
  visit(visit, start, -1);
  return detail::emit_plan(m, plan);
}

// Plain index-order serialization; used by fixtures and tests.
inline std::string write_smiles(const Molecule& m) {
  std::vector<int> key(m.atoms.size());
  for (std::size_t i = 0; i < key.size(); ++i) key[i] = int(i);
  return write_smiles_ordered(m, 0, key);
}

}  // namespace molbridge::chem
