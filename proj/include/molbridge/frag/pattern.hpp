// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0
//
// Small substructure pattern language for cleavage rule tables.
//
//   atom     := '[' [label ':'] elemspec (';' constraint)* ']' branch*
//   branch   := '(' ['!'] bond atom ')'
//   bond     := ('-' | '=' | '#' | ':' | '~') ['@' | '!@']
//   elemspec := '*' | 'a' | 'A' | elems | '^' elems
//   elems    := symbol (',' symbol)*        lowercase symbol = aromatic
//   constraint := 'R' | '!R' | 'D' digit ['+'] | 'sat' | '+' | '-' | '+0'
//
// Matching is rooted at the anchor (first atom). A branch marked '!' asserts
// that no neighbor matches it. Patterns are matched against one endpoint of a
// candidate bond with the other endpoint banned: no pattern atom may map onto
// the partner across the bond being examined.

#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "molbridge/chem/molecule.hpp"
#include "molbridge/util/io.hpp"

namespace molbridge::frag {

struct PatternBond {
  int order = 1;  // 1,2,3 bond orders, 4 aromatic, 0 any
  int ring = -1;  // 1 must be a ring bond, 0 must not, -1 either
};

struct PatternAtom {
  enum class ElemMode { List, NegList, Any, AnyAromatic, AnyAliphatic };
  ElemMode mode = ElemMode::List;
  std::vector<std::pair<std::uint8_t, bool>> elems;  // (element, aromatic)
  std::vector<std::uint8_t> neg_elems;               // aromaticity-insensitive

  int ring = -1;            // atom ring membership: 1 yes, 0 no, -1 either
  int degree = -1;          // -1 = unconstrained
  bool degree_is_min = false;
  bool saturated = false;   // all incident bonds single
  int charge = kNoChargeConstraint;

  struct Child {
    PatternBond bond;
    bool negated = false;
    int atom = -1;  // index into Pattern::atoms
  };
  std::vector<Child> children;

  static constexpr int kNoChargeConstraint = 99;
  static constexpr int kPositive = 98;
  static constexpr int kNegative = -98;
};

struct Pattern {
  int label = 0;                  // attachment environment label of the anchor
  std::vector<PatternAtom> atoms; // atoms[0] is the anchor
  std::string text;               // source form, kept for diagnostics
};

namespace detail {

[[noreturn]] inline void pattern_fail(std::string_view text, const std::string& msg) {
  throw DataError("bad pattern '" + std::string(text) + "': " + msg);
}

inline bool parse_pattern_bond(std::string_view s, std::size_t& i, PatternBond& out) {
  if (i >= s.size()) return false;
  switch (s[i]) {
    case '-': out.order = 1; break;
    case '=': out.order = 2; break;
    case '#': out.order = 3; break;
    case ':': out.order = 4; break;
    case '~': out.order = 0; break;
    default: return false;
  }
  ++i;
  if (i < s.size() && s[i] == '@') {
    out.ring = 1;
    ++i;
  } else if (i + 1 < s.size() && s[i] == '!' && s[i + 1] == '@') {
    out.ring = 0;
    i += 2;
  }
  return true;
}

inline std::pair<std::uint8_t, bool> parse_pattern_element(std::string_view text,
                                                           std::string_view tok) {
  if (tok.empty()) pattern_fail(text, "empty element symbol");
  bool aromatic = std::islower(static_cast<unsigned char>(tok[0])) != 0;
  std::string sym(tok);
  sym[0] = char(std::toupper(static_cast<unsigned char>(sym[0])));
  int num = chem::element_number(sym);
  if (num <= 0) pattern_fail(text, "unknown element symbol '" + std::string(tok) + "'");
  if (aromatic && !chem::aromatic_capable(num))
    pattern_fail(text, "element cannot be aromatic: '" + std::string(tok) + "'");
  return {std::uint8_t(num), aromatic};
}

// Parses one atom (bracket or bare symbol) plus its trailing branches.
// Returns the new atom's index in p.atoms.
inline int parse_pattern_atom(std::string_view s, std::size_t& i, Pattern& p, bool root) {
  int self = int(p.atoms.size());
  p.atoms.emplace_back();

  if (i < s.size() && s[i] == '[') {
    std::size_t close = s.find(']', i);
    if (close == std::string_view::npos) pattern_fail(s, "unterminated '['");
    std::string_view body = s.substr(i + 1, close - i - 1);
    i = close + 1;

    // optional anchor label
    std::size_t colon = body.find(':');
    if (colon != std::string_view::npos) {
      if (!root) pattern_fail(s, "label on a non-anchor atom");
      int label = 0;
      if (colon == 0) pattern_fail(s, "empty label");
      for (char c : body.substr(0, colon)) {
        if (!std::isdigit(static_cast<unsigned char>(c))) pattern_fail(s, "label must be numeric");
        label = label * 10 + (c - '0');
      }
      p.label = label;
      body.remove_prefix(colon + 1);
    }

    std::vector<std::string> fields;
    std::size_t start = 0;
    while (start <= body.size()) {
      std::size_t semi = body.find(';', start);
      if (semi == std::string_view::npos) {
        fields.emplace_back(body.substr(start));
        break;
      }
      fields.emplace_back(body.substr(start, semi - start));
      start = semi + 1;
    }
    if (fields.empty() || fields[0].empty()) pattern_fail(s, "missing element spec");

    PatternAtom& a = p.atoms[std::size_t(self)];
    const std::string& espec = fields[0];
    if (espec == "*") {
      a.mode = PatternAtom::ElemMode::Any;
    } else if (espec == "a") {
      a.mode = PatternAtom::ElemMode::AnyAromatic;
    } else if (espec == "A") {
      a.mode = PatternAtom::ElemMode::AnyAliphatic;
    } else if (espec[0] == '^') {
      a.mode = PatternAtom::ElemMode::NegList;
      std::size_t from = 1;
      while (from <= espec.size()) {
        std::size_t comma = espec.find(',', from);
        std::string tok = comma == std::string::npos ? espec.substr(from)
                                                     : espec.substr(from, comma - from);
        a.neg_elems.push_back(parse_pattern_element(s, tok).first);
        if (comma == std::string::npos) break;
        from = comma + 1;
      }
      if (a.neg_elems.empty()) pattern_fail(s, "empty negated element list");
    } else {
      std::size_t from = 0;
      while (from <= espec.size()) {
        std::size_t comma = espec.find(',', from);
        std::string tok = comma == std::string::npos ? espec.substr(from)
                                                     : espec.substr(from, comma - from);
        a.elems.push_back(parse_pattern_element(s, tok));
        if (comma == std::string::npos) break;
        from = comma + 1;
      }
    }

    for (std::size_t f = 1; f < fields.size(); ++f) {
      const std::string& c = fields[f];
      if (c == "R") {
        a.ring = 1;
      } else if (c == "!R") {
        a.ring = 0;
      } else if (c == "sat") {
        a.saturated = true;
      } else if (c == "+0") {
        a.charge = 0;
      } else if (c == "+") {
        a.charge = PatternAtom::kPositive;
      } else if (c == "-") {
        a.charge = PatternAtom::kNegative;
      } else if (c.size() >= 2 && c[0] == 'D' && std::isdigit(static_cast<unsigned char>(c[1]))) {
        a.degree = c[1] - '0';
        if (c.size() == 3 && c[2] == '+') {
          a.degree_is_min = true;
        } else if (c.size() != 2) {
          pattern_fail(s, "bad degree constraint '" + c + "'");
        }
      } else {
        pattern_fail(s, "unknown constraint '" + c + "'");
      }
    }
  } else if (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) {
    // bare element token, possibly two letters (Cl, Br)
    std::string tok(1, s[i]);
    if (std::isupper(static_cast<unsigned char>(s[i])) && i + 1 < s.size() &&
        std::islower(static_cast<unsigned char>(s[i + 1])) &&
        chem::element_number(std::string{s[i], s[i + 1]}) > 0) {
      tok += s[i + 1];
    }
    i += tok.size();
    PatternAtom& a = p.atoms[std::size_t(self)];
    a.elems.push_back(parse_pattern_element(s, tok));
  } else {
    pattern_fail(s, "expected an atom");
  }

  // branches
  while (i < s.size() && s[i] == '(') {
    ++i;
    PatternAtom::Child child;
    if (i < s.size() && s[i] == '!') {
      child.negated = true;
      ++i;
    }
    if (!parse_pattern_bond(s, i, child.bond)) pattern_fail(s, "branch needs a bond symbol");
    child.atom = parse_pattern_atom(s, i, p, /*root=*/false);
    if (i >= s.size() || s[i] != ')') pattern_fail(s, "unterminated branch");
    ++i;
    p.atoms[std::size_t(self)].children.push_back(child);
  }
  return self;
}

}  // namespace detail

inline Pattern parse_pattern(std::string_view s) {
  Pattern p;
  p.text = std::string(s);
  std::size_t i = 0;
  if (s.empty() || s[0] != '[') detail::pattern_fail(s, "anchor atom must be bracketed");
  detail::parse_pattern_atom(s, i, p, /*root=*/true);
  if (i != s.size()) detail::pattern_fail(s, "trailing characters");
  return p;
}

namespace detail {

inline bool pattern_atom_spec_ok(const chem::Molecule& m, int atom, const PatternAtom& pa) {
  const chem::Atom& a = m.atoms[std::size_t(atom)];
  switch (pa.mode) {
    case PatternAtom::ElemMode::Any:
      break;
    case PatternAtom::ElemMode::AnyAromatic:
      if (!a.aromatic) return false;
      break;
    case PatternAtom::ElemMode::AnyAliphatic:
      if (a.aromatic) return false;
      break;
    case PatternAtom::ElemMode::NegList:
      for (std::uint8_t e : pa.neg_elems)
        if (a.element == e) return false;
      break;
    case PatternAtom::ElemMode::List: {
      bool hit = false;
      for (const auto& [e, arom] : pa.elems)
        if (a.element == e && a.aromatic == arom) hit = true;
      if (!hit) return false;
      break;
    }
  }
  if (pa.ring == 1 && !m.atom_in_ring(atom)) return false;
  if (pa.ring == 0 && m.atom_in_ring(atom)) return false;
  if (pa.degree >= 0) {
    int d = m.degree(atom);
    if (pa.degree_is_min ? d < pa.degree : d != pa.degree) return false;
  }
  if (pa.saturated) {
    for (int bi : m.bonds_of(atom))
      if (m.bonds[std::size_t(bi)].order != chem::BondOrder::Single) return false;
  }
  if (pa.charge != PatternAtom::kNoChargeConstraint) {
    if (pa.charge == PatternAtom::kPositive) {
      if (a.charge <= 0) return false;
    } else if (pa.charge == PatternAtom::kNegative) {
      if (a.charge >= 0) return false;
    } else if (int(a.charge) != pa.charge) {
      return false;
    }
  }
  return true;
}

inline bool pattern_bond_ok(const chem::Molecule& m, int bond_index, const PatternBond& pb) {
  const chem::Bond& b = m.bonds[std::size_t(bond_index)];
  if (pb.order != 0 && int(b.order) != pb.order) return false;
  if (pb.ring == 1 && !m.bond_in_ring(bond_index)) return false;
  if (pb.ring == 0 && m.bond_in_ring(bond_index)) return false;
  return true;
}

struct MatchCtx {
  const chem::Molecule& m;
  const Pattern& p;
  int banned;              // cut-bond partner; off limits for every pattern atom
  std::vector<char> used;  // molecule atoms claimed by positive matches
};

inline bool match_atom(MatchCtx& ctx, int pi, int matom, int came_from);

inline bool match_children(MatchCtx& ctx, int pi, int matom, int came_from, std::size_t ci) {
  const auto& children = ctx.p.atoms[std::size_t(pi)].children;
  if (ci == children.size()) return true;
  const PatternAtom::Child& ch = children[ci];

  if (!ch.negated) {
    for (int nb : ctx.m.neighbors_of(matom)) {
      if (nb == ctx.banned || ctx.used[std::size_t(nb)]) continue;
      int bi = ctx.m.find_bond(matom, nb);
      if (!pattern_bond_ok(ctx.m, bi, ch.bond)) continue;
      std::vector<char> snapshot = ctx.used;
      if (match_atom(ctx, ch.atom, nb, matom) &&
          match_children(ctx, pi, matom, came_from, ci + 1))
        return true;
      ctx.used = std::move(snapshot);
    }
    return false;
  }

  // negated branch: no neighbor may match it (environment test, so atoms
  // already claimed elsewhere still count)
  for (int nb : ctx.m.neighbors_of(matom)) {
    if (nb == ctx.banned || nb == came_from) continue;
    int bi = ctx.m.find_bond(matom, nb);
    if (!pattern_bond_ok(ctx.m, bi, ch.bond)) continue;
    std::vector<char> snapshot = ctx.used;
    std::fill(ctx.used.begin(), ctx.used.end(), 0);
    bool hit = match_atom(ctx, ch.atom, nb, matom);
    ctx.used = std::move(snapshot);
    if (hit) return false;
  }
  return match_children(ctx, pi, matom, came_from, ci + 1);
}

inline bool match_atom(MatchCtx& ctx, int pi, int matom, int came_from) {
  if (!pattern_atom_spec_ok(ctx.m, matom, ctx.p.atoms[std::size_t(pi)])) return false;
  ctx.used[std::size_t(matom)] = 1;
  if (match_children(ctx, pi, matom, came_from, 0)) return true;
  ctx.used[std::size_t(matom)] = 0;
  return false;
}

}  // namespace detail

// Match `p` with its anchor on `anchor`, where `banned` is the partner across
// the bond under consideration.
inline bool match_pattern(const chem::Molecule& m, const Pattern& p, int anchor, int banned) {
  detail::MatchCtx ctx{m, p, banned, std::vector<char>(m.atoms.size(), 0)};
  return detail::match_atom(ctx, 0, anchor, banned);
}

}  // namespace molbridge::frag
