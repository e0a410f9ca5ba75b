// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "molbridge/util/io.hpp"
#include "molbridge/util/text.hpp"

// Rule-driven chemical phrase extraction.
//
// A caption is tokenized into lowercase words. Candidate chunks are maximal
// runs of soft-joined tokens (separated by whitespace or hyphens only) that
// contain at least one letter and are not stoplisted. A chunk is kept when at
// least one of its tokens hits the lexicon, either as a keyword (an optional
// trailing plural "s" is ignored) or through a chemical suffix morpheme with a
// stem of two or more characters. The stoplist always wins over a suffix hit.
// Kept chunks never overlap by construction; a final longest-first resolution
// pass guards the invariant anyway. The phrase text is the lowercased source
// substring, so inner separators survive verbatim.

namespace molbridge::text {

struct ChemicalPhrase {
  std::string text;       // lowercased caption substring
  std::size_t begin = 0;  // byte offsets into the caption
  std::size_t end = 0;
  std::string source_id;  // caption identifier, filled in by callers
};

struct PhraseLexicon {
  std::set<std::string> keywords;
  std::vector<std::string> suffixes;  // stored without the leading '-'
  std::set<std::string> stopwords;
};

// One entry per line, '#' starts a comment. A leading '-' marks a suffix.
inline void parse_lexicon_terms(const std::string& text, const std::string& source,
                                PhraseLexicon& lex) {
  int lineno = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.find_first_of(" \t") != std::string::npos)
      throw DataError(source + ":" + std::to_string(lineno) + ": entry contains whitespace");
    if (line[0] == '-') {
      if (line.size() < 3)
        throw DataError(source + ":" + std::to_string(lineno) + ": suffix too short");
      lex.suffixes.push_back(to_lower(line.substr(1)));
    } else {
      lex.keywords.insert(to_lower(line));
    }
  }
}

inline void parse_stopwords(const std::string& text, const std::string& source,
                            PhraseLexicon& lex) {
  int lineno = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '-' || line.find_first_of(" \t") != std::string::npos)
      throw DataError(source + ":" + std::to_string(lineno) + ": bad stopword entry");
    lex.stopwords.insert(to_lower(line));
  }
}

inline std::string builtin_lexicon_text() {
  return "# Chemical keywords and suffix morphemes, one per line.\n"
         "# A leading '-' marks a suffix; anything else is an exact keyword\n"
         "# (matched with an optional trailing plural 's').\n"
         "acid\nester\nether\nsalt\ngroup\nring\naromatic\nhydroxyl\ncarboxyl\n"
         "amide\namine\namino\nimino\nketone\naldehyde\nalcohol\nphenol\nbenzene\n"
         "phenyl\nmethyl\nethyl\npropyl\nbutyl\nalkyl\naryl\nvinyl\nallyl\nbenzyl\n"
         "acetate\nsulfate\nsulfonate\nphosphate\nnitrate\ncarbonate\nnitrile\n"
         "nitro\ncyano\ncarbonyl\nhalide\nfluoride\nchloride\nbromide\niodide\n"
         "sulfonamide\nurea\nlactam\nlactone\npeptide\nheterocycle\nheterocyclic\n"
         "pyridine\npyrrole\nfuran\nthiophene\nimidazole\nindole\npurine\n"
         "pyrimidine\nsteroid\nalkaloid\nterpene\nflavonoid\nglycoside\nsugar\n"
         "conjugate\nbase\nanion\ncation\nzwitterion\ntautomer\nisomer\npolymer\n"
         "monomer\nresidue\nmoiety\nsubstituent\nskeleton\nbackbone\nchain\n"
         "-yl\n-ol\n-one\n-ane\n-ene\n-yne\n-ate\n-ide\n-ine\n-amine\n-oxide\n-ium\n";
}

inline std::string builtin_stopwords_text() {
  return "# Articles, pronouns, auxiliaries and caption filler. Tokens listed\n"
         "# here never seed or extend a phrase.\n"
         "a\nan\nthe\nit\nits\nthis\nthat\nthese\nthose\nthere\nhere\n"
         "i\nwe\nyou\nhe\nshe\nthey\nthem\ntheir\nhis\nher\nour\nus\nwho\nwhom\nwhose\n"
         "is\nare\nwas\nwere\nbe\nbeen\nbeing\nam\n"
         "has\nhave\nhad\nhaving\ndo\ndoes\ndid\ndone\n"
         "can\ncould\nmay\nmight\nwill\nwould\nshall\nshould\nmust\n"
         "of\nin\non\nat\nby\nfor\nwith\nwithout\nfrom\nto\ninto\nonto\nas\nvia\n"
         "and\nor\nnor\nnot\nno\nbut\nif\nthen\nthan\nso\nsuch\nboth\neither\nneither\n"
         "which\nwhat\nwhen\nwhere\nwhile\nhow\nwhy\n"
         "also\nvery\nmore\nmost\nless\nleast\neach\nper\nall\nany\nsome\nfew\nmany\n"
         "much\nseveral\nother\nanother\nsame\nonly\nown\n"
         "one\ntwo\nthree\nfour\nfive\nsix\nseven\neight\nnine\nten\n"
         "once\ntwice\nfirst\nsecond\nthird\n"
         "alone\nnone\nanyone\neveryone\nsomeone\ngone\n"
         "found\nused\nknown\nseen\nmade\ngiven\ncalled\nnamed\nderived\nobtained\n"
         "contains\ncontaining\ncontained\nconsists\nconsisting\nplays\n"
         "connects\nconnecting\nconnected\ncarries\ncarrying\ncarried\n"
         "links\nlinked\nattached\nfused\nacts\nacting\nappears\noccurs\nsmells\n";
}

inline const PhraseLexicon& builtin_lexicon() {
  static const PhraseLexicon lex = [] {
    PhraseLexicon l;
    parse_lexicon_terms(builtin_lexicon_text(), "<builtin terms>", l);
    parse_stopwords(builtin_stopwords_text(), "<builtin stopwords>", l);
    return l;
  }();
  return lex;
}

inline PhraseLexicon load_lexicon(const std::string& terms_path,
                                  const std::string& stopwords_path) {
  PhraseLexicon lex;
  parse_lexicon_terms(read_file(terms_path), terms_path, lex);
  parse_stopwords(read_file(stopwords_path), stopwords_path, lex);
  return lex;
}

namespace detail {

inline bool has_letter(const std::string& s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
  });
}

inline bool lexicon_hit(const PhraseLexicon& lex, const std::string& token) {
  if (lex.stopwords.count(token)) return false;
  std::string singular;
  if (token.size() > 3 && token.back() == 's') singular = token.substr(0, token.size() - 1);
  if (lex.keywords.count(token) || (!singular.empty() && lex.keywords.count(singular)))
    return true;
  for (const std::string& suf : lex.suffixes) {
    if (token.size() >= suf.size() + 2 &&
        token.compare(token.size() - suf.size(), suf.size(), suf) == 0)
      return true;
    if (!singular.empty() && singular.size() >= suf.size() + 2 &&
        singular.compare(singular.size() - suf.size(), suf.size(), suf) == 0)
      return true;
  }
  return false;
}

}  // namespace detail

inline std::vector<ChemicalPhrase> extract_phrases(std::string_view caption,
                                                   const PhraseLexicon& lex) {
  std::vector<WordToken> toks = tokenize_words(caption);
  struct Candidate {
    std::size_t first, last;  // token index range, inclusive
    bool hit = false;
  };
  std::vector<Candidate> runs;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const WordToken& t = toks[i];
    bool chunkable = detail::has_letter(t.text) && !lex.stopwords.count(t.text);
    if (!chunkable) continue;
    if (!runs.empty() && runs.back().last + 1 == i && t.soft_join)
      runs.back().last = i;
    else
      runs.push_back({i, i, false});
    if (detail::lexicon_hit(lex, t.text)) runs.back().hit = true;
  }

  std::vector<ChemicalPhrase> out;
  for (const Candidate& r : runs) {
    if (!r.hit) continue;
    std::size_t b = toks[r.first].begin;
    std::size_t e = toks[r.last].end;
    if (e - b < 3) continue;
    ChemicalPhrase p;
    p.text = to_lower(caption.substr(b, e - b));
    if (lex.stopwords.count(p.text)) continue;
    p.begin = b;
    p.end = e;
    out.push_back(std::move(p));
  }

  // Longest-first overlap resolution. Runs are disjoint already, so this is a
  // pure safety net for the non-overlap invariant.
  std::stable_sort(out.begin(), out.end(), [](const ChemicalPhrase& a, const ChemicalPhrase& b) {
    std::size_t la = a.end - a.begin, lb = b.end - b.begin;
    if (la != lb) return la > lb;
    return a.begin < b.begin;
  });
  std::vector<ChemicalPhrase> kept;
  for (ChemicalPhrase& p : out) {
    bool clash = std::any_of(kept.begin(), kept.end(), [&](const ChemicalPhrase& q) {
      return p.begin < q.end && q.begin < p.end;
    });
    if (!clash) kept.push_back(std::move(p));
  }
  std::sort(kept.begin(), kept.end(), [](const ChemicalPhrase& a, const ChemicalPhrase& b) {
    return a.begin < b.begin;
  });
  return kept;
}

inline std::vector<ChemicalPhrase> extract_phrases(std::string_view caption) {
  return extract_phrases(caption, builtin_lexicon());
}

}  // namespace molbridge::text
