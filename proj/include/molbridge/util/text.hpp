// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace molbridge {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = char(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// A word token with its byte span in the source string and a flag telling
// whether the gap between it and the previous token was "soft" (whitespace or
// hyphen only). Hard gaps (sentence punctuation) break phrase adjacency.
struct WordToken {
  std::string text;  // lowercased
  std::size_t begin = 0;
  std::size_t end = 0;
  bool soft_join = false;
};

inline std::vector<WordToken> tokenize_words(std::string_view s) {
  std::vector<WordToken> out;
  std::size_t i = 0;
  bool hard_gap = false;
  while (i < s.size()) {
    if (is_word_char(s[i])) {
      std::size_t j = i;
      while (j < s.size() && is_word_char(s[j])) ++j;
      WordToken tok;
      tok.text = to_lower(s.substr(i, j - i));
      tok.begin = i;
      tok.end = j;
      tok.soft_join = !out.empty() && !hard_gap;
      out.push_back(std::move(tok));
      i = j;
      hard_gap = false;
    } else {
      if (!std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '-') hard_gap = true;
      ++i;
    }
  }
  return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace molbridge
