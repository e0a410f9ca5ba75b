// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace molbridge {

// Deterministic RNG built on splitmix64.
// std::shuffle and the std distributions are implementation-defined, so all
// draws below are spelled out explicitly to keep runs byte-identical across
// platforms and standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(splitmix(seed ? seed : 0x9e3779b97f4a7c15ull)) {}

  // Derive an independent stream for a named sub-task (epoch index, module tag, ...).
  Rng fork(std::uint64_t tag) const {
    return Rng(splitmix(state_ ^ (0xbf58476d1ce4e5b9ull * (tag + 1))));
  }

  std::uint64_t next_u64() {
    state_ = splitmix(state_);
    return state_;
  }

  // Unbiased-enough bounded draw (desk-scale n, modulo bias is negligible and
  // deterministic either way).
  std::uint64_t bounded(std::uint64_t n) { return n ? next_u64() % n : 0; }

  // Uniform in [0, 1).
  double real() { return double(next_u64() >> 11) * (1.0 / 9007199254740992.0); }

  // Box-Muller, one value per call (the pair's second half is discarded so the
  // draw count stays simple to reason about).
  double normal() {
    double u1 = real(), u2 = real();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = std::size_t(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Sample up to k distinct indices from [0, n) in draw order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    shuffle(idx);
    if (k < n) idx.resize(k);
    return idx;
  }

private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t state_;
};

}  // namespace molbridge
