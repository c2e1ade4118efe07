// Copyright 2026 The Attrib Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ATTRIB_RNG_HPP_
#define ATTRIB_RNG_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

namespace attrib {

// SplitMix64 (Steele, Lea, Flood 2014). This is the toolkit's only PRNG:
// every split, shuffle, sample and simulated vote is reproducible from a
// 64-bit seed, on any platform, with no dependence on the standard
// library's distribution implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Unbiased uniform in [0, bound) via rejection sampling. bound must be > 0.
  uint64_t below(uint64_t bound) {
    const uint64_t threshold = -bound % bound;  // 2^64 mod bound
    for (;;) {
      const uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  bool bernoulli(double p) { return next_double() < p; }

  // UniformRandomBitGenerator interface.
  using result_type = uint64_t;
  static constexpr uint64_t min() { return 0; }
  static constexpr uint64_t max() { return ~0ULL; }
  uint64_t operator()() { return next(); }

 private:
  uint64_t state_;
};

// FNV-1a, 64-bit. Used for stable string hashing (seed derivation and
// feature hashing); fixed here so hashed artifacts are portable.
constexpr uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Stream splitting: one global seed fans out to named component streams so
// adding a component never perturbs the draws of another.
inline uint64_t derive_seed(uint64_t global_seed, std::string_view component) {
  return global_seed ^ fnv1a64(component);
}

// Fisher-Yates. Spelled out (rather than std::shuffle) because the exact
// sequence of swaps is part of the reproducibility contract.
template <typename T>
void fisher_yates(std::vector<T>& items, SplitMix64& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace attrib

#endif  // ATTRIB_RNG_HPP_
