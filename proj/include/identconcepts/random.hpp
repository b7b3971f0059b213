// Copyright 2026 The identconcepts Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IDENTCONCEPTS_RANDOM_HPP
#define IDENTCONCEPTS_RANDOM_HPP

#include <bit>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace identconcepts {

using Rng = std::mt19937_64;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent child seed for a named stream, so that every consumer of a
/// run seed (mixing draw, sample batch, noise, SGD shuffling) gets its own
/// reproducible sequence.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(seed ^ mix64(h));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t hash_values(std::uint64_t seed, std::span<const double> values) {
  std::uint64_t h = mix64(seed);
  for (double v : values) h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
  return h;
}

}  // namespace identconcepts

#endif  // IDENTCONCEPTS_RANDOM_HPP
