// evalkit/detail/rng.hpp
//
// Copyright 2026  Evalkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef EVALKIT_DETAIL_RNG_HPP_
#define EVALKIT_DETAIL_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace evalkit {
namespace detail {

inline std::uint64_t SplitMix64(std::uint64_t &state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and a stream tag, so
// the corpus, trial-sampling and score streams of one bundle never overlap.
inline std::uint64_t DeriveStreamSeed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t state = seed ^ h;
  SplitMix64(state);
  return SplitMix64(state);
}

// Uniform double in [0, 1) with 53 random bits.
inline double Uniform01(std::mt19937_64 &eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Standard normal via the basic Box-Muller transform, one draw per call
// (the sine branch is discarded).  std::normal_distribution is not pinned
// by the standard, so the same seed would give different streams across
// standard libraries; this transform is fully specified.
inline double StandardNormal(std::mt19937_64 &eng) {
  double u1 = static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  double u2 = Uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

}  // namespace detail
}  // namespace evalkit

#endif  // EVALKIT_DETAIL_RNG_HPP_
