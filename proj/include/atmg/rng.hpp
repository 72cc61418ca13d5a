// Copyright 2026 The atmg-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ATMG_RNG_HPP_
#define ATMG_RNG_HPP_

#include <cmath>
#include <cstdint>

namespace atmg {

// Stream coordinates for reproducible simulation. Identical coordinates give
// bit-identical draw sequences no matter how a batch is scheduled across
// threads; distinct coordinates give statistically independent streams.
struct SeedSpec {
  std::uint64_t master = 0;
  std::uint64_t outer = 0;  // outer iteration t
  std::uint64_t index = 0;  // trajectory index j within the batch
};

// Counter-based generator: the key is a mix of the stream coordinates and
// each output is a stateless hash of (key, counter). splitmix64 finalizer.
class CounterRng {
 public:
  explicit CounterRng(const SeedSpec& seed) : key_(derive_key(seed)) {}
  CounterRng(std::uint64_t master, std::uint64_t outer, std::uint64_t index)
      : CounterRng(SeedSpec{master, outer, index}) {}

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + (++counter_) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (one value per call; no caching so the
  // draw count stays a pure function of the call count).
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  // Index drawn from an unnormalized nonnegative weight array of length m.
  template <typename Vec>
  int next_categorical(const Vec& weights, int m) {
    double total = 0.0;
    for (int i = 0; i < m; ++i) total += weights[i];
    double u = next_double() * total;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return m - 1;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t derive_key(const SeedSpec& s) {
    std::uint64_t k = mix(s.master + 0x9e3779b97f4a7c15ULL);
    k = mix(k ^ (s.outer + 0xd1b54a32d192ed03ULL));
    k = mix(k ^ (s.index + 0x8cb92ba72f3d8dd7ULL));
    return k;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace atmg

#endif  // ATMG_RNG_HPP_
