// Copyright 2026 The k2t Authors.
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

#ifndef K2T_RNG_H_
#define K2T_RNG_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace k2t {

// Seeded generator with platform-independent derived draws. The standard
// distributions are implementation-defined, so they are not used for
// anything that ends up in an artifact.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(Mix(seed)) {}

  uint64_t Next() { return engine_(); }

  // Uniform index in [0, n). n must be > 0.
  size_t Index(size_t n) { return static_cast<size_t>(Next() % n); }

  // Uniform double in [0, 1).
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  template <typename T>
  void Shuffle(std::vector<T> &items) {
    for (size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[Index(i)]);
    }
  }

  // Index drawn proportionally to non-negative weights.
  size_t Weighted(const std::vector<double> &weights) {
    double total = 0;
    for (double w : weights) total += w;
    double r = Uniform() * total;
    for (size_t i = 0; i < weights.size(); ++i) {
      if (r < weights[i]) return i;
      r -= weights[i];
    }
    return weights.size() - 1;
  }

  // SplitMix64 finalizer, used to derive independent sub-seeds.
  static uint64_t Mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  static uint64_t Derive(uint64_t seed, uint64_t stream) {
    return Mix(seed ^ Mix(stream + 0x632be59bd9b4e019ULL));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace k2t

#endif  // K2T_RNG_H_
