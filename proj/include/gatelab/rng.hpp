// Copyright 2026 The gatelab Authors
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

#ifndef GATELAB_RNG_HPP_
#define GATELAB_RNG_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace gatelab {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so episodes and workers never share state and the
// draw order across threads does not matter.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL))) {}

  // Raw 64-bit value at position `counter`.
  std::uint64_t at(std::uint64_t counter) const {
    return mix(key_ + mix(counter ^ 0xd1b54a32d192ed03ULL));
  }

  // Next raw value; advances the internal counter.
  std::uint64_t next() { return at(counter_++); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift; bias is < n / 2^64 and irrelevant here.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Derive an independent sub-stream.
  CounterRng split(std::uint64_t stream) const {
    CounterRng child(0);
    child.key_ = mix(key_ ^ mix(stream * 0xbf58476d1ce4e5b9ULL + 1));
    return child;
  }

  std::uint64_t counter() const { return counter_; }

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Fisher-Yates with a portable generator (std::shuffle's algorithm is
// implementation-defined, which would break cross-platform reproducibility).
template <typename T>
void shuffle(std::span<T> items, CounterRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = rng.below(i);
    std::swap(items[i - 1], items[j]);
  }
}

// Combine a base seed with a tag into a derived 64-bit seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return CounterRng::mix(base ^ CounterRng::mix(tag + 0x632be59bd9b4e019ULL));
}

}  // namespace gatelab

#endif  // GATELAB_RNG_HPP_
