// Copyright 2026 The kgleak Authors
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

#ifndef KGLEAK_RNG_H_
#define KGLEAK_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <sstream>
#include <string>

namespace kgleak {

// Seeded generator with portable derived draws. The standard distributions
// are implementation-defined, so uniform reals and indices are derived from
// the raw 64-bit stream directly to keep logs identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
  Rng(std::initializer_list<std::uint64_t> key) {
    std::seed_seq seq(key.begin(), key.end());
    engine_.seed(seq);
  }

  std::uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double NextDouble() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool Bernoulli(double p) { return NextDouble() < p; }

  // Uniform in [0, n). n must be positive.
  std::size_t Index(std::size_t n) {
    return static_cast<std::size_t>(NextDouble() * static_cast<double>(n));
  }

  template <typename Vec>
  void Shuffle(Vec& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[Index(i)]);
    }
  }

  std::string State() const {
    std::ostringstream out;
    out << engine_;
    return out.str();
  }
  void SetState(const std::string& state) {
    std::istringstream in(state);
    in >> engine_;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace kgleak

#endif  // KGLEAK_RNG_H_
