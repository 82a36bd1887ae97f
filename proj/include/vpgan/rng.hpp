// Copyright 2026 The vpgan Authors
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

#ifndef VPGAN_RNG_HPP
#define VPGAN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "vpgan/errors.hpp"

namespace vpgan {

// Mixes a base seed with a stream index; used to derive independent
// sub-seeds (ablation cells, attack scenarios) from one manifest seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seeded random source with exact state serialization. The Gaussian
// sampler keeps its spare draw explicit so that a restored stream
// continues bit-identically, which checkpoint resume relies on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw ConfigError("uniform_index: n must be positive");
    const std::uint64_t limit =
        UINT64_MAX - (UINT64_MAX % static_cast<std::uint64_t>(n));
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return static_cast<std::size_t>(draw % static_cast<std::uint64_t>(n));
  }

  // Standard normal via the polar method. One accepted pair yields two
  // deviates; the second is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  void save(std::ostream& out) const {
    out << engine_ << '\n' << (has_spare_ ? 1 : 0) << '\n';
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", spare_);
    out << buf << '\n';
  }

  void load(std::istream& in) {
    int spare_flag = 0;
    std::string spare_hex;
    if (!(in >> engine_ >> spare_flag >> spare_hex)) {
      throw DataError("Rng::load: truncated or malformed state");
    }
    has_spare_ = spare_flag != 0;
    spare_ = std::strtod(spare_hex.c_str(), nullptr);
  }

  bool operator==(const Rng& other) const {
    return engine_ == other.engine_ && has_spare_ == other.has_spare_ &&
           (has_spare_ ? spare_ == other.spare_ : true);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace vpgan

#endif  // VPGAN_RNG_HPP
