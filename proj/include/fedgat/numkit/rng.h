// Copyright 2026 The FedGAT Authors.
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

#ifndef FEDGAT_NUMKIT_RNG_H_
#define FEDGAT_NUMKIT_RNG_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "absl/status/statusor.h"
#include "fedgat/numkit/matrix.h"

namespace fedgat {

// Splittable pseudo-random generator. The (seed, stream) pair fully
// determines the draw sequence: state is expanded with SplitMix64 and the
// sequence itself is xoshiro256++. Normal draws use Box-Muller so the output
// does not depend on the standard library's distribution implementations.
//
// Streams are derived hierarchically with Split(), so each logical entity
// (client, timestep, channel) can own an independent sequence regardless of
// the order in which entities are processed.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Child generator whose stream id mixes this stream with `id`.
  SeededRng Split(std::uint64_t id) const;

  std::uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  double Normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint64_t, 4> state_;
  std::optional<double> spare_normal_;
};

// i.i.d. N(0, sigma^2) draws. sigma == 0 returns exact zeros without
// consuming randomness; negative sigma is an argument error.
absl::StatusOr<Vector> GaussianVector(SeededRng& rng, std::size_t dim,
                                      double sigma);

// Same as GaussianVector, but adds the draws to `values` in place.
absl::Status AddGaussianNoise(SeededRng& rng, std::span<double> values,
                              double sigma);

}  // namespace fedgat

#endif  // FEDGAT_NUMKIT_RNG_H_
