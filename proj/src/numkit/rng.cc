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

#include "fedgat/numkit/rng.h"

#include <cmath>
#include <numbers>

#include "absl/strings/str_cat.h"
#include "fedgat/status.h"

namespace fedgat {
namespace {

std::uint64_t SplitMix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

std::uint64_t MixStream(std::uint64_t stream, std::uint64_t id) {
  std::uint64_t x = stream ^ (id * 0xD1B54A32D192ED03ULL);
  return SplitMix64(x);
}

}  // namespace

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  std::uint64_t x = seed ^ Rotl(stream * 0xA24BAED4963EE407ULL, 17);
  // Burn one output so seed == stream == 0 still starts well mixed.
  SplitMix64(x);
  for (auto& s : state_) s = SplitMix64(x);
}

SeededRng SeededRng::Split(std::uint64_t id) const {
  return SeededRng(seed_, MixStream(stream_, id));
}

std::uint64_t SeededRng::NextU64() {
  const std::uint64_t result = Rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = Rotl(state_[3], 45);
  return result;
}

double SeededRng::Uniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double SeededRng::Normal() {
  if (spare_normal_.has_value()) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  double u1 = Uniform();
  while (u1 <= 0.0) u1 = Uniform();
  const double u2 = Uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(angle);
  return r * std::cos(angle);
}

absl::StatusOr<Vector> GaussianVector(SeededRng& rng, std::size_t dim,
                                      double sigma) {
  Vector out(dim, 0.0);
  FEDGAT_RETURN_IF_ERROR(AddGaussianNoise(rng, out, sigma));
  return out;
}

absl::Status AddGaussianNoise(SeededRng& rng, std::span<double> values,
                              double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    return ArgumentError(absl::StrCat("noise sigma must be >= 0, got ", sigma));
  }
  if (sigma == 0.0) return absl::OkStatus();
  for (double& v : values) v += sigma * rng.Normal();
  return absl::OkStatus();
}

}  // namespace fedgat
