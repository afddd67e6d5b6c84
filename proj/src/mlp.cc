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

#include "fedgat/mlp.h"

#include <cmath>

#include "fedgat/status.h"

namespace fedgat {

absl::StatusOr<Mlp> Mlp::Create(std::size_t in, std::size_t hidden,
                                std::size_t out, SeededRng& rng) {
  if (in == 0 || hidden == 0 || out == 0) {
    return ArgumentError("MLP layer sizes must be positive");
  }
  Mlp mlp;
  mlp.in_ = in;
  mlp.hidden_ = hidden;
  mlp.out_ = out;
  mlp.params_.assign(hidden * in + hidden + out * hidden + out, 0.0);
  FEDGAT_RETURN_IF_ERROR(AddGaussianNoise(
      rng, std::span<double>(mlp.params_).first(hidden * in),
      1.0 / std::sqrt(static_cast<double>(in))));
  return mlp;
}

Vector Mlp::Forward(std::span<const double> x, Cache* cache) const {
  const double* w1 = params_.data();
  const double* b1 = w1 + hidden_ * in_;
  const double* w2 = b1 + hidden_;
  const double* b2 = w2 + out_ * hidden_;
  Vector h(hidden_);
  for (std::size_t j = 0; j < hidden_; ++j) {
    double s = b1[j];
    const double* row = w1 + j * in_;
    for (std::size_t i = 0; i < in_; ++i) s += row[i] * x[i];
    h[j] = std::tanh(s);
  }
  Vector y(out_);
  for (std::size_t k = 0; k < out_; ++k) {
    double s = b2[k];
    const double* row = w2 + k * hidden_;
    for (std::size_t j = 0; j < hidden_; ++j) s += row[j] * h[j];
    y[k] = s;
  }
  if (cache != nullptr) {
    cache->input.assign(x.begin(), x.end());
    cache->hidden = std::move(h);
  }
  return y;
}

void Mlp::Backward(const Cache& cache, std::span<const double> grad_out,
                   std::span<double> grad) const {
  const double* w2 = params_.data() + hidden_ * in_ + hidden_;
  double* gw1 = grad.data();
  double* gb1 = gw1 + hidden_ * in_;
  double* gw2 = gb1 + hidden_;
  double* gb2 = gw2 + out_ * hidden_;
  Vector grad_hidden(hidden_, 0.0);
  for (std::size_t k = 0; k < out_; ++k) {
    const double g = grad_out[k];
    gb2[k] += g;
    double* grow = gw2 + k * hidden_;
    const double* wrow = w2 + k * hidden_;
    for (std::size_t j = 0; j < hidden_; ++j) {
      grow[j] += g * cache.hidden[j];
      grad_hidden[j] += g * wrow[j];
    }
  }
  for (std::size_t j = 0; j < hidden_; ++j) {
    const double g =
        grad_hidden[j] * (1.0 - cache.hidden[j] * cache.hidden[j]);
    if (g == 0.0) continue;
    gb1[j] += g;
    double* grow = gw1 + j * in_;
    for (std::size_t i = 0; i < in_; ++i) grow[i] += g * cache.input[i];
  }
}

}  // namespace fedgat
