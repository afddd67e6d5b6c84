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

// Two-layer perceptron x -> W2 tanh(W1 x + b1) + b2 with a flat parameter
// vector laid out as [W1 (row-major), b1, W2 (row-major), b2].

#ifndef FEDGAT_MLP_H_
#define FEDGAT_MLP_H_

#include <cstddef>
#include <span>

#include "absl/status/statusor.h"
#include "fedgat/numkit/matrix.h"
#include "fedgat/numkit/rng.h"

namespace fedgat {

class Mlp {
 public:
  struct Cache {
    Vector input;
    Vector hidden;  // tanh activations
  };

  Mlp() = default;
  // W1 ~ N(0, 1/in), b1 = 0. The output layer starts at exactly zero, so the
  // network is initially the zero map.
  static absl::StatusOr<Mlp> Create(std::size_t in, std::size_t hidden,
                                    std::size_t out, SeededRng& rng);

  std::size_t in_dim() const { return in_; }
  std::size_t hidden_dim() const { return hidden_; }
  std::size_t out_dim() const { return out_; }
  std::size_t NumParams() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // `cache` may be null when no backward pass follows.
  Vector Forward(std::span<const double> x, Cache* cache) const;
  // Adds dL/dparams to `grad` (size NumParams()) given dL/doutput.
  void Backward(const Cache& cache, std::span<const double> grad_out,
                std::span<double> grad) const;

 private:
  std::size_t in_ = 0, hidden_ = 0, out_ = 0;
  Vector params_;
};

}  // namespace fedgat

#endif  // FEDGAT_MLP_H_
