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

#ifndef FEDGAT_EKF_H_
#define FEDGAT_EKF_H_

#include <functional>
#include <span>

#include "absl/status/statusor.h"
#include "fedgat/numkit/matrix.h"

namespace fedgat {

// A nonlinear map evaluated together with its Jacobian at the same point.
struct Linearization {
  Vector value;
  Matrix jacobian;
};
using LinearizedMap =
    std::function<absl::StatusOr<Linearization>(std::span<const double>)>;

struct DynamicsSpec {
  LinearizedMap transition;   // f and df/dh
  LinearizedMap observation;  // g and dg/dh
  Matrix process_cov;         // Q
  Matrix observation_cov;     // R
  // (I - KC) P (I - KC)^T + K R K^T instead of (I - KC) P.
  bool joseph_form = false;
};

struct EkfState {
  Vector corrected_mean;  // h-hat
  Matrix corrected_cov;   // P
  Vector predicted_mean;  // h-tilde
  Matrix predicted_cov;   // P-tilde
  Matrix gain;            // K from the last correction
};

// Corrected moments set to (mean, cov); predicted moments mirror them.
EkfState EkfInit(Vector mean, Matrix cov);

// h~ = f(h^), P~ = F P F^T + Q.
absl::StatusOr<EkfState> EkfPredict(const EkfState& state,
                                    const DynamicsSpec& dynamics);

// K = P~ C^T (C P~ C^T + R)^-1, h^ = h~ + K (y - g(h~)), P = (I - K C) P~,
// symmetrised afterwards.
absl::StatusOr<EkfState> EkfCorrect(const EkfState& state,
                                    const DynamicsSpec& dynamics,
                                    std::span<const double> observation);

// Linear map h -> A h + b as a LinearizedMap.
LinearizedMap AffineMap(Matrix a, Vector b = {});

}  // namespace fedgat

#endif  // FEDGAT_EKF_H_
