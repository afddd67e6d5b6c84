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

#ifndef FEDGAT_NUMKIT_ADAM_H_
#define FEDGAT_NUMKIT_ADAM_H_

#include <cstddef>
#include <cstdint>
#include <span>

#include "absl/status/status.h"
#include "fedgat/numkit/matrix.h"

namespace fedgat {

struct AdamState {
  AdamState() = default;
  AdamState(std::size_t num_params, double learning_rate)
      : first_moment(num_params, 0.0),
        second_moment(num_params, 0.0),
        learning_rate(learning_rate) {}

  Vector first_moment;
  Vector second_moment;
  std::int64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update, applied to `params` in place.
absl::Status AdamStep(AdamState& state, std::span<double> params,
                      std::span<const double> grad);

}  // namespace fedgat

#endif  // FEDGAT_NUMKIT_ADAM_H_
