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

#include "fedgat/numkit/adam.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "fedgat/status.h"

namespace fedgat {

absl::Status AdamStep(AdamState& state, std::span<double> params,
                      std::span<const double> grad) {
  if (params.size() != grad.size() ||
      params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    return ShapeError(absl::StrCat("adam: params ", params.size(), ", grad ",
                                   grad.size(), ", moments ",
                                   state.first_moment.size()));
  }
  ++state.step;
  const double bias1 = 1.0 - std::pow(state.beta1, state.step);
  const double bias2 = 1.0 - std::pow(state.beta2, state.step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double m_hat = m / bias1;
    const double v_hat = v / bias2;
    params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
  if (!AllFinite(params)) return NumericalError("adam produced non-finite");
  return absl::OkStatus();
}

}  // namespace fedgat
