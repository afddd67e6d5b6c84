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

#include "fedgat/ekf.h"

#include "absl/strings/str_cat.h"
#include "fedgat/numkit/linalg.h"
#include "fedgat/status.h"

namespace fedgat {

EkfState EkfInit(Vector mean, Matrix cov) {
  EkfState s;
  s.predicted_mean = mean;
  s.predicted_cov = cov;
  s.corrected_mean = std::move(mean);
  s.corrected_cov = std::move(cov);
  return s;
}

absl::StatusOr<EkfState> EkfPredict(const EkfState& state,
                                    const DynamicsSpec& dynamics) {
  const std::size_t p = state.corrected_mean.size();
  FEDGAT_ASSIGN_OR_RETURN(Linearization f,
                          dynamics.transition(state.corrected_mean));
  if (f.value.size() != p || f.jacobian.rows() != p ||
      f.jacobian.cols() != p) {
    return ShapeError(absl::StrCat("EKF transition returned dim ",
                                   f.value.size(), ", want ", p));
  }
  if (dynamics.process_cov.rows() != p || dynamics.process_cov.cols() != p) {
    return ShapeError("EKF process covariance dims");
  }
  EkfState out = state;
  out.predicted_mean = std::move(f.value);
  out.predicted_cov =
      Multiply(Multiply(f.jacobian, state.corrected_cov), f.jacobian.Transposed());
  out.predicted_cov += dynamics.process_cov;
  out.predicted_cov.Symmetrize();
  if (!AllFinite(out.predicted_mean) || !out.predicted_cov.AllFinite()) {
    return DivergenceError("EKF prediction is non-finite");
  }
  return out;
}

absl::StatusOr<EkfState> EkfCorrect(const EkfState& state,
                                    const DynamicsSpec& dynamics,
                                    std::span<const double> observation) {
  const std::size_t p = state.predicted_mean.size();
  FEDGAT_ASSIGN_OR_RETURN(Linearization g,
                          dynamics.observation(state.predicted_mean));
  const std::size_t d = g.value.size();
  if (observation.size() != d || g.jacobian.rows() != d ||
      g.jacobian.cols() != p) {
    return ShapeError(absl::StrCat("EKF observation dim ", observation.size(),
                                   ", model dim ", d));
  }
  if (dynamics.observation_cov.rows() != d ||
      dynamics.observation_cov.cols() != d) {
    return ShapeError("EKF observation covariance dims");
  }
  const Matrix& c = g.jacobian;
  const Matrix c_p = Multiply(c, state.predicted_cov);  // d x p
  Matrix innovation_cov = Multiply(c_p, c.Transposed());
  innovation_cov += dynamics.observation_cov;
  innovation_cov.Symmetrize();
  // K^T = S^-1 C P~ because S and P~ are symmetric.
  auto gain_t = SolveSpd(innovation_cov, c_p);
  if (!gain_t.ok()) {
    return NumericalError(absl::StrCat("innovation covariance: ",
                                       gain_t.status().message()));
  }
  EkfState out = state;
  out.gain = gain_t->Transposed();  // p x d

  Vector innovation(d);
  for (std::size_t i = 0; i < d; ++i) innovation[i] = observation[i] - g.value[i];
  const Vector step = Apply(out.gain, innovation);
  out.corrected_mean = state.predicted_mean;
  for (std::size_t i = 0; i < p; ++i) out.corrected_mean[i] += step[i];

  Matrix i_kc = Matrix::Identity(p) - Multiply(out.gain, c);
  if (dynamics.joseph_form) {
    out.corrected_cov =
        Multiply(Multiply(i_kc, state.predicted_cov), i_kc.Transposed());
    out.corrected_cov += Multiply(Multiply(out.gain, dynamics.observation_cov),
                                  out.gain.Transposed());
  } else {
    out.corrected_cov = Multiply(i_kc, state.predicted_cov);
  }
  out.corrected_cov.Symmetrize();
  if (!AllFinite(out.corrected_mean) || !out.corrected_cov.AllFinite()) {
    return DivergenceError("EKF correction is non-finite");
  }
  return out;
}

LinearizedMap AffineMap(Matrix a, Vector b) {
  if (b.empty()) b.assign(a.rows(), 0.0);
  return [a = std::move(a), b = std::move(b)](
             std::span<const double> h) -> absl::StatusOr<Linearization> {
    if (h.size() != a.cols()) return ShapeError("affine map input dim");
    Vector y = Apply(a, h);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
    return Linearization{std::move(y), a};
  };
}

}  // namespace fedgat
