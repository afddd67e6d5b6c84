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

#include "fedgat/ssm_synth.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "fedgat/status.h"

namespace fedgat {
namespace {

// Stream ids under the generator's root stream.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kProcessStream = 2;
constexpr std::uint64_t kObservationStream = 3;

}  // namespace

Vector TanhMeasurement::Evaluate(std::span<const double> h) const {
  Vector y = Apply(weight, h);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(y[i] + bias[i]);
  return y;
}

Linearization TanhMeasurement::Linearize(std::span<const double> h) const {
  Linearization out{Evaluate(h), weight};
  for (std::size_t i = 0; i < out.value.size(); ++i) {
    const double slope = 1.0 - out.value[i] * out.value[i];
    for (double& x : out.jacobian.row(i)) x *= slope;
  }
  return out;
}

LinearizedMap TanhMeasurement::AsMap() const {
  return [g = *this](std::span<const double> h) -> absl::StatusOr<Linearization> {
    if (h.size() != g.latent_dim()) return ShapeError("measurement input dim");
    return g.Linearize(h);
  };
}

absl::StatusOr<GroundTruthSystem> MakeGroundTruthSystem(
    const GroundTruthOptions& options, SeededRng& rng) {
  if (options.sigma_q < 0 || options.sigma_r < 0) {
    return ArgumentError("noise standard deviations must be >= 0");
  }
  if (options.obs_dim == 0) return ArgumentError("obs_dim must be positive");
  const std::size_t m = options.adjacency.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (!options.adjacency(i, i)) {
      return ArgumentError(absl::StrCat(
          "ground-truth adjacency needs self-loops; (", i, ",", i, ") is 0"));
    }
  }
  const std::size_t p = options.latent_dim;
  GroundTruthSystem sys;
  SeededRng gat_rng = rng.Split(0);
  FEDGAT_ASSIGN_OR_RETURN(
      sys.transition,
      GatParams::Random(options.adjacency, p, options.gat, gat_rng,
                        options.weight_scale / std::sqrt(static_cast<double>(p)),
                        options.attention_scale));
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  for (std::size_t i = 0; i < m; ++i) {
    SeededRng meas_rng = rng.Split(100 + i);
    TanhMeasurement g{Matrix(options.obs_dim, p), Vector(options.obs_dim)};
    FEDGAT_RETURN_IF_ERROR(AddGaussianNoise(meas_rng, g.weight.data(), scale));
    FEDGAT_RETURN_IF_ERROR(AddGaussianNoise(meas_rng, g.bias, scale));
    sys.measurements.push_back(std::move(g));
  }
  sys.sigma_q = options.sigma_q;
  sys.sigma_r = options.sigma_r;
  sys.init_state_std = options.init_state_std;
  return sys;
}

absl::StatusOr<Trajectory> Generate(const GroundTruthSystem& system,
                                    std::size_t num_steps, SeededRng& rng) {
  if (num_steps < 2) return ArgumentError("trajectory needs T >= 2");
  const std::size_t m = system.num_clients();
  const std::size_t p = system.latent_dim();
  const GatParams& gat = system.transition;

  std::vector<Vector> prev(m);
  SeededRng init_rng = rng.Split(kInitStream);
  for (std::size_t i = 0; i < m; ++i) {
    FEDGAT_ASSIGN_OR_RETURN(prev[i],
                            GaussianVector(init_rng, p, system.init_state_std));
  }

  Trajectory traj;
  traj.latent.reserve(num_steps);
  traj.observations.reserve(num_steps);
  traj.attention_gt.reserve(num_steps);
  traj.jacobian_gt.reserve(num_steps);
  const SeededRng process_root = rng.Split(kProcessStream);
  const SeededRng obs_root = rng.Split(kObservationStream);
  for (std::size_t t = 0; t < num_steps; ++t) {
    auto tr = GatForward(gat, prev);
    if (!tr.ok()) {
      return DivergenceError(absl::StrCat("ground-truth step t=", t, ": ",
                                          tr.status().message()));
    }
    std::vector<Matrix> jac(gat.edges().size());
    for (std::size_t k = 0; k < gat.edges().size(); ++k) {
      const Edge& e = gat.edges()[k];
      FEDGAT_ASSIGN_OR_RETURN(jac[k],
                              InputJacobian(gat, *tr, e.target, e.source));
    }
    std::vector<Vector> h = tr->outputs;
    std::vector<Vector> y(m);
    for (std::size_t i = 0; i < m; ++i) {
      SeededRng w_rng = process_root.Split(t).Split(i);
      FEDGAT_RETURN_IF_ERROR(AddGaussianNoise(w_rng, h[i], system.sigma_q));
      y[i] = system.measurements[i].Evaluate(h[i]);
      SeededRng v_rng = obs_root.Split(t).Split(i);
      FEDGAT_RETURN_IF_ERROR(AddGaussianNoise(v_rng, y[i], system.sigma_r));
      if (!AllFinite(h[i]) || !AllFinite(y[i])) {
        return DivergenceError(
            absl::StrCat("non-finite state at timestep ", t, ", client ", i));
      }
    }
    traj.attention_gt.push_back(tr->attention);
    traj.jacobian_gt.push_back(std::move(jac));
    traj.latent.push_back(h);
    traj.observations.push_back(std::move(y));
    prev = std::move(h);
  }
  return traj;
}

absl::StatusOr<std::size_t> TrainLength(std::size_t num_steps,
                                        double train_frac) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    return ArgumentError(
        absl::StrCat("train fraction must be in (0, 1), got ", train_frac));
  }
  const auto n = static_cast<std::size_t>(
      std::floor(static_cast<double>(num_steps) * train_frac));
  if (n == 0 || n >= num_steps) {
    return ArgumentError(absl::StrCat("train fraction ", train_frac,
                                      " leaves an empty split of T=",
                                      num_steps));
  }
  return n;
}

absl::StatusOr<std::pair<Trajectory, Trajectory>> Split(const Trajectory& traj,
                                                        double train_frac) {
  FEDGAT_ASSIGN_OR_RETURN(const std::size_t n,
                          TrainLength(traj.length(), train_frac));
  auto slice = [&](std::size_t begin, std::size_t end) {
    Trajectory out;
    out.start_time = traj.start_time + begin;
    out.latent.assign(traj.latent.begin() + begin, traj.latent.begin() + end);
    out.observations.assign(traj.observations.begin() + begin,
                            traj.observations.begin() + end);
    out.attention_gt.assign(traj.attention_gt.begin() + begin,
                            traj.attention_gt.begin() + end);
    out.jacobian_gt.assign(traj.jacobian_gt.begin() + begin,
                           traj.jacobian_gt.begin() + end);
    return out;
  };
  return std::make_pair(slice(0, n), slice(n, traj.length()));
}

}  // namespace fedgat
