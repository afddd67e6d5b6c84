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

// Ground-truth nonlinear state-space system used to generate synthetic data:
//
//   h_t = GAT(h_{t-1}) + w_t,        w_t ~ N(0, sigma_q^2 I)
//   y_t^m = tanh(W_m h_t^m + b_m) + v_t^m,   v_t ~ N(0, sigma_r^2 I)
//
// The transition is a fixed, seeded graph attention layer, so the attention
// coefficients and Jacobian blocks it induces along the trajectory are the
// ground truth that learned models are scored against.

#ifndef FEDGAT_SSM_SYNTH_H_
#define FEDGAT_SSM_SYNTH_H_

#include <cstddef>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "fedgat/ekf.h"
#include "fedgat/gat.h"
#include "fedgat/numkit/matrix.h"
#include "fedgat/numkit/rng.h"

namespace fedgat {

// g(h) = tanh(W h + b), W is d x p.
struct TanhMeasurement {
  Matrix weight;
  Vector bias;

  std::size_t obs_dim() const { return weight.rows(); }
  std::size_t latent_dim() const { return weight.cols(); }
  Vector Evaluate(std::span<const double> h) const;
  Linearization Linearize(std::span<const double> h) const;
  LinearizedMap AsMap() const;
};

struct GroundTruthOptions {
  Adjacency adjacency;
  std::size_t latent_dim = 1;
  std::size_t obs_dim = 8;
  double sigma_q = 0.05;
  double sigma_r = 0.15;
  // h_{-1} ~ N(0, init_state_std^2 I).
  double init_state_std = 0.5;
  // Ground-truth GAT draws: W entries ~ N(0, (weight_scale / sqrt(p))^2),
  // attention entries ~ N(0, attention_scale^2).
  double weight_scale = 1.5;
  double attention_scale = 2.0;
  GatOptions gat;
};

struct GroundTruthSystem {
  GatParams transition;
  std::vector<TanhMeasurement> measurements;  // per client
  double sigma_q = 0.0;
  double sigma_r = 0.0;
  double init_state_std = 0.5;

  std::size_t num_clients() const { return transition.num_nodes(); }
  std::size_t latent_dim() const { return transition.dim(); }
  std::size_t obs_dim() const {
    return measurements.empty() ? 0 : measurements.front().obs_dim();
  }
};

absl::StatusOr<GroundTruthSystem> MakeGroundTruthSystem(
    const GroundTruthOptions& options, SeededRng& rng);

// Per-timestep records. Index [t][m] for states, [t][edge] for edge series
// (edge ids follow GatParams::edges()).
struct Trajectory {
  std::vector<std::vector<Vector>> latent;
  std::vector<std::vector<Vector>> observations;
  std::vector<Vector> attention_gt;
  std::vector<std::vector<Matrix>> jacobian_gt;
  // Absolute time index of element 0 (non-zero for a split suffix).
  std::size_t start_time = 0;

  std::size_t length() const { return latent.size(); }
};

// Rolls the ground truth forward T steps from a seeded h_{-1}; element t of
// every record describes the transition h_{t-1} -> h_t.
absl::StatusOr<Trajectory> Generate(const GroundTruthSystem& system,
                                    std::size_t num_steps, SeededRng& rng);

// Chronological split: the prefix gets floor(T * train_frac) steps and the
// suffix the remainder.
absl::StatusOr<std::pair<Trajectory, Trajectory>> Split(const Trajectory& traj,
                                                        double train_frac);

// floor(T * train_frac) with the same validation as Split.
absl::StatusOr<std::size_t> TrainLength(std::size_t num_steps,
                                        double train_frac);

}  // namespace fedgat

#endif  // FEDGAT_SSM_SYNTH_H_
