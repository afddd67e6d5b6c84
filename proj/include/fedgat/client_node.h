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

// A federated client. It owns a frozen EKF (the proprietary estimator, with
// local transition tanh(phi h)) and a trainable additive correction Delta
// applied to the EKF's corrected state:
//
//   h^_a(t-1) = h^_c(t-1) + Delta(y(t-1))
//   h~_a(t)   = tanh(phi h^_a(t-1))
//   L_a       = || y(t) - g(h~_a(t)) ||^2
//
// Only latent vectors and gradients with respect to them cross the client
// boundary.

#ifndef FEDGAT_CLIENT_NODE_H_
#define FEDGAT_CLIENT_NODE_H_

#include <cstddef>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "fedgat/ekf.h"
#include "fedgat/mlp.h"
#include "fedgat/numkit/adam.h"
#include "fedgat/numkit/matrix.h"
#include "fedgat/numkit/rng.h"
#include "fedgat/ssm_synth.h"

namespace fedgat {

struct FreezeOptions {
  // Consecutive epochs without enough improvement before freezing; 0 never
  // freezes.
  int patience = 15;
  double min_rel_improvement = 1e-5;
  double ema = 0.9;
};

struct ClientOptions {
  std::size_t id = 0;
  double phi = 2.0;
  TanhMeasurement measurement;
  double sigma_q = 0.05;
  double sigma_r = 0.15;
  double initial_cov = 1.0;  // P0 = initial_cov * I
  bool joseph_form = false;
  std::size_t hidden_size = 128;
  double learning_rate = 1e-3;
  double eta_local = 1.0;
  double eta_server = 1.0;
  FreezeOptions freeze;
};

struct ProprietaryOutput {
  Vector corrected;  // h^_c(t)
  Vector predicted;  // h~_c(t)
};

// Augmented forward pass for one target time t.
struct ClientStepOutput {
  Vector prev_corrected_c;  // h^_c(t-1)
  Vector predicted_c;       // h~_c(t), for residual comparisons
  Vector prev_corrected_a;  // h^_a(t-1)
  Vector predicted_a;       // h~_a(t)
  Mlp::Cache mlp_cache;
};

struct ClientGradients {
  double local_loss = 0.0;  // mean over the batch
  Vector local;             // d mean L_a / d theta
  Vector server;            // sum_t (dL_s/dh~_a(t))^T dh~_a(t)/d theta
};

class ClientNode {
 public:
  static absl::StatusOr<ClientNode> Create(ClientOptions options,
                                           SeededRng& rng);

  std::size_t id() const { return options_.id; }
  std::size_t latent_dim() const { return options_.measurement.latent_dim(); }
  std::size_t obs_dim() const { return options_.measurement.obs_dim(); }
  double phi() const { return options_.phi; }
  const ClientOptions& options() const { return options_; }
  const DynamicsSpec& proprietary() const { return proprietary_; }
  const Mlp& augmentation() const { return delta_; }
  Mlp& mutable_augmentation() { return delta_; }
  bool frozen() const { return frozen_; }

  // One predict + correct of the proprietary filter on local data.
  absl::StatusOr<ProprietaryOutput> ProprietaryStep(std::span<const double> y);
  void ResetProprietary();
  // Resets the filter and runs it over `observations`.
  absl::StatusOr<std::vector<ProprietaryOutput>> RunProprietary(
      const std::vector<Vector>& observations);

  Vector Augment(std::span<const double> corrected_c,
                 std::span<const double> prev_observation,
                 Mlp::Cache* cache) const;
  Vector AugmentedPredict(std::span<const double> corrected_a) const;
  double LocalLoss(std::span<const double> predicted_a,
                   std::span<const double> observation) const;

  absl::StatusOr<ClientStepOutput> Step(
      const ProprietaryOutput& prev, const ProprietaryOutput& current,
      std::span<const double> prev_observation) const;

  // `observations[i]` is y(t) for steps[i]; `server_grads` is empty or holds
  // dL_s/dh~_a for every step.
  absl::StatusOr<ClientGradients> ComputeGradients(
      const std::vector<ClientStepOutput>& steps,
      const std::vector<Vector>& observations,
      const std::vector<Vector>& server_grads) const;

  // Adam step on eta_local * grad_local + eta_server * grad_server. A frozen
  // client ignores the call.
  absl::Status ApplyGradients(std::span<const double> grad_local,
                              std::span<const double> grad_server);

  // Feeds the epoch's alignment loss to the plateau tracker; returns true on
  // the epoch the client freezes.
  bool ObserveAlignment(double alignment);

 private:
  ClientOptions options_;
  DynamicsSpec proprietary_;
  EkfState filter_;
  Mlp delta_;
  AdamState adam_;
  bool frozen_ = false;
  bool have_ema_ = false;
  double ema_ = 0.0;
  double best_ema_ = 0.0;
  int stall_ = 0;
};

}  // namespace fedgat

#endif  // FEDGAT_CLIENT_NODE_H_
