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

// The server. It maps every client's communicated corrected state at t-1 to
// a prediction for each client at t with a graph attention layer and trains
// that layer against the clients' augmented predictions:
//
//   L_s = (1/T) sum_t sum_m || h~_s(t, m) - h~_a(t, m) ||^2
//
// Its interface only takes latent-dimension vectors and only returns
// predictions and gradients with respect to latent vectors.

#ifndef FEDGAT_SERVER_NODE_H_
#define FEDGAT_SERVER_NODE_H_

#include <cstddef>
#include <vector>

#include "absl/status/statusor.h"
#include "fedgat/gat.h"
#include "fedgat/numkit/adam.h"
#include "fedgat/numkit/matrix.h"
#include "fedgat/numkit/rng.h"

namespace fedgat {

// [t][m] -> latent vector.
using StateSequence = std::vector<std::vector<Vector>>;

struct ServerOptions {
  Adjacency adjacency;
  std::size_t latent_dim = 1;
  GatOptions gat;
  double learning_rate = 1e-3;
};

struct ServerStepResult {
  StateSequence predicted;  // h~_s before the parameter update
  std::vector<GatForwardTrace> traces;
  double loss = 0.0;        // before the update
  double loss_after = 0.0;  // after the update, same batch
  StateSequence client_grads;  // dL_s / dh~_a, before the update
};

class ServerNode {
 public:
  // W entries ~ N(0, 1/p), attention vectors zero.
  static absl::StatusOr<ServerNode> Create(ServerOptions options,
                                           SeededRng& rng);

  const GatParams& params() const { return params_; }
  GatParams& mutable_params() { return params_; }
  std::size_t num_clients() const { return params_.num_nodes(); }
  std::size_t latent_dim() const { return params_.dim(); }
  const std::vector<double>& loss_history() const { return loss_history_; }

  // One GAT evaluation. `states_c[m]` is client m's corrected state at t-1.
  absl::StatusOr<GatForwardTrace> Forward(
      const std::vector<Vector>& states_c) const;

  // Forward over the batch, loss, client gradients, then one Adam step on
  // the GAT parameters.
  absl::StatusOr<ServerStepResult> TrainStep(const StateSequence& states_c,
                                             const StateSequence& targets_a);

  // d L_s / d params for a batch of fresh traces.
  absl::StatusOr<Vector> ParameterGradient(
      const std::vector<GatForwardTrace>& traces,
      const StateSequence& targets_a) const;

 private:
  absl::Status CheckStates(const std::vector<Vector>& states) const;

  GatParams params_;
  AdamState adam_;
  std::vector<double> loss_history_;
};

absl::StatusOr<double> ServerLoss(const StateSequence& states_s,
                                  const StateSequence& states_a);

// (2/T) (h~_a - h~_s) per timestep and client.
absl::StatusOr<StateSequence> ClientGradients(const StateSequence& states_s,
                                              const StateSequence& states_a);

}  // namespace fedgat

#endif  // FEDGAT_SERVER_NODE_H_
