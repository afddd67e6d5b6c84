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

// The federated protocol. A round covers a contiguous slice of target times
// t (each needs the previous step, so t >= 1):
//
//   1. every client runs its augmented forward pass over the slice;
//   2. client -> server: (h^_c(t-1), h~_a(t)) per timestep, 2p floats;
//   3. the server predicts, scores and takes one optimizer step;
//   4. server -> client: dL_s/dh~_a(t) per timestep, p floats;
//   5. every client takes one optimizer step on its combined gradient.
//
// Channel noise is added to message payloads only, never to the sender's
// own copies. An epoch is one pass over the training slice in rounds of
// `batch_size` timesteps.

#ifndef FEDGAT_FED_ROUND_H_
#define FEDGAT_FED_ROUND_H_

#include <cstddef>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "fedgat/client_node.h"
#include "fedgat/config.h"
#include "fedgat/gat.h"
#include "fedgat/numkit/rng.h"
#include "fedgat/server_node.h"
#include "fedgat/ssm_synth.h"

namespace fedgat {

// Server construction shared with baselines that must match it.
ServerOptions MakeServerOptions(const ExperimentConfig& config);
// The stream the federation's server is initialized from.
SeededRng ServerInitStream(const ExperimentConfig& config);
// Timesteps per round for a training slice of `train_length` steps.
std::size_t RoundBatchSize(const ExperimentConfig& config,
                           std::size_t train_length);

enum class Direction { kClientToServer, kServerToClient };
enum class PayloadKind { kStateTuple, kStateGradient };

std::string ToString(Direction d);

struct RoundMessage {
  Direction direction = Direction::kClientToServer;
  std::size_t client = 0;
  PayloadKind kind = PayloadKind::kStateTuple;
  std::size_t timesteps = 0;
  std::size_t floats_per_timestep = 0;
  std::vector<double> payload;
  std::size_t byte_count = 0;
};

struct RoundStats {
  std::size_t round = 0;
  std::size_t begin = 0;  // first target time
  std::size_t end = 0;    // one past the last target time
  double server_loss = 0.0;        // before the server step
  double server_loss_after = 0.0;  // after it
  std::vector<double> local_loss;  // per client, mean over the slice
  // Per client: (1/B) sum_t ||h~_s - h~_a||^2 as seen by the server.
  std::vector<double> alignment;
  std::size_t bytes_up = 0;
  std::size_t bytes_down = 0;
  // Largest client -> server payload per timestep, for the privacy audit.
  std::size_t max_up_floats_per_timestep = 0;

  friend bool operator==(const RoundStats&, const RoundStats&) = default;
};

// Noise-free pass over a slice with no parameter updates.
struct Evaluation {
  std::size_t begin = 0;
  StateSequence prev_corrected_c;  // inputs h^_c(t-1)
  StateSequence predicted_c;       // proprietary h~_c(t)
  StateSequence predicted_a;       // h~_a(t)
  StateSequence predicted_s;       // h~_s(t)
  std::vector<GatForwardTrace> traces;
  double server_loss = 0.0;
  std::vector<double> local_loss;  // per client, mean
  std::vector<double> alignment;   // per client, mean
};

class Federation {
 public:
  // Clients get the true measurement models; the proprietary dynamics are
  // tanh(phi_m h).
  static absl::StatusOr<Federation> Create(const ExperimentConfig& config,
                                           const GroundTruthSystem& system,
                                           SeededRng& rng);

  // Runs every proprietary filter once over the whole observation record.
  // The filters are frozen, so their outputs are fixed for all rounds.
  absl::Status Prepare(const Trajectory& trajectory);

  absl::StatusOr<RoundStats> RunRound(std::size_t begin, std::size_t end,
                                      const PrivacyConfig& privacy,
                                      SeededRng& channel_rng,
                                      std::vector<RoundMessage>* log = nullptr);

  absl::StatusOr<Evaluation> Evaluate(std::size_t begin,
                                      std::size_t end) const;

  std::vector<ClientNode>& clients() { return clients_; }
  const std::vector<ClientNode>& clients() const { return clients_; }
  ServerNode& server() { return server_; }
  const ServerNode& server() const { return server_; }
  // [m][t]
  const std::vector<std::vector<ProprietaryOutput>>& proprietary() const {
    return proprietary_;
  }
  std::size_t bytes_per_float() const { return bytes_per_float_; }

 private:
  absl::StatusOr<std::vector<ClientStepOutput>> ClientForward(
      std::size_t m, std::size_t begin, std::size_t end) const;

  std::vector<ClientNode> clients_;
  ServerNode server_;
  std::vector<std::vector<ProprietaryOutput>> proprietary_;
  std::vector<std::vector<Vector>> observations_;  // [m][t], client-local
  std::size_t bytes_per_float_ = 4;
  std::size_t rounds_run_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_server_loss = 0.0;
  double val_server_loss = 0.0;
  std::vector<double> local_loss;
  std::vector<double> alignment;
  std::vector<double> val_alignment;
  std::vector<bool> frozen;
  double combined = 0.0;  // train L_s + sum of client losses
};

// Validation-window records, row i is absolute time begin + i.
struct ValidationRecord {
  std::size_t begin = 0;
  StateSequence latent_true;
  StateSequence prev_corrected_c;
  StateSequence predicted_c;
  StateSequence predicted_a;
  StateSequence predicted_s;
  std::vector<Vector> alpha;
  std::vector<Vector> alpha_gt;
  std::vector<std::vector<Matrix>> jacobian;
  std::vector<std::vector<Matrix>> jacobian_gt;
  // Observation-space residual norms ||y - g(h~)||, [t][m].
  std::vector<std::vector<double>> residual_c;
  std::vector<std::vector<double>> residual_a;
  std::vector<std::vector<double>> residual_s;
  // Range of the server's pre-activations over the window.
  double preactivation_min = 0.0;
  double preactivation_max = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  GroundTruthSystem system;
  Trajectory trajectory;
  std::size_t train_length = 0;
  std::vector<EpochRecord> epochs;  // epoch 0 is the untrained baseline
  std::vector<RoundStats> rounds;
  ValidationRecord validation;
  GatParams server_params;
  double initial_val_server_loss = 0.0;
  double final_val_server_loss = 0.0;
  int epochs_run = 0;
  bool early_stopped = false;
  // Floats per timestep over all clients and both directions times the
  // float width.
  std::size_t bytes_per_timestep = 0;
  std::size_t max_up_floats_per_timestep = 0;
};

// Fills `report` as it goes, so a failed run still leaves everything that
// was produced before the failure.
absl::Status RunExperiment(const ExperimentConfig& config,
                           ExperimentReport* report);
absl::StatusOr<ExperimentReport> RunExperiment(const ExperimentConfig& config);

// Builds the system and trajectory exactly as RunExperiment does.
absl::Status GenerateData(const ExperimentConfig& config,
                          GroundTruthSystem* system, Trajectory* trajectory);

enum class SweepAxis { kObsDim, kLatentDim, kNumClients, kSigmaCa, kSigmaG };
absl::StatusOr<SweepAxis> ParseSweepAxis(absl::string_view name);
std::string ToString(SweepAxis axis);
absl::Status ApplySweepValue(ExperimentConfig& config, SweepAxis axis,
                             double value);

struct SweepRow {
  SweepAxis axis = SweepAxis::kObsDim;
  double value = 0.0;
  std::size_t bytes = 0;  // per timestep, see ExperimentReport
  double ls_final = 0.0;
  absl::Status status;
};

// One experiment per value with the template's seed. Failed points are
// recorded in their row and the sweep continues.
absl::StatusOr<std::vector<SweepRow>> Sweep(const ExperimentConfig& base,
                                            SweepAxis axis,
                                            const std::vector<double>& values,
                                            int workers = 1);

}  // namespace fedgat

#endif  // FEDGAT_FED_ROUND_H_
