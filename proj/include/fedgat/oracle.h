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

// Centralized baseline with access to every client's observations. A single
// EKF runs over the stacked latent state with the ground-truth GAT as its
// transition, and a GAT with the server's architecture and optimizer budget
// is fitted to the resulting state estimates. Comparing that fit with the
// federated server gives empirical state gaps (eps1 on predictions, eps2 on
// corrected inputs) and the attention and Jacobian gaps they should bound.

#ifndef FEDGAT_ORACLE_H_
#define FEDGAT_ORACLE_H_

#include <cstddef>
#include <vector>

#include "absl/status/statusor.h"
#include "fedgat/config.h"
#include "fedgat/ekf.h"
#include "fedgat/fed_round.h"
#include "fedgat/gat.h"
#include "fedgat/numkit/matrix.h"
#include "fedgat/server_node.h"
#include "fedgat/ssm_synth.h"

namespace fedgat {

// Client m's block [m p, (m + 1) p) of a stacked state.
Vector Extract(std::span<const double> stacked, std::size_t m, std::size_t p);
Vector Stack(const std::vector<Vector>& states);
std::vector<Vector> Unstack(std::span<const double> stacked, std::size_t p);

struct CentralizedEkfOptions {
  double initial_cov = 1.0;
  bool joseph_form = false;
  // Lower bound on the diagonal noise variances so a noise-free system
  // still has an invertible innovation covariance.
  double min_variance = 1e-12;
};

// Transition and observation maps over the stacked state.
DynamicsSpec CentralizedDynamics(const GroundTruthSystem& system,
                                 const CentralizedEkfOptions& options);

// Runs the stacked EKF from a zero mean over the whole trajectory. Element t
// holds the predicted and corrected estimates after observing y(t).
absl::StatusOr<std::vector<EkfState>> RunCentralizedEkf(
    const GroundTruthSystem& system, const Trajectory& trajectory,
    const CentralizedEkfOptions& options);

struct OracleRun {
  std::size_t latent_dim = 0;
  std::vector<Vector> corrected;  // [t], stacked
  std::vector<Vector> predicted;  // [t], stacked
  GatParams gat;                  // fitted on corrected states
  std::vector<double> epoch_loss;
  std::size_t val_begin = 0;
  // Validation window, row i is absolute time val_begin + i.
  std::vector<Vector> alpha;
  std::vector<std::vector<Matrix>> jacobian;
  double preactivation_min = 0.0;
  double preactivation_max = 0.0;
};

// Fits the oracle GAT on (h^_o(t-1) -> h^_o(t)) over the training targets
// with the same optimizer, batch size and number of epochs the server got.
absl::StatusOr<OracleRun> RunOracle(const ExperimentReport& report);

// One model's view of the validation window.
struct BoundInputs {
  std::size_t begin = 0;
  StateSequence predicted;       // [t][m], the model's prediction at t
  StateSequence prev_corrected;  // [t][m], its input state at t-1
  std::vector<Vector> alpha;     // [t][edge]
  std::vector<std::vector<Matrix>> jacobian;  // [t][edge]
  double preactivation_min = 0.0;
  double preactivation_max = 0.0;
};

BoundInputs ServerBoundInputs(const ExperimentReport& report);
BoundInputs OracleBoundInputs(const OracleRun& oracle);

struct BoundReport {
  std::size_t begin = 0;
  Vector eps1;           // [t] max_m ||h~_s - h~_o||
  Vector eps2;           // [t] max_m ||h^_c - h^_o|| at t-1
  Vector sigma_min_hc;   // [t] smallest singular value of [h^_c,m(t-1)]_m
  std::vector<Vector> alpha_gap;  // [t][m] ||alpha_m^o - alpha_m^s||
  std::vector<Vector> jac_gap;    // [t][edge] ||J^s - J^o||_F
  double preactivation_min = 0.0;
  double preactivation_max = 0.0;
  // Running maxima of eps1 and eps2 grew by < 1% over the last 100 steps
  // (or the whole window when shorter).
  bool running_max_stable = false;

  double MeanEps() const;  // mean over t of eps1 + eps2
  double MeanAlphaGap() const;
  double MeanJacobianGap() const;
};

// `server` supplies the corrected inputs for sigma_min(H_c). Mismatched
// windows or shapes are shape errors.
absl::StatusOr<BoundReport> ComputeBounds(const GatParams& params,
                                          const BoundInputs& server,
                                          const BoundInputs& oracle);

struct NoiseSweepPoint {
  double scale = 1.0;
  double mean_eps = 0.0;
  double mean_alpha_gap = 0.0;
  double mean_jac_gap = 0.0;
};

// Scales sigma_q and sigma_r by each factor, trains, fits the oracle and
// summarizes the bound report. Runs points on up to `workers` threads.
absl::StatusOr<std::vector<NoiseSweepPoint>> NoiseSweep(
    const ExperimentConfig& base, const std::vector<double>& scales,
    int workers);

}  // namespace fedgat

#endif  // FEDGAT_ORACLE_H_
