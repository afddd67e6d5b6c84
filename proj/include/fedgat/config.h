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

// Experiment configuration and its flat `key = value` text format. Blank
// lines and text after '#' are ignored; unknown keys are errors.

#ifndef FEDGAT_CONFIG_H_
#define FEDGAT_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "fedgat/gat.h"

namespace fedgat {

struct PrivacyConfig {
  double sigma_ca = 0.0;  // client -> server channel noise std
  double sigma_g = 0.0;   // server -> client channel noise std
};

struct ExperimentConfig {
  // System.
  std::size_t num_clients = 3;
  std::size_t latent_dim = 1;
  std::size_t obs_dim = 8;
  std::size_t timesteps = 1000;
  double train_frac = 0.8;
  double sigma_q = 0.05;
  double sigma_r = 0.15;
  // Empty means Adjacency::Ring(num_clients).
  Adjacency adjacency;
  // Cycled when shorter than num_clients.
  std::vector<double> phi = {2.0, 2.5, 3.0};
  double init_state_std = 0.5;
  double gt_weight_scale = 2.0;
  double gt_attention_scale = 4.0;

  // Training.
  double lr_client = 1e-3;
  double lr_server = 1e-3;
  double eta1 = 1.0;
  double eta2 = 1.0;
  int epochs = 200;
  // Timesteps per round; 0 trains on the whole training slice each round.
  std::size_t batch_size = 1;
  std::size_t hidden_size = 128;
  int patience = 15;
  double min_rel_improvement = 1e-5;
  int freeze_patience = 15;
  double freeze_min_rel_improvement = 1e-5;
  double freeze_ema = 0.9;

  // Server GAT architecture.
  Activation activation = Activation::kTanh;
  WeightSharing weight_sharing = WeightSharing::kPerEdge;
  ScoreTransform score_transform = ScoreTransform::kPerEdge;
  bool leaky_relu = false;

  // Filters.
  double ekf_p0 = 1.0;
  bool joseph_form = false;

  // Protocol.
  PrivacyConfig privacy;
  std::size_t bytes_per_float = 4;

  // Fit the centralized oracle and write bound diagnostics on train.
  bool run_oracle = true;

  std::uint64_t seed = 5;

  Adjacency ResolvedAdjacency() const;
  double PhiFor(std::size_t client) const;
  GatOptions ServerGatOptions() const;
};

// Checks ranges and cross-field consistency; errors name the key.
absl::Status Validate(const ExperimentConfig& config);

// Parses the text format on top of the defaults. Errors carry the line
// number and key.
absl::StatusOr<ExperimentConfig> ParseConfig(absl::string_view text);
absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path);

// Applies a single `key = value` assignment.
absl::Status SetConfigValue(ExperimentConfig& config, absl::string_view key,
                            absl::string_view value);

// Canonical text form; ParseConfig(Serialize(c)) reproduces c.
std::string SerializeConfig(const ExperimentConfig& config);

}  // namespace fedgat

#endif  // FEDGAT_CONFIG_H_
