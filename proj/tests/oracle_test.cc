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

#include "fedgat/oracle.h"

#include <cmath>
#include <vector>

#include "fedgat/numkit/linalg.h"
#include "gtest/gtest.h"

namespace fedgat {
namespace {

ExperimentConfig SmallConfig() {
  ExperimentConfig c;
  c.timesteps = 60;
  c.hidden_size = 8;
  c.epochs = 2;
  c.batch_size = 8;
  return c;
}

TEST(OracleTest, ExtractPartitionsTheStackedState) {
  const std::vector<Vector> states{{1, 2}, {3, 4}, {5, 6}};
  const Vector stacked = Stack(states);
  ASSERT_EQ(stacked.size(), 6u);
  std::vector<int> hits(6, 0);
  for (std::size_t m = 0; m < 3; ++m) {
    const Vector block = Extract(stacked, m, 2);
    ASSERT_EQ(block.size(), 2u);
    EXPECT_EQ(block, states[m]);
    for (std::size_t k = 0; k < 2; ++k) ++hits[m * 2 + k];
  }
  EXPECT_EQ(hits, std::vector<int>(6, 1));
  EXPECT_EQ(Unstack(stacked, 2), states);
}

TEST(OracleTest, TracksNoiseFreeLatentAfterBurnIn) {
  ExperimentConfig c;
  c.timesteps = 200;
  c.sigma_q = 0.0;
  c.sigma_r = 1e-9;
  GroundTruthSystem sys;
  Trajectory traj;
  ASSERT_TRUE(GenerateData(c, &sys, &traj).ok());
  sys.sigma_r = 0.0;
  auto states = RunCentralizedEkf(sys, traj, CentralizedEkfOptions());
  ASSERT_TRUE(states.ok()) << states.status();
  double worst = 0.0;
  for (std::size_t t = 50; t < traj.length(); ++t) {
    const Vector truth = Stack(traj.latent[t]);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      worst = std::max(worst, std::abs((*states)[t].corrected_mean[i] - truth[i]));
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(OracleTest, StackedTransitionJacobianHasZeroMaskedBlocks) {
  ExperimentConfig c = SmallConfig();
  c.latent_dim = 2;
  GroundTruthSystem sys;
  Trajectory traj;
  ASSERT_TRUE(GenerateData(c, &sys, &traj).ok());
  const DynamicsSpec dyn = CentralizedDynamics(sys, CentralizedEkfOptions());
  auto lin = dyn.transition(Stack(traj.latent[3]));
  ASSERT_TRUE(lin.ok());
  const Adjacency adj = c.ResolvedAdjacency();
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t n = 0; n < 3; ++n) {
      if (adj(m, n)) continue;
      for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t k = 0; k < 2; ++k) {
          EXPECT_EQ(lin->jacobian(m * 2 + r, n * 2 + k), 0.0);
        }
      }
    }
  }
  EXPECT_EQ(Stack(GatForward(sys.transition, traj.latent[3])->outputs),
            lin->value);
}

TEST(OracleTest, RunIsDeterministicAndShaped) {
  auto report = RunExperiment(SmallConfig());
  ASSERT_TRUE(report.ok()) << report.status();
  auto a = RunOracle(*report);
  auto b = RunOracle(*report);
  ASSERT_TRUE(a.ok() && b.ok()) << a.status();
  EXPECT_EQ(a->gat.Pack(), b->gat.Pack());
  EXPECT_EQ(a->alpha, b->alpha);
  EXPECT_EQ(a->epoch_loss.size(), static_cast<std::size_t>(report->epochs_run));
  EXPECT_EQ(a->alpha.size(), report->validation.alpha.size());
  EXPECT_EQ(a->val_begin, report->validation.begin);
  EXPECT_EQ(a->corrected.size(), report->trajectory.length());
}

TEST(OracleTest, IdenticalModelsHaveZeroGaps) {
  auto report = RunExperiment(SmallConfig());
  ASSERT_TRUE(report.ok());
  const BoundInputs server = ServerBoundInputs(*report);
  auto rep = ComputeBounds(report->server_params, server, server);
  ASSERT_TRUE(rep.ok()) << rep.status();
  for (std::size_t t = 0; t < rep->eps1.size(); ++t) {
    EXPECT_EQ(rep->eps1[t], 0.0);
    EXPECT_EQ(rep->eps2[t], 0.0);
    for (double g : rep->alpha_gap[t]) EXPECT_EQ(g, 0.0);
    for (double g : rep->jac_gap[t]) EXPECT_EQ(g, 0.0);
    EXPECT_GE(rep->sigma_min_hc[t], 0.0);
  }
  EXPECT_TRUE(rep->running_max_stable);
}

TEST(OracleTest, ShiftedInputsGiveExactStateGap) {
  auto report = RunExperiment(SmallConfig());
  ASSERT_TRUE(report.ok());
  const BoundInputs server = ServerBoundInputs(*report);
  BoundInputs shifted = server;
  for (auto& step : shifted.prev_corrected) {
    for (Vector& h : step) h[0] += 0.1;
  }
  auto rep = ComputeBounds(report->server_params, server, shifted);
  ASSERT_TRUE(rep.ok());
  for (double e : rep->eps2) EXPECT_NEAR(e, 0.1, 1e-12);
  for (double e : rep->eps1) EXPECT_EQ(e, 0.0);
}

TEST(OracleTest, DefaultRunReportsFiniteGapsPerClient) {
  auto report = RunExperiment(SmallConfig());
  ASSERT_TRUE(report.ok());
  auto oracle = RunOracle(*report);
  ASSERT_TRUE(oracle.ok());
  auto rep = ComputeBounds(report->server_params, ServerBoundInputs(*report),
                           OracleBoundInputs(*oracle));
  ASSERT_TRUE(rep.ok()) << rep.status();
  for (const Vector& g : rep->alpha_gap) {
    ASSERT_EQ(g.size(), 3u);
    for (double x : g) EXPECT_TRUE(std::isfinite(x) && x >= 0.0);
  }
  EXPECT_TRUE(std::isfinite(rep->MeanEps()));
  EXPECT_LE(rep->preactivation_min, rep->preactivation_max);
}

TEST(OracleTest, MismatchedWindowsAreRejected) {
  auto report = RunExperiment(SmallConfig());
  ASSERT_TRUE(report.ok());
  const BoundInputs server = ServerBoundInputs(*report);
  BoundInputs shorter = server;
  shorter.alpha.pop_back();
  EXPECT_EQ(ComputeBounds(report->server_params, server, shorter).status().code(),
            absl::StatusCode::kInvalidArgument);
  BoundInputs moved = server;
  moved.begin += 1;
  EXPECT_EQ(ComputeBounds(report->server_params, server, moved).status().code(),
            absl::StatusCode::kInvalidArgument);
}

// Largest eigenvalue of (H H^T)^{-1} by power iteration; its inverse square
// root is the smallest singular value of a wide full-row-rank H.
double PowerIterationSigmaMin(const Matrix& h) {
  const Matrix gram = Multiply(h, h.Transposed());
  const std::size_t n = gram.rows();
  Vector v(n, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    Matrix rhs(n, 1);
    for (std::size_t i = 0; i < n; ++i) rhs(i, 0) = v[i];
    const Matrix w = *SolveSpd(gram, rhs);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += w(i, 0) * w(i, 0);
    norm = std::sqrt(norm);
    lambda = 0.0;
    for (std::size_t i = 0; i < n; ++i) lambda += v[i] * w(i, 0);
    for (std::size_t i = 0; i < n; ++i) v[i] = w(i, 0) / norm;
  }
  return 1.0 / std::sqrt(lambda);
}

TEST(OracleTest, SigmaMinMatchesPowerIteration) {
  SeededRng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix h(3, 5);
    for (double& x : h.data()) x = rng.Normal();
    auto smin = MinSingularValue(h);
    ASSERT_TRUE(smin.ok());
    EXPECT_NEAR(*smin, PowerIterationSigmaMin(h), 1e-8);
  }
}

}  // namespace
}  // namespace fedgat
