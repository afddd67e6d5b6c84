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

#include "gtest/gtest.h"
#include "testing/finite_difference.h"

namespace fedgat {
namespace {

Adjacency ThreeNode() {
  return *Adjacency::FromRows({{1, 1, 1}, {1, 1, 0}, {0, 1, 1}});
}

GroundTruthSystem MakeSystem(double sigma_q, double sigma_r,
                             std::size_t p = 1, std::uint64_t seed = 7) {
  GroundTruthOptions opts;
  opts.adjacency = ThreeNode();
  opts.latent_dim = p;
  opts.sigma_q = sigma_q;
  opts.sigma_r = sigma_r;
  SeededRng rng(seed);
  auto sys = MakeGroundTruthSystem(opts, rng);
  EXPECT_TRUE(sys.ok()) << sys.status();
  return *std::move(sys);
}

TEST(SsmSynthTest, ShapesMatchConfiguration) {
  const GroundTruthSystem sys = MakeSystem(0.05, 0.15, 2);
  SeededRng rng(1);
  auto traj = Generate(sys, 30, rng);
  ASSERT_TRUE(traj.ok()) << traj.status();
  ASSERT_EQ(traj->length(), 30u);
  for (std::size_t t = 0; t < 30; ++t) {
    ASSERT_EQ(traj->latent[t].size(), 3u);
    ASSERT_EQ(traj->observations[t][2].size(), 8u);
    ASSERT_EQ(traj->latent[t][1].size(), 2u);
    ASSERT_EQ(traj->attention_gt[t].size(), 7u);
    ASSERT_EQ(traj->jacobian_gt[t].size(), 7u);
  }
}

TEST(SsmSynthTest, NoiseFreeStatesStayInTanhRange) {
  const GroundTruthSystem sys = MakeSystem(0.0, 0.0);
  SeededRng rng(2);
  auto traj = Generate(sys, 200, rng);
  ASSERT_TRUE(traj.ok());
  for (const auto& step : traj->latent) {
    for (const Vector& h : step) EXPECT_LE(std::abs(h[0]), 1.0);
  }
  for (const auto& step : traj->observations) {
    for (const Vector& y : step) {
      for (double v : y) EXPECT_LE(std::abs(v), 1.0);
    }
  }
}

TEST(SsmSynthTest, AttentionRowsAreDistributionsOverNeighbors) {
  const GroundTruthSystem sys = MakeSystem(0.05, 0.15);
  SeededRng rng(3);
  auto traj = Generate(sys, 100, rng);
  ASSERT_TRUE(traj.ok());
  const auto& edges = sys.transition.edges();
  // Only unmasked edges are represented at all.
  for (const Edge& e : edges) EXPECT_TRUE(ThreeNode()(e.target, e.source));
  for (const Vector& alpha : traj->attention_gt) {
    double row[3] = {0, 0, 0};
    for (std::size_t k = 0; k < edges.size(); ++k) {
      EXPECT_GT(alpha[k], 0.0);
      row[edges[k].target] += alpha[k];
    }
    for (double s : row) EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(SsmSynthTest, JacobianMatchesFiniteDifferenceOfMeanTransition) {
  const GroundTruthSystem sys = MakeSystem(0.05, 0.15, 2);
  SeededRng rng(4);
  auto traj = Generate(sys, 5, rng);
  ASSERT_TRUE(traj.ok());
  // J_gt at t is evaluated at h_{t-1} = latent[t-1].
  const std::vector<Vector>& prev = traj->latent[2];
  const auto& edges = sys.transition.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    auto f = [&](const Vector& hn) {
      std::vector<Vector> x = prev;
      x[e.source] = hn;
      return GatForward(sys.transition, x)->outputs[e.target];
    };
    const Matrix num = testing::NumericalJacobian(f, prev[e.source]);
    EXPECT_LT(testing::RelativeError(traj->jacobian_gt[3][k].data(),
                                     num.data()),
              1e-6);
  }
}

TEST(SsmSynthTest, SameSeedSameTrajectory) {
  const GroundTruthSystem a = MakeSystem(0.05, 0.15, 1, 11);
  const GroundTruthSystem b = MakeSystem(0.05, 0.15, 1, 11);
  SeededRng ra(5), rb(5);
  auto ta = Generate(a, 50, ra);
  auto tb = Generate(b, 50, rb);
  ASSERT_TRUE(ta.ok() && tb.ok());
  EXPECT_EQ(ta->latent, tb->latent);
  EXPECT_EQ(ta->observations, tb->observations);
  SeededRng rc(6);
  auto tc = Generate(a, 50, rc);
  EXPECT_NE(ta->latent, tc->latent);
}

TEST(SsmSynthTest, SplitUsesFloorConvention) {
  const GroundTruthSystem sys = MakeSystem(0.05, 0.15);
  SeededRng rng(8);
  auto traj = Generate(sys, 10, rng);
  ASSERT_TRUE(traj.ok());
  auto split = Split(*traj, 0.85);
  ASSERT_TRUE(split.ok());
  EXPECT_EQ(split->first.length(), 8u);
  EXPECT_EQ(split->second.length(), 2u);
  EXPECT_EQ(split->second.start_time, 8u);
  EXPECT_EQ(split->second.latent[0], traj->latent[8]);
  EXPECT_EQ(*TrainLength(1000, 0.8), 800u);
}

TEST(SsmSynthTest, SplitRejectsDegenerateFractions) {
  const GroundTruthSystem sys = MakeSystem(0.05, 0.15);
  SeededRng rng(9);
  auto traj = Generate(sys, 10, rng);
  ASSERT_TRUE(traj.ok());
  for (double frac : {0.0, 1.0, -0.2, 1.5, 0.05}) {
    EXPECT_EQ(Split(*traj, frac).status().code(),
              absl::StatusCode::kInvalidArgument)
        << frac;
  }
}

TEST(SsmSynthTest, RejectsNegativeNoiseAndMissingSelfLoop) {
  GroundTruthOptions opts;
  opts.adjacency = ThreeNode();
  opts.sigma_r = -1.0;
  SeededRng rng(1);
  EXPECT_EQ(MakeGroundTruthSystem(opts, rng).status().code(),
            absl::StatusCode::kInvalidArgument);
  opts.sigma_r = 0.1;
  opts.adjacency = *Adjacency::FromRows({{0, 1}, {1, 1}});
  EXPECT_EQ(MakeGroundTruthSystem(opts, rng).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(SsmSynthTest, MeasurementLinearizationMatchesFiniteDifference) {
  const GroundTruthSystem sys = MakeSystem(0.05, 0.15, 3);
  const TanhMeasurement& g = sys.measurements[1];
  const Vector h{0.3, -0.5, 0.8};
  const Linearization lin = g.Linearize(h);
  const Matrix num = testing::NumericalJacobian(
      [&](const Vector& x) { return g.Evaluate(x); }, h);
  EXPECT_LT(testing::RelativeError(lin.jacobian.data(), num.data()), 1e-7);
}

}  // namespace
}  // namespace fedgat
