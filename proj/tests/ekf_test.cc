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

#include <algorithm>
#include <cmath>

#include "fedgat/numkit/linalg.h"
#include "fedgat/numkit/rng.h"
#include "gtest/gtest.h"
#include "testing/linear_kf.h"

namespace fedgat {
namespace {

using ::fedgat::testing::LinearKf;

LinearizedMap ScaledTanh(double phi) {
  return [phi](std::span<const double> h) -> absl::StatusOr<Linearization> {
    Linearization out{Vector(h.size()), Matrix(h.size(), h.size())};
    for (std::size_t i = 0; i < h.size(); ++i) {
      out.value[i] = std::tanh(phi * h[i]);
      out.jacobian(i, i) = phi * (1.0 - out.value[i] * out.value[i]);
    }
    return out;
  };
}

Matrix RandomMatrix(SeededRng& rng, std::size_t r, std::size_t c, double s) {
  Matrix m(r, c);
  for (double& x : m.data()) x = s * rng.Normal();
  return m;
}

Matrix RandomSpd(SeededRng& rng, std::size_t n, double floor) {
  Matrix a = RandomMatrix(rng, n, n, 1.0);
  Matrix s = Multiply(a, a.Transposed());
  for (std::size_t i = 0; i < n; ++i) s(i, i) += floor;
  return s;
}

double MaxAbsDiff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

TEST(EkfTest, IdentityDynamicsPredictAddsProcessNoise) {
  DynamicsSpec dyn{AffineMap(Matrix::Identity(2)),
                   AffineMap(Matrix::Identity(2)), 0.01 * Matrix::Identity(2),
                   Matrix::Identity(2)};
  EkfState s = EkfInit({0.3, -0.2}, Matrix::Identity(2));
  auto pred = EkfPredict(s, dyn);
  ASSERT_TRUE(pred.ok()) << pred.status();
  EXPECT_EQ(pred->predicted_mean, (Vector{0.3, -0.2}));
  EXPECT_DOUBLE_EQ(pred->predicted_cov(0, 0), 1.01);
  EXPECT_DOUBLE_EQ(pred->predicted_cov(0, 1), 0.0);
}

TEST(EkfTest, ScaledTanhLinearizesToPhiAtOrigin) {
  DynamicsSpec dyn{ScaledTanh(2.0), AffineMap(Matrix::Identity(1)),
                   Matrix{{0.0}}, Matrix{{1.0}}};
  auto pred = EkfPredict(EkfInit({0.0}, Matrix{{0.5}}), dyn);
  ASSERT_TRUE(pred.ok());
  EXPECT_DOUBLE_EQ(pred->predicted_mean[0], 0.0);
  // F = 2, so P~ = 4 * 0.5.
  EXPECT_DOUBLE_EQ(pred->predicted_cov(0, 0), 2.0);
}

TEST(EkfTest, HugeObservationNoiseIgnoresMeasurement) {
  DynamicsSpec dyn{ScaledTanh(2.5), AffineMap(Matrix::Identity(1)),
                   Matrix{{0.0025}}, Matrix{{1e12}}};
  auto pred = EkfPredict(EkfInit({0.4}, Matrix{{0.1}}), dyn);
  ASSERT_TRUE(pred.ok());
  auto corr = EkfCorrect(*pred, dyn, Vector{50.0});
  ASSERT_TRUE(corr.ok());
  EXPECT_NEAR(corr->corrected_mean[0], pred->predicted_mean[0], 1e-9);
  EXPECT_NEAR(corr->corrected_cov(0, 0), pred->predicted_cov(0, 0), 1e-12);
}

TEST(EkfTest, ZeroInnovationLeavesMeanUnchanged) {
  DynamicsSpec dyn{ScaledTanh(3.0), ScaledTanh(1.0), Matrix{{0.01}},
                   Matrix{{0.02}}};
  auto pred = EkfPredict(EkfInit({0.2}, Matrix{{0.3}}), dyn);
  ASSERT_TRUE(pred.ok());
  const Vector y{std::tanh(pred->predicted_mean[0])};
  auto corr = EkfCorrect(*pred, dyn, y);
  ASSERT_TRUE(corr.ok());
  EXPECT_DOUBLE_EQ(corr->corrected_mean[0], pred->predicted_mean[0]);
  EXPECT_LT(corr->corrected_cov(0, 0), pred->predicted_cov(0, 0));
}

TEST(EkfTest, ObservationDimMismatchIsShapeError) {
  DynamicsSpec dyn{AffineMap(Matrix::Identity(2)),
                   AffineMap(Matrix::Identity(2)), Matrix::Identity(2),
                   Matrix::Identity(2)};
  auto corr = EkfCorrect(EkfInit({0, 0}, Matrix::Identity(2)), dyn,
                         Vector{1.0, 2.0, 3.0});
  EXPECT_EQ(corr.status().code(), absl::StatusCode::kInvalidArgument);
}

TEST(EkfTest, NonFinitePredictionIsDivergence) {
  LinearizedMap blowup = [](std::span<const double> h)
      -> absl::StatusOr<Linearization> {
    return Linearization{Vector(h.size(), INFINITY),
                         Matrix::Identity(h.size())};
  };
  DynamicsSpec dyn{blowup, AffineMap(Matrix::Identity(1)), Matrix{{0.0}},
                   Matrix{{1.0}}};
  auto pred = EkfPredict(EkfInit({0.0}, Matrix{{1.0}}), dyn);
  EXPECT_EQ(pred.status().code(), absl::StatusCode::kInternal);
}

class LinearOracleTest : public ::testing::TestWithParam<bool> {};

// On linear-Gaussian systems the EKF reduces to the Kalman filter.
TEST_P(LinearOracleTest, MatchesTextbookKalmanFilter) {
  const bool joseph = GetParam();
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    SeededRng rng(1234, trial);
    const std::size_t p = 1 + trial % 4;
    const std::size_t d = 1 + (trial * 7) % 5;
    Matrix a = RandomMatrix(rng, p, p, 0.5 / std::sqrt(p));
    Matrix c = RandomMatrix(rng, d, p, 1.0);
    Matrix q = RandomSpd(rng, p, 0.1);
    q *= 0.05;
    Matrix r = RandomSpd(rng, d, 0.5);
    r *= 0.1;
    DynamicsSpec dyn{AffineMap(a), AffineMap(c), q, r, joseph};

    Vector x0(p);
    for (double& v : x0) v = rng.Normal();
    Matrix p0 = RandomSpd(rng, p, 0.5);
    LinearKf kf{a, c, q, r, x0, p0};
    EkfState s = EkfInit(x0, p0);
    for (int t = 0; t < 50; ++t) {
      Vector y(d);
      for (double& v : y) v = rng.Normal();
      kf.Step(y);
      auto pred = EkfPredict(s, dyn);
      ASSERT_TRUE(pred.ok());
      auto corr = EkfCorrect(*pred, dyn, y);
      ASSERT_TRUE(corr.ok());
      s = *std::move(corr);
      for (std::size_t i = 0; i < p; ++i) {
        ASSERT_NEAR(s.corrected_mean[i], kf.x[i], 1e-9) << "trial " << trial;
      }
      ASSERT_LT(MaxAbsDiff(s.corrected_cov, kf.p), 1e-9) << "trial " << trial;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Forms, LinearOracleTest, ::testing::Bool());

// Runs the scaled-tanh filter on a noisy tanh system for T steps.
std::vector<EkfState> RunTanhFilter(std::size_t p, std::size_t d, double phi,
                                    std::size_t steps, bool joseph) {
  SeededRng rng(99, p * 10 + d);
  Matrix w = RandomMatrix(rng, d, p, 1.0 / std::sqrt(p));
  LinearizedMap obs = [w](std::span<const double> h)
      -> absl::StatusOr<Linearization> {
    Linearization out{Apply(w, h), w};
    for (std::size_t i = 0; i < out.value.size(); ++i) {
      out.value[i] = std::tanh(out.value[i]);
      const double s = 1.0 - out.value[i] * out.value[i];
      for (double& x : out.jacobian.row(i)) x *= s;
    }
    return out;
  };
  DynamicsSpec dyn{ScaledTanh(phi), obs, 0.0025 * Matrix::Identity(p),
                   0.0225 * Matrix::Identity(d), joseph};
  Vector h(p, 0.1);
  EkfState s = EkfInit(Vector(p, 0.0), Matrix::Identity(p));
  std::vector<EkfState> out;
  for (std::size_t t = 0; t < steps; ++t) {
    for (double& v : h) v = std::tanh(phi * v) + 0.05 * rng.Normal();
    Vector y = Apply(w, h);
    for (double& v : y) v = std::tanh(v) + 0.15 * rng.Normal();
    auto pred = EkfPredict(s, dyn);
    EXPECT_TRUE(pred.ok());
    auto corr = EkfCorrect(*pred, dyn, y);
    EXPECT_TRUE(corr.ok());
    s = *std::move(corr);
    out.push_back(s);
  }
  return out;
}

TEST(EkfTest, CovariancesStaySymmetricPsdOverLongRun) {
  for (bool joseph : {false, true}) {
    const auto states = RunTanhFilter(3, 8, 2.0, 1000, joseph);
    for (const EkfState& s : states) {
      for (const Matrix* m : {&s.corrected_cov, &s.predicted_cov}) {
        for (std::size_t i = 0; i < m->rows(); ++i) {
          for (std::size_t j = 0; j < m->cols(); ++j) {
            ASSERT_EQ((*m)(i, j), (*m)(j, i));
          }
        }
        auto eig = SymmetricEigenvalues(*m);
        ASSERT_TRUE(eig.ok());
        ASSERT_GE(eig->front(), -1e-12);
      }
    }
  }
}

TEST(EkfTest, RunningMaxOfCovarianceNormStabilizes) {
  const auto states = RunTanhFilter(2, 8, 2.5, 1000, false);
  double first_half = 0.0, second_half = 0.0;
  for (std::size_t t = 0; t < states.size(); ++t) {
    const double n = FrobeniusNorm(states[t].corrected_cov);
    (t < 500 ? first_half : second_half) = std::max(
        t < 500 ? first_half : second_half, n);
  }
  EXPECT_TRUE(std::isfinite(second_half));
  // The running max is reached early and not exceeded later.
  EXPECT_LE(second_half, first_half * 1.05);
}

}  // namespace
}  // namespace fedgat
