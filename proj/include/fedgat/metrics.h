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
// Interpretability metrics over validation-window edge series. Series are
// indexed [t][edge] with edge ids from GatParams::edges(); masked pairs have
// no edge id and are reported as zero (residuals) or missing (correlations)
// by the dense helpers.

#ifndef FEDGAT_METRICS_H_
#define FEDGAT_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "fedgat/gat.h"
#include "fedgat/numkit/matrix.h"

namespace fedgat {

std::optional<double> Pearson(std::span<const double> a,
                              std::span<const double> b);
// Pearson on average ranks, so ties are handled.
std::optional<double> Spearman(std::span<const double> a,
                               std::span<const double> b);

enum class ResidualAggregation {
  kPerEdgeOverTime,   // one value per edge
  kPerTimeOverEdges,  // one value per timestep
};

// l2 norms of (learned - truth).
absl::StatusOr<Vector> AttentionResiduals(
    const std::vector<Vector>& learned, const std::vector<Vector>& truth,
    ResidualAggregation aggregation = ResidualAggregation::kPerEdgeOverTime);

struct JacobianResidualResult {
  Vector residual;  // per edge
  // False where some entry series had zero variance in either input and the
  // raw difference was used for it instead.
  std::vector<bool> standardized;
};

// Per edge and Jacobian entry, both series are z-scored over the window
// before differencing; the per-edge value is the l2 norm over time and
// entries.
absl::StatusOr<JacobianResidualResult> JacobianResiduals(
    const std::vector<std::vector<Matrix>>& learned,
    const std::vector<std::vector<Matrix>>& truth);

// Pearson correlation between alpha_mn(t) and ||J_mn(t)||_F per edge;
// missing where either series is constant.
absl::StatusOr<std::vector<std::optional<double>>> AlphaJacobianCorrelation(
    const std::vector<Vector>& alpha,
    const std::vector<std::vector<Matrix>>& jacobian);

struct Similarity {
  std::optional<double> cosine;
  std::optional<double> pearson;
};
absl::StatusOr<Similarity> ComputeSimilarity(std::span<const double> a,
                                             std::span<const double> b);

// Flattens [t][edge] Jacobian series (t-major, then edge, then entries).
Vector FlattenJacobians(const std::vector<std::vector<Matrix>>& series);

// Dense num_nodes x num_nodes matrix of per-edge values; masked pairs and
// missing values get `fill`.
Matrix DenseEdgeMatrix(const GatParams& params,
                       std::span<const std::optional<double>> per_edge,
                       double fill);

// Entry (m, n): Pearson of alpha_mn over time between two models sharing
// the same adjacency.
absl::StatusOr<std::vector<std::optional<double>>> AlphaCrossCorrelation(
    const std::vector<Vector>& alpha_a, const std::vector<Vector>& alpha_b);

// Null baseline for attention residuals: each edge's ground-truth series is
// replaced by that of the next in-neighbour of the same target (cyclically,
// in source order) and compared with the original. Rows with a single
// in-edge give zero.
absl::StatusOr<std::vector<Vector>> PermutedAttention(
    const GatParams& params, const std::vector<Vector>& alpha);

}  // namespace fedgat

#endif  // FEDGAT_METRICS_H_
