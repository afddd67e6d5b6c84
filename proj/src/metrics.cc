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
#include "fedgat/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "fedgat/status.h"

namespace fedgat {
namespace {

double Mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Population standard deviation.
double StdDev(std::span<const double> x, double mean) {
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return std::sqrt(s / static_cast<double>(x.size()));
}

Vector AverageRanks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  Vector ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

absl::Status CheckSeries(std::size_t a_len, std::size_t b_len,
                         absl::string_view what) {
  if (a_len != b_len) {
    return ShapeError(absl::StrCat(what, ": windows differ (", a_len, " vs ",
                                   b_len, " steps)"));
  }
  if (a_len == 0) return ShapeError(absl::StrCat(what, ": empty window"));
  return absl::OkStatus();
}

}  // namespace

std::optional<double> Pearson(std::span<const double> a,
                              std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) return std::nullopt;
  const double ma = Mean(a);
  const double mb = Mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::optional<double> Spearman(std::span<const double> a,
                               std::span<const double> b) {
  if (a.size() != b.size()) return std::nullopt;
  const Vector ra = AverageRanks(a);
  const Vector rb = AverageRanks(b);
  return Pearson(ra, rb);
}

absl::StatusOr<Vector> AttentionResiduals(const std::vector<Vector>& learned,
                                          const std::vector<Vector>& truth,
                                          ResidualAggregation aggregation) {
  FEDGAT_RETURN_IF_ERROR(
      CheckSeries(learned.size(), truth.size(), "attention residuals"));
  const std::size_t edges = truth.front().size();
  Vector out(aggregation == ResidualAggregation::kPerEdgeOverTime
                 ? edges
                 : truth.size(),
             0.0);
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (learned[t].size() != edges || truth[t].size() != edges) {
      return ShapeError(absl::StrCat("attention residuals: edge count at t=", t));
    }
    for (std::size_t k = 0; k < edges; ++k) {
      const double d = learned[t][k] - truth[t][k];
      out[aggregation == ResidualAggregation::kPerEdgeOverTime ? k : t] += d * d;
    }
  }
  for (double& v : out) v = std::sqrt(v);
  return out;
}

absl::StatusOr<JacobianResidualResult> JacobianResiduals(
    const std::vector<std::vector<Matrix>>& learned,
    const std::vector<std::vector<Matrix>>& truth) {
  FEDGAT_RETURN_IF_ERROR(
      CheckSeries(learned.size(), truth.size(), "jacobian residuals"));
  const std::size_t steps = truth.size();
  const std::size_t edges = truth.front().size();
  JacobianResidualResult out;
  out.residual.assign(edges, 0.0);
  out.standardized.assign(edges, true);
  Vector a(steps), b(steps);
  for (std::size_t k = 0; k < edges; ++k) {
    const std::size_t entries = truth.front()[k].data().size();
    for (std::size_t e = 0; e < entries; ++e) {
      for (std::size_t t = 0; t < steps; ++t) {
        if (learned[t].size() != edges || truth[t].size() != edges ||
            learned[t][k].data().size() != entries ||
            truth[t][k].data().size() != entries) {
          return ShapeError(
              absl::StrCat("jacobian residuals: block shape at t=", t));
        }
        a[t] = learned[t][k].data()[e];
        b[t] = truth[t][k].data()[e];
      }
      const double ma = Mean(a), mb = Mean(b);
      const double sa = StdDev(a, ma), sb = StdDev(b, mb);
      const bool z = sa > 0.0 && sb > 0.0;
      if (!z) out.standardized[k] = false;
      for (std::size_t t = 0; t < steps; ++t) {
        const double d = z ? (a[t] - ma) / sa - (b[t] - mb) / sb : a[t] - b[t];
        out.residual[k] += d * d;
      }
    }
    out.residual[k] = std::sqrt(out.residual[k]);
  }
  return out;
}

absl::StatusOr<std::vector<std::optional<double>>> AlphaJacobianCorrelation(
    const std::vector<Vector>& alpha,
    const std::vector<std::vector<Matrix>>& jacobian) {
  FEDGAT_RETURN_IF_ERROR(
      CheckSeries(alpha.size(), jacobian.size(), "alpha/jacobian correlation"));
  const std::size_t edges = alpha.front().size();
  std::vector<std::optional<double>> out(edges);
  Vector a(alpha.size()), j(alpha.size());
  for (std::size_t k = 0; k < edges; ++k) {
    for (std::size_t t = 0; t < alpha.size(); ++t) {
      if (alpha[t].size() != edges || jacobian[t].size() != edges) {
        return ShapeError(
            absl::StrCat("alpha/jacobian correlation: edge count at t=", t));
      }
      a[t] = alpha[t][k];
      j[t] = FrobeniusNorm(jacobian[t][k]);
    }
    out[k] = Pearson(a, j);
  }
  return out;
}

absl::StatusOr<Similarity> ComputeSimilarity(std::span<const double> a,
                                             std::span<const double> b) {
  FEDGAT_RETURN_IF_ERROR(CheckSeries(a.size(), b.size(), "similarity"));
  Similarity s;
  const double na = Norm(a), nb = Norm(b);
  if (na > 0.0 && nb > 0.0) {
    s.cosine = std::clamp(Dot(a, b) / (na * nb), -1.0, 1.0);
  }
  s.pearson = Pearson(a, b);
  return s;
}

Vector FlattenJacobians(const std::vector<std::vector<Matrix>>& series) {
  Vector out;
  for (const auto& step : series) {
    for (const Matrix& j : step) {
      out.insert(out.end(), j.data().begin(), j.data().end());
    }
  }
  return out;
}

Matrix DenseEdgeMatrix(const GatParams& params,
                       std::span<const std::optional<double>> per_edge,
                       double fill) {
  const std::size_t n = params.num_nodes();
  Matrix out(n, n);
  for (double& v : out.data()) v = fill;
  const auto& edges = params.edges();
  for (std::size_t k = 0; k < edges.size() && k < per_edge.size(); ++k) {
    if (per_edge[k].has_value()) {
      out(edges[k].target, edges[k].source) = *per_edge[k];
    }
  }
  return out;
}

absl::StatusOr<std::vector<std::optional<double>>> AlphaCrossCorrelation(
    const std::vector<Vector>& alpha_a, const std::vector<Vector>& alpha_b) {
  FEDGAT_RETURN_IF_ERROR(
      CheckSeries(alpha_a.size(), alpha_b.size(), "alpha cross-correlation"));
  const std::size_t edges = alpha_a.front().size();
  std::vector<std::optional<double>> out(edges);
  Vector a(alpha_a.size()), b(alpha_a.size());
  for (std::size_t k = 0; k < edges; ++k) {
    for (std::size_t t = 0; t < alpha_a.size(); ++t) {
      if (alpha_a[t].size() != edges || alpha_b[t].size() != edges) {
        return ShapeError(
            absl::StrCat("alpha cross-correlation: edge count at t=", t));
      }
      a[t] = alpha_a[t][k];
      b[t] = alpha_b[t][k];
    }
    out[k] = Pearson(a, b);
  }
  return out;
}

absl::StatusOr<std::vector<Vector>> PermutedAttention(
    const GatParams& params, const std::vector<Vector>& alpha) {
  const std::size_t edges = params.edges().size();
  std::vector<std::size_t> next(edges);
  for (std::size_t m = 0; m < params.num_nodes(); ++m) {
    const std::vector<std::size_t>& row = params.in_edges(m);
    for (std::size_t j = 0; j < row.size(); ++j) {
      next[row[j]] = row[(j + 1) % row.size()];
    }
  }
  std::vector<Vector> out;
  out.reserve(alpha.size());
  for (std::size_t t = 0; t < alpha.size(); ++t) {
    if (alpha[t].size() != edges) {
      return ShapeError(absl::StrCat("permuted attention: edge count at t=", t));
    }
    Vector row(edges);
    for (std::size_t k = 0; k < edges; ++k) row[k] = alpha[t][next[k]];
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace fedgat
