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

// Single-layer, single-head graph attention transition over client states.
//
// For target node m with in-neighbourhood N(m) given by the adjacency row m:
//
//   z_mn  = W_mn h_n                         message along edge (m, n)
//   e_mn  = a_m . [ u_m || v_mn ]            edge score (optionally LeakyReLU)
//   alpha = softmax over n in N(m) of e_mn
//   s_m   = sum_n alpha_mn z_mn
//   out_m = act(s_m)
//
// where v_mn = S_mn h_n is the score-side projection of the source and u_m is
// the target-side projection. With per-edge score transforms S_mn = W_mn and
// u_m = W_mm h_m (identity when node m has no self-loop). With a shared score
// projection S_mn = P for every edge and u_m = P h_m. Scores carry no
// LeakyReLU unless GatOptions::leaky_relu is set.

#ifndef FEDGAT_GAT_H_
#define FEDGAT_GAT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "fedgat/numkit/matrix.h"
#include "fedgat/numkit/rng.h"

namespace fedgat {

enum class Activation { kTanh, kIdentity };
enum class WeightSharing { kPerEdge, kShared };
enum class ScoreTransform { kPerEdge, kSharedProjection };

std::string ToString(Activation a);
absl::StatusOr<Activation> ParseActivation(absl::string_view s);

// Square binary matrix; entry (m, n) == 1 means n is in the in-neighbourhood
// of m, i.e. n's state feeds m's prediction.
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(std::size_t n) : n_(n), bits_(n * n, 0) {}
  static absl::StatusOr<Adjacency> FromRows(
      const std::vector<std::vector<int>>& rows);
  static Adjacency FullyConnected(std::size_t n);
  // Self-loop, predecessor (m - 1 mod M) and, for node 0 only, successor.
  // For M = 3 this reproduces [[1,1,1],[1,1,0],[0,1,1]].
  static Adjacency Ring(std::size_t n);

  std::size_t size() const { return n_; }
  bool operator()(std::size_t m, std::size_t n) const {
    return bits_[m * n_ + n] != 0;
  }
  void Set(std::size_t m, std::size_t n, bool on) {
    bits_[m * n_ + n] = on ? 1 : 0;
  }
  std::size_t NumEdges() const;
  std::string ToString() const;  // "1 1 1; 1 1 0; 0 1 1"

  friend bool operator==(const Adjacency&, const Adjacency&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct GatOptions {
  Activation activation = Activation::kTanh;
  WeightSharing weight_sharing = WeightSharing::kPerEdge;
  ScoreTransform score_transform = ScoreTransform::kPerEdge;
  bool leaky_relu = false;
  double leaky_slope = 0.2;
};

struct Edge {
  std::size_t target;  // m
  std::size_t source;  // n
};

class GatParams {
 public:
  GatParams() = default;

  // All weights and attention vectors zero.
  static absl::StatusOr<GatParams> Zeros(Adjacency adjacency, std::size_t dim,
                                         GatOptions options = {});
  // W entries ~ N(0, weight_std^2), attention entries ~ N(0, attention_std^2).
  static absl::StatusOr<GatParams> Random(Adjacency adjacency, std::size_t dim,
                                          GatOptions options, SeededRng& rng,
                                          double weight_std,
                                          double attention_std);

  std::size_t num_nodes() const { return adjacency_.size(); }
  std::size_t dim() const { return dim_; }
  const GatOptions& options() const { return options_; }
  const Adjacency& adjacency() const { return adjacency_; }
  const std::vector<Edge>& edges() const { return edges_; }
  // Edge ids with target m, ordered by source.
  const std::vector<std::size_t>& in_edges(std::size_t m) const {
    return in_edges_[m];
  }
  // -1 when (m, n) is masked.
  int EdgeIndex(std::size_t m, std::size_t n) const {
    return edge_index_[m * num_nodes() + n];
  }

  const Matrix& weight(std::size_t edge) const {
    return weights_[weight_slot(edge)];
  }
  Matrix& mutable_weight(std::size_t edge) {
    ++version_;
    return weights_[weight_slot(edge)];
  }
  std::size_t weight_slot(std::size_t edge) const {
    return options_.weight_sharing == WeightSharing::kShared ? 0 : edge;
  }
  std::size_t num_weight_slots() const { return weights_.size(); }

  // Source-side score projection for an edge.
  const Matrix& score_matrix(std::size_t edge) const;
  // Target-side score projection of node m; nullptr means identity.
  const Matrix* self_score_matrix(std::size_t m) const;
  const Matrix& score_projection() const { return score_projection_; }
  Matrix& mutable_score_projection() {
    ++version_;
    return score_projection_;
  }

  // Length 2 * dim: first half scores the target, second half the source.
  const Vector& attention(std::size_t m) const { return attention_[m]; }
  Vector& mutable_attention(std::size_t m) {
    ++version_;
    return attention_[m];
  }

  // Flat parameter layout: weight slots, then the shared score projection
  // (only when ScoreTransform::kSharedProjection), then attention vectors.
  std::size_t NumParams() const;
  Vector Pack() const;
  absl::Status Unpack(std::span<const double> flat);

  // Bumped by every mutation; traces remember the version they saw.
  std::uint64_t version() const { return version_; }

 private:
  absl::Status Init(Adjacency adjacency, std::size_t dim, GatOptions options);

  Adjacency adjacency_;
  std::size_t dim_ = 0;
  GatOptions options_;
  std::vector<Edge> edges_;
  std::vector<int> edge_index_;
  std::vector<std::vector<std::size_t>> in_edges_;
  std::vector<Matrix> weights_;
  Matrix score_projection_;
  std::vector<Vector> attention_;
  std::uint64_t version_ = 0;
};

// Everything the backward pass and the Jacobian need from one forward call.
struct GatForwardTrace {
  std::vector<Vector> inputs;         // per node
  std::vector<Vector> messages;       // per edge, z_mn
  std::vector<Vector> source_scores;  // per edge, v_mn
  std::vector<Vector> target_scores;  // per node, u_m
  Vector raw_scores;                  // per edge, before LeakyReLU
  Vector scores;                      // per edge, e_mn
  Vector attention;                   // per edge, alpha_mn
  std::vector<Vector> preactivation;  // per node, s_m
  std::vector<Vector> outputs;        // per node
  std::uint64_t params_version = 0;
};

absl::StatusOr<GatForwardTrace> GatForward(const GatParams& params,
                                           std::span<const Vector> states);

struct GatGradients {
  std::vector<Matrix> weights;  // per weight slot
  Matrix score_projection;      // empty unless shared projection
  std::vector<Vector> attention;
  std::vector<Vector> inputs;  // adjoint wrt each node's input state

  // Same order as GatParams::Pack().
  Vector Flatten() const;
  GatGradients& operator+=(const GatGradients& other);
};

absl::StatusOr<GatGradients> GatBackward(const GatParams& params,
                                         const GatForwardTrace& trace,
                                         std::span<const Vector> grad_outputs);

// Two contributions to d out_m / d h_n.
struct JacobianPathways {
  // diag(act'(s_m)) * alpha_mn * W_mn
  Matrix direct;
  // diag(act'(s_m)) * sum_r z_mr alpha_mr (delta_rn - alpha_mn) de_mn/dh_n,
  // plus, only with LeakyReLU scores and n == m, the target-side score term
  // (it cancels inside the softmax otherwise).
  Matrix competition;
};

absl::StatusOr<JacobianPathways> InputJacobianPathways(
    const GatParams& params, const GatForwardTrace& trace, std::size_t m,
    std::size_t n);

// d out_m / d h_n for an unmasked edge; direct + competition pathways.
absl::StatusOr<Matrix> InputJacobian(const GatParams& params,
                                     const GatForwardTrace& trace,
                                     std::size_t m, std::size_t n);

}  // namespace fedgat

#endif  // FEDGAT_GAT_H_
