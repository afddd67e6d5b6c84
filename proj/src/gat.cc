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

#include "fedgat/gat.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "fedgat/status.h"

namespace fedgat {
namespace {

double ActivationValue(Activation a, double x) {
  return a == Activation::kTanh ? std::tanh(x) : x;
}

// Derivative expressed through the forward output.
double ActivationSlope(Activation a, double out) {
  return a == Activation::kTanh ? 1.0 - out * out : 1.0;
}

double ScoreSlope(const GatOptions& o, double raw) {
  if (!o.leaky_relu) return 1.0;
  return raw > 0.0 ? 1.0 : o.leaky_slope;
}

void AddOuter(Matrix& acc, std::span<const double> col,
              std::span<const double> row) {
  for (std::size_t i = 0; i < col.size(); ++i) {
    auto r = acc.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) r[j] += col[i] * row[j];
  }
}

void AddScaled(Vector& acc, std::span<const double> v, double s) {
  for (std::size_t i = 0; i < v.size(); ++i) acc[i] += s * v[i];
}

absl::Status CheckTraceFresh(const GatParams& params,
                             const GatForwardTrace& trace) {
  if (trace.params_version != params.version() ||
      trace.inputs.size() != params.num_nodes() ||
      trace.attention.size() != params.edges().size()) {
    return ContractError("forward trace is stale or from other parameters");
  }
  return absl::OkStatus();
}

}  // namespace

std::string ToString(Activation a) {
  return a == Activation::kTanh ? "tanh" : "identity";
}

absl::StatusOr<Activation> ParseActivation(absl::string_view s) {
  const std::string lower = absl::AsciiStrToLower(s);
  if (lower == "tanh") return Activation::kTanh;
  if (lower == "identity" || lower == "linear") return Activation::kIdentity;
  return ArgumentError(absl::StrCat("unknown activation '", s, "'"));
}

absl::StatusOr<Adjacency> Adjacency::FromRows(
    const std::vector<std::vector<int>>& rows) {
  Adjacency out(rows.size());
  for (std::size_t m = 0; m < rows.size(); ++m) {
    if (rows[m].size() != rows.size()) {
      return ShapeError(absl::StrCat("adjacency is not square: row ", m,
                                     " has ", rows[m].size(), " entries, want ",
                                     rows.size()));
    }
    for (std::size_t n = 0; n < rows.size(); ++n) {
      const int v = rows[m][n];
      if (v != 0 && v != 1) {
        return ArgumentError(
            absl::StrCat("adjacency entry (", m, ",", n, ") = ", v,
                         " is not binary"));
      }
      out.Set(m, n, v == 1);
    }
  }
  return out;
}

Adjacency Adjacency::FullyConnected(std::size_t n) {
  Adjacency out(n);
  for (std::size_t i = 0; i < n * n; ++i) out.bits_[i] = 1;
  return out;
}

Adjacency Adjacency::Ring(std::size_t n) {
  Adjacency out(n);
  for (std::size_t m = 0; m < n; ++m) {
    out.Set(m, m, true);
    out.Set(m, (m + n - 1) % n, true);
  }
  if (n > 1) out.Set(0, 1, true);
  return out;
}

std::size_t Adjacency::NumEdges() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::string Adjacency::ToString() const {
  std::vector<std::string> rows;
  for (std::size_t m = 0; m < n_; ++m) {
    std::vector<int> r;
    for (std::size_t n = 0; n < n_; ++n) r.push_back((*this)(m, n) ? 1 : 0);
    rows.push_back(absl::StrJoin(r, " "));
  }
  return absl::StrJoin(rows, "; ");
}

absl::Status GatParams::Init(Adjacency adjacency, std::size_t dim,
                             GatOptions options) {
  if (dim == 0) return ArgumentError("GAT state dimension must be positive");
  if (adjacency.size() == 0) return ArgumentError("GAT needs at least 1 node");
  adjacency_ = std::move(adjacency);
  dim_ = dim;
  options_ = options;
  const std::size_t n = adjacency_.size();
  edge_index_.assign(n * n, -1);
  in_edges_.assign(n, {});
  edges_.clear();
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t src = 0; src < n; ++src) {
      if (!adjacency_(m, src)) continue;
      edge_index_[m * n + src] = static_cast<int>(edges_.size());
      in_edges_[m].push_back(edges_.size());
      edges_.push_back({m, src});
    }
  }
  const std::size_t slots =
      options_.weight_sharing == WeightSharing::kShared ? 1 : edges_.size();
  weights_.assign(slots, Matrix(dim, dim));
  score_projection_ = options_.score_transform == ScoreTransform::kSharedProjection
                          ? Matrix(dim, dim)
                          : Matrix();
  attention_.assign(n, Vector(2 * dim, 0.0));
  ++version_;
  return absl::OkStatus();
}

absl::StatusOr<GatParams> GatParams::Zeros(Adjacency adjacency,
                                           std::size_t dim,
                                           GatOptions options) {
  GatParams p;
  FEDGAT_RETURN_IF_ERROR(p.Init(std::move(adjacency), dim, options));
  return p;
}

absl::StatusOr<GatParams> GatParams::Random(Adjacency adjacency,
                                            std::size_t dim,
                                            GatOptions options, SeededRng& rng,
                                            double weight_std,
                                            double attention_std) {
  FEDGAT_ASSIGN_OR_RETURN(GatParams p,
                          Zeros(std::move(adjacency), dim, options));
  for (Matrix& w : p.weights_) {
    FEDGAT_RETURN_IF_ERROR(AddGaussianNoise(rng, w.data(), weight_std));
  }
  if (!p.score_projection_.empty()) {
    FEDGAT_RETURN_IF_ERROR(
        AddGaussianNoise(rng, p.score_projection_.data(), weight_std));
  }
  for (Vector& a : p.attention_) {
    FEDGAT_RETURN_IF_ERROR(AddGaussianNoise(rng, a, attention_std));
  }
  ++p.version_;
  return p;
}

const Matrix& GatParams::score_matrix(std::size_t edge) const {
  if (options_.score_transform == ScoreTransform::kSharedProjection) {
    return score_projection_;
  }
  return weight(edge);
}

const Matrix* GatParams::self_score_matrix(std::size_t m) const {
  if (options_.score_transform == ScoreTransform::kSharedProjection) {
    return &score_projection_;
  }
  const int self = EdgeIndex(m, m);
  return self < 0 ? nullptr : &weight(static_cast<std::size_t>(self));
}

std::size_t GatParams::NumParams() const {
  return weights_.size() * dim_ * dim_ + score_projection_.size() +
         attention_.size() * 2 * dim_;
}

Vector GatParams::Pack() const {
  Vector flat;
  flat.reserve(NumParams());
  for (const Matrix& w : weights_) {
    flat.insert(flat.end(), w.data().begin(), w.data().end());
  }
  flat.insert(flat.end(), score_projection_.data().begin(),
              score_projection_.data().end());
  for (const Vector& a : attention_) flat.insert(flat.end(), a.begin(), a.end());
  return flat;
}

absl::Status GatParams::Unpack(std::span<const double> flat) {
  if (flat.size() != NumParams()) {
    return ShapeError(absl::StrCat("GAT unpack: got ", flat.size(),
                                   " values, want ", NumParams()));
  }
  std::size_t off = 0;
  auto take = [&](std::span<double> dst) {
    std::copy_n(flat.begin() + off, dst.size(), dst.begin());
    off += dst.size();
  };
  for (Matrix& w : weights_) take(w.data());
  take(score_projection_.data());
  for (Vector& a : attention_) take(a);
  ++version_;
  return absl::OkStatus();
}

absl::StatusOr<GatForwardTrace> GatForward(const GatParams& params,
                                           std::span<const Vector> states) {
  const std::size_t num_nodes = params.num_nodes();
  const std::size_t p = params.dim();
  const GatOptions& opt = params.options();
  if (states.size() != num_nodes) {
    return ShapeError(absl::StrCat("GAT forward: got ", states.size(),
                                   " client states, want ", num_nodes));
  }
  for (std::size_t m = 0; m < num_nodes; ++m) {
    if (states[m].size() != p) {
      return ShapeError(absl::StrCat("GAT forward: state of client ", m,
                                     " has dim ", states[m].size(), ", want ",
                                     p));
    }
    if (params.in_edges(m).empty()) {
      return StructureError(
          absl::StrCat("client ", m, " has an empty neighbourhood"));
    }
  }

  const auto& edges = params.edges();
  GatForwardTrace tr;
  tr.params_version = params.version();
  tr.inputs.assign(states.begin(), states.end());
  tr.messages.resize(edges.size());
  tr.source_scores.resize(edges.size());
  tr.target_scores.resize(num_nodes);
  tr.raw_scores.assign(edges.size(), 0.0);
  tr.scores.assign(edges.size(), 0.0);
  tr.attention.assign(edges.size(), 0.0);
  tr.preactivation.assign(num_nodes, Vector(p, 0.0));
  tr.outputs.assign(num_nodes, Vector(p, 0.0));

  for (std::size_t m = 0; m < num_nodes; ++m) {
    const Matrix* self = params.self_score_matrix(m);
    tr.target_scores[m] = self ? Apply(*self, states[m]) : states[m];
  }

  for (std::size_t m = 0; m < num_nodes; ++m) {
    const Vector& a = params.attention(m);
    std::span<const double> a_target(a.data(), p);
    std::span<const double> a_source(a.data() + p, p);
    const double target_term = Dot(a_target, tr.target_scores[m]);
    double max_score = -INFINITY;
    for (std::size_t k : params.in_edges(m)) {
      const Vector& h = states[edges[k].source];
      tr.messages[k] = Apply(params.weight(k), h);
      tr.source_scores[k] =
          opt.score_transform == ScoreTransform::kPerEdge
              ? tr.messages[k]
              : Apply(params.score_matrix(k), h);
      const double raw = target_term + Dot(a_source, tr.source_scores[k]);
      tr.raw_scores[k] = raw;
      tr.scores[k] = raw * ScoreSlope(opt, raw);
      max_score = std::max(max_score, tr.scores[k]);
    }
    if (!std::isfinite(max_score)) {
      return NumericalError(
          absl::StrCat("non-finite edge score for client ", m));
    }
    double denom = 0.0;
    for (std::size_t k : params.in_edges(m)) {
      tr.attention[k] = std::exp(tr.scores[k] - max_score);
      denom += tr.attention[k];
    }
    for (std::size_t k : params.in_edges(m)) {
      tr.attention[k] /= denom;
      AddScaled(tr.preactivation[m], tr.messages[k], tr.attention[k]);
    }
    for (std::size_t i = 0; i < p; ++i) {
      tr.outputs[m][i] = ActivationValue(opt.activation, tr.preactivation[m][i]);
    }
    if (!AllFinite(tr.preactivation[m])) {
      return NumericalError(
          absl::StrCat("non-finite pre-activation for client ", m));
    }
  }
  return tr;
}

Vector GatGradients::Flatten() const {
  Vector flat;
  for (const Matrix& w : weights) {
    flat.insert(flat.end(), w.data().begin(), w.data().end());
  }
  flat.insert(flat.end(), score_projection.data().begin(),
              score_projection.data().end());
  for (const Vector& a : attention) flat.insert(flat.end(), a.begin(), a.end());
  return flat;
}

GatGradients& GatGradients::operator+=(const GatGradients& other) {
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] += other.weights[i];
  score_projection += other.score_projection;
  for (std::size_t i = 0; i < attention.size(); ++i) {
    AddScaled(attention[i], other.attention[i], 1.0);
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    AddScaled(inputs[i], other.inputs[i], 1.0);
  }
  return *this;
}

absl::StatusOr<GatGradients> GatBackward(const GatParams& params,
                                         const GatForwardTrace& trace,
                                         std::span<const Vector> grad_outputs) {
  FEDGAT_RETURN_IF_ERROR(CheckTraceFresh(params, trace));
  const std::size_t num_nodes = params.num_nodes();
  const std::size_t p = params.dim();
  const GatOptions& opt = params.options();
  if (grad_outputs.size() != num_nodes) {
    return ShapeError("GAT backward: grad_outputs has wrong client count");
  }
  for (const Vector& g : grad_outputs) {
    if (g.size() != p) return ShapeError("GAT backward: grad_output dim");
  }

  const auto& edges = params.edges();
  const bool shared_projection =
      opt.score_transform == ScoreTransform::kSharedProjection;
  GatGradients grads;
  grads.weights.assign(params.num_weight_slots(), Matrix(p, p));
  grads.score_projection = shared_projection ? Matrix(p, p) : Matrix();
  grads.attention.assign(num_nodes, Vector(2 * p, 0.0));
  grads.inputs.assign(num_nodes, Vector(p, 0.0));

  // Adds dL/dy for y = M h into the parameter and input adjoints.
  auto through_linear = [&](Matrix& grad_m, const Matrix& mat,
                            std::size_t node, std::span<const double> gy) {
    AddOuter(grad_m, gy, trace.inputs[node]);
    AddScaled(grads.inputs[node], ApplyTransposed(mat, gy), 1.0);
  };

  for (std::size_t m = 0; m < num_nodes; ++m) {
    Vector gs(p);
    for (std::size_t i = 0; i < p; ++i) {
      gs[i] = grad_outputs[m][i] *
              ActivationSlope(opt.activation, trace.outputs[m][i]);
    }
    const auto& in = params.in_edges(m);
    // Attention adjoints and the softmax Jacobian-vector product.
    double weighted = 0.0;
    Vector galpha(in.size());
    for (std::size_t j = 0; j < in.size(); ++j) {
      galpha[j] = Dot(gs, trace.messages[in[j]]);
      weighted += trace.attention[in[j]] * galpha[j];
    }
    const Vector& a = params.attention(m);
    std::span<const double> a_target(a.data(), p);
    std::span<const double> a_source(a.data() + p, p);
    Vector g_target(p, 0.0);
    for (std::size_t j = 0; j < in.size(); ++j) {
      const std::size_t k = in[j];
      const std::size_t n = edges[k].source;
      const double alpha = trace.attention[k];
      const double ge = alpha * (galpha[j] - weighted) *
                        ScoreSlope(opt, trace.raw_scores[k]);

      for (std::size_t i = 0; i < p; ++i) {
        grads.attention[m][i] += ge * trace.target_scores[m][i];
        grads.attention[m][p + i] += ge * trace.source_scores[k][i];
      }
      AddScaled(g_target, a_target, ge);

      Vector gz(p);
      for (std::size_t i = 0; i < p; ++i) gz[i] = alpha * gs[i];
      Vector gv(p);
      for (std::size_t i = 0; i < p; ++i) gv[i] = ge * a_source[i];

      Matrix& gw = grads.weights[params.weight_slot(k)];
      if (shared_projection) {
        through_linear(gw, params.weight(k), n, gz);
        through_linear(grads.score_projection, params.score_projection(), n,
                       gv);
      } else {
        // Message and source score share W_mn.
        for (std::size_t i = 0; i < p; ++i) gz[i] += gv[i];
        through_linear(gw, params.weight(k), n, gz);
      }
    }
    if (shared_projection) {
      through_linear(grads.score_projection, params.score_projection(), m,
                     g_target);
    } else if (const int self = params.EdgeIndex(m, m); self >= 0) {
      const auto k = static_cast<std::size_t>(self);
      through_linear(grads.weights[params.weight_slot(k)], params.weight(k),
                     m, g_target);
    } else {
      AddScaled(grads.inputs[m], g_target, 1.0);
    }
  }
  return grads;
}

absl::StatusOr<JacobianPathways> InputJacobianPathways(
    const GatParams& params, const GatForwardTrace& trace, std::size_t m,
    std::size_t n) {
  FEDGAT_RETURN_IF_ERROR(CheckTraceFresh(params, trace));
  if (m >= params.num_nodes() || n >= params.num_nodes()) {
    return ArgumentError(absl::StrCat("client index out of range: (", m, ",",
                                      n, ")"));
  }
  const int edge = params.EdgeIndex(m, n);
  if (edge < 0) {
    return StructureError(
        absl::StrCat("no Jacobian block: edge (", m, ",", n, ") is masked"));
  }
  const auto kn = static_cast<std::size_t>(edge);
  const std::size_t p = params.dim();
  const GatOptions& opt = params.options();
  const auto& in = params.in_edges(m);
  const double alpha_mn = trace.attention[kn];

  Vector act_slope(p);
  for (std::size_t i = 0; i < p; ++i) {
    act_slope[i] = ActivationSlope(opt.activation, trace.outputs[m][i]);
  }

  JacobianPathways out;
  out.direct = Matrix(p, p);
  const Matrix& w_mn = params.weight(kn);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      out.direct(i, j) = act_slope[i] * (alpha_mn * w_mn(i, j));
    }
  }

  // Softmax competition: sum_r z_mr alpha_mr (delta_rn - alpha_mn), times the
  // row vector de_mn/dh_n = slope * a_source^T S_mn.
  const Vector& a = params.attention(m);
  std::span<const double> a_target(a.data(), p);
  std::span<const double> a_source(a.data() + p, p);
  Vector spread(p, 0.0);
  for (std::size_t k : in) {
    const double delta = k == kn ? 1.0 : 0.0;
    AddScaled(spread, trace.messages[k],
              trace.attention[k] * (delta - alpha_mn));
  }
  Vector de_dh = ApplyTransposed(params.score_matrix(kn), a_source);
  const double slope_n = ScoreSlope(opt, trace.raw_scores[kn]);
  for (double& v : de_dh) v *= slope_n;

  Matrix bracket(p, p);
  AddOuter(bracket, spread, de_dh);

  // With LeakyReLU the target-side score no longer shifts every e_mr by the
  // same amount, so it survives the softmax when n == m.
  if (opt.leaky_relu && n == m) {
    const Matrix* self = params.self_score_matrix(m);
    const Vector t = self ? ApplyTransposed(*self, a_target)
                          : Vector(a_target.begin(), a_target.end());
    double mean_slope = 0.0;
    for (std::size_t k : in) {
      mean_slope += trace.attention[k] * ScoreSlope(opt, trace.raw_scores[k]);
    }
    Vector spread_target(p, 0.0);
    for (std::size_t k : in) {
      AddScaled(spread_target, trace.messages[k],
                trace.attention[k] *
                    (ScoreSlope(opt, trace.raw_scores[k]) - mean_slope));
    }
    AddOuter(bracket, spread_target, t);
  }

  out.competition = Matrix(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      out.competition(i, j) = act_slope[i] * bracket(i, j);
    }
  }
  return out;
}

absl::StatusOr<Matrix> InputJacobian(const GatParams& params,
                                     const GatForwardTrace& trace,
                                     std::size_t m, std::size_t n) {
  FEDGAT_ASSIGN_OR_RETURN(JacobianPathways parts,
                          InputJacobianPathways(params, trace, m, n));
  return parts.direct + parts.competition;
}

}  // namespace fedgat
