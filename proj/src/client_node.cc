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

#include "fedgat/client_node.h"

#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "fedgat/status.h"

namespace fedgat {
namespace {

LinearizedMap ScaledTanhMap(double phi) {
  return [phi](std::span<const double> h) -> absl::StatusOr<Linearization> {
    Linearization out{Vector(h.size()), Matrix(h.size(), h.size())};
    for (std::size_t i = 0; i < h.size(); ++i) {
      out.value[i] = std::tanh(phi * h[i]);
      out.jacobian(i, i) = phi * (1.0 - out.value[i] * out.value[i]);
    }
    return out;
  };
}

}  // namespace

absl::StatusOr<ClientNode> ClientNode::Create(ClientOptions options,
                                              SeededRng& rng) {
  const std::size_t p = options.measurement.latent_dim();
  const std::size_t d = options.measurement.obs_dim();
  if (p == 0 || d == 0 || options.measurement.bias.size() != d) {
    return ShapeError(absl::StrCat("client ", options.id,
                                   ": malformed measurement model"));
  }
  if (!(options.phi > 0.0)) {
    return ArgumentError(absl::StrCat("client ", options.id, ": phi must be > 0"));
  }
  if (options.sigma_q < 0 || options.sigma_r <= 0 || options.initial_cov <= 0) {
    return ArgumentError(absl::StrCat(
        "client ", options.id, ": need sigma_q >= 0, sigma_r > 0, P0 > 0"));
  }
  ClientNode node;
  node.options_ = std::move(options);
  const ClientOptions& o = node.options_;
  node.proprietary_ = DynamicsSpec{
      ScaledTanhMap(o.phi), o.measurement.AsMap(),
      (o.sigma_q * o.sigma_q) * Matrix::Identity(p),
      (o.sigma_r * o.sigma_r) * Matrix::Identity(d), o.joseph_form};
  FEDGAT_ASSIGN_OR_RETURN(node.delta_, Mlp::Create(d, o.hidden_size, p, rng));
  node.adam_ = AdamState(node.delta_.NumParams(), o.learning_rate);
  node.ResetProprietary();
  return node;
}

void ClientNode::ResetProprietary() {
  const std::size_t p = latent_dim();
  filter_ = EkfInit(Vector(p, 0.0), options_.initial_cov * Matrix::Identity(p));
}

absl::StatusOr<ProprietaryOutput> ClientNode::ProprietaryStep(
    std::span<const double> y) {
  FEDGAT_ASSIGN_OR_RETURN(EkfState pred, EkfPredict(filter_, proprietary_));
  FEDGAT_ASSIGN_OR_RETURN(filter_, EkfCorrect(pred, proprietary_, y));
  return ProprietaryOutput{filter_.corrected_mean, filter_.predicted_mean};
}

absl::StatusOr<std::vector<ProprietaryOutput>> ClientNode::RunProprietary(
    const std::vector<Vector>& observations) {
  ResetProprietary();
  std::vector<ProprietaryOutput> out;
  out.reserve(observations.size());
  for (std::size_t t = 0; t < observations.size(); ++t) {
    auto step = ProprietaryStep(observations[t]);
    if (!step.ok()) {
      return absl::Status(step.status().code(),
                          absl::StrCat("client ", id(), " EKF at t=", t, ": ",
                                       step.status().message()));
    }
    out.push_back(*std::move(step));
  }
  return out;
}

Vector ClientNode::Augment(std::span<const double> corrected_c,
                           std::span<const double> prev_observation,
                           Mlp::Cache* cache) const {
  Vector out = delta_.Forward(prev_observation, cache);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += corrected_c[i];
  return out;
}

Vector ClientNode::AugmentedPredict(std::span<const double> corrected_a) const {
  Vector out(corrected_a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::tanh(options_.phi * corrected_a[i]);
  }
  return out;
}

double ClientNode::LocalLoss(std::span<const double> predicted_a,
                             std::span<const double> observation) const {
  const Vector g = options_.measurement.Evaluate(predicted_a);
  double loss = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = observation[i] - g[i];
    loss += r * r;
  }
  return loss;
}

absl::StatusOr<ClientStepOutput> ClientNode::Step(
    const ProprietaryOutput& prev, const ProprietaryOutput& current,
    std::span<const double> prev_observation) const {
  if (prev.corrected.size() != latent_dim() ||
      prev_observation.size() != obs_dim()) {
    return ShapeError(absl::StrCat("client ", id(), ": step input dims"));
  }
  ClientStepOutput s;
  s.prev_corrected_c = prev.corrected;
  s.predicted_c = current.predicted;
  s.prev_corrected_a = Augment(prev.corrected, prev_observation, &s.mlp_cache);
  s.predicted_a = AugmentedPredict(s.prev_corrected_a);
  return s;
}

absl::StatusOr<ClientGradients> ClientNode::ComputeGradients(
    const std::vector<ClientStepOutput>& steps,
    const std::vector<Vector>& observations,
    const std::vector<Vector>& server_grads) const {
  if (steps.empty() || observations.size() != steps.size() ||
      (!server_grads.empty() && server_grads.size() != steps.size())) {
    return ShapeError(absl::StrCat("client ", id(), ": gradient batch sizes"));
  }
  const std::size_t p = latent_dim();
  const double inv_b = 1.0 / static_cast<double>(steps.size());
  ClientGradients out;
  out.local.assign(delta_.NumParams(), 0.0);
  out.server.assign(delta_.NumParams(), 0.0);
  Vector grad_a(p);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const ClientStepOutput& s = steps[i];
    const Linearization g = options_.measurement.Linearize(s.predicted_a);
    Vector resid(g.value.size());
    for (std::size_t k = 0; k < resid.size(); ++k) {
      resid[k] = g.value[k] - observations[i][k];
      out.local_loss += resid[k] * resid[k] * inv_b;
      resid[k] *= 2.0 * inv_b;
    }
    // dL/dh~_a = C^T * 2 (g - y) / B, then through tanh(phi .).
    Vector local = ApplyTransposed(g.jacobian, resid);
    for (std::size_t k = 0; k < p; ++k) {
      const double y = s.predicted_a[k];
      const double dtanh = options_.phi * (1.0 - y * y);
      grad_a[k] = local[k] * dtanh;
    }
    delta_.Backward(s.mlp_cache, grad_a, out.local);
    if (!server_grads.empty()) {
      if (server_grads[i].size() != p) {
        return ShapeError(absl::StrCat("client ", id(),
                                       ": server gradient has dim ",
                                       server_grads[i].size()));
      }
      for (std::size_t k = 0; k < p; ++k) {
        const double y = s.predicted_a[k];
        grad_a[k] = server_grads[i][k] * options_.phi * (1.0 - y * y);
      }
      delta_.Backward(s.mlp_cache, grad_a, out.server);
    }
  }
  if (!AllFinite(out.local) || !AllFinite(out.server)) {
    return NumericalError(absl::StrCat("client ", id(), ": non-finite gradient"));
  }
  return out;
}

absl::Status ClientNode::ApplyGradients(std::span<const double> grad_local,
                                        std::span<const double> grad_server) {
  if (frozen_) return absl::OkStatus();
  const std::size_t n = delta_.NumParams();
  if (grad_local.size() != n || grad_server.size() != n) {
    return ShapeError(absl::StrCat("client ", id(), ": gradient length"));
  }
  Vector combined(n);
  for (std::size_t i = 0; i < n; ++i) {
    combined[i] = options_.eta_local * grad_local[i] +
                  options_.eta_server * grad_server[i];
  }
  return AdamStep(adam_, delta_.params(), combined);
}

bool ClientNode::ObserveAlignment(double alignment) {
  const FreezeOptions& f = options_.freeze;
  if (frozen_ || f.patience <= 0) return false;
  if (!have_ema_) {
    ema_ = best_ema_ = alignment;
    have_ema_ = true;
    return false;
  }
  ema_ = f.ema * ema_ + (1.0 - f.ema) * alignment;
  const double rel = best_ema_ > 0.0 ? (best_ema_ - ema_) / best_ema_ : 0.0;
  if (ema_ < best_ema_) best_ema_ = ema_;
  stall_ = rel < f.min_rel_improvement ? stall_ + 1 : 0;
  if (stall_ >= f.patience) frozen_ = true;
  return frozen_;
}

}  // namespace fedgat
