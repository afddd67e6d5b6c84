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

#include "fedgat/server_node.h"

#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "fedgat/status.h"

namespace fedgat {
namespace {

absl::Status CheckAligned(const StateSequence& a, const StateSequence& b) {
  if (a.size() != b.size() || a.empty()) {
    return ShapeError(absl::StrCat("server loss: sequence lengths ", a.size(),
                                   " vs ", b.size()));
  }
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].size() != b[t].size()) {
      return ShapeError(absl::StrCat("server loss: client count at t=", t));
    }
    for (std::size_t m = 0; m < a[t].size(); ++m) {
      if (a[t][m].size() != b[t][m].size()) {
        return ShapeError(
            absl::StrCat("server loss: state dim at t=", t, ", client ", m));
      }
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<double> ServerLoss(const StateSequence& states_s,
                                  const StateSequence& states_a) {
  FEDGAT_RETURN_IF_ERROR(CheckAligned(states_s, states_a));
  double total = 0.0;
  for (std::size_t t = 0; t < states_s.size(); ++t) {
    for (std::size_t m = 0; m < states_s[t].size(); ++m) {
      for (std::size_t k = 0; k < states_s[t][m].size(); ++k) {
        const double r = states_s[t][m][k] - states_a[t][m][k];
        total += r * r;
      }
    }
  }
  return total / static_cast<double>(states_s.size());
}

absl::StatusOr<StateSequence> ClientGradients(const StateSequence& states_s,
                                              const StateSequence& states_a) {
  FEDGAT_RETURN_IF_ERROR(CheckAligned(states_s, states_a));
  const double scale = 2.0 / static_cast<double>(states_s.size());
  StateSequence out = states_a;
  for (std::size_t t = 0; t < out.size(); ++t) {
    for (std::size_t m = 0; m < out[t].size(); ++m) {
      for (std::size_t k = 0; k < out[t][m].size(); ++k) {
        out[t][m][k] = scale * (states_a[t][m][k] - states_s[t][m][k]);
      }
    }
  }
  return out;
}

absl::StatusOr<ServerNode> ServerNode::Create(ServerOptions options,
                                              SeededRng& rng) {
  if (options.latent_dim == 0) return ArgumentError("server latent_dim is 0");
  ServerNode server;
  FEDGAT_ASSIGN_OR_RETURN(
      server.params_,
      GatParams::Random(options.adjacency, options.latent_dim, options.gat,
                        rng,
                        1.0 / std::sqrt(static_cast<double>(options.latent_dim)),
                        0.0));
  server.adam_ = AdamState(server.params_.NumParams(), options.learning_rate);
  return server;
}

absl::Status ServerNode::CheckStates(const std::vector<Vector>& states) const {
  if (states.size() != num_clients()) {
    return ProtocolError(absl::StrCat("server expected states from ",
                                      num_clients(), " clients, got ",
                                      states.size()));
  }
  for (std::size_t m = 0; m < states.size(); ++m) {
    if (states[m].empty()) {
      return ProtocolError(absl::StrCat("client ", m, " did not report"));
    }
    if (states[m].size() != latent_dim()) {
      return ProtocolError(absl::StrCat("client ", m, " sent ",
                                        states[m].size(),
                                        " values; latent dim is ",
                                        latent_dim()));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<GatForwardTrace> ServerNode::Forward(
    const std::vector<Vector>& states_c) const {
  FEDGAT_RETURN_IF_ERROR(CheckStates(states_c));
  return GatForward(params_, states_c);
}

absl::StatusOr<Vector> ServerNode::ParameterGradient(
    const std::vector<GatForwardTrace>& traces,
    const StateSequence& targets_a) const {
  if (traces.size() != targets_a.size() || traces.empty()) {
    return ShapeError("server gradient: trace/target count mismatch");
  }
  const double scale = 2.0 / static_cast<double>(traces.size());
  GatGradients total;
  for (std::size_t t = 0; t < traces.size(); ++t) {
    FEDGAT_RETURN_IF_ERROR(CheckStates(targets_a[t]));
    std::vector<Vector> grad_out = traces[t].outputs;
    for (std::size_t m = 0; m < grad_out.size(); ++m) {
      for (std::size_t k = 0; k < grad_out[m].size(); ++k) {
        grad_out[m][k] = scale * (grad_out[m][k] - targets_a[t][m][k]);
      }
    }
    FEDGAT_ASSIGN_OR_RETURN(GatGradients g,
                            GatBackward(params_, traces[t], grad_out));
    if (t == 0) {
      total = std::move(g);
    } else {
      total += g;
    }
  }
  return total.Flatten();
}

absl::StatusOr<ServerStepResult> ServerNode::TrainStep(
    const StateSequence& states_c, const StateSequence& targets_a) {
  if (states_c.size() != targets_a.size() || states_c.empty()) {
    return ShapeError("server batch: input/target lengths differ");
  }
  ServerStepResult out;
  out.traces.reserve(states_c.size());
  out.predicted.reserve(states_c.size());
  for (std::size_t t = 0; t < states_c.size(); ++t) {
    FEDGAT_ASSIGN_OR_RETURN(GatForwardTrace tr, Forward(states_c[t]));
    out.predicted.push_back(tr.outputs);
    out.traces.push_back(std::move(tr));
  }
  FEDGAT_ASSIGN_OR_RETURN(out.loss, ServerLoss(out.predicted, targets_a));
  FEDGAT_ASSIGN_OR_RETURN(out.client_grads,
                          ClientGradients(out.predicted, targets_a));
  FEDGAT_ASSIGN_OR_RETURN(Vector grad, ParameterGradient(out.traces, targets_a));
  if (!AllFinite(grad)) return NumericalError("server gradient is non-finite");
  Vector flat = params_.Pack();
  FEDGAT_RETURN_IF_ERROR(AdamStep(adam_, flat, grad));
  FEDGAT_RETURN_IF_ERROR(params_.Unpack(flat));

  StateSequence after;
  after.reserve(states_c.size());
  for (const auto& s : states_c) {
    FEDGAT_ASSIGN_OR_RETURN(GatForwardTrace tr, GatForward(params_, s));
    after.push_back(std::move(tr.outputs));
  }
  FEDGAT_ASSIGN_OR_RETURN(out.loss_after, ServerLoss(after, targets_a));
  if (!std::isfinite(out.loss_after)) {
    return DivergenceError("server loss became non-finite");
  }
  loss_history_.push_back(out.loss_after);
  return out;
}

}  // namespace fedgat
