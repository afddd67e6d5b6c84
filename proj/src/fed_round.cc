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

#include "fedgat/fed_round.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "absl/strings/str_cat.h"
#include "fedgat/numkit/parallel.h"
#include "fedgat/status.h"

namespace fedgat {
namespace {

// Sub-streams of the experiment seed.
constexpr std::uint64_t kSystemStream = 1;
constexpr std::uint64_t kTrajectoryStream = 2;
constexpr std::uint64_t kFederationStream = 3;
constexpr std::uint64_t kChannelStream = 5;
// Under the federation stream.
constexpr std::uint64_t kServerStream = 1;
constexpr std::uint64_t kFirstClientStream = 10;

double SquaredDistance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double ObservationResidual(const TanhMeasurement& g, const Vector& h,
                           const Vector& y) {
  return std::sqrt(SquaredDistance(g.Evaluate(h), y));
}

absl::Status WithContext(const absl::Status& s, absl::string_view context) {
  return absl::Status(s.code(), absl::StrCat(context, ": ", s.message()));
}

}  // namespace

ServerOptions MakeServerOptions(const ExperimentConfig& config) {
  ServerOptions so;
  so.adjacency = config.ResolvedAdjacency();
  so.latent_dim = config.latent_dim;
  so.gat = config.ServerGatOptions();
  so.learning_rate = config.lr_server;
  return so;
}

SeededRng ServerInitStream(const ExperimentConfig& config) {
  return SeededRng(config.seed).Split(kFederationStream).Split(kServerStream);
}

std::size_t RoundBatchSize(const ExperimentConfig& config,
                           std::size_t train_length) {
  const std::size_t targets = train_length - 1;
  return config.batch_size == 0 ? targets : std::min(config.batch_size, targets);
}

std::string ToString(Direction d) {
  return d == Direction::kClientToServer ? "client_to_server"
                                         : "server_to_client";
}

absl::StatusOr<Federation> Federation::Create(const ExperimentConfig& config,
                                              const GroundTruthSystem& system,
                                              SeededRng& rng) {
  FEDGAT_RETURN_IF_ERROR(Validate(config));
  if (system.num_clients() != config.num_clients ||
      system.latent_dim() != config.latent_dim) {
    return ShapeError("ground-truth system does not match the config");
  }
  // The uplink tuple must stay smaller than one observation.
  if (2 * config.latent_dim >= config.obs_dim) {
    return ProtocolError(absl::StrCat(
        "keys 'latent_dim' and 'obs_dim': the uplink sends 2 * latent_dim = ",
        2 * config.latent_dim, " floats per timestep, which must be below "
        "obs_dim = ", config.obs_dim));
  }
  Federation fed;
  fed.bytes_per_float_ = config.bytes_per_float;
  for (std::size_t m = 0; m < config.num_clients; ++m) {
    ClientOptions o;
    o.id = m;
    o.phi = config.PhiFor(m);
    o.measurement = system.measurements[m];
    o.sigma_q = config.sigma_q;
    o.sigma_r = config.sigma_r;
    o.initial_cov = config.ekf_p0;
    o.joseph_form = config.joseph_form;
    o.hidden_size = config.hidden_size;
    o.learning_rate = config.lr_client;
    o.eta_local = config.eta1;
    o.eta_server = config.eta2;
    o.freeze = FreezeOptions{config.freeze_patience,
                             config.freeze_min_rel_improvement,
                             config.freeze_ema};
    SeededRng client_rng = rng.Split(kFirstClientStream + m);
    FEDGAT_ASSIGN_OR_RETURN(ClientNode node,
                            ClientNode::Create(std::move(o), client_rng));
    fed.clients_.push_back(std::move(node));
  }
  SeededRng server_rng = rng.Split(kServerStream);
  FEDGAT_ASSIGN_OR_RETURN(fed.server_,
                          ServerNode::Create(MakeServerOptions(config), server_rng));
  return fed;
}

absl::Status Federation::Prepare(const Trajectory& trajectory) {
  const std::size_t m_count = clients_.size();
  proprietary_.assign(m_count, {});
  observations_.assign(m_count, {});
  for (std::size_t m = 0; m < m_count; ++m) {
    std::vector<Vector>& ys = observations_[m];
    ys.reserve(trajectory.length());
    for (const auto& step : trajectory.observations) ys.push_back(step[m]);
    FEDGAT_ASSIGN_OR_RETURN(proprietary_[m], clients_[m].RunProprietary(ys));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<ClientStepOutput>> Federation::ClientForward(
    std::size_t m, std::size_t begin, std::size_t end) const {
  const auto& prop = proprietary_[m];
  const auto& ys = observations_[m];
  std::vector<ClientStepOutput> steps;
  steps.reserve(end - begin);
  for (std::size_t t = begin; t < end; ++t) {
    FEDGAT_ASSIGN_OR_RETURN(ClientStepOutput s,
                            clients_[m].Step(prop[t - 1], prop[t], ys[t - 1]));
    if (!AllFinite(s.predicted_a)) {
      return DivergenceError(
          absl::StrCat("client ", m, ": augmented state non-finite at t=", t));
    }
    steps.push_back(std::move(s));
  }
  return steps;
}

absl::StatusOr<RoundStats> Federation::RunRound(std::size_t begin,
                                                std::size_t end,
                                                const PrivacyConfig& privacy,
                                                SeededRng& channel_rng,
                                                std::vector<RoundMessage>* log) {
  if (proprietary_.empty()) {
    return ContractError("Federation::Prepare was not called");
  }
  const std::size_t horizon = proprietary_.front().size();
  if (begin < 1 || begin >= end || end > horizon) {
    return ArgumentError(absl::StrCat("round slice [", begin, ", ", end,
                                      ") outside [1, ", horizon, ")"));
  }
  if (privacy.sigma_ca < 0 || privacy.sigma_g < 0) {
    return ArgumentError("privacy noise std must be >= 0");
  }
  const std::size_t m_count = clients_.size();
  const std::size_t b = end - begin;
  const std::size_t p = server_.latent_dim();
  RoundStats stats;
  stats.round = rounds_run_;
  stats.begin = begin;
  stats.end = end;
  stats.local_loss.assign(m_count, 0.0);
  stats.alignment.assign(m_count, 0.0);

  // (1)-(2) client forward passes and uplink.
  std::vector<std::vector<ClientStepOutput>> steps(m_count);
  std::vector<RoundMessage> up(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    auto s = ClientForward(m, begin, end);
    if (!s.ok()) return WithContext(s.status(), absl::StrCat("round ", stats.round));
    steps[m] = *std::move(s);
    RoundMessage& msg = up[m];
    msg.direction = Direction::kClientToServer;
    msg.client = m;
    msg.kind = PayloadKind::kStateTuple;
    msg.timesteps = b;
    msg.floats_per_timestep = 2 * clients_[m].latent_dim();
    if (msg.floats_per_timestep >= clients_[m].options().measurement.obs_dim()) {
      return ProtocolError(absl::StrCat("client ", m, " uplink of ",
                                        msg.floats_per_timestep,
                                        " floats per timestep is not below its "
                                        "observation size"));
    }
    msg.payload.reserve(b * msg.floats_per_timestep);
    for (const ClientStepOutput& st : steps[m]) {
      msg.payload.insert(msg.payload.end(), st.prev_corrected_c.begin(),
                         st.prev_corrected_c.end());
      msg.payload.insert(msg.payload.end(), st.predicted_a.begin(),
                         st.predicted_a.end());
    }
    SeededRng noise = channel_rng.Split(2 * m);
    FEDGAT_RETURN_IF_ERROR(AddGaussianNoise(noise, msg.payload, privacy.sigma_ca));
    msg.byte_count = msg.payload.size() * bytes_per_float_;
    stats.bytes_up += msg.byte_count;
    stats.max_up_floats_per_timestep =
        std::max(stats.max_up_floats_per_timestep, msg.floats_per_timestep);
  }

  // (3) server decodes the tuples and trains.
  StateSequence inputs(b, std::vector<Vector>(m_count));
  StateSequence targets(b, std::vector<Vector>(m_count));
  for (std::size_t m = 0; m < m_count; ++m) {
    const RoundMessage& msg = up[m];
    if (msg.floats_per_timestep != 2 * p || msg.payload.size() != 2 * p * b) {
      return ProtocolError(absl::StrCat("client ", m, " sent a malformed tuple"));
    }
    for (std::size_t i = 0; i < b; ++i) {
      const double* row = msg.payload.data() + i * 2 * p;
      inputs[i][m].assign(row, row + p);
      targets[i][m].assign(row + p, row + 2 * p);
    }
  }
  auto step = server_.TrainStep(inputs, targets);
  if (!step.ok()) {
    return WithContext(step.status(), absl::StrCat("round ", stats.round, " server"));
  }
  stats.server_loss = step->loss;
  stats.server_loss_after = step->loss_after;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t m = 0; m < m_count; ++m) {
      stats.alignment[m] +=
          SquaredDistance(step->predicted[i][m], targets[i][m]) / b;
    }
  }

  // (4) downlink of state gradients.
  std::vector<RoundMessage> down(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    RoundMessage& msg = down[m];
    msg.direction = Direction::kServerToClient;
    msg.client = m;
    msg.kind = PayloadKind::kStateGradient;
    msg.timesteps = b;
    msg.floats_per_timestep = p;
    msg.payload.reserve(b * p);
    for (std::size_t i = 0; i < b; ++i) {
      const Vector& g = step->client_grads[i][m];
      msg.payload.insert(msg.payload.end(), g.begin(), g.end());
    }
    SeededRng noise = channel_rng.Split(2 * m + 1);
    FEDGAT_RETURN_IF_ERROR(AddGaussianNoise(noise, msg.payload, privacy.sigma_g));
    msg.byte_count = msg.payload.size() * bytes_per_float_;
    stats.bytes_down += msg.byte_count;
  }

  // (5) client updates.
  for (std::size_t m = 0; m < m_count; ++m) {
    ClientNode& client = clients_[m];
    const std::size_t pm = client.latent_dim();
    std::vector<Vector> grads(b);
    std::vector<Vector> ys(b);
    for (std::size_t i = 0; i < b; ++i) {
      const double* row = down[m].payload.data() + i * pm;
      grads[i].assign(row, row + pm);
      ys[i] = observations_[m][begin + i];
    }
    auto g = client.ComputeGradients(steps[m], ys, grads);
    if (!g.ok()) return WithContext(g.status(), absl::StrCat("round ", stats.round));
    stats.local_loss[m] = g->local_loss;
    FEDGAT_RETURN_IF_ERROR(client.ApplyGradients(g->local, g->server));
  }

  if (log != nullptr) {
    for (auto& msg : up) log->push_back(std::move(msg));
    for (auto& msg : down) log->push_back(std::move(msg));
  }
  ++rounds_run_;
  return stats;
}

absl::StatusOr<Evaluation> Federation::Evaluate(std::size_t begin,
                                                std::size_t end) const {
  if (proprietary_.empty()) {
    return ContractError("Federation::Prepare was not called");
  }
  if (begin < 1 || begin >= end || end > proprietary_.front().size()) {
    return ArgumentError("evaluation slice out of range");
  }
  const std::size_t m_count = clients_.size();
  const std::size_t b = end - begin;
  Evaluation ev;
  ev.begin = begin;
  ev.prev_corrected_c.assign(b, std::vector<Vector>(m_count));
  ev.predicted_c = ev.prev_corrected_c;
  ev.predicted_a = ev.prev_corrected_c;
  ev.local_loss.assign(m_count, 0.0);
  ev.alignment.assign(m_count, 0.0);
  for (std::size_t m = 0; m < m_count; ++m) {
    FEDGAT_ASSIGN_OR_RETURN(auto steps, ClientForward(m, begin, end));
    for (std::size_t i = 0; i < b; ++i) {
      ev.local_loss[m] +=
          clients_[m].LocalLoss(steps[i].predicted_a, observations_[m][begin + i]) / b;
      ev.prev_corrected_c[i][m] = std::move(steps[i].prev_corrected_c);
      ev.predicted_c[i][m] = std::move(steps[i].predicted_c);
      ev.predicted_a[i][m] = std::move(steps[i].predicted_a);
    }
  }
  ev.traces.reserve(b);
  ev.predicted_s.reserve(b);
  for (std::size_t i = 0; i < b; ++i) {
    FEDGAT_ASSIGN_OR_RETURN(GatForwardTrace tr,
                            server_.Forward(ev.prev_corrected_c[i]));
    ev.predicted_s.push_back(tr.outputs);
    ev.traces.push_back(std::move(tr));
    for (std::size_t m = 0; m < m_count; ++m) {
      ev.alignment[m] +=
          SquaredDistance(ev.predicted_s[i][m], ev.predicted_a[i][m]) / b;
    }
  }
  FEDGAT_ASSIGN_OR_RETURN(ev.server_loss,
                          ServerLoss(ev.predicted_s, ev.predicted_a));
  return ev;
}

absl::Status GenerateData(const ExperimentConfig& config,
                          GroundTruthSystem* system, Trajectory* trajectory) {
  FEDGAT_RETURN_IF_ERROR(Validate(config));
  const SeededRng root(config.seed);
  GroundTruthOptions gt;
  gt.adjacency = config.ResolvedAdjacency();
  gt.latent_dim = config.latent_dim;
  gt.obs_dim = config.obs_dim;
  gt.sigma_q = config.sigma_q;
  gt.sigma_r = config.sigma_r;
  gt.init_state_std = config.init_state_std;
  gt.weight_scale = config.gt_weight_scale;
  gt.attention_scale = config.gt_attention_scale;
  gt.gat.activation = config.activation;
  SeededRng sys_rng = root.Split(kSystemStream);
  FEDGAT_ASSIGN_OR_RETURN(*system, MakeGroundTruthSystem(gt, sys_rng));
  SeededRng traj_rng = root.Split(kTrajectoryStream);
  FEDGAT_ASSIGN_OR_RETURN(*trajectory,
                          Generate(*system, config.timesteps, traj_rng));
  return absl::OkStatus();
}

absl::Status RunExperiment(const ExperimentConfig& config,
                           ExperimentReport* report) {
  *report = ExperimentReport();
  report->config = config;
  FEDGAT_RETURN_IF_ERROR(GenerateData(config, &report->system, &report->trajectory));
  const std::size_t horizon = config.timesteps;
  FEDGAT_ASSIGN_OR_RETURN(report->train_length,
                          TrainLength(horizon, config.train_frac));
  const std::size_t n_train = report->train_length;
  const std::size_t m_count = config.num_clients;

  const SeededRng root(config.seed);
  SeededRng fed_rng = root.Split(kFederationStream);
  FEDGAT_ASSIGN_OR_RETURN(Federation fed,
                          Federation::Create(config, report->system, fed_rng));
  FEDGAT_RETURN_IF_ERROR(fed.Prepare(report->trajectory));
  report->bytes_per_timestep = m_count * 3 * config.latent_dim *
                               config.bytes_per_float;
  report->max_up_floats_per_timestep = 2 * config.latent_dim;

  auto record_epoch = [&](int epoch, EpochRecord rec) -> absl::Status {
    FEDGAT_ASSIGN_OR_RETURN(Evaluation val, fed.Evaluate(n_train, horizon));
    rec.epoch = epoch;
    rec.val_server_loss = val.server_loss;
    rec.val_alignment = val.alignment;
    rec.frozen.clear();
    for (const ClientNode& c : fed.clients()) rec.frozen.push_back(c.frozen());
    rec.combined = rec.train_server_loss;
    for (double l : rec.local_loss) rec.combined += l;
    report->epochs.push_back(std::move(rec));
    report->final_val_server_loss = val.server_loss;
    return absl::OkStatus();
  };

  {
    FEDGAT_ASSIGN_OR_RETURN(Evaluation train, fed.Evaluate(1, n_train));
    EpochRecord rec;
    rec.train_server_loss = train.server_loss;
    rec.local_loss = train.local_loss;
    rec.alignment = train.alignment;
    FEDGAT_RETURN_IF_ERROR(record_epoch(0, std::move(rec)));
    report->initial_val_server_loss = report->final_val_server_loss;
  }

  const std::size_t batch = RoundBatchSize(config, n_train);
  const SeededRng channel_root = root.Split(kChannelStream);
  double best = report->epochs.back().combined;
  int stall = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochRecord rec;
    rec.local_loss.assign(m_count, 0.0);
    rec.alignment.assign(m_count, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n_train - 1);
    for (std::size_t begin = 1; begin < n_train; begin += batch) {
      const std::size_t end = std::min(begin + batch, n_train);
      SeededRng channel = channel_root.Split(report->rounds.size());
      FEDGAT_ASSIGN_OR_RETURN(RoundStats stats,
                              fed.RunRound(begin, end, config.privacy, channel));
      const double w = static_cast<double>(end - begin) * inv_n;
      rec.train_server_loss += w * stats.server_loss;
      for (std::size_t m = 0; m < m_count; ++m) {
        rec.local_loss[m] += w * stats.local_loss[m];
        rec.alignment[m] += w * stats.alignment[m];
      }
      report->rounds.push_back(std::move(stats));
    }
    for (std::size_t m = 0; m < m_count; ++m) {
      fed.clients()[m].ObserveAlignment(rec.alignment[m]);
    }
    FEDGAT_RETURN_IF_ERROR(record_epoch(epoch, std::move(rec)));
    report->epochs_run = epoch;
    report->server_params = fed.server().params();

    const double cur = report->epochs.back().combined;
    if (!std::isfinite(cur)) {
      return DivergenceError(absl::StrCat("combined loss non-finite at epoch ", epoch));
    }
    const double rel = best > 0.0 ? (best - cur) / best : 0.0;
    stall = rel < config.min_rel_improvement ? stall + 1 : 0;
    best = std::min(best, cur);
    if (config.patience > 0 && stall >= config.patience) {
      report->early_stopped = true;
      break;
    }
  }
  report->server_params = fed.server().params();

  // Validation records.
  FEDGAT_ASSIGN_OR_RETURN(Evaluation val, fed.Evaluate(n_train, horizon));
  ValidationRecord& vr = report->validation;
  const Trajectory& traj = report->trajectory;
  const GatParams& params = fed.server().params();
  vr.begin = n_train;
  double pre_min = std::numeric_limits<double>::infinity();
  double pre_max = -pre_min;
  vr.prev_corrected_c = val.prev_corrected_c;
  vr.predicted_c = val.predicted_c;
  vr.predicted_a = val.predicted_a;
  vr.predicted_s = val.predicted_s;
  for (std::size_t i = 0; i < val.traces.size(); ++i) {
    const std::size_t t = n_train + i;
    vr.latent_true.push_back(traj.latent[t]);
    vr.alpha.push_back(val.traces[i].attention);
    for (const Vector& pre : val.traces[i].preactivation) {
      for (double x : pre) {
        pre_min = std::min(pre_min, x);
        pre_max = std::max(pre_max, x);
      }
    }
    vr.alpha_gt.push_back(traj.attention_gt[t]);
    std::vector<Matrix> jac;
    for (const Edge& e : params.edges()) {
      FEDGAT_ASSIGN_OR_RETURN(Matrix j, InputJacobian(params, val.traces[i],
                                                      e.target, e.source));
      jac.push_back(std::move(j));
    }
    vr.jacobian.push_back(std::move(jac));
    vr.jacobian_gt.push_back(traj.jacobian_gt[t]);
    std::vector<double> rc(m_count), ra(m_count), rs(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
      const TanhMeasurement& g = report->system.measurements[m];
      const Vector& y = traj.observations[t][m];
      rc[m] = ObservationResidual(g, val.predicted_c[i][m], y);
      ra[m] = ObservationResidual(g, val.predicted_a[i][m], y);
      rs[m] = ObservationResidual(g, val.predicted_s[i][m], y);
    }
    vr.residual_c.push_back(std::move(rc));
    vr.residual_a.push_back(std::move(ra));
    vr.residual_s.push_back(std::move(rs));
  }
  vr.preactivation_min = pre_min;
  vr.preactivation_max = pre_max;
  report->final_val_server_loss = val.server_loss;
  return absl::OkStatus();
}

absl::StatusOr<ExperimentReport> RunExperiment(const ExperimentConfig& config) {
  ExperimentReport report;
  FEDGAT_RETURN_IF_ERROR(RunExperiment(config, &report));
  return report;
}

absl::StatusOr<SweepAxis> ParseSweepAxis(absl::string_view name) {
  if (name == "d" || name == "d_m" || name == "obs_dim") return SweepAxis::kObsDim;
  if (name == "p" || name == "p_m" || name == "latent_dim") return SweepAxis::kLatentDim;
  if (name == "M" || name == "num_clients") return SweepAxis::kNumClients;
  if (name == "sigma_ca") return SweepAxis::kSigmaCa;
  if (name == "sigma_g") return SweepAxis::kSigmaG;
  return ConfigError(absl::StrCat(
      "unknown sweep axis '", name,
      "'; use obs_dim, latent_dim, num_clients, sigma_ca or sigma_g"));
}

std::string ToString(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kObsDim: return "obs_dim";
    case SweepAxis::kLatentDim: return "latent_dim";
    case SweepAxis::kNumClients: return "num_clients";
    case SweepAxis::kSigmaCa: return "sigma_ca";
    case SweepAxis::kSigmaG: return "sigma_g";
  }
  return "unknown";
}

absl::Status ApplySweepValue(ExperimentConfig& config, SweepAxis axis,
                             double value) {
  auto as_count = [&](std::size_t& field) -> absl::Status {
    if (!(value >= 1) || value != std::floor(value)) {
      return ConfigError(absl::StrCat("sweep value ", value, " for ",
                                      ToString(axis), " must be a positive integer"));
    }
    field = static_cast<std::size_t>(value);
    return absl::OkStatus();
  };
  switch (axis) {
    case SweepAxis::kObsDim: return as_count(config.obs_dim);
    case SweepAxis::kLatentDim: return as_count(config.latent_dim);
    case SweepAxis::kNumClients:
      FEDGAT_RETURN_IF_ERROR(as_count(config.num_clients));
      config.adjacency = Adjacency();
      return absl::OkStatus();
    case SweepAxis::kSigmaCa:
      config.privacy.sigma_ca = value;
      return Validate(config);
    case SweepAxis::kSigmaG:
      config.privacy.sigma_g = value;
      return Validate(config);
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<SweepRow>> Sweep(const ExperimentConfig& base,
                                            SweepAxis axis,
                                            const std::vector<double>& values,
                                            int workers) {
  if (values.empty()) return ArgumentError("sweep needs at least one value");
  if (workers < 1) return ArgumentError("workers must be >= 1");
  std::vector<SweepRow> rows(values.size());
  auto run_one = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.axis = axis;
    row.value = values[i];
    ExperimentConfig c = base;
    row.status = ApplySweepValue(c, axis, values[i]);
    if (!row.status.ok()) return;
    c.run_oracle = false;
    ExperimentReport report;
    row.status = RunExperiment(c, &report);
    row.bytes = report.bytes_per_timestep;
    row.ls_final = report.final_val_server_loss;
  };
  ParallelFor(values.size(), workers, run_one);
  return rows;
}

}  // namespace fedgat
