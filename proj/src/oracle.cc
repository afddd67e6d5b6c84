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

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "fedgat/numkit/linalg.h"
#include "fedgat/numkit/parallel.h"
#include "fedgat/status.h"

namespace fedgat {
namespace {

double MeanOf(const std::vector<Vector>& rows) {
  double s = 0.0;
  std::size_t n = 0;
  for (const Vector& r : rows) {
    for (double x : r) s += x;
    n += r.size();
  }
  return n == 0 ? 0.0 : s / static_cast<double>(n);
}

bool RunningMaxStable(std::span<const double> x) {
  if (x.size() < 2) return true;
  Vector run(x.size());
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) run[i] = m = std::max(m, x[i]);
  const std::size_t window = std::min<std::size_t>(100, x.size() - 1);
  const double before = run[x.size() - 1 - window];
  const double after = run.back();
  return after <= before * 1.01;
}

}  // namespace

Vector Extract(std::span<const double> stacked, std::size_t m, std::size_t p) {
  return Vector(stacked.begin() + m * p, stacked.begin() + (m + 1) * p);
}

Vector Stack(const std::vector<Vector>& states) {
  Vector out;
  for (const Vector& s : states) out.insert(out.end(), s.begin(), s.end());
  return out;
}

std::vector<Vector> Unstack(std::span<const double> stacked, std::size_t p) {
  std::vector<Vector> out(stacked.size() / p);
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = Extract(stacked, m, p);
  return out;
}

DynamicsSpec CentralizedDynamics(const GroundTruthSystem& system,
                                 const CentralizedEkfOptions& options) {
  const std::size_t m_count = system.num_clients();
  const std::size_t p = system.latent_dim();
  const std::size_t d = system.obs_dim();
  DynamicsSpec dyn;
  dyn.transition = [gat = system.transition, p](
                       std::span<const double> x) -> absl::StatusOr<Linearization> {
    const std::size_t n = gat.num_nodes() * p;
    if (x.size() != n) return ShapeError("stacked transition input dim");
    FEDGAT_ASSIGN_OR_RETURN(GatForwardTrace tr, GatForward(gat, Unstack(x, p)));
    Linearization out{Stack(tr.outputs), Matrix(n, n)};
    for (const Edge& e : gat.edges()) {
      FEDGAT_ASSIGN_OR_RETURN(Matrix j,
                              InputJacobian(gat, tr, e.target, e.source));
      for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t c = 0; c < p; ++c) {
          out.jacobian(e.target * p + r, e.source * p + c) = j(r, c);
        }
      }
    }
    return out;
  };
  dyn.observation = [meas = system.measurements, p, d](
                        std::span<const double> x) -> absl::StatusOr<Linearization> {
    const std::size_t n = meas.size() * p;
    if (x.size() != n) return ShapeError("stacked observation input dim");
    Linearization out{Vector(), Matrix(meas.size() * d, n)};
    for (std::size_t m = 0; m < meas.size(); ++m) {
      const Linearization g = meas[m].Linearize(Extract(x, m, p));
      out.value.insert(out.value.end(), g.value.begin(), g.value.end());
      for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < p; ++c) {
          out.jacobian(m * d + r, m * p + c) = g.jacobian(r, c);
        }
      }
    }
    return out;
  };
  const double q = std::max(system.sigma_q * system.sigma_q, options.min_variance);
  const double r = std::max(system.sigma_r * system.sigma_r, options.min_variance);
  dyn.process_cov = q * Matrix::Identity(m_count * p);
  dyn.observation_cov = r * Matrix::Identity(m_count * d);
  dyn.joseph_form = options.joseph_form;
  return dyn;
}

absl::StatusOr<std::vector<EkfState>> RunCentralizedEkf(
    const GroundTruthSystem& system, const Trajectory& trajectory,
    const CentralizedEkfOptions& options) {
  const std::size_t n = system.num_clients() * system.latent_dim();
  const DynamicsSpec dyn = CentralizedDynamics(system, options);
  EkfState state = EkfInit(Vector(n, 0.0), options.initial_cov * Matrix::Identity(n));
  std::vector<EkfState> out;
  out.reserve(trajectory.length());
  for (std::size_t t = 0; t < trajectory.length(); ++t) {
    auto pred = EkfPredict(state, dyn);
    if (!pred.ok()) {
      return absl::Status(pred.status().code(),
                          absl::StrCat("oracle EKF t=", t, ": ",
                                       pred.status().message()));
    }
    auto corr = EkfCorrect(*pred, dyn, Stack(trajectory.observations[t]));
    if (!corr.ok()) {
      return absl::Status(corr.status().code(),
                          absl::StrCat("oracle EKF t=", t, ": ",
                                       corr.status().message()));
    }
    state = *std::move(corr);
    out.push_back(state);
  }
  return out;
}

absl::StatusOr<OracleRun> RunOracle(const ExperimentReport& report) {
  const ExperimentConfig& config = report.config;
  const std::size_t p = config.latent_dim;
  const std::size_t horizon = report.trajectory.length();
  const std::size_t n_train = report.train_length;
  if (n_train < 2 || n_train >= horizon) {
    return ContractError("oracle needs a report with a train/validation split");
  }
  CentralizedEkfOptions ekf_options;
  ekf_options.initial_cov = config.ekf_p0;
  ekf_options.joseph_form = config.joseph_form;
  FEDGAT_ASSIGN_OR_RETURN(
      std::vector<EkfState> states,
      RunCentralizedEkf(report.system, report.trajectory, ekf_options));

  OracleRun run;
  run.latent_dim = p;
  for (EkfState& s : states) {
    run.corrected.push_back(std::move(s.corrected_mean));
    run.predicted.push_back(std::move(s.predicted_mean));
  }

  SeededRng init = ServerInitStream(config);
  FEDGAT_ASSIGN_OR_RETURN(ServerNode gat,
                          ServerNode::Create(MakeServerOptions(config), init));
  const std::size_t batch = RoundBatchSize(config, n_train);
  const double inv_n = 1.0 / static_cast<double>(n_train - 1);
  for (int epoch = 0; epoch < report.epochs_run; ++epoch) {
    double loss = 0.0;
    for (std::size_t begin = 1; begin < n_train; begin += batch) {
      const std::size_t end = std::min(begin + batch, n_train);
      StateSequence inputs, targets;
      for (std::size_t t = begin; t < end; ++t) {
        inputs.push_back(Unstack(run.corrected[t - 1], p));
        targets.push_back(Unstack(run.corrected[t], p));
      }
      auto step = gat.TrainStep(inputs, targets);
      if (!step.ok()) {
        return absl::Status(step.status().code(),
                            absl::StrCat("oracle GAT epoch ", epoch + 1, ": ",
                                         step.status().message()));
      }
      loss += static_cast<double>(end - begin) * inv_n * step->loss;
    }
    run.epoch_loss.push_back(loss);
  }
  run.gat = gat.params();

  run.val_begin = n_train;
  run.preactivation_min = std::numeric_limits<double>::infinity();
  run.preactivation_max = -run.preactivation_min;
  for (std::size_t t = n_train; t < horizon; ++t) {
    FEDGAT_ASSIGN_OR_RETURN(GatForwardTrace tr,
                            GatForward(run.gat, Unstack(run.corrected[t - 1], p)));
    std::vector<Matrix> jac;
    for (const Edge& e : run.gat.edges()) {
      FEDGAT_ASSIGN_OR_RETURN(Matrix j,
                              InputJacobian(run.gat, tr, e.target, e.source));
      jac.push_back(std::move(j));
    }
    for (const Vector& pre : tr.preactivation) {
      for (double x : pre) {
        run.preactivation_min = std::min(run.preactivation_min, x);
        run.preactivation_max = std::max(run.preactivation_max, x);
      }
    }
    run.alpha.push_back(std::move(tr.attention));
    run.jacobian.push_back(std::move(jac));
  }
  return run;
}

BoundInputs ServerBoundInputs(const ExperimentReport& report) {
  const ValidationRecord& v = report.validation;
  BoundInputs in;
  in.begin = v.begin;
  in.predicted = v.predicted_s;
  in.prev_corrected = v.prev_corrected_c;
  in.alpha = v.alpha;
  in.jacobian = v.jacobian;
  in.preactivation_min = v.preactivation_min;
  in.preactivation_max = v.preactivation_max;
  return in;
}

BoundInputs OracleBoundInputs(const OracleRun& oracle) {
  BoundInputs in;
  in.begin = oracle.val_begin;
  const std::size_t p = oracle.latent_dim;
  for (std::size_t i = 0; i < oracle.alpha.size(); ++i) {
    const std::size_t t = oracle.val_begin + i;
    in.predicted.push_back(Unstack(oracle.predicted[t], p));
    in.prev_corrected.push_back(Unstack(oracle.corrected[t - 1], p));
  }
  in.alpha = oracle.alpha;
  in.jacobian = oracle.jacobian;
  in.preactivation_min = oracle.preactivation_min;
  in.preactivation_max = oracle.preactivation_max;
  return in;
}

double BoundReport::MeanEps() const {
  if (eps1.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t t = 0; t < eps1.size(); ++t) s += eps1[t] + eps2[t];
  return s / static_cast<double>(eps1.size());
}

double BoundReport::MeanAlphaGap() const { return MeanOf(alpha_gap); }
double BoundReport::MeanJacobianGap() const { return MeanOf(jac_gap); }

absl::StatusOr<BoundReport> ComputeBounds(const GatParams& params,
                                          const BoundInputs& server,
                                          const BoundInputs& oracle) {
  const std::size_t steps = server.alpha.size();
  if (server.begin != oracle.begin || steps == 0 ||
      oracle.alpha.size() != steps || server.predicted.size() != steps ||
      oracle.predicted.size() != steps ||
      server.prev_corrected.size() != steps ||
      oracle.prev_corrected.size() != steps ||
      server.jacobian.size() != steps || oracle.jacobian.size() != steps) {
    return ShapeError("bound report: server and oracle windows differ");
  }
  const std::size_t m_count = params.num_nodes();
  const std::size_t p = params.dim();
  const auto& edges = params.edges();
  BoundReport rep;
  rep.begin = server.begin;
  rep.preactivation_min =
      std::min(server.preactivation_min, oracle.preactivation_min);
  rep.preactivation_max =
      std::max(server.preactivation_max, oracle.preactivation_max);
  for (std::size_t t = 0; t < steps; ++t) {
    if (server.predicted[t].size() != m_count ||
        oracle.predicted[t].size() != m_count ||
        server.prev_corrected[t].size() != m_count ||
        oracle.prev_corrected[t].size() != m_count ||
        server.alpha[t].size() != edges.size() ||
        oracle.alpha[t].size() != edges.size() ||
        server.jacobian[t].size() != edges.size() ||
        oracle.jacobian[t].size() != edges.size()) {
      return ShapeError(absl::StrCat("bound report: shapes differ at step ", t));
    }
    double e1 = 0.0, e2 = 0.0;
    Matrix h(p, m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
      const Vector& s_pred = server.predicted[t][m];
      const Vector& s_in = server.prev_corrected[t][m];
      if (s_pred.size() != p || s_in.size() != p ||
          oracle.predicted[t][m].size() != p ||
          oracle.prev_corrected[t][m].size() != p) {
        return ShapeError(absl::StrCat("bound report: latent dim at step ", t));
      }
      double d1 = 0.0, d2 = 0.0;
      for (std::size_t k = 0; k < p; ++k) {
        d1 += std::pow(s_pred[k] - oracle.predicted[t][m][k], 2);
        d2 += std::pow(s_in[k] - oracle.prev_corrected[t][m][k], 2);
        h(k, m) = s_in[k];
      }
      e1 = std::max(e1, std::sqrt(d1));
      e2 = std::max(e2, std::sqrt(d2));
    }
    rep.eps1.push_back(e1);
    rep.eps2.push_back(e2);
    FEDGAT_ASSIGN_OR_RETURN(double smin, MinSingularValue(h));
    rep.sigma_min_hc.push_back(smin);

    Vector agap(m_count, 0.0);
    Vector jgap(edges.size(), 0.0);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const double d = oracle.alpha[t][k] - server.alpha[t][k];
      agap[edges[k].target] += d * d;
      const Matrix& js = server.jacobian[t][k];
      const Matrix& jo = oracle.jacobian[t][k];
      if (js.data().size() != jo.data().size()) {
        return ShapeError(absl::StrCat("bound report: Jacobian shape at step ", t));
      }
      double s = 0.0;
      for (std::size_t i = 0; i < js.data().size(); ++i) {
        s += std::pow(js.data()[i] - jo.data()[i], 2);
      }
      jgap[k] = std::sqrt(s);
    }
    for (double& g : agap) g = std::sqrt(g);
    rep.alpha_gap.push_back(std::move(agap));
    rep.jac_gap.push_back(std::move(jgap));
  }
  rep.running_max_stable = RunningMaxStable(rep.eps1) && RunningMaxStable(rep.eps2);
  return rep;
}

absl::StatusOr<std::vector<NoiseSweepPoint>> NoiseSweep(
    const ExperimentConfig& base, const std::vector<double>& scales,
    int workers) {
  if (scales.empty()) return ArgumentError("noise sweep needs at least one scale");
  if (workers < 1) return ArgumentError("workers must be >= 1");
  for (double s : scales) {
    if (!(s > 0.0)) return ArgumentError(absl::StrCat("noise scale ", s, " must be > 0"));
  }
  std::vector<NoiseSweepPoint> points(scales.size());
  std::vector<absl::Status> status(scales.size());
  auto run_one = [&](std::size_t i) {
    status[i] = [&]() -> absl::Status {
      ExperimentConfig c = base;
      c.sigma_q *= scales[i];
      c.sigma_r *= scales[i];
      FEDGAT_ASSIGN_OR_RETURN(ExperimentReport report, RunExperiment(c));
      FEDGAT_ASSIGN_OR_RETURN(OracleRun oracle, RunOracle(report));
      FEDGAT_ASSIGN_OR_RETURN(
          BoundReport bounds,
          ComputeBounds(report.server_params, ServerBoundInputs(report),
                        OracleBoundInputs(oracle)));
      points[i] = NoiseSweepPoint{scales[i], bounds.MeanEps(),
                                  bounds.MeanAlphaGap(),
                                  bounds.MeanJacobianGap()};
      return absl::OkStatus();
    }();
  };
  ParallelFor(scales.size(), workers, run_one);
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!status[i].ok()) {
      return absl::Status(status[i].code(),
                          absl::StrCat("noise scale ", scales[i], ": ",
                                       status[i].message()));
    }
  }
  return points;
}

}  // namespace fedgat
