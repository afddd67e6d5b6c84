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

#include "cli.h"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "fedgat/artifacts.h"
#include "fedgat/config.h"
#include "fedgat/fed_round.h"
#include "fedgat/metrics.h"
#include "fedgat/oracle.h"
#include "fedgat/status.h"

namespace fedgat {
namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  // One per subcommand.
  std::vector<CLI::Option*> seed_options;
  int workers = 1;
  std::string axis;
  std::string values;
  bool force = false;
};

void AddCommonFlags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "key = value config file");
  cmd->add_option("--out", f.out,
                  absl::StrCat("output directory (default $", kOutDirEnv,
                               " or ./fedgat-out)"));
  f.seed_options.push_back(
      cmd->add_option("--seed", f.seed, "overrides the config seed"));
  cmd->add_flag("--force", f.force, "overwrite files in a non-empty --out");
}

fs::path OutDir(const Flags& f) {
  if (!f.out.empty()) return f.out;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
    return env;
  }
  return "fedgat-out";
}

absl::StatusOr<ExperimentConfig> LoadFlagsConfig(const Flags& f) {
  ExperimentConfig config;
  if (!f.config_path.empty()) {
    FEDGAT_ASSIGN_OR_RETURN(config, LoadConfig(f.config_path));
  }
  for (const CLI::Option* opt : f.seed_options) {
    if (opt->count() > 0) config.seed = f.seed;
  }
  FEDGAT_RETURN_IF_ERROR(Validate(config));
  return config;
}

// Opens the run: out dir policy, manifest skeleton.
absl::StatusOr<RunManifest> Begin(const std::string& command, const Flags& f,
                                  const ExperimentConfig& config,
                                  std::ostream& err) {
  FEDGAT_ASSIGN_OR_RETURN(std::string warning, PrepareOutDir(OutDir(f), f.force));
  if (!warning.empty()) err << warning << "\n";
  RunManifest manifest;
  manifest.command = command;
  manifest.config = config;
  manifest.started_at = UtcTimestamp();
  return manifest;
}

absl::Status Finish(const Flags& f, const std::vector<Artifact>& artifacts,
                    RunManifest& manifest) {
  FEDGAT_RETURN_IF_ERROR(WriteArtifacts(OutDir(f), artifacts, manifest));
  manifest.finished_at = UtcTimestamp();
  return WriteManifest(OutDir(f), manifest);
}

absl::Status Generate(const Flags& f, std::ostream& out, std::ostream& err) {
  FEDGAT_ASSIGN_OR_RETURN(ExperimentConfig config, LoadFlagsConfig(f));
  GroundTruthSystem system;
  Trajectory trajectory;
  FEDGAT_RETURN_IF_ERROR(GenerateData(config, &system, &trajectory));
  FEDGAT_ASSIGN_OR_RETURN(RunManifest manifest,
                          Begin("generate", f, config, err));
  manifest.summary = {{"timesteps", static_cast<double>(trajectory.length())},
                      {"num_clients", static_cast<double>(config.num_clients)}};
  FEDGAT_RETURN_IF_ERROR(
      Finish(f, GenerateArtifacts(config, system, trajectory), manifest));
  out << "wrote " << manifest.files.size() << " files to " << OutDir(f).string()
      << "\n";
  return absl::OkStatus();
}

double MeanOf(const std::vector<std::vector<double>>& rows) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    for (double x : r) {
      sum += x;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

void Summarize(const ExperimentReport& report, const BoundReport* bounds,
               RunManifest& manifest) {
  auto& s = manifest.summary;
  s.emplace_back("epochs_run", report.epochs_run);
  s.emplace_back("early_stopped", report.early_stopped ? 1.0 : 0.0);
  s.emplace_back("initial_val_L_s", report.initial_val_server_loss);
  s.emplace_back("final_val_L_s", report.final_val_server_loss);
  s.emplace_back("bytes_per_timestep",
                 static_cast<double>(report.bytes_per_timestep));
  const ValidationRecord& vr = report.validation;
  if (!vr.alpha.empty()) {
    s.emplace_back("mean_residual_proprietary", MeanOf(vr.residual_c));
    s.emplace_back("mean_residual_augmented", MeanOf(vr.residual_a));
    s.emplace_back("mean_residual_server", MeanOf(vr.residual_s));
    absl::StatusOr<std::vector<std::optional<double>>> corr =
        AlphaJacobianCorrelation(vr.alpha, vr.jacobian);
    if (corr.ok()) {
      double sum = 0.0;
      int n = 0;
      for (const auto& c : *corr) {
        if (c.has_value()) {
          sum += *c;
          ++n;
        }
      }
      if (n > 0) s.emplace_back("mean_alpha_jacobian_correlation", sum / n);
    }
  }
  if (bounds != nullptr) {
    s.emplace_back("mean_eps1_plus_eps2", bounds->MeanEps());
    s.emplace_back("mean_alpha_gap", bounds->MeanAlphaGap());
    s.emplace_back("mean_jacobian_gap", bounds->MeanJacobianGap());
  }
}

void AddTrainNotes(RunManifest& manifest) {
  manifest.notes = {
      "epoch 0 is the untrained baseline",
      "losses.csv is long format (one row per epoch and client, L_s "
      "repeated); loss_curves.csv has one server and one column per client",
      "L_a and L_s in losses.csv are training-slice means; val_losses.csv "
      "holds noise-free validation values",
      "jacobian.csv value is the scalar block when latent_dim = 1 and its "
      "Frobenius norm otherwise; entries are in jacobian_entries.csv",
      "standardized Jacobian residuals z-score each entry series over the "
      "validation window; jacobian_standardized = 0 marks a constant series",
      "null_attention_residual compares ground truth with itself after "
      "cyclically shifting each row's neighbour labels",
      "state_residuals.csv holds observation-space residuals ||y - g(h)||",
      "bytes.csv counts payload bytes per round and direction",
  };
}

absl::Status Train(const Flags& f, std::ostream& out, std::ostream& err) {
  FEDGAT_ASSIGN_OR_RETURN(ExperimentConfig config, LoadFlagsConfig(f));
  FEDGAT_ASSIGN_OR_RETURN(RunManifest manifest, Begin("train", f, config, err));
  AddTrainNotes(manifest);

  ExperimentReport report;
  const absl::Status run = RunExperiment(config, &report);
  if (!run.ok()) {
    if (ExitCodeFor(run) == kExitDivergence) {
      manifest.status = "diverged";
      manifest.notes.push_back(std::string(run.message()));
      Summarize(report, nullptr, manifest);
      absl::StatusOr<std::vector<Artifact>> partial =
          TrainArtifacts(report, nullptr, nullptr);
      if (partial.ok()) FEDGAT_RETURN_IF_ERROR(Finish(f, *partial, manifest));
    }
    return run;
  }

  std::optional<OracleRun> oracle;
  std::optional<BoundReport> bounds;
  if (config.run_oracle) {
    FEDGAT_ASSIGN_OR_RETURN(oracle, RunOracle(report));
    FEDGAT_ASSIGN_OR_RETURN(
        bounds, ComputeBounds(report.server_params, ServerBoundInputs(report),
                              OracleBoundInputs(*oracle)));
  }
  FEDGAT_ASSIGN_OR_RETURN(
      std::vector<Artifact> artifacts,
      TrainArtifacts(report, oracle ? &*oracle : nullptr,
                     bounds ? &*bounds : nullptr));
  Summarize(report, bounds ? &*bounds : nullptr, manifest);
  FEDGAT_RETURN_IF_ERROR(Finish(f, artifacts, manifest));
  out << "epochs " << report.epochs_run << ", validation L_s "
      << FormatDouble(report.final_val_server_loss) << ", wrote "
      << manifest.files.size() << " files to " << OutDir(f).string() << "\n";
  return absl::OkStatus();
}

absl::StatusOr<std::vector<double>> ParseValues(const std::string& text) {
  std::vector<double> values;
  for (absl::string_view v : absl::StrSplit(text, ',', absl::SkipWhitespace())) {
    double x = 0.0;
    if (!absl::SimpleAtod(absl::StripAsciiWhitespace(v), &x)) {
      return ConfigError(absl::StrCat("--values: '", v, "' is not a number"));
    }
    values.push_back(x);
  }
  if (values.empty()) return ConfigError("--values: no values given");
  return values;
}

absl::Status SweepCommand(const Flags& f, std::ostream& out, std::ostream& err) {
  FEDGAT_ASSIGN_OR_RETURN(SweepAxis axis, ParseSweepAxis(f.axis));
  FEDGAT_ASSIGN_OR_RETURN(std::vector<double> values, ParseValues(f.values));
  FEDGAT_ASSIGN_OR_RETURN(ExperimentConfig config, LoadFlagsConfig(f));
  // Catch bad points before spending time on the good ones.
  for (double v : values) {
    ExperimentConfig c = config;
    FEDGAT_RETURN_IF_ERROR(ApplySweepValue(c, axis, v));
    FEDGAT_RETURN_IF_ERROR(Validate(c));
  }
  if (f.workers < 1) return ConfigError("--workers must be at least 1");
  FEDGAT_ASSIGN_OR_RETURN(RunManifest manifest, Begin("sweep", f, config, err));
  FEDGAT_ASSIGN_OR_RETURN(std::vector<SweepRow> rows,
                          Sweep(config, axis, values, f.workers));
  absl::Status first_failure;
  for (const SweepRow& r : rows) {
    manifest.summary.emplace_back(
        absl::StrCat("Ls_final[", FormatDouble(r.value), "]"),
        r.status.ok() ? r.ls_final : std::nan(""));
    if (!r.status.ok()) {
      err << "sweep point " << FormatDouble(r.value) << ": " << r.status.message()
          << "\n";
      manifest.notes.push_back(absl::StrCat("point ", FormatDouble(r.value),
                                            " failed: ", r.status.message()));
      if (first_failure.ok()) first_failure = r.status;
    }
  }
  manifest.notes.push_back("bytes is the payload size per timestep over all "
                           "clients and both directions");
  if (!first_failure.ok()) manifest.status = "partial";
  FEDGAT_ASSIGN_OR_RETURN(std::vector<Artifact> artifacts, SweepArtifacts(rows));
  FEDGAT_RETURN_IF_ERROR(Finish(f, artifacts, manifest));
  out << "wrote " << rows.size() << " sweep rows to " << OutDir(f).string()
      << "\n";
  return first_failure;
}

// Recomputes the metric tables of a finished train directory into
// <dir>/report and says which differ from the stored ones.
absl::Status Report(const Flags& f, std::ostream& out, std::ostream& err) {
  const fs::path dir = OutDir(f);
  FEDGAT_ASSIGN_OR_RETURN(std::string text, ReadFile(dir / "config.cfg"));
  FEDGAT_ASSIGN_OR_RETURN(ExperimentConfig config, ParseConfig(text));
  FEDGAT_ASSIGN_OR_RETURN(
      GatParams params,
      GatParams::Zeros(config.ResolvedAdjacency(), config.latent_dim,
                       config.ServerGatOptions()));
  std::size_t begin = 0;
  FEDGAT_ASSIGN_OR_RETURN(MetricInputs inputs,
                          LoadMetricInputs(dir, params, &begin));
  FEDGAT_ASSIGN_OR_RETURN(std::vector<Artifact> artifacts,
                          MetricArtifacts(params, begin, inputs));

  Flags sub = f;
  sub.out = (dir / "report").string();
  sub.force = true;
  FEDGAT_ASSIGN_OR_RETURN(RunManifest manifest, Begin("report", sub, config, err));
  int differ = 0;
  for (const Artifact& a : artifacts) {
    absl::StatusOr<std::string> stored = ReadFile(dir / a.name);
    const bool same = stored.ok() && *stored == a.content;
    if (!same) ++differ;
    out << a.name << ": " << (same ? "matches" : "differs") << "\n";
  }
  manifest.summary.emplace_back("tables_differing", differ);
  return Finish(sub, artifacts, manifest);
}

}  // namespace

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kFailedPrecondition:
      return kExitConfig;
    case absl::StatusCode::kInternal:
      return kExitDivergence;
    case absl::StatusCode::kUnavailable:
      return kExitIo;
    default:
      return 1;
  }
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app("Federated GAT dynamics simulator", "fedgat");
  app.require_subcommand(1);
  Flags f;
  CLI::App* generate = app.add_subcommand("generate", "write a synthetic dataset");
  CLI::App* train = app.add_subcommand("train", "run one federated experiment");
  CLI::App* sweep = app.add_subcommand("sweep", "run one experiment per value");
  CLI::App* report =
      app.add_subcommand("report", "recompute metric tables of a train run");
  for (CLI::App* cmd : {generate, train, sweep, report}) AddCommonFlags(cmd, f);
  sweep->add_option("--axis", f.axis,
                    "obs_dim|latent_dim|num_clients|sigma_ca|sigma_g")
      ->required();
  sweep->add_option("--values", f.values, "comma separated")->required();
  sweep->add_option("--workers", f.workers, "parallel sweep points");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  absl::Status status;
  if (*generate) {
    status = Generate(f, out, err);
  } else if (*train) {
    status = Train(f, out, err);
  } else if (*sweep) {
    status = SweepCommand(f, out, err);
  } else {
    status = Report(f, out, err);
  }
  if (!status.ok()) err << "fedgat: " << status.message() << "\n";
  return ExitCodeFor(status);
}

}  // namespace fedgat
