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

// Run artifacts: CSV tables, the run manifest and the output directory
// policy. Tables are built in memory and written in one go so a command
// either emits a file completely or not at all. Doubles are printed in
// shortest round-trip form, so equal runs give equal bytes.

#ifndef FEDGAT_ARTIFACTS_H_
#define FEDGAT_ARTIFACTS_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "fedgat/config.h"
#include "fedgat/fed_round.h"
#include "fedgat/gat.h"
#include "fedgat/numkit/matrix.h"
#include "fedgat/oracle.h"
#include "fedgat/ssm_synth.h"

namespace fedgat {

std::string FormatDouble(double x);

class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header)
      : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  // Aborts on a width mismatch; callers build rows from the header.
  void AddRow(std::vector<std::string> row);
  std::string ToString() const;

  // Column index by name.
  std::optional<std::size_t> Column(absl::string_view name) const;

  // Comma separated, no quoting; the first line is the header.
  static absl::StatusOr<CsvTable> Parse(absl::string_view text);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// A named file body, relative to the output directory.
struct Artifact {
  std::string name;
  std::string content;
};

// Trajectory CSVs (one per client) and ground-truth alpha / Jacobian tables.
std::vector<Artifact> GenerateArtifacts(const ExperimentConfig& config,
                                        const GroundTruthSystem& system,
                                        const Trajectory& trajectory);

// Validation-window series the metric tables are computed from.
struct MetricInputs {
  std::vector<Vector> alpha;
  std::vector<Vector> alpha_gt;
  std::vector<std::vector<Matrix>> jacobian;
  std::vector<std::vector<Matrix>> jacobian_gt;
  // Oracle series, empty when the oracle was not run.
  std::vector<Vector> alpha_oracle;
  std::vector<std::vector<Matrix>> jacobian_oracle;
};

// residuals.csv, residuals_by_time.csv, corr_alpha.csv (and
// corr_alpha_oracle.csv), corr_alpha_jac.csv and similarity.csv. Shared by
// `train` and `report`.
absl::StatusOr<std::vector<Artifact>> MetricArtifacts(
    const GatParams& params, std::size_t begin, const MetricInputs& inputs);

// Everything `train` writes apart from the manifest. `oracle` and `bounds`
// may be null. A partial report (failed run) yields the tables that can be
// built from it.
absl::StatusOr<std::vector<Artifact>> TrainArtifacts(
    const ExperimentReport& report, const OracleRun* oracle,
    const BoundReport* bounds);

absl::StatusOr<std::vector<Artifact>> SweepArtifacts(
    const std::vector<SweepRow>& rows);

// Rebuilds metric inputs from a train output directory.
absl::StatusOr<MetricInputs> LoadMetricInputs(
    const std::filesystem::path& dir, const GatParams& params,
    std::size_t* begin);

struct ManifestFile {
  std::string path;
  std::string sha256;
  std::size_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::string status = "ok";
  ExperimentConfig config;
  std::string started_at;
  std::string finished_at;
  std::vector<ManifestFile> files;
  // Flat key -> number summary; whole numbers print as integers and
  // non-finite values as null.
  std::vector<std::pair<std::string, double>> summary;
  std::vector<std::string> notes;
};

std::string Sha256Hex(absl::string_view data);
std::string UtcTimestamp();
const char* ToolVersion();

// Refuses an existing non-empty directory unless `force`; with `force` the
// existing files are kept and overwritten one by one. Creates it otherwise.
// Returns a warning text when something will be overwritten.
absl::StatusOr<std::string> PrepareOutDir(const std::filesystem::path& dir,
                                          bool force);

// Writes each artifact and appends its checksum to `manifest`.
absl::Status WriteArtifacts(const std::filesystem::path& dir,
                            const std::vector<Artifact>& artifacts,
                            RunManifest& manifest);
absl::Status WriteManifest(const std::filesystem::path& dir,
                           const RunManifest& manifest);

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path);

}  // namespace fedgat

#endif  // FEDGAT_ARTIFACTS_H_
