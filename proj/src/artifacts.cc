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

#include "fedgat/artifacts.h"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iterator>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "fedgat/metrics.h"
#include "fedgat/status.h"
#include "nlohmann/json.hpp"

#ifndef FEDGAT_VERSION
#define FEDGAT_VERSION "0.0.0"
#endif

namespace fedgat {
namespace {

namespace fs = std::filesystem;

std::string Str(std::size_t x) { return std::to_string(x); }

std::string Opt(const std::optional<double>& x) {
  return x.has_value() ? FormatDouble(*x) : std::string();
}

// Scalar summary of one Jacobian block: the entry itself when p == 1, the
// Frobenius norm otherwise.
double BlockValue(const Matrix& j) {
  return j.rows() == 1 && j.cols() == 1 ? j(0, 0) : FrobeniusNorm(j);
}

Artifact Emit(std::string name, const CsvTable& table) {
  return Artifact{std::move(name), table.ToString()};
}

CsvTable EdgeSeriesTable(const GatParams& params, std::size_t begin,
                         const std::vector<Vector>& series,
                         const std::vector<Vector>* truth,
                         const std::string& value_name) {
  std::vector<std::string> header = {"t", "m", "n", value_name};
  if (truth != nullptr) header.push_back(value_name + "_gt");
  CsvTable table(std::move(header));
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t k = 0; k < params.edges().size(); ++k) {
      const Edge& e = params.edges()[k];
      std::vector<std::string> row = {Str(begin + i), Str(e.target),
                                      Str(e.source), FormatDouble(series[i][k])};
      if (truth != nullptr) row.push_back(FormatDouble((*truth)[i][k]));
      table.AddRow(std::move(row));
    }
  }
  return table;
}

CsvTable JacobianBlockTable(const GatParams& params, std::size_t begin,
                            const std::vector<std::vector<Matrix>>& series,
                            const std::vector<std::vector<Matrix>>* truth) {
  std::vector<std::string> header = {"t", "m", "n", "value"};
  if (truth != nullptr) header.push_back("value_gt");
  CsvTable table(std::move(header));
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t k = 0; k < params.edges().size(); ++k) {
      const Edge& e = params.edges()[k];
      std::vector<std::string> row = {Str(begin + i), Str(e.target),
                                      Str(e.source),
                                      FormatDouble(BlockValue(series[i][k]))};
      if (truth != nullptr) {
        row.push_back(FormatDouble(BlockValue((*truth)[i][k])));
      }
      table.AddRow(std::move(row));
    }
  }
  return table;
}

CsvTable JacobianEntryTable(const GatParams& params, std::size_t begin,
                            const std::vector<std::vector<Matrix>>& series,
                            const std::vector<std::vector<Matrix>>* truth) {
  std::vector<std::string> header = {"t", "m", "n", "i", "j", "value"};
  if (truth != nullptr) header.push_back("value_gt");
  CsvTable table(std::move(header));
  for (std::size_t t = 0; t < series.size(); ++t) {
    for (std::size_t k = 0; k < params.edges().size(); ++k) {
      const Edge& e = params.edges()[k];
      const Matrix& j = series[t][k];
      for (std::size_t r = 0; r < j.rows(); ++r) {
        for (std::size_t c = 0; c < j.cols(); ++c) {
          std::vector<std::string> row = {Str(begin + t), Str(e.target),
                                          Str(e.source), Str(r), Str(c),
                                          FormatDouble(j(r, c))};
          if (truth != nullptr) row.push_back(FormatDouble((*truth)[t][k](r, c)));
          table.AddRow(std::move(row));
        }
      }
    }
  }
  return table;
}

absl::StatusOr<double> ParseNumber(absl::string_view cell) {
  double x = 0.0;
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), x);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    return IoError(absl::StrCat("not a number: '", cell, "'"));
  }
  return x;
}

absl::StatusOr<std::size_t> ParseIndex(absl::string_view cell) {
  std::size_t x = 0;
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), x);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    return IoError(absl::StrCat("not an index: '", cell, "'"));
  }
  return x;
}

// Column lookup with a descriptive error.
absl::StatusOr<std::vector<std::size_t>> Columns(
    const CsvTable& table, const std::vector<std::string>& names,
    absl::string_view file) {
  std::vector<std::size_t> out;
  for (const std::string& n : names) {
    std::optional<std::size_t> c = table.Column(n);
    if (!c.has_value()) {
      return IoError(absl::StrCat(file, ": missing column '", n, "'"));
    }
    out.push_back(*c);
  }
  return out;
}

// Reads per-edge series in the [t][edge] layout. `value_columns` names one
// or two columns; the second, when given, fills `second`.
absl::Status ReadEdgeSeries(const fs::path& path, const GatParams& params,
                            const std::vector<std::string>& value_columns,
                            std::size_t* begin, std::vector<Vector>* first,
                            std::vector<Vector>* second) {
  FEDGAT_ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  FEDGAT_ASSIGN_OR_RETURN(CsvTable table, CsvTable::Parse(text));
  std::vector<std::string> names = {"t", "m", "n"};
  names.insert(names.end(), value_columns.begin(), value_columns.end());
  FEDGAT_ASSIGN_OR_RETURN(std::vector<std::size_t> col,
                          Columns(table, names, path.filename().string()));
  const std::size_t edges = params.edges().size();
  if (table.rows().empty()) return IoError(absl::StrCat(path.string(), ": empty"));
  FEDGAT_ASSIGN_OR_RETURN(*begin, ParseIndex(table.rows().front()[col[0]]));
  for (const auto& row : table.rows()) {
    FEDGAT_ASSIGN_OR_RETURN(std::size_t t, ParseIndex(row[col[0]]));
    FEDGAT_ASSIGN_OR_RETURN(std::size_t m, ParseIndex(row[col[1]]));
    FEDGAT_ASSIGN_OR_RETURN(std::size_t n, ParseIndex(row[col[2]]));
    if (t < *begin || m >= params.num_nodes() || n >= params.num_nodes() ||
        params.EdgeIndex(m, n) < 0) {
      return IoError(absl::StrCat(path.string(), ": bad row t=", t, " m=", m,
                                  " n=", n));
    }
    const std::size_t i = t - *begin;
    const auto k = static_cast<std::size_t>(params.EdgeIndex(m, n));
    for (std::vector<Vector>* out : {first, second}) {
      if (out != nullptr && out->size() <= i) out->resize(i + 1, Vector(edges, 0.0));
    }
    FEDGAT_ASSIGN_OR_RETURN((*first)[i][k], ParseNumber(row[col[3]]));
    if (second != nullptr) {
      FEDGAT_ASSIGN_OR_RETURN((*second)[i][k], ParseNumber(row[col[4]]));
    }
  }
  return absl::OkStatus();
}

// Reads Jacobian entries (t, m, n, i, j, value[, value_gt]) or, when
// `scalar`, blocks (t, m, n, value[, value_gt]) for p == 1.
absl::Status ReadJacobianSeries(const fs::path& path, const GatParams& params,
                                bool scalar, std::size_t begin,
                                std::vector<std::vector<Matrix>>* first,
                                std::vector<std::vector<Matrix>>* second) {
  FEDGAT_ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  FEDGAT_ASSIGN_OR_RETURN(CsvTable table, CsvTable::Parse(text));
  std::vector<std::string> names = {"t", "m", "n"};
  if (!scalar) {
    names.push_back("i");
    names.push_back("j");
  }
  names.push_back("value");
  if (second != nullptr) names.push_back("value_gt");
  FEDGAT_ASSIGN_OR_RETURN(std::vector<std::size_t> col,
                          Columns(table, names, path.filename().string()));
  const std::size_t p = params.dim();
  const std::size_t edges = params.edges().size();
  const std::size_t v = scalar ? 3 : 5;
  for (const auto& row : table.rows()) {
    FEDGAT_ASSIGN_OR_RETURN(std::size_t t, ParseIndex(row[col[0]]));
    FEDGAT_ASSIGN_OR_RETURN(std::size_t m, ParseIndex(row[col[1]]));
    FEDGAT_ASSIGN_OR_RETURN(std::size_t n, ParseIndex(row[col[2]]));
    std::size_t r = 0;
    std::size_t c = 0;
    if (!scalar) {
      FEDGAT_ASSIGN_OR_RETURN(r, ParseIndex(row[col[3]]));
      FEDGAT_ASSIGN_OR_RETURN(c, ParseIndex(row[col[4]]));
    }
    if (t < begin || m >= params.num_nodes() || n >= params.num_nodes() ||
        params.EdgeIndex(m, n) < 0 || r >= p || c >= p) {
      return IoError(absl::StrCat(path.string(), ": bad row t=", t, " m=", m,
                                  " n=", n));
    }
    const std::size_t i = t - begin;
    const auto k = static_cast<std::size_t>(params.EdgeIndex(m, n));
    for (std::vector<std::vector<Matrix>>* out : {first, second}) {
      if (out != nullptr && out->size() <= i) {
        out->resize(i + 1, std::vector<Matrix>(edges, Matrix(p, p)));
      }
    }
    FEDGAT_ASSIGN_OR_RETURN((*first)[i][k](r, c), ParseNumber(row[col[v]]));
    if (second != nullptr) {
      FEDGAT_ASSIGN_OR_RETURN((*second)[i][k](r, c),
                              ParseNumber(row[col[v + 1]]));
    }
  }
  return absl::OkStatus();
}

}  // namespace

std::string FormatDouble(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void CsvTable::AddRow(std::vector<std::string> row) {
  if (row.size() != header_.size()) {
    std::fprintf(stderr, "csv row has %zu cells, header has %zu\n", row.size(),
                 header_.size());
    std::abort();
  }
  rows_.push_back(std::move(row));
}

std::string CsvTable::ToString() const {
  std::string out = absl::StrJoin(header_, ",");
  out += '\n';
  for (const auto& row : rows_) {
    absl::StrAppend(&out, absl::StrJoin(row, ","), "\n");
  }
  return out;
}

std::optional<std::size_t> CsvTable::Column(absl::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  return std::nullopt;
}

absl::StatusOr<CsvTable> CsvTable::Parse(absl::string_view text) {
  std::vector<absl::string_view> lines =
      absl::StrSplit(text, '\n', absl::SkipEmpty());
  if (lines.empty()) return IoError("csv: no header");
  CsvTable table(absl::StrSplit(lines[0], ','));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> row = absl::StrSplit(lines[i], ',');
    if (row.size() != table.header_.size()) {
      return IoError(absl::StrCat("csv: line ", i + 1, " has ", row.size(),
                                  " cells, header has ", table.header_.size()));
    }
    table.rows_.push_back(std::move(row));
  }
  return table;
}

std::vector<Artifact> GenerateArtifacts(const ExperimentConfig& config,
                                        const GroundTruthSystem& system,
                                        const Trajectory& trajectory) {
  std::vector<Artifact> out;
  const std::size_t p = system.latent_dim();
  const std::size_t d = system.obs_dim();
  for (std::size_t m = 0; m < system.num_clients(); ++m) {
    std::vector<std::string> header = {"t"};
    for (std::size_t i = 0; i < p; ++i) header.push_back(absl::StrCat("h", i));
    for (std::size_t i = 0; i < d; ++i) header.push_back(absl::StrCat("y", i));
    CsvTable table(std::move(header));
    for (std::size_t t = 0; t < trajectory.length(); ++t) {
      std::vector<std::string> row = {Str(trajectory.start_time + t)};
      for (double x : trajectory.latent[t][m]) row.push_back(FormatDouble(x));
      for (double x : trajectory.observations[t][m]) {
        row.push_back(FormatDouble(x));
      }
      table.AddRow(std::move(row));
    }
    out.push_back(Emit(absl::StrCat("client_", m, ".csv"), table));
  }
  const GatParams& gat = system.transition;
  out.push_back(Emit("alpha_gt.csv",
                     EdgeSeriesTable(gat, trajectory.start_time,
                                     trajectory.attention_gt, nullptr, "value")));
  out.push_back(Emit("jacobian_gt.csv",
                     JacobianBlockTable(gat, trajectory.start_time,
                                        trajectory.jacobian_gt, nullptr)));
  if (p > 1) {
    out.push_back(Emit("jacobian_gt_entries.csv",
                       JacobianEntryTable(gat, trajectory.start_time,
                                          trajectory.jacobian_gt, nullptr)));
  }
  out.push_back(Artifact{"config.cfg", SerializeConfig(config)});
  return out;
}

absl::StatusOr<std::vector<Artifact>> MetricArtifacts(
    const GatParams& params, std::size_t begin, const MetricInputs& in) {
  const std::size_t nodes = params.num_nodes();
  const std::size_t edges = params.edges().size();
  const bool with_oracle = !in.alpha_oracle.empty();
  std::vector<Artifact> out;

  FEDGAT_ASSIGN_OR_RETURN(Vector att, AttentionResiduals(in.alpha, in.alpha_gt));
  FEDGAT_ASSIGN_OR_RETURN(std::vector<Vector> permuted,
                          PermutedAttention(params, in.alpha_gt));
  FEDGAT_ASSIGN_OR_RETURN(Vector null_att,
                          AttentionResiduals(permuted, in.alpha_gt));
  FEDGAT_ASSIGN_OR_RETURN(JacobianResidualResult jac,
                          JacobianResiduals(in.jacobian, in.jacobian_gt));
  {
    CsvTable table({"m", "n", "masked", "attention_residual",
                    "jacobian_residual", "jacobian_standardized",
                    "null_attention_residual"});
    for (std::size_t m = 0; m < nodes; ++m) {
      for (std::size_t n = 0; n < nodes; ++n) {
        const int k = params.EdgeIndex(m, n);
        if (k < 0) {
          table.AddRow({Str(m), Str(n), "1", "0", "0", "", "0"});
          continue;
        }
        table.AddRow({Str(m), Str(n), "0", FormatDouble(att[k]),
                      FormatDouble(jac.residual[k]),
                      jac.standardized[k] ? "1" : "0",
                      FormatDouble(null_att[k])});
      }
    }
    out.push_back(Emit("residuals.csv", table));
  }
  {
    FEDGAT_ASSIGN_OR_RETURN(
        Vector by_t, AttentionResiduals(in.alpha, in.alpha_gt,
                                        ResidualAggregation::kPerTimeOverEdges));
    FEDGAT_ASSIGN_OR_RETURN(
        Vector null_t,
        AttentionResiduals(permuted, in.alpha_gt,
                           ResidualAggregation::kPerTimeOverEdges));
    CsvTable table({"t", "attention_residual", "null_attention_residual"});
    for (std::size_t i = 0; i < by_t.size(); ++i) {
      table.AddRow({Str(begin + i), FormatDouble(by_t[i]),
                    FormatDouble(null_t[i])});
    }
    out.push_back(Emit("residuals_by_time.csv", table));
  }
  auto dense = [&](const std::vector<std::optional<double>>& per_edge) {
    std::vector<std::string> header = {"m"};
    for (std::size_t n = 0; n < nodes; ++n) header.push_back(Str(n));
    CsvTable table(std::move(header));
    for (std::size_t m = 0; m < nodes; ++m) {
      std::vector<std::string> row = {Str(m)};
      for (std::size_t n = 0; n < nodes; ++n) {
        const int k = params.EdgeIndex(m, n);
        row.push_back(k < 0 ? std::string() : Opt(per_edge[k]));
      }
      table.AddRow(std::move(row));
    }
    return table;
  };
  {
    FEDGAT_ASSIGN_OR_RETURN(auto corr, AlphaCrossCorrelation(in.alpha, in.alpha_gt));
    out.push_back(Emit("corr_alpha.csv", dense(corr)));
    if (with_oracle) {
      FEDGAT_ASSIGN_OR_RETURN(auto oc,
                              AlphaCrossCorrelation(in.alpha, in.alpha_oracle));
      out.push_back(Emit("corr_alpha_oracle.csv", dense(oc)));
    }
  }
  {
    struct Model {
      const char* name;
      const std::vector<Vector>* alpha;
      const std::vector<std::vector<Matrix>>* jac;
    };
    std::vector<Model> models = {{"server", &in.alpha, &in.jacobian},
                                 {"ground_truth", &in.alpha_gt, &in.jacobian_gt}};
    if (with_oracle) {
      models.push_back({"oracle", &in.alpha_oracle, &in.jacobian_oracle});
    }
    CsvTable table({"m", "n", "model", "correlation"});
    std::vector<std::vector<std::optional<double>>> corr;
    for (const Model& model : models) {
      FEDGAT_ASSIGN_OR_RETURN(auto c,
                              AlphaJacobianCorrelation(*model.alpha, *model.jac));
      corr.push_back(std::move(c));
    }
    for (std::size_t k = 0; k < edges; ++k) {
      const Edge& e = params.edges()[k];
      for (std::size_t i = 0; i < models.size(); ++i) {
        table.AddRow({Str(e.target), Str(e.source), models[i].name,
                      Opt(corr[i][k])});
      }
    }
    out.push_back(Emit("corr_alpha_jac.csv", table));

    CsvTable sim({"model_a", "model_b", "cosine", "pearson"});
    std::vector<Vector> flat;
    for (const Model& model : models) flat.push_back(FlattenJacobians(*model.jac));
    std::vector<std::pair<std::size_t, std::size_t>> pairs = {{0, 1}};
    if (with_oracle) {
      pairs.push_back({0, 2});
      pairs.push_back({2, 1});
    }
    for (auto [a, b] : pairs) {
      FEDGAT_ASSIGN_OR_RETURN(Similarity s, ComputeSimilarity(flat[a], flat[b]));
      sim.AddRow({models[a].name, models[b].name, Opt(s.cosine), Opt(s.pearson)});
    }
    out.push_back(Emit("similarity.csv", sim));
  }
  return out;
}

absl::StatusOr<std::vector<Artifact>> TrainArtifacts(
    const ExperimentReport& report, const OracleRun* oracle,
    const BoundReport* bounds) {
  const ExperimentConfig& config = report.config;
  const std::size_t m_count = config.num_clients;
  std::vector<Artifact> out;
  out.push_back(Artifact{"config.cfg", SerializeConfig(config)});

  {
    CsvTable losses({"epoch", "client", "L_a", "alignment", "L_s"});
    std::vector<std::string> wide_header = {"epoch", "L_s"};
    for (std::size_t m = 0; m < m_count; ++m) {
      wide_header.push_back(absl::StrCat("L_a_", m));
    }
    CsvTable curves(std::move(wide_header));
    std::vector<std::string> val_header = {"epoch", "L_s_val"};
    for (std::size_t m = 0; m < m_count; ++m) {
      val_header.push_back(absl::StrCat("alignment_val_", m));
    }
    CsvTable val(std::move(val_header));
    for (const EpochRecord& e : report.epochs) {
      std::vector<std::string> wide = {Str(e.epoch),
                                       FormatDouble(e.train_server_loss)};
      std::vector<std::string> vrow = {Str(e.epoch),
                                       FormatDouble(e.val_server_loss)};
      for (std::size_t m = 0; m < m_count; ++m) {
        losses.AddRow({Str(e.epoch), Str(m), FormatDouble(e.local_loss[m]),
                       FormatDouble(e.alignment[m]),
                       FormatDouble(e.train_server_loss)});
        wide.push_back(FormatDouble(e.local_loss[m]));
        vrow.push_back(FormatDouble(e.val_alignment[m]));
      }
      curves.AddRow(std::move(wide));
      val.AddRow(std::move(vrow));
    }
    out.push_back(Emit("losses.csv", losses));
    out.push_back(Emit("loss_curves.csv", curves));
    out.push_back(Emit("val_losses.csv", val));
  }
  {
    CsvTable bytes({"round", "direction", "bytes"});
    for (const RoundStats& r : report.rounds) {
      bytes.AddRow({Str(r.round), ToString(Direction::kClientToServer),
                    Str(r.bytes_up)});
      bytes.AddRow({Str(r.round), ToString(Direction::kServerToClient),
                    Str(r.bytes_down)});
    }
    out.push_back(Emit("bytes.csv", bytes));
  }

  const ValidationRecord& vr = report.validation;
  if (vr.alpha.empty()) return out;
  const GatParams& params = report.server_params;
  out.push_back(Emit("alpha.csv", EdgeSeriesTable(params, vr.begin, vr.alpha,
                                                  &vr.alpha_gt, "alpha")));
  out.push_back(Emit("jacobian.csv", JacobianBlockTable(params, vr.begin,
                                                        vr.jacobian,
                                                        &vr.jacobian_gt)));
  if (params.dim() > 1) {
    out.push_back(Emit("jacobian_entries.csv",
                       JacobianEntryTable(params, vr.begin, vr.jacobian,
                                          &vr.jacobian_gt)));
  }
  {
    CsvTable table({"t", "m", "proprietary", "augmented", "server"});
    for (std::size_t i = 0; i < vr.residual_c.size(); ++i) {
      for (std::size_t m = 0; m < m_count; ++m) {
        table.AddRow({Str(vr.begin + i), Str(m),
                      FormatDouble(vr.residual_c[i][m]),
                      FormatDouble(vr.residual_a[i][m]),
                      FormatDouble(vr.residual_s[i][m])});
      }
    }
    out.push_back(Emit("state_residuals.csv", table));
  }

  MetricInputs inputs{vr.alpha, vr.alpha_gt, vr.jacobian, vr.jacobian_gt, {}, {}};
  if (oracle != nullptr) {
    if (oracle->val_begin != vr.begin) {
      return ShapeError("oracle and server validation windows differ");
    }
    inputs.alpha_oracle = oracle->alpha;
    inputs.jacobian_oracle = oracle->jacobian;
    out.push_back(Emit("oracle_alpha.csv",
                       EdgeSeriesTable(params, vr.begin, oracle->alpha, nullptr,
                                       "alpha")));
    out.push_back(Emit("oracle_jacobian.csv",
                       JacobianEntryTable(params, vr.begin, oracle->jacobian,
                                          nullptr)));
  }
  FEDGAT_ASSIGN_OR_RETURN(std::vector<Artifact> metrics,
                          MetricArtifacts(params, vr.begin, inputs));
  for (Artifact& a : metrics) out.push_back(std::move(a));

  if (bounds != nullptr) {
    std::vector<std::string> header = {"t", "eps1", "eps2", "sigma_min_Hc"};
    for (std::size_t m = 0; m < m_count; ++m) {
      header.push_back(absl::StrCat("alpha_gap_", m));
    }
    for (const Edge& e : params.edges()) {
      header.push_back(absl::StrCat("jac_gap_", e.target, "_", e.source));
    }
    CsvTable table(std::move(header));
    for (std::size_t i = 0; i < bounds->eps1.size(); ++i) {
      std::vector<std::string> row = {
          Str(bounds->begin + i), FormatDouble(bounds->eps1[i]),
          FormatDouble(bounds->eps2[i]), FormatDouble(bounds->sigma_min_hc[i])};
      for (double g : bounds->alpha_gap[i]) row.push_back(FormatDouble(g));
      for (double g : bounds->jac_gap[i]) row.push_back(FormatDouble(g));
      table.AddRow(std::move(row));
    }
    out.push_back(Emit("bounds.csv", table));
  }
  return out;
}

absl::StatusOr<std::vector<Artifact>> SweepArtifacts(
    const std::vector<SweepRow>& rows) {
  CsvTable table({"axis", "value", "bytes", "Ls_final"});
  for (const SweepRow& r : rows) {
    // Failed points keep their row with empty measurements.
    table.AddRow({ToString(r.axis), FormatDouble(r.value),
                  r.status.ok() ? Str(r.bytes) : std::string(),
                  r.status.ok() ? FormatDouble(r.ls_final) : std::string()});
  }
  return std::vector<Artifact>{Emit("sweep.csv", table)};
}

absl::StatusOr<MetricInputs> LoadMetricInputs(const fs::path& dir,
                                              const GatParams& params,
                                              std::size_t* begin) {
  MetricInputs in;
  FEDGAT_RETURN_IF_ERROR(ReadEdgeSeries(dir / "alpha.csv", params,
                                        {"alpha", "alpha_gt"}, begin, &in.alpha,
                                        &in.alpha_gt));
  const bool scalar = params.dim() == 1;
  FEDGAT_RETURN_IF_ERROR(ReadJacobianSeries(
      dir / (scalar ? "jacobian.csv" : "jacobian_entries.csv"), params, scalar,
      *begin, &in.jacobian, &in.jacobian_gt));
  if (in.jacobian.size() != in.alpha.size()) {
    return IoError("alpha and jacobian tables cover different windows");
  }
  if (fs::exists(dir / "oracle_alpha.csv")) {
    std::size_t oracle_begin = 0;
    FEDGAT_RETURN_IF_ERROR(ReadEdgeSeries(dir / "oracle_alpha.csv", params,
                                          {"alpha"}, &oracle_begin,
                                          &in.alpha_oracle, nullptr));
    if (oracle_begin != *begin) {
      return IoError("oracle and server tables cover different windows");
    }
    FEDGAT_RETURN_IF_ERROR(ReadJacobianSeries(dir / "oracle_jacobian.csv",
                                              params, false, *begin,
                                              &in.jacobian_oracle, nullptr));
  }
  return in;
}

std::string Sha256Hex(absl::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    std::abort();
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* ToolVersion() { return FEDGAT_VERSION; }

absl::StatusOr<std::string> PrepareOutDir(const fs::path& dir, bool force) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) {
      return IoError(absl::StrCat(dir.string(), " exists and is not a directory"));
    }
    if (!fs::is_empty(dir, ec)) {
      if (!force) {
        return IoError(absl::StrCat(dir.string(),
                                    " is not empty; pass --force to overwrite"));
      }
      return absl::StrCat("warning: overwriting files in ", dir.string());
    }
    return std::string();
  }
  fs::create_directories(dir, ec);
  if (ec) {
    return IoError(absl::StrCat("cannot create ", dir.string(), ": ",
                                ec.message()));
  }
  return std::string();
}

absl::Status WriteArtifacts(const fs::path& dir,
                            const std::vector<Artifact>& artifacts,
                            RunManifest& manifest) {
  for (const Artifact& a : artifacts) {
    std::ofstream f(dir / a.name, std::ios::binary | std::ios::trunc);
    f.write(a.content.data(), static_cast<std::streamsize>(a.content.size()));
    f.close();
    if (!f) return IoError(absl::StrCat("cannot write ", (dir / a.name).string()));
    manifest.files.push_back({a.name, Sha256Hex(a.content), a.content.size()});
  }
  return absl::OkStatus();
}

absl::Status WriteManifest(const fs::path& dir, const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["tool"] = "fedgat";
  j["version"] = ToolVersion();
  j["command"] = manifest.command;
  j["status"] = manifest.status;
  j["seed"] = manifest.config.seed;
  j["config"] = SerializeConfig(manifest.config);
  j["started_at"] = manifest.started_at;
  j["finished_at"] = manifest.finished_at;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const ManifestFile& f : manifest.files) {
    files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  j["files"] = files;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  for (const auto& [k, v] : manifest.summary) {
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) {
      summary[k] = static_cast<std::int64_t>(v);
    } else if (std::isfinite(v)) {
      summary[k] = v;
    } else {
      summary[k] = nullptr;
    }
  }
  j["summary"] = summary;
  j["notes"] = manifest.notes;
  const std::string text = j.dump(2) + "\n";
  std::ofstream f(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  f << text;
  f.close();
  if (!f) return IoError(absl::StrCat("cannot write ", (dir / "manifest.json").string()));
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadFile(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return IoError(absl::StrCat("cannot read ", path.string()));
  return std::string(std::istreambuf_iterator<char>(f),
                     std::istreambuf_iterator<char>());
}

}  // namespace fedgat
