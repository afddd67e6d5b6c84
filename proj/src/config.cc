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

#include "fedgat/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "fedgat/status.h"

namespace fedgat {
namespace {

std::string FormatDouble(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

absl::Status BadValue(absl::string_view key, absl::string_view value,
                      absl::string_view want) {
  return ConfigError(
      absl::StrCat("key '", key, "': expected ", want, ", got '", value, "'"));
}

absl::Status ParseSize(absl::string_view key, absl::string_view v,
                       std::size_t& out) {
  std::uint64_t x;
  if (!absl::SimpleAtoi(v, &x)) return BadValue(key, v, "a non-negative integer");
  out = static_cast<std::size_t>(x);
  return absl::OkStatus();
}

absl::Status ParseInt(absl::string_view key, absl::string_view v, int& out) {
  if (!absl::SimpleAtoi(v, &out)) return BadValue(key, v, "an integer");
  return absl::OkStatus();
}

absl::Status ParseDouble(absl::string_view key, absl::string_view v,
                         double& out) {
  if (!absl::SimpleAtod(v, &out) || !std::isfinite(out)) {
    return BadValue(key, v, "a finite number");
  }
  return absl::OkStatus();
}

absl::Status ParseBool(absl::string_view key, absl::string_view v, bool& out) {
  if (!absl::SimpleAtob(v, &out)) return BadValue(key, v, "true or false");
  return absl::OkStatus();
}

absl::StatusOr<Adjacency> ParseAdjacency(absl::string_view v) {
  std::vector<std::vector<int>> rows;
  for (absl::string_view row_text : absl::StrSplit(v, ';')) {
    std::vector<int> row;
    for (absl::string_view cell :
         absl::StrSplit(row_text, absl::ByAnyChar(" ,\t"), absl::SkipEmpty())) {
      int x;
      if (!absl::SimpleAtoi(cell, &x)) {
        return BadValue("adjacency", cell, "0 or 1");
      }
      row.push_back(x);
    }
    rows.push_back(std::move(row));
  }
  auto adj = Adjacency::FromRows(rows);
  if (!adj.ok()) {
    return ConfigError(absl::StrCat("key 'adjacency': ", adj.status().message()));
  }
  return adj;
}

}  // namespace

Adjacency ExperimentConfig::ResolvedAdjacency() const {
  return adjacency.size() == 0 ? Adjacency::Ring(num_clients) : adjacency;
}

double ExperimentConfig::PhiFor(std::size_t client) const {
  return phi[client % phi.size()];
}

GatOptions ExperimentConfig::ServerGatOptions() const {
  GatOptions o;
  o.activation = activation;
  o.weight_sharing = weight_sharing;
  o.score_transform = score_transform;
  o.leaky_relu = leaky_relu;
  return o;
}

absl::Status Validate(const ExperimentConfig& c) {
  auto require = [](bool ok, absl::string_view key, absl::string_view rule) {
    return ok ? absl::OkStatus()
              : ConfigError(absl::StrCat("key '", key, "': ", rule));
  };
  FEDGAT_RETURN_IF_ERROR(require(c.num_clients >= 1, "num_clients", "must be >= 1"));
  FEDGAT_RETURN_IF_ERROR(require(c.latent_dim >= 1, "latent_dim", "must be >= 1"));
  FEDGAT_RETURN_IF_ERROR(require(c.obs_dim >= 1, "obs_dim", "must be >= 1"));
  FEDGAT_RETURN_IF_ERROR(require(c.timesteps >= 2, "timesteps", "must be >= 2"));
  FEDGAT_RETURN_IF_ERROR(require(c.train_frac > 0 && c.train_frac < 1,
                                 "train_frac", "must be in (0, 1)"));
  if (c.timesteps >= 3) {
    const auto n = static_cast<std::size_t>(
        std::floor(static_cast<double>(c.timesteps) * c.train_frac));
    FEDGAT_RETURN_IF_ERROR(require(n >= 2 && n < c.timesteps, "train_frac",
                                   "leaves an empty training or validation slice"));
  }
  FEDGAT_RETURN_IF_ERROR(require(c.sigma_q >= 0, "sigma_q", "must be >= 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.sigma_r > 0, "sigma_r", "must be > 0"));
  FEDGAT_RETURN_IF_ERROR(require(!c.phi.empty(), "phi", "needs at least one value"));
  for (double p : c.phi) {
    FEDGAT_RETURN_IF_ERROR(require(p > 0, "phi", "values must be > 0"));
  }
  if (c.adjacency.size() != 0) {
    FEDGAT_RETURN_IF_ERROR(require(
        c.adjacency.size() == c.num_clients, "adjacency",
        absl::StrCat("must be ", c.num_clients, "x", c.num_clients)));
  }
  const Adjacency adj = c.ResolvedAdjacency();
  for (std::size_t m = 0; m < adj.size(); ++m) {
    FEDGAT_RETURN_IF_ERROR(
        require(adj(m, m), "adjacency", "every diagonal entry must be 1"));
  }
  FEDGAT_RETURN_IF_ERROR(require(c.init_state_std >= 0, "init_state_std", "must be >= 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.gt_weight_scale >= 0, "gt_weight_scale", "must be >= 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.gt_attention_scale >= 0, "gt_attention_scale", "must be >= 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.lr_client > 0, "lr_client", "must be > 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.lr_server > 0, "lr_server", "must be > 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.eta1 >= 0, "eta1", "must be >= 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.eta2 >= 0, "eta2", "must be >= 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.epochs >= 0, "epochs", "must be >= 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.hidden_size >= 1, "hidden_size", "must be >= 1"));
  FEDGAT_RETURN_IF_ERROR(require(c.patience >= 0, "patience", "must be >= 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.min_rel_improvement >= 0, "min_rel_improvement", "must be >= 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.freeze_patience >= 0, "freeze_patience", "must be >= 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.freeze_ema >= 0 && c.freeze_ema < 1, "freeze_ema", "must be in [0, 1)"));
  FEDGAT_RETURN_IF_ERROR(require(c.ekf_p0 > 0, "ekf_p0", "must be > 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.privacy.sigma_ca >= 0, "sigma_ca", "must be >= 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.privacy.sigma_g >= 0, "sigma_g", "must be >= 0"));
  FEDGAT_RETURN_IF_ERROR(require(c.bytes_per_float == 4 || c.bytes_per_float == 8,
                                 "bytes_per_float", "must be 4 or 8"));
  return absl::OkStatus();
}

absl::Status SetConfigValue(ExperimentConfig& c, absl::string_view key,
                            absl::string_view v) {
  if (key == "num_clients") return ParseSize(key, v, c.num_clients);
  if (key == "latent_dim") return ParseSize(key, v, c.latent_dim);
  if (key == "obs_dim") return ParseSize(key, v, c.obs_dim);
  if (key == "timesteps") return ParseSize(key, v, c.timesteps);
  if (key == "train_frac") return ParseDouble(key, v, c.train_frac);
  if (key == "sigma_q") return ParseDouble(key, v, c.sigma_q);
  if (key == "sigma_r") return ParseDouble(key, v, c.sigma_r);
  if (key == "adjacency") {
    if (absl::StripAsciiWhitespace(v) == "ring") {
      c.adjacency = Adjacency();
      return absl::OkStatus();
    }
    FEDGAT_ASSIGN_OR_RETURN(c.adjacency, ParseAdjacency(v));
    return absl::OkStatus();
  }
  if (key == "phi") {
    std::vector<double> phi;
    for (absl::string_view cell :
         absl::StrSplit(v, absl::ByAnyChar(" ,\t"), absl::SkipEmpty())) {
      double x;
      FEDGAT_RETURN_IF_ERROR(ParseDouble(key, cell, x));
      phi.push_back(x);
    }
    c.phi = std::move(phi);
    return absl::OkStatus();
  }
  if (key == "init_state_std") return ParseDouble(key, v, c.init_state_std);
  if (key == "gt_weight_scale") return ParseDouble(key, v, c.gt_weight_scale);
  if (key == "gt_attention_scale") return ParseDouble(key, v, c.gt_attention_scale);
  if (key == "lr_client") return ParseDouble(key, v, c.lr_client);
  if (key == "lr_server") return ParseDouble(key, v, c.lr_server);
  if (key == "eta1") return ParseDouble(key, v, c.eta1);
  if (key == "eta2") return ParseDouble(key, v, c.eta2);
  if (key == "epochs") return ParseInt(key, v, c.epochs);
  if (key == "batch_size") return ParseSize(key, v, c.batch_size);
  if (key == "hidden_size") return ParseSize(key, v, c.hidden_size);
  if (key == "patience") return ParseInt(key, v, c.patience);
  if (key == "min_rel_improvement") return ParseDouble(key, v, c.min_rel_improvement);
  if (key == "freeze_patience") return ParseInt(key, v, c.freeze_patience);
  if (key == "freeze_min_rel_improvement") {
    return ParseDouble(key, v, c.freeze_min_rel_improvement);
  }
  if (key == "freeze_ema") return ParseDouble(key, v, c.freeze_ema);
  if (key == "activation") {
    auto a = ParseActivation(v);
    if (!a.ok()) return BadValue(key, v, "tanh or identity");
    c.activation = *a;
    return absl::OkStatus();
  }
  if (key == "weight_sharing") {
    if (v == "per_edge") c.weight_sharing = WeightSharing::kPerEdge;
    else if (v == "shared") c.weight_sharing = WeightSharing::kShared;
    else return BadValue(key, v, "per_edge or shared");
    return absl::OkStatus();
  }
  if (key == "score_transform") {
    if (v == "per_edge") c.score_transform = ScoreTransform::kPerEdge;
    else if (v == "shared_projection") c.score_transform = ScoreTransform::kSharedProjection;
    else return BadValue(key, v, "per_edge or shared_projection");
    return absl::OkStatus();
  }
  if (key == "leaky_relu") return ParseBool(key, v, c.leaky_relu);
  if (key == "ekf_p0") return ParseDouble(key, v, c.ekf_p0);
  if (key == "joseph_form") return ParseBool(key, v, c.joseph_form);
  if (key == "sigma_ca") return ParseDouble(key, v, c.privacy.sigma_ca);
  if (key == "sigma_g") return ParseDouble(key, v, c.privacy.sigma_g);
  if (key == "bytes_per_float") return ParseSize(key, v, c.bytes_per_float);
  if (key == "run_oracle") return ParseBool(key, v, c.run_oracle);
  if (key == "seed") {
    if (!absl::SimpleAtoi(v, &c.seed)) return BadValue(key, v, "an unsigned integer");
    return absl::OkStatus();
  }
  return ConfigError(absl::StrCat("unknown key '", key, "'"));
}

absl::StatusOr<ExperimentConfig> ParseConfig(absl::string_view text) {
  ExperimentConfig c;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_no;
    line = line.substr(0, line.find('#'));
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return ConfigError(absl::StrCat("line ", line_no, ": expected key = value"));
    }
    const absl::string_view key = absl::StripAsciiWhitespace(line.substr(0, eq));
    const absl::string_view value =
        absl::StripAsciiWhitespace(line.substr(eq + 1));
    absl::Status s = SetConfigValue(c, key, value);
    if (!s.ok()) {
      return absl::Status(s.code(),
                          absl::StrCat("line ", line_no, ": ", s.message()));
    }
  }
  FEDGAT_RETURN_IF_ERROR(Validate(c));
  return c;
}

absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) return IoError(absl::StrCat("cannot open config ", path));
  std::stringstream buf;
  buf << in.rdbuf();
  auto c = ParseConfig(buf.str());
  if (!c.ok()) {
    return absl::Status(c.status().code(),
                        absl::StrCat(path, ": ", c.status().message()));
  }
  return c;
}

std::string SerializeConfig(const ExperimentConfig& c) {
  std::vector<std::string> phi;
  for (double p : c.phi) phi.push_back(FormatDouble(p));
  auto b = [](bool x) { return x ? "true" : "false"; };
  std::string out;
  auto add = [&out](absl::string_view k, absl::string_view v) {
    absl::StrAppend(&out, k, " = ", v, "\n");
  };
  add("num_clients", absl::StrCat(c.num_clients));
  add("latent_dim", absl::StrCat(c.latent_dim));
  add("obs_dim", absl::StrCat(c.obs_dim));
  add("timesteps", absl::StrCat(c.timesteps));
  add("train_frac", FormatDouble(c.train_frac));
  add("sigma_q", FormatDouble(c.sigma_q));
  add("sigma_r", FormatDouble(c.sigma_r));
  add("adjacency", c.adjacency.size() == 0 ? "ring" : c.adjacency.ToString());
  add("phi", absl::StrJoin(phi, " "));
  add("init_state_std", FormatDouble(c.init_state_std));
  add("gt_weight_scale", FormatDouble(c.gt_weight_scale));
  add("gt_attention_scale", FormatDouble(c.gt_attention_scale));
  add("lr_client", FormatDouble(c.lr_client));
  add("lr_server", FormatDouble(c.lr_server));
  add("eta1", FormatDouble(c.eta1));
  add("eta2", FormatDouble(c.eta2));
  add("epochs", absl::StrCat(c.epochs));
  add("batch_size", absl::StrCat(c.batch_size));
  add("hidden_size", absl::StrCat(c.hidden_size));
  add("patience", absl::StrCat(c.patience));
  add("min_rel_improvement", FormatDouble(c.min_rel_improvement));
  add("freeze_patience", absl::StrCat(c.freeze_patience));
  add("freeze_min_rel_improvement", FormatDouble(c.freeze_min_rel_improvement));
  add("freeze_ema", FormatDouble(c.freeze_ema));
  add("activation", ToString(c.activation));
  add("weight_sharing",
      c.weight_sharing == WeightSharing::kShared ? "shared" : "per_edge");
  add("score_transform", c.score_transform == ScoreTransform::kSharedProjection
                             ? "shared_projection"
                             : "per_edge");
  add("leaky_relu", b(c.leaky_relu));
  add("ekf_p0", FormatDouble(c.ekf_p0));
  add("joseph_form", b(c.joseph_form));
  add("sigma_ca", FormatDouble(c.privacy.sigma_ca));
  add("sigma_g", FormatDouble(c.privacy.sigma_g));
  add("bytes_per_float", absl::StrCat(c.bytes_per_float));
  add("run_oracle", b(c.run_oracle));
  add("seed", absl::StrCat(c.seed));
  return out;
}

}  // namespace fedgat
