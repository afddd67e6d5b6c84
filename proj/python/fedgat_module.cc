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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cli.h"
#include "fedgat/config.h"
#include "fedgat/fed_round.h"

namespace py = pybind11;

namespace fedgat {
namespace {

// Config and contract errors become ValueError, divergence RuntimeError and
// I/O OSError, mirroring the CLI exit codes.
[[noreturn]] void Raise(const absl::Status& status) {
  const std::string msg(status.message());
  switch (status.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kFailedPrecondition:
      throw py::value_error(msg);
    case absl::StatusCode::kUnavailable:
      PyErr_SetString(PyExc_OSError, msg.c_str());
      throw py::error_already_set();
    default:
      throw std::runtime_error(msg);
  }
}

ExperimentConfig Parse(const std::string& text) {
  absl::StatusOr<ExperimentConfig> config = ParseConfig(text);
  if (!config.ok()) Raise(config.status());
  if (absl::Status s = Validate(*config); !s.ok()) Raise(s);
  return *std::move(config);
}

py::array_t<double> ToArray(const std::vector<Vector>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  py::array_t<double> out({rows.size(), cols});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) view(i, j) = rows[i][j];
  }
  return out;
}

py::dict RunExperimentPy(const std::string& config_text) {
  const ExperimentConfig config = Parse(config_text);
  absl::StatusOr<ExperimentReport> report;
  {
    py::gil_scoped_release release;
    report = RunExperiment(config);
  }
  if (!report.ok()) Raise(report.status());

  py::dict out;
  out["initial_val_server_loss"] = report->initial_val_server_loss;
  out["final_val_server_loss"] = report->final_val_server_loss;
  out["epochs_run"] = report->epochs_run;
  out["early_stopped"] = report->early_stopped;
  out["bytes_per_timestep"] = report->bytes_per_timestep;
  out["max_up_floats_per_timestep"] = report->max_up_floats_per_timestep;
  std::vector<double> val;
  for (const EpochRecord& e : report->epochs) val.push_back(e.val_server_loss);
  out["val_server_loss"] = val;
  std::vector<std::tuple<std::size_t, std::size_t>> edges;
  for (const Edge& e : report->server_params.edges()) {
    edges.emplace_back(e.target, e.source);
  }
  out["edges"] = edges;
  const ValidationRecord& v = report->validation;
  out["validation_begin"] = v.begin;
  out["alpha"] = ToArray(v.alpha);
  out["alpha_gt"] = ToArray(v.alpha_gt);
  out["residual_c"] = ToArray(v.residual_c);
  out["residual_a"] = ToArray(v.residual_a);
  out["residual_s"] = ToArray(v.residual_s);
  return out;
}

std::tuple<int, std::string, std::string> RunCliPy(
    const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = RunCli(args, out, err);
  }
  return {code, out.str(), err.str()};
}

}  // namespace
}  // namespace fedgat

PYBIND11_MODULE(_core, m) {
  m.doc() = "Federated GAT dynamics-learning simulator.";
  m.def("default_config",
        [] { return fedgat::SerializeConfig(fedgat::ExperimentConfig()); },
        "Canonical text of the default config.");
  m.def("normalize_config",
        [](const std::string& text) {
          return fedgat::SerializeConfig(fedgat::Parse(text));
        },
        py::arg("text"),
        "Parses and validates config text; returns its canonical form.");
  m.def("run_experiment", &fedgat::RunExperimentPy,
        py::arg("config_text") = "",
        "Trains one federation and returns losses, bytes, attention and "
        "residual arrays. Empty text means the defaults.");
  m.def("run_cli", &fedgat::RunCliPy, py::arg("args"),
        "Runs the command line in-process; returns (exit code, stdout, "
        "stderr).");
}
