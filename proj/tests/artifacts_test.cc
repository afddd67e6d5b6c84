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

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fedgat/metrics.h"
#include "fedgat/numkit/rng.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace fedgat {
namespace {

namespace fs = std::filesystem;
using ::testing::ElementsAre;
using ::testing::HasSubstr;

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / name;
  fs::remove_all(dir);
  return dir;
}

TEST(FormatDoubleTest, RoundTripsExactly) {
  SeededRng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.Normal() * std::pow(10.0, i % 30 - 15);
    const std::string s = FormatDouble(x);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    ASSERT_EQ(back, x) << s;
  }
  EXPECT_EQ(FormatDouble(0.5), "0.5");
  EXPECT_EQ(FormatDouble(2.0), "2");
}

TEST(CsvTableTest, ParseInvertsToString) {
  CsvTable t({"a", "b"});
  t.AddRow({"1", "x"});
  t.AddRow({"2", ""});
  EXPECT_EQ(t.ToString(), "a,b\n1,x\n2,\n");
  auto back = CsvTable::Parse(t.ToString());
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->header(), t.header());
  EXPECT_EQ(back->rows(), t.rows());
  EXPECT_EQ(*back->Column("b"), 1u);
  EXPECT_FALSE(back->Column("c").has_value());
}

TEST(CsvTableTest, RaggedRowIsIoError) {
  auto t = CsvTable::Parse("a,b\n1\n");
  EXPECT_EQ(t.status().code(), absl::StatusCode::kUnavailable);
}

TEST(Sha256Test, KnownVectors) {
  EXPECT_EQ(Sha256Hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(Sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(OutDirTest, NonEmptyDirNeedsForce) {
  const fs::path dir = FreshDir("outdir_policy");
  auto fresh = PrepareOutDir(dir, false);
  ASSERT_TRUE(fresh.ok());
  EXPECT_TRUE(fresh->empty());
  EXPECT_TRUE(fs::is_directory(dir));
  std::ofstream(dir / "x.csv") << "x\n";
  EXPECT_EQ(PrepareOutDir(dir, false).status().code(),
            absl::StatusCode::kUnavailable);
  auto forced = PrepareOutDir(dir, true);
  ASSERT_TRUE(forced.ok());
  EXPECT_THAT(*forced, HasSubstr("overwriting"));
}

TEST(OutDirTest, FileInTheWayIsIoError) {
  const fs::path dir = FreshDir("outdir_file");
  std::ofstream(dir.string()) << "x";
  EXPECT_EQ(PrepareOutDir(dir, true).status().code(),
            absl::StatusCode::kUnavailable);
  fs::remove(dir);
}

TEST(ManifestTest, ChecksumsMatchWrittenFiles) {
  const fs::path dir = FreshDir("manifest");
  ASSERT_TRUE(PrepareOutDir(dir, false).ok());
  RunManifest manifest;
  manifest.command = "test";
  const std::vector<Artifact> files = {{"a.csv", "x\n1\n"}, {"b.csv", "y\n"}};
  ASSERT_TRUE(WriteArtifacts(dir, files, manifest).ok());
  ASSERT_TRUE(WriteManifest(dir, manifest).ok());
  ASSERT_EQ(manifest.files.size(), 2u);
  for (const ManifestFile& f : manifest.files) {
    auto body = ReadFile(dir / f.path);
    ASSERT_TRUE(body.ok());
    EXPECT_EQ(Sha256Hex(*body), f.sha256);
    EXPECT_EQ(body->size(), f.bytes);
  }
  auto json = ReadFile(dir / "manifest.json");
  ASSERT_TRUE(json.ok());
  EXPECT_THAT(*json, HasSubstr(manifest.files[0].sha256));
}

ExperimentConfig TinyConfig() {
  ExperimentConfig c;
  c.timesteps = 40;
  c.hidden_size = 8;
  c.epochs = 2;
  c.batch_size = 8;
  return c;
}

TEST(TrainArtifactsTest, TablesHaveDocumentedShapes) {
  ExperimentConfig c = TinyConfig();
  auto report = RunExperiment(c);
  ASSERT_TRUE(report.ok()) << report.status();
  auto oracle = RunOracle(*report);
  ASSERT_TRUE(oracle.ok()) << oracle.status();
  auto bounds = ComputeBounds(report->server_params, ServerBoundInputs(*report),
                              OracleBoundInputs(*oracle));
  ASSERT_TRUE(bounds.ok()) << bounds.status();
  auto files = TrainArtifacts(*report, &*oracle, &*bounds);
  ASSERT_TRUE(files.ok()) << files.status();
  auto table = [&](const std::string& name) {
    for (const Artifact& a : *files) {
      if (a.name == name) return *CsvTable::Parse(a.content);
    }
    ADD_FAILURE() << "missing " << name;
    return CsvTable();
  };
  const CsvTable losses = table("losses.csv");
  EXPECT_THAT(losses.header(),
              ElementsAre("epoch", "client", "L_a", "alignment", "L_s"));
  EXPECT_EQ(losses.rows().size(), 3u * c.num_clients);  // epochs 0..2
  EXPECT_THAT(table("loss_curves.csv").header(),
              ElementsAre("epoch", "L_s", "L_a_0", "L_a_1", "L_a_2"));
  const std::size_t val_steps = 40 - 32;
  EXPECT_EQ(table("alpha.csv").rows().size(), val_steps * 7);
  EXPECT_THAT(table("jacobian.csv").header(),
              ElementsAre("t", "m", "n", "value", "value_gt"));
  EXPECT_EQ(table("residuals.csv").rows().size(), 9u);
  EXPECT_THAT(table("similarity.csv").header(),
              ElementsAre("model_a", "model_b", "cosine", "pearson"));
  const CsvTable bounds_table = table("bounds.csv");
  EXPECT_EQ(bounds_table.header().size(), 4u + 3u + 7u);
  EXPECT_EQ(bounds_table.rows().size(), val_steps);
  EXPECT_EQ(table("bytes.csv").rows().size(), 2 * report->rounds.size());
}

TEST(TrainArtifactsTest, WideLatentStatesAddEntryTable) {
  ExperimentConfig c = TinyConfig();
  c.latent_dim = 2;
  auto report = RunExperiment(c);
  ASSERT_TRUE(report.ok()) << report.status();
  auto files = TrainArtifacts(*report, nullptr, nullptr);
  ASSERT_TRUE(files.ok());
  bool found = false;
  for (const Artifact& a : *files) {
    if (a.name == "jacobian_entries.csv") {
      found = true;
      EXPECT_EQ(CsvTable::Parse(a.content)->rows().size(), 8u * 7 * 4);
    }
    EXPECT_NE(a.name, "bounds.csv");
  }
  EXPECT_TRUE(found);
}

TEST(MetricArtifactsTest, ReloadedInputsReproduceTables) {
  for (std::size_t p : {1, 2}) {
    ExperimentConfig c = TinyConfig();
    c.latent_dim = p;
    c.obs_dim = 8;
    auto report = RunExperiment(c);
    ASSERT_TRUE(report.ok()) << report.status();
    auto files = TrainArtifacts(*report, nullptr, nullptr);
    ASSERT_TRUE(files.ok());
    const fs::path dir = FreshDir(absl::StrCat("reload_", p));
    ASSERT_TRUE(PrepareOutDir(dir, false).ok());
    RunManifest manifest;
    ASSERT_TRUE(WriteArtifacts(dir, *files, manifest).ok());

    std::size_t begin = 0;
    auto inputs = LoadMetricInputs(dir, report->server_params, &begin);
    ASSERT_TRUE(inputs.ok()) << inputs.status();
    EXPECT_EQ(begin, report->validation.begin);
    auto again = MetricArtifacts(report->server_params, begin, *inputs);
    ASSERT_TRUE(again.ok());
    for (const Artifact& a : *again) {
      auto stored = ReadFile(dir / a.name);
      ASSERT_TRUE(stored.ok()) << a.name;
      EXPECT_EQ(*stored, a.content) << a.name;
    }
  }
}

TEST(PermutedAttentionTest, ShiftsWithinEachRow) {
  auto params = GatParams::Zeros(Adjacency::Ring(3), 1);
  ASSERT_TRUE(params.ok());
  Vector alpha(params->edges().size());
  for (std::size_t k = 0; k < alpha.size(); ++k) alpha[k] = static_cast<double>(k);
  auto permuted = PermutedAttention(*params, {alpha});
  ASSERT_TRUE(permuted.ok());
  for (std::size_t m = 0; m < 3; ++m) {
    const auto& row = params->in_edges(m);
    for (std::size_t j = 0; j < row.size(); ++j) {
      EXPECT_EQ((*permuted)[0][row[j]], alpha[row[(j + 1) % row.size()]]);
    }
  }
}

}  // namespace
}  // namespace fedgat
