// Copyright 2026 The Linksteal Authors
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

#include "linksteal/pipeline.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "linksteal/config.h"
#include "linksteal/errors.h"
#include "linksteal/synthetic.h"

namespace linksteal {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ::testing::HasSubstr;

fs::path TempDir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("linksteal_pipeline_" + tag);
  fs::remove_all(p);
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineConfig SmallConfig(const fs::path& out) {
  PipelineConfig c;
  c.out_dir = out;
  c.seeds = {0};
  DatasetSource d;
  d.name = "cora";
  d.synthetic = "cora";
  d.subgraph_nodes = 300;
  d.budget = 100;
  c.datasets = {d};
  c.model.epochs = 60;
  c.mlp.epochs = 10;
  c.mlp_modes = {FeatureMode::kPP};
  MockSpec mock;
  mock.options.mode = MockMode::kOracle;
  c.mock = mock;
  c.endpoint.backoff_ms = 1;
  return c;
}

const AttackReport* FindReport(const std::vector<AttackReport>& reports,
                               const std::string& method) {
  for (const auto& r : reports) {
    if (r.id.method == method) return &r;
  }
  return nullptr;
}

TEST(PipelineConfigTest, RoundTripsThroughJson) {
  PipelineConfig c = SmallConfig("runs/x");
  c.prompt.setting = Setting::kBlackBox;
  c.unparseable_policy = UnparseablePolicy::kExclude;
  const json j = c.ToJson();
  const PipelineConfig back = PipelineConfig::FromJson(j);
  EXPECT_EQ(back.ToJson(), j);
}

TEST(PipelineConfigTest, AcceptsRunManifest) {
  PipelineConfig c = SmallConfig("runs/x");
  RunManifest m;
  m.config = c.ToJson();
  const PipelineConfig back = PipelineConfig::FromJson(m.ToJson());
  EXPECT_EQ(back.ToJson(), c.ToJson());
}

TEST(PipelineConfigTest, RejectsUnknownKeys) {
  json j = SmallConfig("runs/x").ToJson();
  j["sedes"] = {1};
  EXPECT_THROW(PipelineConfig::FromJson(j), ConfigError);
  j = SmallConfig("runs/x").ToJson();
  j["model"]["hiden_dim"] = 4;
  EXPECT_THROW(PipelineConfig::FromJson(j), ConfigError);
  j = SmallConfig("runs/x").ToJson();
  j["llm"]["mock"]["mood"] = "oracle";
  EXPECT_THROW(PipelineConfig::FromJson(j), ConfigError);
}

TEST(PipelineConfigTest, ResolvesRelativeDatasetPaths) {
  const json j = {{"out_dir", "out"},
                  {"datasets", {{{"name", "cora"}, {"path", "data/cora"}},
                                {{"name", "x"}, {"path", "/abs/x"}}}}};
  const PipelineConfig c = PipelineConfig::FromJson(j, "/etc/runs");
  EXPECT_EQ(c.datasets[0].path, fs::path("/etc/runs/data/cora"));
  EXPECT_EQ(c.datasets[1].path, fs::path("/abs/x"));
  EXPECT_EQ(c.out_dir, fs::path("/etc/runs/out"));
}

TEST(PipelineConfigTest, RejectsEmptyAndDuplicateDatasets) {
  PipelineConfig c = SmallConfig("runs/x");
  c.datasets.clear();
  EXPECT_THROW(c.Check(), ConfigError);
  c = SmallConfig("runs/x");
  c.datasets.push_back(c.datasets[0]);
  EXPECT_THROW(c.Check(), ConfigError);
  c = SmallConfig("runs/x");
  c.seeds.clear();
  EXPECT_THROW(c.Check(), ConfigError);
}

TEST(PipelineConfigTest, BaselinesOnlyDisablesLlm) {
  json j = SmallConfig("runs/x").ToJson();
  j["baselines_only"] = true;
  EXPECT_FALSE(PipelineConfig::FromJson(j).run_llm);
}

TEST(PipelineConfigTest, ApiKeyComesFromEnvironmentAndIsNeverWritten) {
  ::setenv("LINKSTEAL_TEST_KEY", "sekrit", 1);
  const EndpointConfig e =
      EndpointConfigFromJson({{"api_key_env", "LINKSTEAL_TEST_KEY"}});
  EXPECT_EQ(e.api_key, "sekrit");
  EXPECT_THAT(ToJson(e).dump(), ::testing::Not(HasSubstr("sekrit")));
  EXPECT_THROW(EndpointConfigFromJson({{"api_key_env", "LINKSTEAL_UNSET_VAR_X"}}),
               ConfigError);
}

TEST(GraphFingerprintTest, StableAndSensitive) {
  Graph g = GenerateSynthetic(SyntheticSpec{});
  const std::string h = GraphFingerprint(g);
  EXPECT_EQ(h.size(), 64u);
  EXPECT_EQ(GraphFingerprint(GenerateSynthetic(SyntheticSpec{})), h);
  g.edges.pop_back();
  EXPECT_NE(GraphFingerprint(g), h);
  Graph g2 = GenerateSynthetic(SyntheticSpec{});
  g2.features(3, 3) += 1e-9;
  EXPECT_NE(GraphFingerprint(g2), h);
}

TEST(LoadSourceTest, SnowballSubgraphKeepsName) {
  DatasetSource s;
  s.name = "cora";
  s.synthetic = "cora";
  s.subgraph_nodes = 250;
  const LoadedSource l = LoadSource(s);
  EXPECT_EQ(l.graph.num_nodes, 250);
  EXPECT_EQ(l.graph.name, "cora");
  EXPECT_TRUE(Validate(l.graph).ok());
  EXPECT_THAT(l.origin, HasSubstr("snowball250"));
}

TEST(LoadSourceTest, DirectorySourceUsesStoredSplit) {
  const fs::path dir = TempDir("dir_source");
  Graph g = GenerateSynthetic(SyntheticSpec{});
  SplitSpec split = TrainTestNodeSplit(g, {0.5, 0.2, 0.3}, 4);
  ExportDataset(g, dir, split);
  DatasetSource s;
  s.name = "toy";
  s.path = dir;
  const LoadedSource l = LoadSource(s);
  ASSERT_TRUE(l.split.has_value());
  EXPECT_EQ(*l.split, split);
  EXPECT_EQ(l.graph.name, "toy");
  EXPECT_EQ(GraphFingerprint(l.graph).size(), 64u);
}

TEST(SummarizeReportsTest, GroupsMaxDetailsAcrossSeeds) {
  std::vector<AttackReport> reports(3);
  const char* details[] = {"max:cosine", "max:euclidean", "max:cosine"};
  for (int i = 0; i < 3; ++i) {
    reports[i].id = {"similarity", "cora", "cora", "white-box", uint64_t(i)};
    reports[i].detail = details[i];
    reports[i].accuracy = 0.7 + 0.1 * i;
    reports[i].f1 = 0.5;
  }
  const auto rows = SummarizeReports(reports);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].detail, "max");
  EXPECT_NEAR(rows[0].accuracy.mean, 0.8, 1e-12);
  EXPECT_NEAR(rows[0].accuracy.std, 0.1, 1e-12);
  EXPECT_EQ(rows[0].accuracy.count, 3);
}

TEST(VerdictsCsvTest, RoundTripsQuotedText) {
  PairSet pairs;
  pairs.pairs = {{1, 2, LinkLabel::kLink, {}, "cora"},
                 {3, 9, LinkLabel::kUnlink, {}, "cora"},
                 {4, 5, std::nullopt, {}, "cora"}};
  LlmRun run;
  run.verdicts = {{Prediction::kLink, "Yes."},
                  {Prediction::kUnparseable, "say \"maybe\",\nor not"},
                  {Prediction::kUnlink, "No"}};
  const fs::path p = TempDir("verdicts") / "v.csv";
  WriteVerdictsCsv(pairs, run, p);
  const VerdictTable t = ReadVerdictsCsv(p);
  ASSERT_EQ(t.pairs.size(), 3u);
  EXPECT_EQ(t.raw_text[1], "say \"maybe\",\nor not");
  EXPECT_EQ(t.predictions[1], Prediction::kUnparseable);
  EXPECT_EQ(t.pairs.pairs[1].v, 9);
  EXPECT_EQ(t.pairs.pairs[0].link_label, LinkLabel::kLink);
  EXPECT_FALSE(t.pairs.pairs[2].link_label.has_value());
}

TEST(VerdictsCsvTest, RejectsMismatchAndBadRows) {
  PairSet pairs;
  pairs.pairs = {{1, 2, LinkLabel::kLink, {}, ""}};
  const fs::path dir = TempDir("verdicts_bad");
  EXPECT_THROW(WriteVerdictsCsv(pairs, LlmRun{}, dir / "v.csv"), ContractError);
  fs::create_directories(dir);
  std::ofstream(dir / "bad.csv") << "index,u,v,gold,prediction,raw_text\n0,1,2,Link,Maybe,\"x\"\n";
  EXPECT_THROW(ReadVerdictsCsv(dir / "bad.csv"), ValidationError);
}

TEST(RunPipelineTest, OracleMockScoresPerfectly) {
  const fs::path out = TempDir("oracle");
  const PipelineResult r = RunPipeline(SmallConfig(out));
  const AttackReport* llm = FindReport(r.reports, "llm");
  ASSERT_NE(llm, nullptr);
  EXPECT_DOUBLE_EQ(llm->accuracy, 1.0);
  EXPECT_DOUBLE_EQ(llm->f1, 1.0);
  EXPECT_EQ(llm->n_test, 40);
  EXPECT_EQ(llm->id.setting, "white-box");
  EXPECT_EQ(llm->detail, "mock:oracle");
  EXPECT_EQ(r.manifest.status, "ok");

  const fs::path cell = out / "cora" / "seed-0";
  for (const char* f :
       {"target/checkpoint.json", "target/posteriors.csv", "target/metrics.json",
        "pairs/all.csv", "pairs/train.csv", "pairs/test.csv",
        "baselines/reports.csv", "prompts/inference.jsonl", "prompts/finetune.jsonl",
        "llm/verdicts.csv", "llm/report.csv"}) {
    EXPECT_TRUE(fs::exists(cell / f)) << f;
  }
  for (const char* f : {"reports.csv", "reports.json", "summary.csv", "manifest.json",
                        "config.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const json m = json::parse(Slurp(out / "manifest.json"));
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["template_version"], kPromptTemplateVersion);
  EXPECT_EQ(m["datasets"]["cora"]["sha256"].get<std::string>().size(), 64u);
  EXPECT_EQ(m["datasets"]["cora"]["nodes"], 300);
  EXPECT_EQ(ReadReportsJson(out / "reports.json").size(), r.reports.size());

  // Finetune records come from train pairs only and carry answers.
  const FinetuneSet ft = ImportJsonl(cell / "prompts" / "finetune.jsonl");
  EXPECT_EQ(ft.records.size(), 160u);
  for (const auto& rec : ft.records) EXPECT_TRUE(rec.HasAnswer());
  const FinetuneSet inf = ImportJsonl(cell / "prompts" / "inference.jsonl");
  EXPECT_EQ(inf.records.size(), 40u);
  for (const auto& rec : inf.records) EXPECT_FALSE(rec.HasAnswer());
}

TEST(RunPipelineTest, ConstantYesScoresHalf) {
  PipelineConfig c = SmallConfig(TempDir("constant_yes"));
  c.mock->options.mode = MockMode::kConstantYes;
  const PipelineResult r = RunPipeline(c);
  const AttackReport* llm = FindReport(r.reports, "llm");
  ASSERT_NE(llm, nullptr);
  EXPECT_DOUBLE_EQ(llm->accuracy, 0.5);
  EXPECT_NEAR(llm->f1, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(llm->recall, 1.0);
}

TEST(RunPipelineTest, BaselinesOnlyProducesAllRows) {
  const fs::path out = TempDir("baselines_only");
  PipelineConfig c = SmallConfig(out);
  c.run_llm = false;
  c.mlp_modes = {FeatureMode::kFeature, FeatureMode::kPP, FeatureMode::kPPFeature};
  const PipelineResult r = RunPipeline(c);
  std::vector<std::string> details;
  for (const auto& rep : r.reports) {
    EXPECT_NE(rep.id.method, "llm");
    details.push_back(rep.detail);
  }
  ASSERT_EQ(r.reports.size(), 8u + 2u + 3u);
  for (MetricKind m : kAllMetrics) {
    EXPECT_THAT(details, ::testing::Contains(std::string(MetricName(m))));
  }
  EXPECT_THAT(details, ::testing::Contains("mean"));
  EXPECT_THAT(details, ::testing::Contains(HasSubstr("max:")));
  EXPECT_THAT(details, ::testing::Contains("Feature"));
  EXPECT_THAT(details, ::testing::Contains("PP"));
  EXPECT_THAT(details, ::testing::Contains("PP+Feature"));
  EXPECT_FALSE(fs::exists(out / "cora" / "seed-0" / "prompts"));
}

TEST(RunPipelineTest, RerunIsByteIdentical) {
  PipelineConfig c = SmallConfig(TempDir("rerun_a"));
  c.seeds = {0, 1};
  RunPipeline(c);
  PipelineConfig c2 = c;
  c2.out_dir = TempDir("rerun_b");
  RunPipeline(c2);
  for (const char* f : {"reports.csv", "summary.csv", "reports.json",
                        "cora/seed-1/pairs/test.csv",
                        "cora/seed-1/target/posteriors.csv",
                        "cora/seed-1/prompts/finetune.jsonl",
                        "cora/seed-1/llm/verdicts.csv"}) {
    EXPECT_EQ(Slurp(c.out_dir / f), Slurp(c2.out_dir / f)) << f;
  }
}

TEST(RunPipelineTest, SeedsChangePairsAndModels) {
  PipelineConfig c = SmallConfig(TempDir("seeds"));
  c.seeds = {0, 1};
  c.run_llm = false;
  RunPipeline(c);
  EXPECT_NE(Slurp(c.out_dir / "cora/seed-0/pairs/all.csv"),
            Slurp(c.out_dir / "cora/seed-1/pairs/all.csv"));
  EXPECT_NE(Slurp(c.out_dir / "cora/seed-0/target/posteriors.csv"),
            Slurp(c.out_dir / "cora/seed-1/target/posteriors.csv"));
}

TEST(RunPipelineTest, FailingStageKeepsPartialArtifacts) {
  const fs::path out = TempDir("failing");
  PipelineConfig c = SmallConfig(out);
  c.mock->options.fail_first_n = 1000000;
  c.endpoint.max_retries = 0;
  try {
    RunPipeline(c);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "attack-llm");
  }
  const json m = json::parse(Slurp(out / "manifest.json"));
  EXPECT_EQ(m["status"], "failed");
  const json& last = m["stages"].back();
  EXPECT_EQ(last["stage"], "attack-llm");
  EXPECT_EQ(last["status"], "failed");
  EXPECT_THAT(last["error"].get<std::string>(), HasSubstr("500"));
  EXPECT_TRUE(fs::exists(out / "cora/seed-0/baselines/reports.csv"));
  EXPECT_FALSE(ReadReportsJson(out / "reports.json").empty());
}

TEST(RunPipelineTest, MissingDatasetFailsAtLoad) {
  const fs::path out = TempDir("missing");
  PipelineConfig c = SmallConfig(out);
  c.datasets[0].synthetic.clear();
  c.datasets[0].path = out / "nowhere";
  try {
    RunPipeline(c);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "load-dataset");
  }
  EXPECT_EQ(json::parse(Slurp(out / "manifest.json"))["status"], "failed");
}

TEST(RunPipelineTest, BlackBoxUsesShadowPairs) {
  const fs::path out = TempDir("black_box");
  PipelineConfig c = SmallConfig(out);
  c.prompt.setting = Setting::kBlackBox;
  const PipelineResult r = RunPipeline(c);
  const fs::path cell = out / "cora" / "seed-0";
  EXPECT_TRUE(fs::exists(cell / "pairs" / "shadow.csv"));
  const FinetuneSet ft = ImportJsonl(cell / "prompts" / "finetune.jsonl");
  ASSERT_FALSE(ft.records.empty());
  for (const auto& rec : ft.records) {
    EXPECT_EQ(rec.question_kind, QuestionKind::kSameCategory);
  }
  const AttackReport* llm = FindReport(r.reports, "llm");
  ASSERT_NE(llm, nullptr);
  EXPECT_EQ(llm->id.setting, "black-box");
}

TEST(RunPipelineTest, TrainedOnTagsCrossDatasetReports) {
  PipelineConfig c = SmallConfig(TempDir("trained_on"));
  c.llm_trained_on = "pubmed";
  const PipelineResult r = RunPipeline(c);
  const AttackReport* llm = FindReport(r.reports, "llm");
  ASSERT_NE(llm, nullptr);
  EXPECT_EQ(llm->id.train_dataset, "pubmed");
  EXPECT_EQ(llm->id.dataset, "cora");
}

}  // namespace
}  // namespace linksteal
