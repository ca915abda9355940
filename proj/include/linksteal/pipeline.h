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

// End-to-end attack runs: target training, pair sampling, baselines, prompt
// export, LLM querying and evaluation, persisted under one run directory.

#ifndef LINKSTEAL_PIPELINE_H_
#define LINKSTEAL_PIPELINE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "linksteal/baselines.h"
#include "linksteal/eval.h"
#include "linksteal/gnn.h"
#include "linksteal/graph.h"
#include "linksteal/llm_client.h"
#include "linksteal/mock_server.h"
#include "linksteal/pairs.h"
#include "linksteal/prompts.h"

namespace linksteal {

// Where a dataset comes from: a directory in the standard layout, or a
// synthetic preset. `subgraph_nodes` > 0 replaces the graph by a snowball
// induced subgraph of that size.
struct DatasetSource {
  std::string name;
  std::filesystem::path path;
  std::string synthetic;  // preset name, used when path is empty
  int synthetic_nodes = 0;
  uint64_t data_seed = 0;
  int subgraph_nodes = 0;
  std::optional<int64_t> budget;  // default: DefaultBudget(name)
};

struct LoadedSource {
  Graph graph;
  std::optional<SplitSpec> split;
  std::string origin;  // "dir:<path>" or "synthetic:<preset>"
};

LoadedSource LoadSource(const DatasetSource& source);

// SHA-256 over the graph's canonical content (sizes, labels, edges,
// features, text), hex encoded.
std::string GraphFingerprint(const Graph& graph);

struct MockSpec {
  MockOptions options;
};

struct PipelineConfig {
  std::filesystem::path out_dir = "runs/default";
  std::vector<uint64_t> seeds = {0, 1, 2};
  std::vector<DatasetSource> datasets;
  std::array<double, 3> node_split = {0.6, 0.2, 0.2};
  double pair_train_fraction = 0.8;
  ModelConfig model;

  bool run_similarity = true;
  std::vector<FeatureMode> mlp_modes = {FeatureMode::kFeature, FeatureMode::kPP,
                                        FeatureMode::kPPFeature};
  MlpConfig mlp;
  bool dump_distances = false;

  bool run_llm = true;
  PromptConfig prompt;
  LabelingSource shadow_labeling = LabelingSource::kArgmaxPosteriorClass;
  bool shadow_labels_available = false;
  EndpointConfig endpoint;
  std::optional<MockSpec> mock;  // serve in-process instead of `endpoint`
  UnparseablePolicy unparseable_policy = UnparseablePolicy::kScoreAsWrong;
  std::string llm_trained_on;  // train_dataset tag for LLM reports

  // Accepts either a config object or a run manifest (its "config" member).
  // Relative dataset paths and out_dir resolve against `base_dir`.
  static PipelineConfig FromJson(const nlohmann::json& j,
                                 const std::filesystem::path& base_dir = {});
  static PipelineConfig Load(const std::filesystem::path& path);
  nlohmann::json ToJson() const;
  void Check() const;  // ConfigError
};

struct StageRecord {
  std::string stage;
  std::string dataset;
  int64_t seed = -1;  // -1 for dataset-level stages
  std::string status;  // "ok" or "failed"
  double seconds = 0.0;
  std::string error;
};

struct RunManifest {
  nlohmann::json config;
  std::vector<uint64_t> seeds;
  nlohmann::json datasets = nlohmann::json::object();  // name -> hash, origin, sizes
  std::string template_version = kPromptTemplateVersion;
  std::string started_at;
  std::string finished_at;
  std::vector<StageRecord> stages;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
  std::string status = "running";

  nlohmann::json ToJson() const;
};

struct SummaryRow {
  std::string method, detail, train_dataset, dataset, setting;
  MeanStd accuracy, f1;
};

// Groups reports across seeds. Details of the form "max:<metric>" are
// grouped under "max".
std::vector<SummaryRow> SummarizeReports(const std::vector<AttackReport>& reports);
void WriteSummaryCsv(const std::vector<SummaryRow>& rows,
                     const std::filesystem::path& path);

// Per-pair LLM verdicts, the hand-off between attack-llm and evaluate.
// Columns: index,u,v,gold,prediction,raw_text. `gold` is empty for pairs
// without a link label.
struct VerdictTable {
  PairSet pairs;
  std::vector<Prediction> predictions;
  std::vector<std::string> raw_text;
};

void WriteVerdictsCsv(const PairSet& pairs, const LlmRun& run,
                      const std::filesystem::path& path);
VerdictTable ReadVerdictsCsv(const std::filesystem::path& path);

struct PipelineResult {
  RunManifest manifest;
  std::vector<AttackReport> reports;
  std::vector<SummaryRow> summary;
};

// Runs every dataset x seed cell. Artifacts land in
// <out_dir>/<dataset>/seed-<s>/...; reports.{csv,json}, summary.csv and
// manifest.json in <out_dir>. A failing stage throws StageError after the
// manifest is written with the failure recorded.
PipelineResult RunPipeline(const PipelineConfig& config);

}  // namespace linksteal

#endif  // LINKSTEAL_PIPELINE_H_
