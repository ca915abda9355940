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

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "linksteal/config.h"
#include "linksteal/errors.h"
#include "linksteal/synthetic.h"

namespace linksteal {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string UtcNow() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) { EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr); }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  void Update(const void* data, size_t n) { EVP_DigestUpdate(ctx_, data, n); }
  void Update(const std::string& s) {
    const uint64_t n = s.size();
    Update(&n, sizeof(n));
    Update(s.data(), s.size());
  }
  template <typename T>
  void UpdatePod(const T& v) {
    Update(&v, sizeof(v));
  }
  std::string Hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, digest, &len);
    std::string out;
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

void WriteJson(const json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::string CsvQuote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Times a stage and records it; failures become StageError.
class StageRunner {
 public:
  explicit StageRunner(RunManifest& manifest) : manifest_(manifest) {}

  void Run(const std::string& stage, const std::string& dataset, int64_t seed,
           const std::function<void()>& body) {
    StageRecord rec{stage, dataset, seed, "ok", 0.0, ""};
    const auto t0 = std::chrono::steady_clock::now();
    spdlog::info("[{}{}] {}", dataset, seed >= 0 ? fmt::format(" seed {}", seed) : "",
                 stage);
    try {
      body();
    } catch (const std::exception& e) {
      rec.status = "failed";
      rec.error = e.what();
      rec.seconds = Since(t0);
      manifest_.stages.push_back(rec);
      throw StageError(stage, e.what());
    }
    rec.seconds = Since(t0);
    manifest_.stages.push_back(rec);
  }

 private:
  static double Since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  RunManifest& manifest_;
};

std::string SummaryDetail(const std::string& detail) {
  return detail.substr(0, detail.find(':'));
}

}  // namespace

LoadedSource LoadSource(const DatasetSource& source) {
  LoadedSource out;
  if (!source.path.empty()) {
    LoadedDataset d = LoadDataset(source.path);
    out.graph = std::move(d.graph);
    out.split = std::move(d.split);
    out.origin = "dir:" + source.path.string();
  } else if (!source.synthetic.empty()) {
    SyntheticSpec spec =
        PresetByName(source.synthetic, source.synthetic_nodes, source.data_seed);
    out.graph = GenerateSynthetic(spec);
    out.origin = fmt::format("synthetic:{}:{}:{}", source.synthetic,
                             out.graph.num_nodes, source.data_seed);
  } else {
    throw ConfigError("dataset '" + source.name + "' has neither path nor synthetic");
  }
  if (!source.name.empty()) {
    out.graph.name = source.name;
    out.graph.meta.name = source.name;
  }
  if (source.subgraph_nodes > 0 && source.subgraph_nodes < out.graph.num_nodes) {
    const std::string name = out.graph.name;
    const auto nodes = SnowballNodes(out.graph, source.subgraph_nodes, source.data_seed);
    out.graph = InducedSubgraph(out.graph, nodes);
    out.graph.name = name;
    out.split.reset();
    out.origin += fmt::format(":snowball{}", source.subgraph_nodes);
  }
  return out;
}

std::string GraphFingerprint(const Graph& g) {
  Sha256 h;
  h.Update(g.name);
  h.UpdatePod(g.num_nodes);
  h.UpdatePod(g.num_categories);
  const int64_t rows = g.features.rows(), cols = g.features.cols();
  h.UpdatePod(rows);
  h.UpdatePod(cols);
  h.Update(g.labels.data(), g.labels.size() * sizeof(int));
  for (const Edge& e : g.edges) {
    h.UpdatePod(e.u);
    h.UpdatePod(e.v);
  }
  // Column-major storage; hash row by row so the layout does not matter.
  for (Eigen::Index r = 0; r < g.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.features.cols(); ++c) h.UpdatePod(g.features(r, c));
  }
  for (const auto& t : g.text) {
    h.Update(t ? t->title : std::string());
    h.Update(t ? t->abstract : std::string());
  }
  return h.Hex();
}

PipelineConfig PipelineConfig::FromJson(const json& input, const fs::path& base_dir) {
  const json& j = input.contains("format") && input.contains("config")
                      ? input.at("config")
                      : input;
  if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
  RejectUnknownKeys(j,
                    {"out_dir", "seeds", "datasets", "node_split",
                     "pair_train_fraction", "model", "baselines", "baselines_only",
                     "llm", "prompt", "shadow"},
                    "config");
  PipelineConfig c;
  try {
    if (j.contains("out_dir")) {
      fs::path p = j.at("out_dir").get<std::string>();
      c.out_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    if (j.contains("node_split")) {
      c.node_split = j.at("node_split").get<std::array<double, 3>>();
    }
    c.pair_train_fraction = j.value("pair_train_fraction", c.pair_train_fraction);
    for (const json& d : j.value("datasets", json::array())) {
      RejectUnknownKeys(d,
                        {"name", "path", "synthetic", "synthetic_nodes", "data_seed",
                         "subgraph_nodes", "budget"},
                        "datasets[]");
      DatasetSource s;
      s.name = d.value("name", std::string());
      if (d.contains("path")) {
        fs::path p = d.at("path").get<std::string>();
        s.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
      }
      s.synthetic = d.value("synthetic", std::string());
      s.synthetic_nodes = d.value("synthetic_nodes", 0);
      s.data_seed = d.value("data_seed", uint64_t{0});
      s.subgraph_nodes = d.value("subgraph_nodes", 0);
      if (d.contains("budget")) s.budget = d.at("budget").get<int64_t>();
      if (s.name.empty()) s.name = s.synthetic;
      c.datasets.push_back(std::move(s));
    }
    if (j.contains("model")) c.model = ModelConfigFromJson(j.at("model"));
    if (j.contains("baselines")) {
      const json& b = j.at("baselines");
      RejectUnknownKeys(b, {"similarity", "mlp_modes", "mlp", "dump_distances"},
                        "baselines");
      c.run_similarity = b.value("similarity", c.run_similarity);
      if (b.contains("mlp_modes")) {
        c.mlp_modes.clear();
        for (const auto& m : b.at("mlp_modes")) {
          c.mlp_modes.push_back(ParseFeatureMode(m.get<std::string>()));
        }
      }
      if (b.contains("mlp")) c.mlp = MlpConfigFromJson(b.at("mlp"));
      c.dump_distances = b.value("dump_distances", c.dump_distances);
    }
    if (j.contains("llm")) {
      const json& l = j.at("llm");
      RejectUnknownKeys(l,
                        {"enabled", "endpoint", "mock", "unparseable_policy",
                         "trained_on"},
                        "llm");
      c.run_llm = l.value("enabled", c.run_llm);
      if (l.contains("endpoint")) c.endpoint = EndpointConfigFromJson(l.at("endpoint"));
      if (l.contains("mock") && !l.at("mock").is_null()) {
        const json& m = l.at("mock");
        RejectUnknownKeys(m, {"mode", "tau", "delay_ms", "fail_first_n"}, "llm.mock");
        MockSpec spec;
        spec.options.mode = ParseMockMode(m.value("mode", std::string("oracle")));
        spec.options.tau = m.value("tau", spec.options.tau);
        spec.options.delay_ms = m.value("delay_ms", 0);
        spec.options.fail_first_n = m.value("fail_first_n", 0);
        c.mock = spec;
      }
      c.unparseable_policy = ParseUnparseablePolicy(
          l.value("unparseable_policy", std::string("score-as-wrong")));
      c.llm_trained_on = l.value("trained_on", std::string());
    }
    if (j.value("baselines_only", false)) c.run_llm = false;
    if (j.contains("prompt")) c.prompt = PromptConfigFromJson(j.at("prompt"));
    if (j.contains("shadow")) {
      const json& s = j.at("shadow");
      RejectUnknownKeys(s, {"labeling_source", "labels_available"}, "shadow");
      c.shadow_labeling = ParseLabelingSource(
          s.value("labeling_source", std::string(LabelingSourceName(c.shadow_labeling))));
      c.shadow_labels_available = s.value("labels_available", false);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
  c.Check();
  return c;
}

PipelineConfig PipelineConfig::Load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return FromJson(j, path.parent_path());
}

json PipelineConfig::ToJson() const {
  json datasets_json = json::array();
  for (const DatasetSource& s : datasets) {
    json d{{"name", s.name}};
    if (!s.path.empty()) d["path"] = s.path.string();
    if (!s.synthetic.empty()) d["synthetic"] = s.synthetic;
    if (s.synthetic_nodes > 0) d["synthetic_nodes"] = s.synthetic_nodes;
    d["data_seed"] = s.data_seed;
    if (s.subgraph_nodes > 0) d["subgraph_nodes"] = s.subgraph_nodes;
    if (s.budget) d["budget"] = *s.budget;
    datasets_json.push_back(std::move(d));
  }
  json modes = json::array();
  for (FeatureMode m : mlp_modes) modes.push_back(FeatureModeName(m));
  json llm{{"enabled", run_llm},
           {"endpoint", linksteal::ToJson(endpoint)},
           {"unparseable_policy", UnparseablePolicyName(unparseable_policy)},
           {"trained_on", llm_trained_on}};
  if (mock) {
    llm["mock"] = {{"mode", MockModeName(mock->options.mode)},
                   {"tau", mock->options.tau},
                   {"delay_ms", mock->options.delay_ms},
                   {"fail_first_n", mock->options.fail_first_n}};
  }
  return {{"out_dir", out_dir.string()},
          {"seeds", seeds},
          {"datasets", std::move(datasets_json)},
          {"node_split", node_split},
          {"pair_train_fraction", pair_train_fraction},
          {"model", linksteal::ToJson(model)},
          {"baselines",
           {{"similarity", run_similarity},
            {"mlp_modes", std::move(modes)},
            {"mlp", linksteal::ToJson(mlp)},
            {"dump_distances", dump_distances}}},
          {"llm", std::move(llm)},
          {"prompt", linksteal::ToJson(prompt)},
          {"shadow",
           {{"labeling_source", LabelingSourceName(shadow_labeling)},
            {"labels_available", shadow_labels_available}}}};
}

void PipelineConfig::Check() const {
  if (seeds.empty()) throw ConfigError("config lists no seeds");
  if (datasets.empty()) throw ConfigError("config lists no datasets");
  std::map<std::string, int> names;
  for (const auto& d : datasets) {
    if (d.name.empty()) throw ConfigError("dataset without a name");
    if (++names[d.name] > 1) throw ConfigError("dataset '" + d.name + "' listed twice");
    if (d.path.empty() && d.synthetic.empty()) {
      throw ConfigError("dataset '" + d.name + "' has neither path nor synthetic");
    }
    if (d.budget && *d.budget <= 0) throw ConfigError("budget must be positive");
  }
  if (!(pair_train_fraction > 0.0 && pair_train_fraction < 1.0)) {
    throw ConfigError("pair_train_fraction must lie strictly between 0 and 1");
  }
  model.Check();
  mlp.Check();
  prompt.Check();
  endpoint.Check();
}

json RunManifest::ToJson() const {
  json stage_list = json::array();
  for (const StageRecord& s : stages) {
    json r{{"stage", s.stage}, {"dataset", s.dataset}, {"status", s.status},
           {"seconds", s.seconds}};
    if (s.seed >= 0) r["seed"] = s.seed;
    if (!s.error.empty()) r["error"] = s.error;
    stage_list.push_back(std::move(r));
  }
  return {{"format", "linksteal-run-manifest-v1"},
          {"status", status},
          {"config", config},
          {"seeds", seeds},
          {"datasets", datasets},
          {"template_version", template_version},
          {"started_at", started_at},
          {"finished_at", finished_at},
          {"stages", std::move(stage_list)},
          {"warnings", warnings},
          {"notes", notes}};
}

std::vector<SummaryRow> SummarizeReports(const std::vector<AttackReport>& reports) {
  using Key = std::tuple<std::string, std::string, std::string, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const AttackReport& r : reports) {
    const Key k{r.id.method, SummaryDetail(r.detail), r.id.train_dataset, r.id.dataset,
                r.id.setting};
    if (!groups.count(k)) order.push_back(k);
    groups[k].first.push_back(r.accuracy);
    groups[k].second.push_back(r.f1);
  }
  std::vector<SummaryRow> rows;
  for (const Key& k : order) {
    SummaryRow row;
    std::tie(row.method, row.detail, row.train_dataset, row.dataset, row.setting) = k;
    row.accuracy = Summarize(groups[k].first);
    row.f1 = Summarize(groups[k].second);
    rows.push_back(std::move(row));
  }
  return rows;
}

void WriteSummaryCsv(const std::vector<SummaryRow>& rows, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  out << "method,detail,train_dataset,dataset,setting,seeds,accuracy_mean,"
         "accuracy_std,f1_mean,f1_std\n";
  for (const SummaryRow& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{:.4f},{:.4f},{:.4f},{:.4f}\n", r.method,
                       r.detail, r.train_dataset, r.dataset, r.setting,
                       r.accuracy.count, r.accuracy.mean, r.accuracy.std, r.f1.mean,
                       r.f1.std);
  }
}

void WriteVerdictsCsv(const PairSet& pairs, const LlmRun& run, const fs::path& path) {
  if (pairs.size() != run.verdicts.size()) {
    throw ContractError(fmt::format("{} pairs but {} verdicts", pairs.size(),
                                    run.verdicts.size()));
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  out << "index,u,v,gold,prediction,raw_text\n";
  for (size_t i = 0; i < pairs.size(); ++i) {
    const NodePair& p = pairs.pairs[i];
    out << i << "," << p.u << "," << p.v << ","
        << (p.link_label ? LinkLabelName(*p.link_label) : "") << ","
        << PredictionName(run.verdicts[i].prediction) << ","
        << CsvQuote(run.verdicts[i].raw_text) << "\n";
  }
}

VerdictTable ReadVerdictsCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  VerdictTable t;
  std::string line;
  int64_t lineno = 1;
  if (!std::getline(in, line) || line != "index,u,v,gold,prediction,raw_text") {
    throw ValidationError(path.string() + ": bad verdicts header");
  }
  auto fail = [&](const std::string& what) {
    return ValidationError(fmt::format("{}:{}: {}", path.string(), lineno, what));
  };
  // raw_text may contain newlines inside quotes, so records are read by
  // tracking quote balance.
  std::string record;
  while (std::getline(in, line)) {
    ++lineno;
    record += line;
    if (std::count(record.begin(), record.end(), '"') % 2 != 0) {
      record += '\n';
      continue;
    }
    std::vector<std::string> cells;
    size_t pos = 0;
    for (int k = 0; k < 5; ++k) {
      const size_t comma = record.find(',', pos);
      if (comma == std::string::npos) throw fail("expected 6 columns");
      cells.push_back(record.substr(pos, comma - pos));
      pos = comma + 1;
    }
    std::string raw = record.substr(pos);
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
      throw fail("raw_text must be quoted");
    }
    raw = raw.substr(1, raw.size() - 2);
    std::string unq;
    for (size_t i = 0; i < raw.size(); ++i) {
      unq += raw[i];
      if (raw[i] == '"') ++i;
    }
    NodePair p;
    try {
      p.u = std::stoi(cells[1]);
      p.v = std::stoi(cells[2]);
    } catch (const std::exception&) {
      throw fail("bad node id");
    }
    if (cells[3] == "Link") {
      p.link_label = LinkLabel::kLink;
    } else if (cells[3] == "Unlink") {
      p.link_label = LinkLabel::kUnlink;
    } else if (!cells[3].empty()) {
      throw fail("bad gold label '" + cells[3] + "'");
    }
    Prediction pred;
    if (cells[4] == "Link") {
      pred = Prediction::kLink;
    } else if (cells[4] == "Unlink") {
      pred = Prediction::kUnlink;
    } else if (cells[4] == "Unparseable") {
      pred = Prediction::kUnparseable;
    } else {
      throw fail("bad prediction '" + cells[4] + "'");
    }
    t.pairs.pairs.push_back(p);
    t.predictions.push_back(pred);
    t.raw_text.push_back(std::move(unq));
    record.clear();
  }
  if (!record.empty()) throw fail("unterminated quoted field");
  return t;
}

namespace {

struct CellContext {
  const PipelineConfig& config;
  const Graph& graph;
  const std::optional<SplitSpec>& given_split;
  int64_t budget;
  uint64_t seed;
  fs::path dir;
};

void RunCell(const CellContext& cx, StageRunner& stages, RunManifest& manifest,
             std::vector<AttackReport>& reports) {
  const PipelineConfig& config = cx.config;
  const Graph& graph = cx.graph;
  const std::string& name = graph.name;
  const uint64_t seed = cx.seed;
  const int64_t s = static_cast<int64_t>(seed);

  TargetModel model;
  PosteriorMatrix posteriors;
  stages.Run("train-target", name, s, [&] {
    const SplitSpec split =
        cx.given_split ? *cx.given_split
                       : TrainTestNodeSplit(graph,
                                            std::make_tuple(config.node_split[0],
                                                            config.node_split[1],
                                                            config.node_split[2]),
                                            seed);
    fs::create_directories(cx.dir / "target");
    ModelConfig mc = config.model;
    mc.seed = seed;
    model = TrainTarget(graph, split, mc);
    posteriors = Forward(model, graph);
    posteriors.dataset = name;
    SaveCheckpoint(model, cx.dir / "target" / "checkpoint.json");
    WritePosteriorsCsv(posteriors, cx.dir / "target" / "posteriors.csv");
    const double acc = Accuracy(posteriors, graph, split.test);
    WriteJson({{"test_accuracy", acc},
               {"train_nodes", split.train.size()},
               {"test_nodes", split.test.size()}},
              cx.dir / "target" / "metrics.json");
    spdlog::info("[{} seed {}] target test accuracy {:.4f}", name, seed, acc);
  });

  PairSet train, test;
  stages.Run("sample-pairs", name, s, [&] {
    fs::create_directories(cx.dir / "pairs");
    const PairSet all = SamplePairs(graph, {cx.budget}, seed);
    std::tie(train, test) = SplitPairs(all, config.pair_train_fraction, seed);
    WritePairsCsv(all, cx.dir / "pairs" / "all.csv");
    WritePairsCsv(train, cx.dir / "pairs" / "train.csv");
    WritePairsCsv(test, cx.dir / "pairs" / "test.csv");
  });

  stages.Run("baselines", name, s, [&] {
    fs::create_directories(cx.dir / "baselines" /
                           (config.dump_distances ? "distances" : ""));
    std::vector<AttackReport> cell;
    if (config.run_similarity) {
      std::vector<AttackReport> per_metric;
      for (MetricKind m : kAllMetrics) {
        AttackReport r = SimilarityAttack(train, test, posteriors, m);
        r.id.seed = seed;
        if (r.flagged) {
          manifest.warnings.push_back(fmt::format(
              "{} seed {}: {} threshold no better than majority", name, seed,
              MetricName(m)));
        }
        per_metric.push_back(r);
        if (config.dump_distances) {
          WriteDistanceDump(m, test, posteriors,
                            cx.dir / "baselines" / "distances" /
                                (std::string(MetricName(m)) + ".csv"));
        }
      }
      auto [mean, max] = AggregateMeanMax(per_metric);
      cell.insert(cell.end(), per_metric.begin(), per_metric.end());
      cell.push_back(mean);
      cell.push_back(max);
    }
    AttackSources sources;
    sources[name] = {&graph, &posteriors};
    for (FeatureMode mode : config.mlp_modes) {
      MlpConfig mc = config.mlp;
      mc.seed = seed;
      cell.push_back(MlpAttack(train, test, mode, mc, sources));
    }
    WriteReportsCsv(cell, cx.dir / "baselines" / "reports.csv");
    reports.insert(reports.end(), cell.begin(), cell.end());
  });

  if (!config.run_llm) return;

  std::vector<PromptRecord> inference;
  stages.Run("build-prompts", name, s, [&] {
    fs::create_directories(cx.dir / "prompts");
    for (const NodePair& p : test.pairs) {
      inference.push_back(BuildInferenceRecord(p, config.prompt, graph, &posteriors));
    }
    ExportJsonl(inference, cx.dir / "prompts" / "inference.jsonl");
  });

  stages.Run("finetune-export", name, s, [&] {
    PairSet source = train;
    if (config.prompt.setting == Setting::kBlackBox) {
      source = ShadowSameClassPairs(graph, posteriors,
                                    static_cast<int64_t>(train.size() / 2), seed,
                                    config.shadow_labeling,
                                    config.shadow_labels_available);
      WritePairsCsv(source, cx.dir / "pairs" / "shadow.csv");
    }
    const FinetuneSet set = BuildFinetuneSet(source, config.prompt, graph, &posteriors);
    ExportJsonl(set.records, cx.dir / "prompts" / "finetune.jsonl");
  });

  stages.Run("attack-llm", name, s, [&] {
    EndpointConfig endpoint = config.endpoint;
    std::unique_ptr<MockServer> mock;
    std::string detail = endpoint.model_name;
    if (config.mock) {
      MockData data;
      data.graphs[name] = &graph;
      data.posteriors[name] = &posteriors;
      mock = std::make_unique<MockServer>(config.mock->options, data);
      mock->Start("127.0.0.1", 0);
      endpoint.base_url = mock->base_url();
      detail = std::string("mock:") + MockModeName(config.mock->options.mode);
    }
    fs::create_directories(cx.dir / "llm");
    const LlmRun run = RunAttack(inference, endpoint);
    if (mock) mock->Stop();
    WriteVerdictsCsv(test, run, cx.dir / "llm" / "verdicts.csv");
    AttackReport r = ComputeMetrics(run.Predictions(), GoldLabels(test),
                                    config.unparseable_policy);
    r.id.method = "llm";
    r.id.dataset = name;
    r.id.train_dataset = config.llm_trained_on.empty() ? name : config.llm_trained_on;
    r.id.setting = SettingName(config.prompt.setting);
    r.id.seed = seed;
    r.detail = detail;
    if (run.unparseable > 0) {
      manifest.warnings.push_back(fmt::format("{} seed {}: {} unparseable verdicts",
                                              name, seed, run.unparseable));
    }
    WriteReportsCsv({r}, cx.dir / "llm" / "report.csv");
    reports.push_back(r);
  });
}

}  // namespace

PipelineResult RunPipeline(const PipelineConfig& config) {
  config.Check();
  PipelineResult result;
  RunManifest& manifest = result.manifest;
  manifest.config = config.ToJson();
  manifest.seeds = config.seeds;
  manifest.started_at = UtcNow();
  manifest.notes = {
      "test pairs are disjoint from the attacker's known (training) pairs",
      "unlinked pairs are drawn from the complement of the full edge set",
      std::string("unparseable verdicts: ") +
          UnparseablePolicyName(config.unparseable_policy),
      fmt::format("{} seeds; summaries report sample standard deviation",
                  config.seeds.size())};
  const fs::path out = config.out_dir;
  fs::create_directories(out);
  WriteJson(config.ToJson(), out / "config.json");
  StageRunner stages(manifest);

  auto finish = [&](const std::string& status) {
    manifest.status = status;
    manifest.finished_at = UtcNow();
    WriteJson(manifest.ToJson(), out / "manifest.json");
  };

  try {
    for (const DatasetSource& source : config.datasets) {
      LoadedSource loaded;
      int64_t budget = 0;
      stages.Run("load-dataset", source.name, -1, [&] {
        loaded = LoadSource(source);
        const ValidationReport report = Validate(loaded.graph);
        if (!report.violations.empty()) {
          throw ValidationError(fmt::format("{} violations, first: {} ({})",
                                            report.violations.size(),
                                            report.violations[0].invariant,
                                            report.violations[0].detail));
        }
        if (source.budget) {
          budget = *source.budget;
        } else if (auto d = DefaultBudget(source.name)) {
          budget = d->known_links;
        } else if (loaded.graph.meta.whitebox_link_budget) {
          budget = *loaded.graph.meta.whitebox_link_budget;
        } else {
          throw ConfigError("no budget given for dataset '" + source.name + "'");
        }
        if (budget > loaded.graph.NumEdges()) {
          const int64_t capped = loaded.graph.NumEdges() / 2;
          manifest.warnings.push_back(fmt::format(
              "{}: budget {} exceeds {} edges; using {}", source.name, budget,
              loaded.graph.NumEdges(), capped));
          budget = capped;
        }
        manifest.datasets[source.name] = {
            {"sha256", GraphFingerprint(loaded.graph)},
            {"origin", loaded.origin},
            {"nodes", loaded.graph.num_nodes},
            {"edges", loaded.graph.NumEdges()},
            {"classes", loaded.graph.num_categories},
            {"budget", budget}};
      });
      for (uint64_t seed : config.seeds) {
        RunCell({config, loaded.graph, loaded.split, budget, seed,
                 out / source.name / fmt::format("seed-{}", seed)},
                stages, manifest, result.reports);
      }
    }
    stages.Run("evaluate", "", -1, [&] {
      result.summary = SummarizeReports(result.reports);
      WriteReportsCsv(result.reports, out / "reports.csv");
      WriteReportsJson(result.reports, out / "reports.json");
      WriteSummaryCsv(result.summary, out / "summary.csv");
    });
  } catch (const StageError&) {
    if (!result.reports.empty()) WriteReportsJson(result.reports, out / "reports.json");
    finish("failed");
    throw;
  }
  finish("ok");
  return result;
}

}  // namespace linksteal
