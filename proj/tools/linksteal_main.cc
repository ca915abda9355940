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

// linksteal: command-line front end for the attack pipeline.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "linksteal/baselines.h"
#include "linksteal/config.h"
#include "linksteal/errors.h"
#include "linksteal/eval.h"
#include "linksteal/gnn.h"
#include "linksteal/graph.h"
#include "linksteal/llm_client.h"
#include "linksteal/mock_server.h"
#include "linksteal/pairs.h"
#include "linksteal/pipeline.h"
#include "linksteal/prompts.h"
#include "linksteal/synthetic.h"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace linksteal;

namespace {

struct Globals {
  std::optional<uint64_t> seed;
  std::string config;
  std::string out = ".";
  bool verbose = false;

  uint64_t Seed() const { return seed.value_or(0); }
};

// Sections of the config document that single-stage commands use.
struct Sections {
  ModelConfig model;
  MlpConfig mlp;
  PromptConfig prompt;
  EndpointConfig endpoint;
  std::array<double, 3> node_split = {0.6, 0.2, 0.2};
  double pair_train_fraction = 0.8;
};

Sections ReadSections(const std::string& path) {
  Sections s;
  if (path.empty()) return s;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (j.contains("format") && j.contains("config")) j = j.at("config");
  if (j.contains("model")) s.model = ModelConfigFromJson(j.at("model"));
  if (j.contains("baselines") && j.at("baselines").contains("mlp")) {
    s.mlp = MlpConfigFromJson(j.at("baselines").at("mlp"));
  }
  if (j.contains("prompt")) s.prompt = PromptConfigFromJson(j.at("prompt"));
  if (j.contains("llm") && j.at("llm").contains("endpoint")) {
    s.endpoint = EndpointConfigFromJson(j.at("llm").at("endpoint"));
  }
  if (j.contains("node_split")) s.node_split = j.at("node_split").get<std::array<double, 3>>();
  s.pair_train_fraction = j.value("pair_train_fraction", s.pair_train_fraction);
  return s;
}

// "<dir>" or "synthetic:<preset>[:<nodes>]".
LoadedSource LoadDataArg(const std::string& arg, const std::string& name,
                         uint64_t data_seed) {
  DatasetSource src;
  src.name = name;
  src.data_seed = data_seed;
  const std::string prefix = "synthetic:";
  if (arg.rfind(prefix, 0) == 0) {
    std::string rest = arg.substr(prefix.size());
    const size_t colon = rest.find(':');
    if (colon != std::string::npos) {
      src.synthetic_nodes = std::stoi(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    src.synthetic = rest;
  } else {
    src.path = arg;
  }
  return LoadSource(src);
}

fs::path OutPath(const Globals& g, const std::string& file) {
  fs::create_directories(g.out);
  return fs::path(g.out) / file;
}

void WriteJsonFile(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

void PrintReports(const std::vector<AttackReport>& reports) {
  for (const auto& r : reports) {
    std::cout << fmt::format("{:<10} {:<16} {:<10} acc {:.4f}  f1 {:.4f}  n {}\n",
                             r.id.method, r.detail, r.id.dataset, r.accuracy, r.f1,
                             r.n_test);
  }
}

void EmitReports(const Globals& g, const std::vector<AttackReport>& reports) {
  WriteReportsCsv(reports, OutPath(g, "reports.csv"));
  WriteReportsJson(reports, OutPath(g, "reports.json"));
  PrintReports(reports);
}

PosteriorMatrix LoadPosteriors(const std::string& path, const std::string& dataset) {
  return ReadPosteriorsCsv(path, dataset);
}

std::pair<std::string, std::string> SplitKeyValue(const std::string& s) {
  const size_t eq = s.find('=');
  if (eq == std::string::npos) throw ConfigError("expected name=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link stealing attacks against GNN posteriors"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for sampling and training");
  app.add_option("--config", g.config, "Config document (JSON)");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("-v,--verbose", g.verbose, "Log progress");

  // Shared dataset flags.
  std::string data, name;
  uint64_t data_seed = 0;
  auto add_data = [&](CLI::App* cmd, bool required = true) {
    auto* o = cmd->add_option("--data", data,
                              "Dataset directory or synthetic:<preset>[:<nodes>]");
    if (required) o->required();
    cmd->add_option("--name", name, "Dataset name override");
    cmd->add_option("--data-seed", data_seed, "Seed for synthetic datasets");
  };

  // make-synthetic
  auto* make = app.add_subcommand("make-synthetic", "Write a synthetic dataset");
  std::string preset = "cora";
  int nodes = 0, subgraph = 0;
  make->add_option("--preset", preset, "cora, citeseer, pubmed or ogbn-arxiv");
  make->add_option("--nodes", nodes, "Node count (ogbn-arxiv only)");
  make->add_option("--subgraph", subgraph, "Snowball subgraph size");
  make->add_option("--data-seed", data_seed);

  // train-target
  auto* train = app.add_subcommand("train-target", "Train the target GNN");
  add_data(train);
  std::string arch;
  std::optional<int> epochs;
  train->add_option("--arch", arch, "gcn, sage or gat");
  train->add_option("--epochs", epochs);

  // extract-posteriors
  auto* extract = app.add_subcommand("extract-posteriors",
                                     "Query a trained model for posteriors");
  add_data(extract);
  std::string checkpoint;
  extract->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);

  // sample-pairs
  auto* sample = app.add_subcommand("sample-pairs", "Sample balanced node pairs");
  add_data(sample);
  std::optional<int64_t> budget, shadow_budget;
  std::string posteriors_path, labeling = "argmax-posterior-class";
  bool labels_available = false;
  sample->add_option("--budget", budget, "Known links (default per dataset)");
  sample->add_option("--shadow-budget", shadow_budget,
                     "Also draw Same/Different shadow pairs");
  sample->add_option("--posteriors", posteriors_path, "Needed for --shadow-budget");
  sample->add_option("--labeling", labeling, "argmax-posterior-class, ground-truth-class or ground-truth-link");
  sample->add_flag("--labels-available", labels_available);

  // attack-similarity
  auto* sim = app.add_subcommand("attack-similarity", "Distance-threshold attacks");
  std::string train_pairs, test_pairs;
  std::vector<std::string> metrics;
  bool dump = false;
  sim->add_option("--train", train_pairs)->required()->check(CLI::ExistingFile);
  sim->add_option("--test", test_pairs)->required()->check(CLI::ExistingFile);
  sim->add_option("--posteriors", posteriors_path)->required()->check(CLI::ExistingFile);
  sim->add_option("--metric", metrics, "Metric names (default all eight)");
  sim->add_flag("--dump-distances", dump);

  // attack-mlp
  auto* mlp = app.add_subcommand("attack-mlp", "MLP attack on pair features");
  add_data(mlp);
  std::vector<std::string> modes;
  mlp->add_option("--train", train_pairs)->required()->check(CLI::ExistingFile);
  mlp->add_option("--test", test_pairs)->required()->check(CLI::ExistingFile);
  mlp->add_option("--posteriors", posteriors_path)->required()->check(CLI::ExistingFile);
  mlp->add_option("--mode", modes, "Feature, PP, PP+Feature (default all)");

  // build-prompts
  auto* build = app.add_subcommand("build-prompts", "Render pairs as chat records");
  add_data(build);
  std::string pairs_path, setting, jsonl_name;
  bool inference = false;
  build->add_option("--pairs", pairs_path)->required()->check(CLI::ExistingFile);
  build->add_option("--posteriors", posteriors_path, "Omit for text-only prompts");
  build->add_option("--setting", setting, "white-box or black-box");
  build->add_flag("--inference", inference, "Question only, no answer");
  build->add_option("--file", jsonl_name, "Output file name in --out");

  // finetune-export
  auto* ft = app.add_subcommand("finetune-export",
                                "Merge fine-tune JSONL files into one corpus");
  std::vector<std::string> inputs;
  ft->add_option("inputs", inputs)->required()->check(CLI::ExistingFile);
  ft->add_option("--file", jsonl_name, "Output file name in --out");

  // serve-mock
  auto* serve = app.add_subcommand("serve-mock", "Serve a deterministic mock LLM");
  std::vector<std::string> serve_data, serve_post;
  std::string mode = "oracle", host = "127.0.0.1";
  int port = 8089;
  double tau = 0.5;
  serve->add_option("--dataset", serve_data, "name=<dir|synthetic:preset>");
  serve->add_option("--posteriors", serve_post, "name=<posteriors.csv>");
  serve->add_option("--mode", mode, "oracle, constant-yes or posterior-cosine");
  serve->add_option("--tau", tau, "Cosine threshold for posterior-cosine");
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  // attack-llm
  auto* llm = app.add_subcommand("attack-llm", "Query the fine-tuned LLM");
  std::string prompts_path, base_url, model_name, train_dataset, policy = "score-as-wrong";
  llm->add_option("--prompts", prompts_path)->required()->check(CLI::ExistingFile);
  llm->add_option("--pairs", pairs_path, "Pairs with gold labels, aligned with prompts");
  llm->add_option("--base-url", base_url);
  llm->add_option("--model", model_name);
  llm->add_option("--train-dataset", train_dataset, "Dataset the LLM was tuned on");
  llm->add_option("--setting", setting);
  llm->add_option("--unparseable", policy, "score-as-wrong or exclude");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a verdicts file");
  std::string verdicts_path, method = "llm", detail, dataset;
  evaluate->add_option("--verdicts", verdicts_path)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--unparseable", policy);
  evaluate->add_option("--method", method);
  evaluate->add_option("--detail", detail);
  evaluate->add_option("--dataset", dataset);
  evaluate->add_option("--train-dataset", train_dataset);
  evaluate->add_option("--setting", setting);

  // cross-matrix
  auto* cross = app.add_subcommand("cross-matrix", "Train x eval accuracy grid");
  std::vector<std::string> report_files, order;
  std::string prefix = "cross";
  cross->add_option("reports", report_files)->required()->check(CLI::ExistingFile);
  cross->add_option("--method", method, "Report method to grid");
  cross->add_option("--order", order, "Dataset order");
  cross->add_option("--prefix", prefix);
  cross->footer("With several seeds per cell, pick one with --seed.");

  // run-pipeline
  auto* run = app.add_subcommand("run-pipeline", "Run every stage from --config");
  bool baselines_only = false;
  std::string mock_mode;
  run->add_flag("--baselines-only", baselines_only);
  run->add_option("--mock", mock_mode, "Serve this mock mode in-process");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(g.verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    if (*run) {
      if (g.config.empty()) throw ConfigError("run-pipeline needs --config");
      PipelineConfig c = PipelineConfig::Load(g.config);
      if (app.get_option("--out")->count() > 0) c.out_dir = g.out;
      if (g.seed) c.seeds = {*g.seed};
      if (baselines_only) c.run_llm = false;
      if (!mock_mode.empty()) {
        MockSpec spec;
        spec.options.mode = ParseMockMode(mock_mode);
        c.mock = spec;
      }
      spdlog::set_level(spdlog::level::info);
      const PipelineResult r = RunPipeline(c);
      for (const auto& row : r.summary) {
        std::cout << fmt::format("{:<10} {:<12} {:<10} {:<10} acc {:.4f}±{:.4f}  f1 {:.4f}±{:.4f}\n",
                                 row.method, row.detail, row.train_dataset, row.dataset,
                                 row.accuracy.mean, row.accuracy.std, row.f1.mean,
                                 row.f1.std);
      }
      std::cout << "run directory: " << c.out_dir.string() << "\n";
      return 0;
    }

    const Sections sec = ReadSections(g.config);

    if (*make) {
      SyntheticSpec spec = PresetByName(preset, nodes, data_seed);
      Graph graph = GenerateSynthetic(spec);
      if (subgraph > 0) {
        const std::string n = graph.name;
        graph = InducedSubgraph(graph, SnowballNodes(graph, subgraph, data_seed));
        graph.name = n;
      }
      fs::create_directories(g.out);
      ExportDataset(graph, g.out);
      std::cout << fmt::format("{}: {} nodes, {} edges, {} classes -> {}\n", graph.name,
                               graph.num_nodes, graph.NumEdges(), graph.num_categories,
                               g.out);
      return 0;
    }

    if (*train) {
      const LoadedSource src = LoadDataArg(data, name, data_seed);
      ModelConfig mc = sec.model;
      if (!arch.empty()) mc.arch = ParseArchitecture(arch);
      if (epochs) mc.epochs = *epochs;
      if (g.seed) mc.seed = *g.seed;
      mc.Check();
      const SplitSpec split =
          src.split ? *src.split
                    : TrainTestNodeSplit(src.graph,
                                         std::make_tuple(sec.node_split[0],
                                                         sec.node_split[1],
                                                         sec.node_split[2]),
                                         g.Seed());
      const TargetModel model = TrainTarget(src.graph, split, mc);
      PosteriorMatrix post = Forward(model, src.graph);
      post.dataset = src.graph.name;
      SaveCheckpoint(model, OutPath(g, "checkpoint.json"));
      WritePosteriorsCsv(post, OutPath(g, "posteriors.csv"));
      const double acc = Accuracy(post, src.graph, split.test);
      WriteJsonFile({{"test_accuracy", acc}, {"dataset", src.graph.name}},
                    OutPath(g, "metrics.json"));
      std::cout << fmt::format("{} {} test accuracy {:.4f}\n", src.graph.name,
                               ArchitectureName(mc.arch), acc);
      return 0;
    }

    if (*extract) {
      const LoadedSource src = LoadDataArg(data, name, data_seed);
      const TargetModel model = LoadCheckpoint(checkpoint);
      PosteriorMatrix post = Forward(model, src.graph);
      post.dataset = src.graph.name;
      WritePosteriorsCsv(post, OutPath(g, "posteriors.csv"));
      std::cout << fmt::format("{} x {} posteriors\n", post.num_nodes(),
                               post.num_classes());
      return 0;
    }

    if (*sample) {
      const LoadedSource src = LoadDataArg(data, name, data_seed);
      int64_t b = 0;
      if (budget) {
        b = *budget;
      } else if (auto d = DefaultBudget(src.graph.name)) {
        b = d->known_links;
      } else if (src.graph.meta.whitebox_link_budget) {
        b = *src.graph.meta.whitebox_link_budget;
      } else {
        throw ConfigError("no default budget for '" + src.graph.name + "'; pass --budget");
      }
      const PairSet all = SamplePairs(src.graph, {b}, g.Seed());
      auto [tr, te] = SplitPairs(all, sec.pair_train_fraction, g.Seed());
      WritePairsCsv(all, OutPath(g, "all.csv"));
      WritePairsCsv(tr, OutPath(g, "train.csv"));
      WritePairsCsv(te, OutPath(g, "test.csv"));
      std::cout << fmt::format("{} pairs: {} train, {} test\n", all.size(), tr.size(),
                               te.size());
      if (shadow_budget) {
        if (posteriors_path.empty()) throw ConfigError("--shadow-budget needs --posteriors");
        const PosteriorMatrix post = LoadPosteriors(posteriors_path, src.graph.name);
        const PairSet shadow =
            ShadowSameClassPairs(src.graph, post, *shadow_budget, g.Seed(),
                                 ParseLabelingSource(labeling), labels_available);
        WritePairsCsv(shadow, OutPath(g, "shadow.csv"));
        std::cout << fmt::format("{} shadow pairs\n", shadow.size());
      }
      return 0;
    }

    if (*sim) {
      const PairSet tr = ReadPairsCsv(train_pairs), te = ReadPairsCsv(test_pairs);
      const PosteriorMatrix post = LoadPosteriors(posteriors_path, te.source_graph);
      std::vector<MetricKind> kinds;
      for (const auto& m : metrics) kinds.push_back(ParseMetric(m));
      const bool all = kinds.empty();
      if (all) kinds.assign(kAllMetrics.begin(), kAllMetrics.end());
      std::vector<AttackReport> reports;
      for (MetricKind m : kinds) {
        AttackReport r = SimilarityAttack(tr, te, post, m);
        r.id.seed = g.Seed();
        reports.push_back(r);
        if (dump) {
          WriteDistanceDump(m, te, post,
                            OutPath(g, std::string("distances_") + MetricName(m) + ".csv"));
        }
      }
      if (all) {
        auto [mean, max] = AggregateMeanMax(reports);
        reports.push_back(mean);
        reports.push_back(max);
      }
      EmitReports(g, reports);
      return 0;
    }

    if (*mlp) {
      const LoadedSource src = LoadDataArg(data, name, data_seed);
      const PosteriorMatrix post = LoadPosteriors(posteriors_path, src.graph.name);
      PairSet tr = ReadPairsCsv(train_pairs), te = ReadPairsCsv(test_pairs);
      AttackSources sources;
      sources[src.graph.name] = AttackSource{&src.graph, &post};
      for (PairSet* ps : {&tr, &te}) {
        for (auto& p : ps->pairs) p.dataset = src.graph.name;
      }
      std::vector<FeatureMode> fm;
      for (const auto& m : modes) fm.push_back(ParseFeatureMode(m));
      if (fm.empty()) fm = {FeatureMode::kFeature, FeatureMode::kPP, FeatureMode::kPPFeature};
      MlpConfig mc = sec.mlp;
      if (g.seed) mc.seed = *g.seed;
      std::vector<AttackReport> reports;
      for (FeatureMode m : fm) reports.push_back(MlpAttack(tr, te, m, mc, sources));
      EmitReports(g, reports);
      return 0;
    }

    if (*build) {
      const LoadedSource src = LoadDataArg(data, name, data_seed);
      PromptConfig pc = sec.prompt;
      if (!setting.empty()) pc.setting = ParseSetting(setting);
      std::optional<PosteriorMatrix> post;
      if (!posteriors_path.empty()) {
        post = LoadPosteriors(posteriors_path, src.graph.name);
      } else {
        pc.include_posteriors = false;
      }
      pc.Check();
      PairSet ps = ReadPairsCsv(pairs_path);
      for (auto& p : ps.pairs) p.dataset = src.graph.name;
      const PosteriorMatrix* pp = post ? &*post : nullptr;
      std::vector<PromptRecord> records;
      if (inference) {
        for (const auto& p : ps.pairs) {
          records.push_back(BuildInferenceRecord(p, pc, src.graph, pp));
        }
      } else {
        records = BuildFinetuneSet(ps, pc, src.graph, pp).records;
      }
      const fs::path out = OutPath(
          g, jsonl_name.empty() ? (inference ? "inference.jsonl" : "finetune.jsonl")
                                : jsonl_name);
      ExportJsonl(records, out);
      std::cout << fmt::format("{} records -> {}\n", records.size(), out.string());
      return 0;
    }

    if (*ft) {
      std::vector<FinetuneSet> sets;
      for (const auto& in : inputs) sets.push_back(ImportJsonl(in));
      const FinetuneSet merged = MergeFinetuneSets(sets, g.Seed());
      const fs::path out = OutPath(g, jsonl_name.empty() ? "finetune.jsonl" : jsonl_name);
      ExportJsonl(merged.records, out);
      for (const auto& [ds, n] : merged.source_counts) {
        std::cout << fmt::format("{}: {}\n", ds, n);
      }
      std::cout << fmt::format("{} records -> {}\n", merged.records.size(), out.string());
      return 0;
    }

    if (*serve) {
      std::map<std::string, LoadedSource> graphs;
      std::map<std::string, PosteriorMatrix> posts;
      MockData md;
      for (const auto& kv : serve_data) {
        auto [n, path] = SplitKeyValue(kv);
        graphs[n] = LoadDataArg(path, n, data_seed);
        md.graphs[n] = &graphs[n].graph;
      }
      for (const auto& kv : serve_post) {
        auto [n, path] = SplitKeyValue(kv);
        posts[n] = LoadPosteriors(path, n);
        md.posteriors[n] = &posts[n];
      }
      MockOptions mo;
      mo.mode = ParseMockMode(mode);
      mo.tau = tau;
      MockServer server(mo, md);
      server.Start(host, port);
      std::cout << "serving " << MockModeName(mo.mode) << " on " << server.base_url()
                << std::endl;
      server.Wait();
      return 0;
    }

    if (*llm) {
      EndpointConfig ec = sec.endpoint;
      if (!base_url.empty()) ec.base_url = base_url;
      if (!model_name.empty()) ec.model_name = model_name;
      ec.Check();
      const FinetuneSet prompts = ImportJsonl(prompts_path);
      PairSet ps;
      if (!pairs_path.empty()) {
        ps = ReadPairsCsv(pairs_path);
        if (ps.size() != prompts.records.size()) {
          throw ContractError(fmt::format("{} prompts but {} pairs",
                                          prompts.records.size(), ps.size()));
        }
      } else {
        for (const auto& r : prompts.records) ps.pairs.push_back({r.u, r.v, {}, {}, r.dataset});
      }
      const LlmRun r = RunAttack(prompts.records, ec);
      WriteVerdictsCsv(ps, r, OutPath(g, "verdicts.csv"));
      std::cout << fmt::format("{} verdicts, {} unparseable\n", r.verdicts.size(),
                               r.unparseable);
      bool labeled = !ps.pairs.empty();
      for (const auto& p : ps.pairs) labeled = labeled && p.link_label.has_value();
      if (labeled) {
        AttackReport rep = ComputeMetrics(r.Predictions(), GoldLabels(ps),
                                          ParseUnparseablePolicy(policy));
        rep.id.method = "llm";
        rep.id.dataset = prompts.records.empty() ? "" : prompts.records[0].dataset;
        rep.id.train_dataset = train_dataset.empty() ? rep.id.dataset : train_dataset;
        rep.id.setting = setting.empty() ? SettingName(sec.prompt.setting) : setting;
        rep.id.seed = g.Seed();
        rep.detail = ec.model_name;
        EmitReports(g, {rep});
      }
      return 0;
    }

    if (*evaluate) {
      const VerdictTable t = ReadVerdictsCsv(verdicts_path);
      AttackReport rep =
          ComputeMetrics(t.predictions, GoldLabels(t.pairs), ParseUnparseablePolicy(policy));
      rep.id.method = method;
      rep.id.dataset = dataset;
      rep.id.train_dataset = train_dataset.empty() ? dataset : train_dataset;
      rep.id.setting = setting.empty() ? "white-box" : setting;
      rep.id.seed = g.Seed();
      rep.detail = detail;
      EmitReports(g, {rep});
      return 0;
    }

    if (*cross) {
      std::vector<AttackReport> reports;
      for (const auto& f : report_files) {
        for (auto& r : ReadReportsJson(f)) {
          if (r.id.method != method) continue;
          if (g.seed && r.id.seed != *g.seed) continue;
          reports.push_back(std::move(r));
        }
      }
      const CrossMatrix m = BuildCrossMatrix(reports, order);
      WriteCrossMatrix(m, fs::path(g.out) / prefix);
      for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << fmt::format("{} x {} grid -> {}_accuracy.csv\n", m.train_datasets.size(),
                               m.eval_datasets.size(), (fs::path(g.out) / prefix).string());
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
