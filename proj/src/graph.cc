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

#include "linksteal/graph.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "linksteal/errors.h"

namespace linksteal {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::ofstream OpenForWrite(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  return out;
}

std::vector<NodeId> IdsFromJson(const json& j, const char* key) {
  std::vector<NodeId> ids;
  if (j.contains(key)) ids = j.at(key).get<std::vector<NodeId>>();
  return ids;
}

}  // namespace

const char* LinkConventionName(LinkConvention c) {
  return c == LinkConvention::kUndirected ? "undirected" : "directed-incidence";
}

LinkConvention ParseLinkConvention(const std::string& s) {
  if (s == "undirected") return LinkConvention::kUndirected;
  if (s == "directed-incidence" || s == "directed") {
    return LinkConvention::kDirectedIncidence;
  }
  throw ValidationError("unknown link_convention '" + s + "'");
}

void Graph::RebuildIndex() {
  adjacency.assign(num_nodes, {});
  for (const Edge& e : edges) {
    adjacency[e.u].push_back(e.v);
    adjacency[e.v].push_back(e.u);
  }
  for (auto& row : adjacency) std::sort(row.begin(), row.end());
}

bool Graph::HasEdge(NodeId a, NodeId b) const {
  if (a < 0 || b < 0 || a >= num_nodes || b >= num_nodes) return false;
  const auto& row = adjacency[a];
  return std::binary_search(row.begin(), row.end(), b);
}

bool Graph::HasText() const {
  return std::any_of(text.begin(), text.end(),
                     [](const auto& t) { return t.has_value(); });
}

LoadedDataset LoadDataset(const fs::path& dir) {
  const fs::path meta_path = dir / "meta.json";
  const fs::path nodes_path = dir / "nodes.jsonl";
  const fs::path edges_path = dir / "edges.csv";
  for (const auto& p : {meta_path, nodes_path, edges_path}) {
    if (!fs::exists(p)) throw LoadError("missing dataset file " + p.string());
  }

  LoadedDataset out;
  Graph& g = out.graph;
  const json meta = ReadJsonFile(meta_path);
  try {
    g.name = meta.at("name").get<std::string>();
    g.num_categories = meta.at("classes").get<int>();
    g.feature_dim = meta.at("feature_dim").get<int>();
    g.meta.name = g.name;
    g.meta.classes = g.num_categories;
    g.meta.feats = g.feature_dim;
    g.meta.link_convention = ParseLinkConvention(
        meta.value("link_convention", std::string("undirected")));
    if (meta.contains("links")) g.meta.links = meta["links"].get<int64_t>();
    if (meta.contains("whitebox_link_budget")) {
      g.meta.whitebox_link_budget =
          meta["whitebox_link_budget"].get<int64_t>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(meta_path.string() + ": " + e.what());
  }
  if (g.num_categories <= 0 || g.feature_dim < 0) {
    throw ValidationError(meta_path.string() +
                          ": classes must be positive, feature_dim >= 0");
  }

  // Nodes: one JSON object per line, ids dense and 0-based in any order.
  std::ifstream nodes_in(nodes_path);
  if (!nodes_in) throw LoadError("cannot open " + nodes_path.string());
  struct RawNode {
    int label;
    std::vector<double> features;
    std::optional<TextFeatures> text;
  };
  std::vector<std::optional<RawNode>> raw;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(nodes_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(nodes_path.string() + ":" +
                            std::to_string(line_no) + ": " + e.what());
    }
    const int64_t id = rec.value("id", int64_t{-1});
    if (id < 0) {
      throw ValidationError("node record on line " + std::to_string(line_no) +
                            " has no valid id");
    }
    RawNode node;
    node.label = rec.value("label", -1);
    if (rec.contains("features")) {
      node.features = rec["features"].get<std::vector<double>>();
    }
    if (rec.contains("title") || rec.contains("abstract")) {
      node.text = TextFeatures{rec.value("title", std::string()),
                               rec.value("abstract", std::string())};
    }
    if (static_cast<size_t>(id) >= raw.size()) raw.resize(id + 1);
    if (raw[id].has_value()) {
      throw ValidationError("duplicate node id " + std::to_string(id));
    }
    raw[id] = std::move(node);
  }

  g.num_nodes = static_cast<int>(raw.size());
  g.features.resize(g.num_nodes, g.feature_dim);
  g.labels.resize(g.num_nodes);
  g.text.assign(g.num_nodes, std::nullopt);
  for (int id = 0; id < g.num_nodes; ++id) {
    if (!raw[id].has_value()) {
      throw ValidationError("node ids are not dense: missing node " +
                            std::to_string(id));
    }
    RawNode& node = *raw[id];
    if (node.label < 0 || node.label >= g.num_categories) {
      throw ValidationError("label out of range, node " + std::to_string(id));
    }
    if (static_cast<int>(node.features.size()) != g.feature_dim) {
      throw ValidationError("ragged feature row, node " + std::to_string(id) +
                            " has " + std::to_string(node.features.size()) +
                            " values, expected " +
                            std::to_string(g.feature_dim));
    }
    g.labels[id] = node.label;
    for (int j = 0; j < g.feature_dim; ++j) g.features(id, j) = node.features[j];
    g.text[id] = std::move(node.text);
  }
  if (!g.HasText()) g.text.clear();

  // Edges.
  std::ifstream edges_in(edges_path);
  if (!edges_in) throw LoadError("cannot open " + edges_path.string());
  std::vector<Edge> edges;
  line_no = 0;
  while (std::getline(edges_in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "u,v") continue;
    std::istringstream ss(line);
    int64_t a = 0, b = 0;
    char comma = 0;
    if (!(ss >> a >> comma >> b) || comma != ',') {
      throw ValidationError(edges_path.string() + ":" +
                            std::to_string(line_no) + ": malformed edge row");
    }
    if (a < 0 || b < 0 || a >= g.num_nodes || b >= g.num_nodes) {
      throw ValidationError("dangling endpoint in edge (" + std::to_string(a) +
                            "," + std::to_string(b) + ")");
    }
    if (a == b) {
      ++out.stats.self_loops_dropped;
      continue;
    }
    edges.push_back(CanonicalEdge(static_cast<NodeId>(a),
                                  static_cast<NodeId>(b)));
  }
  std::sort(edges.begin(), edges.end());
  const size_t before = edges.size();
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  out.stats.duplicates_merged = static_cast<int64_t>(before - edges.size());
  g.edges = std::move(edges);
  g.meta.nodes = g.num_nodes;
  g.RebuildIndex();

  if (out.stats.self_loops_dropped > 0 || out.stats.duplicates_merged > 0) {
    spdlog::info("{}: dropped {} self-loops, merged {} duplicate edges", g.name,
                 out.stats.self_loops_dropped, out.stats.duplicates_merged);
  }

  const fs::path splits_path = dir / "splits.json";
  if (fs::exists(splits_path)) {
    const json sj = ReadJsonFile(splits_path);
    SplitSpec split;
    split.train = IdsFromJson(sj, "train");
    split.val = IdsFromJson(sj, "val");
    split.test = IdsFromJson(sj, "test");
    split.seed = sj.value("seed", uint64_t{0});
    out.split = std::move(split);
  }
  return out;
}

void ExportDataset(const Graph& graph, const fs::path& dir,
                   const std::optional<SplitSpec>& split) {
  fs::create_directories(dir);
  json meta = {{"name", graph.name},
               {"classes", graph.num_categories},
               {"feature_dim", graph.feature_dim},
               {"link_convention",
                LinkConventionName(graph.meta.link_convention)}};
  if (graph.meta.links) meta["links"] = *graph.meta.links;
  if (graph.meta.whitebox_link_budget) {
    meta["whitebox_link_budget"] = *graph.meta.whitebox_link_budget;
  }
  meta["nodes"] = graph.num_nodes;
  OpenForWrite(dir / "meta.json") << meta.dump(2) << "\n";

  auto nodes_out = OpenForWrite(dir / "nodes.jsonl");
  for (int id = 0; id < graph.num_nodes; ++id) {
    json rec;
    rec["id"] = id;
    rec["label"] = graph.labels[id];
    std::vector<double> row(graph.feature_dim);
    for (int j = 0; j < graph.feature_dim; ++j) row[j] = graph.features(id, j);
    rec["features"] = std::move(row);
    if (!graph.text.empty() && graph.text[id]) {
      rec["title"] = graph.text[id]->title;
      rec["abstract"] = graph.text[id]->abstract;
    }
    nodes_out << rec.dump() << "\n";
  }

  auto edges_out = OpenForWrite(dir / "edges.csv");
  edges_out << "u,v\n";
  for (const Edge& e : graph.edges) edges_out << e.u << "," << e.v << "\n";

  if (split) {
    json sj = {{"train", split->train},
               {"val", split->val},
               {"test", split->test},
               {"seed", split->seed}};
    OpenForWrite(dir / "splits.json") << sj.dump() << "\n";
  }
}

ValidationReport Validate(const Graph& graph) {
  ValidationReport report;
  auto add = [&](std::string invariant, std::string detail) {
    report.violations.push_back({std::move(invariant), std::move(detail)});
  };
  if (graph.features.rows() != graph.num_nodes ||
      graph.features.cols() != graph.feature_dim) {
    add("feature shape", "features are " +
                             std::to_string(graph.features.rows()) + "x" +
                             std::to_string(graph.features.cols()) +
                             ", expected " + std::to_string(graph.num_nodes) +
                             "x" + std::to_string(graph.feature_dim));
  }
  if (static_cast<int>(graph.labels.size()) != graph.num_nodes) {
    add("label count", "have " + std::to_string(graph.labels.size()) +
                           " labels for " + std::to_string(graph.num_nodes) +
                           " nodes");
  }
  for (size_t i = 0; i < graph.labels.size(); ++i) {
    if (graph.labels[i] < 0 || graph.labels[i] >= graph.num_categories) {
      add("label out of range", "label out of range, node " + std::to_string(i));
    }
  }
  if (!graph.text.empty() &&
      static_cast<int>(graph.text.size()) != graph.num_nodes) {
    add("text count", "text records do not cover every node");
  }
  for (size_t i = 0; i < graph.edges.size(); ++i) {
    const Edge& e = graph.edges[i];
    const std::string name =
        "(" + std::to_string(e.u) + "," + std::to_string(e.v) + ")";
    if (e.u < 0 || e.v < 0 || e.u >= graph.num_nodes ||
        e.v >= graph.num_nodes) {
      add("dangling endpoint", "dangling endpoint in edge " + name);
    }
    if (e.u == e.v) add("self-pair", "self-pair edge " + name);
    if (e.u > e.v) add("non-canonical edge", "edge " + name + " has u > v");
    if (i > 0 && !(graph.edges[i - 1] < e)) {
      if (graph.edges[i - 1] == e) {
        add("duplicate edge", "edge " + name + " appears more than once");
      } else {
        add("unsorted edges", "edge " + name + " out of order");
      }
    }
  }
  return report;
}

SparseMatrix NormalizedAdjacency(const Graph& graph, AdjacencyMode mode) {
  const int n = graph.num_nodes;
  std::vector<double> degree(n, 1.0);  // self-loop
  for (const Edge& e : graph.edges) {
    degree[e.u] += 1.0;
    degree[e.v] += 1.0;
  }
  auto weight = [&](int i, int j) {
    switch (mode) {
      case AdjacencyMode::kGcnSymmetric:
        return 1.0 / std::sqrt(degree[i] * degree[j]);
      case AdjacencyMode::kMeanNeighbor:
        return 1.0 / degree[i];
      case AdjacencyMode::kNone:
        break;
    }
    return 1.0;
  };
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n + 2 * graph.edges.size());
  for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, weight(i, i));
  for (const Edge& e : graph.edges) {
    triplets.emplace_back(e.u, e.v, weight(e.u, e.v));
    triplets.emplace_back(e.v, e.u, weight(e.v, e.u));
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

SparseMatrix NeighborMeanOperator(const Graph& graph) {
  const int n = graph.num_nodes;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * graph.edges.size());
  std::vector<int> degree(n, 0);
  for (const Edge& e : graph.edges) {
    ++degree[e.u];
    ++degree[e.v];
  }
  for (const Edge& e : graph.edges) {
    triplets.emplace_back(e.u, e.v, 1.0 / degree[e.u]);
    triplets.emplace_back(e.v, e.u, 1.0 / degree[e.v]);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

SplitSpec TrainTestNodeSplit(const Graph& graph,
                             std::tuple<double, double, double> fractions,
                             uint64_t seed) {
  const auto [train, val, test] = fractions;
  if (train <= 0 || val < 0 || test <= 0) {
    throw ConfigError("split fractions must be positive");
  }
  if (train + val + test > 1.0 + 1e-12) {
    throw ConfigError("split fractions sum above 1");
  }
  std::vector<NodeId> ids(graph.num_nodes);
  std::iota(ids.begin(), ids.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);

  const auto n = static_cast<double>(graph.num_nodes);
  const auto n_train = static_cast<size_t>(std::floor(train * n));
  const auto n_val = static_cast<size_t>(std::floor(val * n));
  const auto n_test = static_cast<size_t>(std::floor(test * n));

  SplitSpec split;
  split.seed = seed;
  auto it = ids.begin();
  split.train.assign(it, it + n_train);
  it += n_train;
  split.val.assign(it, it + n_val);
  it += n_val;
  split.test.assign(it, it + n_test);
  return split;
}

Graph InducedSubgraph(const Graph& graph, const std::vector<NodeId>& nodes) {
  std::vector<NodeId> remap(graph.num_nodes, -1);
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] < 0 || nodes[i] >= graph.num_nodes) {
      throw ContractError("induced subgraph: node " + std::to_string(nodes[i]) +
                          " out of range");
    }
    if (remap[nodes[i]] != -1) {
      throw ContractError("induced subgraph: node " + std::to_string(nodes[i]) +
                          " listed twice");
    }
    remap[nodes[i]] = static_cast<NodeId>(i);
  }
  Graph sub;
  sub.name = graph.name;
  sub.num_nodes = static_cast<int>(nodes.size());
  sub.num_categories = graph.num_categories;
  sub.feature_dim = graph.feature_dim;
  sub.meta = graph.meta;
  sub.meta.nodes = sub.num_nodes;
  sub.meta.links.reset();
  sub.features.resize(sub.num_nodes, sub.feature_dim);
  sub.labels.resize(sub.num_nodes);
  if (!graph.text.empty()) sub.text.resize(sub.num_nodes);
  for (int i = 0; i < sub.num_nodes; ++i) {
    sub.features.row(i) = graph.features.row(nodes[i]);
    sub.labels[i] = graph.labels[nodes[i]];
    if (!graph.text.empty()) sub.text[i] = graph.text[nodes[i]];
  }
  for (const Edge& e : graph.edges) {
    if (remap[e.u] >= 0 && remap[e.v] >= 0) {
      sub.edges.push_back(CanonicalEdge(remap[e.u], remap[e.v]));
    }
  }
  std::sort(sub.edges.begin(), sub.edges.end());
  sub.RebuildIndex();
  return sub;
}

double MajorityShare(const std::vector<int>& labels,
                     const std::vector<NodeId>& ids, int num_categories) {
  if (ids.empty()) return 0.0;
  std::vector<int> counts(num_categories, 0);
  for (NodeId id : ids) ++counts[labels[id]];
  return static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
         static_cast<double>(ids.size());
}

}  // namespace linksteal
