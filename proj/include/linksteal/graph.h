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

#ifndef LINKSTEAL_GRAPH_H_
#define LINKSTEAL_GRAPH_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace linksteal {

using NodeId = int32_t;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Undirected edge in canonical (u < v) form.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Returns the edge with endpoints ordered so that u < v.
inline Edge CanonicalEdge(NodeId a, NodeId b) {
  return a < b ? Edge{a, b} : Edge{b, a};
}

struct TextFeatures {
  std::string title;
  std::string abstract;

  friend bool operator==(const TextFeatures&, const TextFeatures&) = default;
};

// How the source declares its "links" count: every undirected edge counted
// once, or counted in both directions.
enum class LinkConvention { kUndirected, kDirectedIncidence };

const char* LinkConventionName(LinkConvention c);
LinkConvention ParseLinkConvention(const std::string& s);

// Source-declared dataset statistics. Not recomputed from the edge list.
struct DatasetMeta {
  std::string name;
  int64_t nodes = 0;
  int64_t feats = 0;
  std::optional<int64_t> links;
  int64_t classes = 0;
  std::optional<int64_t> whitebox_link_budget;
  LinkConvention link_convention = LinkConvention::kUndirected;
};

// Attributed graph. Immutable after loading; RebuildIndex() must be called
// whenever `edges` changes so that adjacency queries stay consistent.
struct Graph {
  std::string name;
  int num_nodes = 0;
  int num_categories = 0;
  int feature_dim = 0;
  Eigen::MatrixXd features;  // num_nodes x feature_dim
  std::vector<std::optional<TextFeatures>> text;  // empty or num_nodes long
  std::vector<int> labels;
  std::vector<Edge> edges;  // sorted, canonical, unique
  DatasetMeta meta;

  // Sorted neighbor lists, built by RebuildIndex().
  std::vector<std::vector<NodeId>> adjacency;

  void RebuildIndex();
  bool HasEdge(NodeId a, NodeId b) const;
  int Degree(NodeId v) const { return static_cast<int>(adjacency[v].size()); }
  bool HasText() const;
  int64_t NumEdges() const { return static_cast<int64_t>(edges.size()); }
};

struct SplitSpec {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
  uint64_t seed = 0;

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct LoadStats {
  int64_t self_loops_dropped = 0;
  int64_t duplicates_merged = 0;
};

struct LoadedDataset {
  Graph graph;
  LoadStats stats;
  std::optional<SplitSpec> split;  // from splits.json when present
};

// Reads <dir>/meta.json, <dir>/nodes.jsonl, <dir>/edges.csv and the optional
// <dir>/splits.json. Edges are canonicalized; self-loops and duplicates are
// dropped and counted. Throws LoadError for missing files and
// ValidationError for malformed content.
LoadedDataset LoadDataset(const std::filesystem::path& dir);

// Writes `graph` in the layout LoadDataset reads. `split` is optional.
void ExportDataset(const Graph& graph, const std::filesystem::path& dir,
                   const std::optional<SplitSpec>& split = std::nullopt);

struct Violation {
  std::string invariant;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport Validate(const Graph& graph);

enum class AdjacencyMode {
  kGcnSymmetric,  // D^-1/2 (A+I) D^-1/2
  kMeanNeighbor,  // row-normalized A+I
  kNone,          // A+I
};

SparseMatrix NormalizedAdjacency(const Graph& graph, AdjacencyMode mode);

// Row-normalized A without self-loops; isolated nodes get an empty row.
SparseMatrix NeighborMeanOperator(const Graph& graph);

// Seeded node split with sizes floor(fraction * num_nodes). Throws
// ConfigError when a fraction is non-positive or the fractions sum above 1.
SplitSpec TrainTestNodeSplit(const Graph& graph,
                             std::tuple<double, double, double> fractions,
                             uint64_t seed);

// Graph restricted to `nodes`, relabeled densely in the given order.
Graph InducedSubgraph(const Graph& graph, const std::vector<NodeId>& nodes);

// Fraction of `ids` carrying the most frequent label.
double MajorityShare(const std::vector<int>& labels,
                     const std::vector<NodeId>& ids, int num_categories);

}  // namespace linksteal

#endif  // LINKSTEAL_GRAPH_H_
