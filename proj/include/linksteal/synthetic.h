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

// Seeded generator of citation-style attributed graphs. Used as an offline
// stand-in for the public citation datasets: presets match their node,
// feature and class counts, class proportions, edge counts and edge
// homophily, with bag-of-words or embedding features tied to the class and
// pseudo-word titles/abstracts for prompt construction.

#ifndef LINKSTEAL_SYNTHETIC_H_
#define LINKSTEAL_SYNTHETIC_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linksteal/graph.h"

namespace linksteal {

enum class FeatureKind {
  kBinaryBagOfWords,  // 0/1 word indicators
  kWeightedBagOfWords,  // positive tf-idf style weights
  kDenseEmbedding,  // Gaussian around a class centroid
};

struct SyntheticSpec {
  std::string name = "synthetic";
  int num_nodes = 100;
  int num_categories = 3;
  std::vector<double> class_weights;  // empty means uniform
  int feature_dim = 32;
  FeatureKind feature_kind = FeatureKind::kBinaryBagOfWords;
  double words_per_node = 10.0;  // bag-of-words kinds
  double topic_share = 0.3;  // share of a node's words drawn from its class topic
  double centroid_scale = 1.0;  // embedding kind: class centroid norm
  int64_t num_edges = 200;  // undirected
  double homophily = 0.8;  // share of edges joining same-category nodes
  double degree_exponent = 0.6;  // node weight ~ rank^-exponent
  bool with_text = true;
  std::optional<int64_t> declared_links;
  LinkConvention link_convention = LinkConvention::kDirectedIncidence;
  std::optional<int64_t> whitebox_link_budget;
  uint64_t seed = 0;
};

Graph GenerateSynthetic(const SyntheticSpec& spec);

// Presets. `seed` only changes the sampled instance.
SyntheticSpec CoraLike(uint64_t seed = 0);
SyntheticSpec CiteseerLike(uint64_t seed = 0);
SyntheticSpec PubmedLike(uint64_t seed = 0);
// Arxiv-like graph with `num_nodes` nodes and the full dataset's average
// degree, 128-d embeddings and 40 categories.
SyntheticSpec ArxivLike(int num_nodes, uint64_t seed = 0);

// Preset by dataset name ("cora", "citeseer", "pubmed", "ogbn-arxiv").
// `num_nodes` only applies to the arxiv preset, where 0 means the full
// 169,343 nodes. ConfigError for other names.
SyntheticSpec PresetByName(const std::string& name, int num_nodes = 0,
                           uint64_t seed = 0);

// Breadth-first snowball sample of `count` node ids starting from seeded
// random roots; keeps induced subgraphs from thinning out.
std::vector<NodeId> SnowballNodes(const Graph& graph, int count, uint64_t seed);

// Lowercase pseudo-word for vocabulary index `index`.
std::string PseudoWord(int index);

}  // namespace linksteal

#endif  // LINKSTEAL_SYNTHETIC_H_
