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

#ifndef LINKSTEAL_PAIRS_H_
#define LINKSTEAL_PAIRS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "linksteal/gnn.h"
#include "linksteal/graph.h"

namespace linksteal {

enum class LinkLabel { kUnlink = 0, kLink = 1 };
enum class ShadowLabel { kDifferent = 0, kSame = 1 };

enum class LabelingSource {
  kGroundTruthLink,
  kArgmaxPosteriorClass,
  kGroundTruthClass,
};

const char* LinkLabelName(LinkLabel l);  // "Link" / "Unlink"
const char* ShadowLabelName(ShadowLabel l);  // "Same" / "Different"
const char* LabelingSourceName(LabelingSource s);
LabelingSource ParseLabelingSource(const std::string& s);

// Attack unit. Endpoints are canonical (u < v). Shadow pairs carry no link
// label: the black-box attacker never consults the edge set.
struct NodePair {
  NodeId u = 0;
  NodeId v = 0;
  std::optional<LinkLabel> link_label;
  std::optional<ShadowLabel> shadow_label;
  std::string dataset;

  friend bool operator==(const NodePair&, const NodePair&) = default;
};

struct PairSet {
  std::vector<NodePair> pairs;
  uint64_t seed = 0;
  std::string source_graph;
  LabelingSource labeling_source = LabelingSource::kGroundTruthLink;

  int64_t CountLink() const;
  int64_t CountUnlink() const;
  int64_t CountSame() const;
  int64_t CountDifferent() const;
  size_t size() const { return pairs.size(); }
};

// Number of true links the white-box attacker knows.
struct KnowledgeBudget {
  int64_t known_links = 0;
};

// Budgets used for the four citation datasets, keyed by lower-case name
// ("cora", "citeseer", "pubmed", "ogbn-arxiv"). Nullopt for other names.
std::optional<KnowledgeBudget> DefaultBudget(const std::string& dataset);

// Draws `budget` Link pairs uniformly without replacement from the edges and
// the same number of Unlink pairs from the complement of the full edge set.
// Throws SamplingError when either side cannot be filled.
PairSet SamplePairs(const Graph& graph, KnowledgeBudget budget, uint64_t seed);

// Stratified split keeping each label's share on both sides. Throws
// ConfigError unless 0 < train_fraction < 1.
std::pair<PairSet, PairSet> SplitPairs(const PairSet& pairs,
                                       double train_fraction, uint64_t seed);

// Same/Different pairs for the black-box shadow task. Pairs are drawn
// uniformly over node pairs without looking at edges; `budget` pairs of each
// shadow label are returned. kGroundTruthClass requires
// `labels_available`, otherwise ConfigError.
PairSet ShadowSameClassPairs(const Graph& graph,
                             const PosteriorMatrix& posteriors, int64_t budget,
                             uint64_t seed, LabelingSource labeling_source,
                             bool labels_available = false);

// Argmax with ties resolved toward the lower index.
int ArgmaxClass(const Eigen::Ref<const Eigen::RowVectorXd>& row);

// CSV with header u,v,link_label,shadow_label,dataset. Missing labels are
// written as empty cells.
void WritePairsCsv(const PairSet& pairs, const std::filesystem::path& path);
PairSet ReadPairsCsv(const std::filesystem::path& path);

}  // namespace linksteal

#endif  // LINKSTEAL_PAIRS_H_
