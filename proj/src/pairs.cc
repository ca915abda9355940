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

#include "linksteal/pairs.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "linksteal/errors.h"

namespace linksteal {
namespace {

// Rejection sampling is replaced by enumeration when the pool of
// admissible pairs is smaller than this multiple of the request.
constexpr int64_t kEnumerateFactor = 4;

uint64_t PairKey(NodeId a, NodeId b) {
  const Edge e = CanonicalEdge(a, b);
  return (static_cast<uint64_t>(e.u) << 32) | static_cast<uint32_t>(e.v);
}

int64_t AllPairs(int64_t n) { return n * (n - 1) / 2; }

template <typename Pred>
std::vector<Edge> EnumeratePairs(int n, Pred keep) {
  std::vector<Edge> out;
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      if (keep(a, b)) out.push_back({a, b});
    }
  }
  return out;
}

std::string LabelKey(const NodePair& p) {
  if (p.link_label) return std::string("link:") + LinkLabelName(*p.link_label);
  if (p.shadow_label) {
    return std::string("shadow:") + ShadowLabelName(*p.shadow_label);
  }
  return "none";
}

}  // namespace

const char* LinkLabelName(LinkLabel l) {
  return l == LinkLabel::kLink ? "Link" : "Unlink";
}

const char* ShadowLabelName(ShadowLabel l) {
  return l == ShadowLabel::kSame ? "Same" : "Different";
}

const char* LabelingSourceName(LabelingSource s) {
  switch (s) {
    case LabelingSource::kGroundTruthLink:
      return "ground-truth-link";
    case LabelingSource::kArgmaxPosteriorClass:
      return "argmax-posterior-class";
    case LabelingSource::kGroundTruthClass:
      return "ground-truth-class";
  }
  return "?";
}

LabelingSource ParseLabelingSource(const std::string& s) {
  if (s == "ground-truth-link") return LabelingSource::kGroundTruthLink;
  if (s == "argmax-posterior-class") return LabelingSource::kArgmaxPosteriorClass;
  if (s == "ground-truth-class") return LabelingSource::kGroundTruthClass;
  throw ConfigError("unknown labeling source '" + s + "'");
}

int64_t PairSet::CountLink() const {
  return std::count_if(pairs.begin(), pairs.end(), [](const NodePair& p) {
    return p.link_label == LinkLabel::kLink;
  });
}

int64_t PairSet::CountUnlink() const {
  return std::count_if(pairs.begin(), pairs.end(), [](const NodePair& p) {
    return p.link_label == LinkLabel::kUnlink;
  });
}

int64_t PairSet::CountSame() const {
  return std::count_if(pairs.begin(), pairs.end(), [](const NodePair& p) {
    return p.shadow_label == ShadowLabel::kSame;
  });
}

int64_t PairSet::CountDifferent() const {
  return std::count_if(pairs.begin(), pairs.end(), [](const NodePair& p) {
    return p.shadow_label == ShadowLabel::kDifferent;
  });
}

std::optional<KnowledgeBudget> DefaultBudget(const std::string& dataset) {
  std::string key = dataset;
  std::transform(key.begin(), key.end(), key.begin(), ::tolower);
  if (key == "cora" || key == "citeseer") return KnowledgeBudget{2000};
  if (key == "pubmed") return KnowledgeBudget{5000};
  if (key == "ogbn-arxiv" || key == "arxiv") return KnowledgeBudget{30000};
  return std::nullopt;
}

PairSet SamplePairs(const Graph& graph, KnowledgeBudget budget, uint64_t seed) {
  const int64_t want = budget.known_links;
  if (want < 0) throw ConfigError("negative link budget");
  if (want > graph.NumEdges()) {
    throw SamplingError("budget of " + std::to_string(want) +
                        " links exceeds the " +
                        std::to_string(graph.NumEdges()) + " edges available");
  }
  std::mt19937_64 rng(seed);
  PairSet out;
  out.seed = seed;
  out.source_graph = graph.name;
  out.labeling_source = LabelingSource::kGroundTruthLink;

  std::vector<size_t> idx(graph.edges.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  for (int64_t i = 0; i < want; ++i) {
    const Edge& e = graph.edges[idx[i]];
    out.pairs.push_back({e.u, e.v, LinkLabel::kLink, std::nullopt, graph.name});
  }

  const int64_t non_edges = AllPairs(graph.num_nodes) - graph.NumEdges();
  if (non_edges < want) {
    throw SamplingError("cannot draw " + std::to_string(want) +
                        " unlinked pairs: " + std::to_string(non_edges) +
                        " non-edges available");
  }
  if (non_edges < kEnumerateFactor * want) {
    std::vector<Edge> pool = EnumeratePairs(
        graph.num_nodes, [&](NodeId a, NodeId b) { return !graph.HasEdge(a, b); });
    std::shuffle(pool.begin(), pool.end(), rng);
    for (int64_t i = 0; i < want; ++i) {
      out.pairs.push_back(
          {pool[i].u, pool[i].v, LinkLabel::kUnlink, std::nullopt, graph.name});
    }
  } else {
    std::uniform_int_distribution<NodeId> node(0, graph.num_nodes - 1);
    std::unordered_set<uint64_t> seen;
    seen.reserve(static_cast<size_t>(want) * 2);
    while (static_cast<int64_t>(seen.size()) < want) {
      const NodeId a = node(rng), b = node(rng);
      if (a == b || graph.HasEdge(a, b)) continue;
      if (!seen.insert(PairKey(a, b)).second) continue;
      const Edge e = CanonicalEdge(a, b);
      out.pairs.push_back({e.u, e.v, LinkLabel::kUnlink, std::nullopt, graph.name});
    }
  }
  std::shuffle(out.pairs.begin(), out.pairs.end(), rng);
  return out;
}

std::pair<PairSet, PairSet> SplitPairs(const PairSet& pairs,
                                       double train_fraction, uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie strictly between 0 and 1");
  }
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < pairs.pairs.size(); ++i) {
    groups[LabelKey(pairs.pairs[i])].push_back(i);
  }

  // Largest-remainder allocation of the train quota across label groups.
  const auto total = static_cast<int64_t>(
      std::llround(train_fraction * static_cast<double>(pairs.size())));
  std::vector<std::pair<std::string, int64_t>> quota;
  std::vector<std::pair<double, size_t>> remainders;
  int64_t assigned = 0;
  for (const auto& [key, members] : groups) {
    const double exact = train_fraction * static_cast<double>(members.size());
    const auto base = static_cast<int64_t>(std::floor(exact));
    remainders.emplace_back(exact - static_cast<double>(base), quota.size());
    quota.emplace_back(key, base);
    assigned += base;
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t k = 0; assigned < total && k < remainders.size(); ++k) {
    ++quota[remainders[k].second].second;
    ++assigned;
  }

  std::mt19937_64 rng(seed);
  PairSet train, test;
  for (PairSet* side : {&train, &test}) {
    side->seed = seed;
    side->source_graph = pairs.source_graph;
    side->labeling_source = pairs.labeling_source;
  }
  for (const auto& [key, take] : quota) {
    std::vector<size_t> members = groups[key];
    std::shuffle(members.begin(), members.end(), rng);
    for (size_t i = 0; i < members.size(); ++i) {
      (static_cast<int64_t>(i) < take ? train : test)
          .pairs.push_back(pairs.pairs[members[i]]);
    }
  }
  std::shuffle(train.pairs.begin(), train.pairs.end(), rng);
  std::shuffle(test.pairs.begin(), test.pairs.end(), rng);
  return {std::move(train), std::move(test)};
}

int ArgmaxClass(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  int best = 0;
  for (int c = 1; c < row.size(); ++c) {
    if (row(c) > row(best)) best = c;
  }
  return best;
}

PairSet ShadowSameClassPairs(const Graph& graph,
                             const PosteriorMatrix& posteriors, int64_t budget,
                             uint64_t seed, LabelingSource labeling_source,
                             bool labels_available) {
  if (budget < 0) throw ConfigError("negative shadow budget");
  std::vector<int> cls(graph.num_nodes);
  switch (labeling_source) {
    case LabelingSource::kArgmaxPosteriorClass:
      if (posteriors.num_nodes() < graph.num_nodes) {
        throw ContractError("posteriors cover " +
                            std::to_string(posteriors.num_nodes()) + " of " +
                            std::to_string(graph.num_nodes) + " nodes");
      }
      for (int v = 0; v < graph.num_nodes; ++v) {
        cls[v] = ArgmaxClass(posteriors.rows.row(v));
      }
      break;
    case LabelingSource::kGroundTruthClass:
      if (!labels_available) {
        throw ConfigError(
            "ground-truth-class shadow labels requested but the run withholds "
            "node labels from the attacker");
      }
      cls = graph.labels;
      break;
    case LabelingSource::kGroundTruthLink:
      throw ConfigError("shadow pairs cannot be labeled from links");
  }

  std::map<int, int64_t> class_sizes;
  for (int c : cls) ++class_sizes[c];
  int64_t same_pool = 0;
  for (const auto& [c, size] : class_sizes) same_pool += AllPairs(size);
  const int64_t diff_pool = AllPairs(graph.num_nodes) - same_pool;
  if (same_pool < budget || diff_pool < budget) {
    throw SamplingError("cannot draw " + std::to_string(budget) +
                        " pairs per shadow label: " + std::to_string(same_pool) +
                        " same-category and " + std::to_string(diff_pool) +
                        " different-category pairs available");
  }

  std::mt19937_64 rng(seed);
  PairSet out;
  out.seed = seed;
  out.source_graph = graph.name;
  out.labeling_source = labeling_source;
  auto emit = [&](NodeId a, NodeId b) {
    const Edge e = CanonicalEdge(a, b);
    out.pairs.push_back({e.u, e.v, std::nullopt,
                         cls[a] == cls[b] ? ShadowLabel::kSame
                                          : ShadowLabel::kDifferent,
                         graph.name});
  };

  if (std::min(same_pool, diff_pool) < kEnumerateFactor * budget) {
    for (bool same : {true, false}) {
      std::vector<Edge> pool = EnumeratePairs(
          graph.num_nodes,
          [&](NodeId a, NodeId b) { return (cls[a] == cls[b]) == same; });
      std::shuffle(pool.begin(), pool.end(), rng);
      for (int64_t i = 0; i < budget; ++i) emit(pool[i].u, pool[i].v);
    }
  } else {
    std::uniform_int_distribution<NodeId> node(0, graph.num_nodes - 1);
    std::unordered_set<uint64_t> seen;
    int64_t same = 0, different = 0;
    while (same < budget || different < budget) {
      const NodeId a = node(rng), b = node(rng);
      if (a == b) continue;
      const bool is_same = cls[a] == cls[b];
      if (is_same ? same >= budget : different >= budget) continue;
      if (!seen.insert(PairKey(a, b)).second) continue;
      emit(a, b);
      ++(is_same ? same : different);
    }
  }
  std::shuffle(out.pairs.begin(), out.pairs.end(), rng);
  return out;
}

void WritePairsCsv(const PairSet& pairs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  out << "u,v,link_label,shadow_label,dataset\n";
  for (const NodePair& p : pairs.pairs) {
    out << p.u << "," << p.v << ","
        << (p.link_label ? LinkLabelName(*p.link_label) : "") << ","
        << (p.shadow_label ? ShadowLabelName(*p.shadow_label) : "") << ","
        << p.dataset << "\n";
  }
}

PairSet ReadPairsCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("u,v,link_label,shadow_label,dataset", 0) != 0) {
    throw ValidationError(path.string() + ": unexpected header '" + line + "'");
  }
  PairSet out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 5) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 5 columns");
    }
    NodePair p;
    try {
      p.u = std::stoi(cells[0]);
      p.v = std::stoi(cells[1]);
    } catch (const std::exception&) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": bad node id");
    }
    if (cells[2] == "Link") {
      p.link_label = LinkLabel::kLink;
    } else if (cells[2] == "Unlink") {
      p.link_label = LinkLabel::kUnlink;
    } else if (!cells[2].empty()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": bad link label '" + cells[2] + "'");
    }
    if (cells[3] == "Same") {
      p.shadow_label = ShadowLabel::kSame;
    } else if (cells[3] == "Different") {
      p.shadow_label = ShadowLabel::kDifferent;
    } else if (!cells[3].empty()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": bad shadow label '" + cells[3] + "'");
    }
    p.dataset = cells[4];
    if (out.source_graph.empty()) out.source_graph = p.dataset;
    out.pairs.push_back(std::move(p));
  }
  if (!out.pairs.empty() && !out.pairs[0].link_label) {
    out.labeling_source = LabelingSource::kArgmaxPosteriorClass;
  }
  return out;
}

}  // namespace linksteal
