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

#include "linksteal/synthetic.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <unordered_set>

#include "linksteal/errors.h"

namespace linksteal {
namespace {

constexpr const char* kSyllables[] = {
    "ka", "lo", "mi", "ne", "ru", "ta", "vo", "si", "de", "pa", "gra", "lin",
    "sto", "mor", "ven", "qui", "tes", "bor", "fal", "zen", "har", "pel",
    "dro", "cen", "mat", "rel", "sor", "tim", "nal", "vec"};
constexpr int kNumSyllables = sizeof(kSyllables) / sizeof(kSyllables[0]);

constexpr const char* kFiller[] = {"the", "of", "a", "for", "and", "with",
                                   "on", "we", "in", "to", "is", "this"};

// Zipf-like background weights over the vocabulary.
std::vector<double> BackgroundWeights(int vocab) {
  std::vector<double> w(vocab);
  for (int i = 0; i < vocab; ++i) w[i] = 1.0 / std::pow(i + 1.0, 0.8);
  return w;
}

uint64_t PairKey(NodeId a, NodeId b) {
  const Edge e = CanonicalEdge(a, b);
  return (static_cast<uint64_t>(e.u) << 32) | static_cast<uint32_t>(e.v);
}

std::string Sentence(const std::vector<int>& words, int length,
                     std::mt19937_64& rng) {
  std::uniform_int_distribution<size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> filler(0, 11);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::string out;
  for (int i = 0; i < length; ++i) {
    if (!out.empty()) out += ' ';
    if (uni(rng) < 0.3) {
      out += kFiller[filler(rng)];
    } else {
      out += PseudoWord(words[pick(rng)]);
    }
  }
  return out;
}

}  // namespace

std::string PseudoWord(int index) {
  std::string w;
  int x = index;
  do {
    w += kSyllables[x % kNumSyllables];
    x /= kNumSyllables;
  } while (x > 0);
  if (w.size() < 4) w += "n";
  return w;
}

Graph GenerateSynthetic(const SyntheticSpec& spec) {
  if (spec.num_nodes < 2 || spec.num_categories < 1) {
    throw ConfigError("synthetic graph needs >= 2 nodes and >= 1 category");
  }
  const int n = spec.num_nodes;
  const int c = spec.num_categories;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  Graph g;
  g.name = spec.name;
  g.num_nodes = n;
  g.num_categories = c;
  g.feature_dim = spec.feature_dim;

  // Labels: exact class counts from the weights, shuffled.
  std::vector<double> cw = spec.class_weights;
  if (cw.empty()) cw.assign(c, 1.0);
  if (static_cast<int>(cw.size()) != c) {
    throw ConfigError("class_weights must have one entry per category");
  }
  const double total_w = std::accumulate(cw.begin(), cw.end(), 0.0);
  g.labels.clear();
  for (int k = 0; k < c; ++k) {
    const int count = k + 1 == c ? n - static_cast<int>(g.labels.size())
                                 : static_cast<int>(std::round(n * cw[k] / total_w));
    for (int i = 0; i < count && static_cast<int>(g.labels.size()) < n; ++i) {
      g.labels.push_back(k);
    }
  }
  while (static_cast<int>(g.labels.size()) < n) g.labels.push_back(c - 1);
  std::shuffle(g.labels.begin(), g.labels.end(), rng);

  std::vector<std::vector<NodeId>> members(c);
  for (int i = 0; i < n; ++i) members[g.labels[i]].push_back(i);

  // Features.
  const int d = spec.feature_dim;
  g.features = Eigen::MatrixXd::Zero(n, d);
  std::vector<std::vector<int>> node_words(n);
  std::vector<std::vector<int>> topics(c);
  if (d > 0) {
    if (spec.feature_kind == FeatureKind::kDenseEmbedding) {
      std::normal_distribution<double> normal(0.0, 1.0);
      Eigen::MatrixXd centroids(c, d);
      for (int k = 0; k < c; ++k) {
        for (int j = 0; j < d; ++j) centroids(k, j) = normal(rng);
        centroids.row(k) *= spec.centroid_scale / centroids.row(k).norm();
      }
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
          g.features(i, j) = centroids(g.labels[i], j) + normal(rng) / std::sqrt(d);
        }
      }
    } else {
      // Each category owns a random topic vocabulary.
      const int topic_size = std::max(1, d / c);
      std::vector<int> vocab(d);
      std::iota(vocab.begin(), vocab.end(), 0);
      for (int k = 0; k < c; ++k) {
        std::shuffle(vocab.begin(), vocab.end(), rng);
        topics[k].assign(vocab.begin(), vocab.begin() + std::min(topic_size, d));
      }
      const std::vector<double> bg = BackgroundWeights(d);
      std::discrete_distribution<int> background(bg.begin(), bg.end());
      std::poisson_distribution<int> length(spec.words_per_node);
      for (int i = 0; i < n; ++i) {
        const auto& topic = topics[g.labels[i]];
        std::uniform_int_distribution<size_t> topic_pick(0, topic.size() - 1);
        const int want = std::min(d, std::max(1, length(rng)));
        std::unordered_set<int> chosen;
        int guard = 0;
        while (static_cast<int>(chosen.size()) < want && guard++ < 50 * want) {
          const int w = uni(rng) < spec.topic_share ? topic[topic_pick(rng)]
                                                    : background(rng);
          chosen.insert(w);
        }
        node_words[i].assign(chosen.begin(), chosen.end());
        std::sort(node_words[i].begin(), node_words[i].end());
        for (int w : node_words[i]) {
          g.features(i, w) = spec.feature_kind == FeatureKind::kBinaryBagOfWords
                                 ? 1.0
                                 : 0.05 + 0.1 * uni(rng);
        }
      }
    }
  }

  // Edges: degree-weighted endpoints; with probability `homophily` the
  // second endpoint comes from the first endpoint's category.
  std::vector<double> weight(n);
  {
    std::vector<int> rank(n);
    std::iota(rank.begin(), rank.end(), 1);
    std::shuffle(rank.begin(), rank.end(), rng);
    for (int i = 0; i < n; ++i) weight[i] = std::pow(rank[i], -spec.degree_exponent);
  }
  std::discrete_distribution<int> any_node(weight.begin(), weight.end());
  std::vector<std::discrete_distribution<int>> in_class;
  for (int k = 0; k < c; ++k) {
    std::vector<double> w;
    for (NodeId v : members[k]) w.push_back(weight[v]);
    if (w.empty()) w.push_back(0.0);
    in_class.emplace_back(w.begin(), w.end());
  }
  const int64_t max_edges = static_cast<int64_t>(n) * (n - 1) / 2;
  const int64_t target = std::min(spec.num_edges, max_edges);
  std::unordered_set<uint64_t> seen;
  seen.reserve(static_cast<size_t>(target) * 2);
  int64_t attempts = 0;
  while (static_cast<int64_t>(g.edges.size()) < target &&
         attempts++ < 200 * (target + 10)) {
    const NodeId a = any_node(rng);
    NodeId b;
    const int ya = g.labels[a];
    if (uni(rng) < spec.homophily && members[ya].size() > 1) {
      b = members[ya][in_class[ya](rng)];
    } else {
      b = any_node(rng);
      for (int tries = 0; c > 1 && g.labels[b] == ya && tries < 1000; ++tries) {
        b = any_node(rng);
      }
      if (c > 1 && g.labels[b] == ya) continue;
    }
    if (a == b) continue;
    if (!seen.insert(PairKey(a, b)).second) continue;
    g.edges.push_back(CanonicalEdge(a, b));
  }
  std::sort(g.edges.begin(), g.edges.end());

  // Text.
  if (spec.with_text) {
    g.text.resize(n);
    std::uniform_int_distribution<int> title_len(5, 10);
    std::uniform_int_distribution<int> abstract_len(60, 160);
    for (int i = 0; i < n; ++i) {
      std::vector<int> words = node_words[i];
      const auto& topic = topics[g.labels[i]];
      if (!topic.empty()) {
        std::uniform_int_distribution<size_t> tp(0, topic.size() - 1);
        for (int k = 0; k < 8; ++k) words.push_back(topic[tp(rng)]);
      }
      if (words.empty()) {
        // Embedding features: words keyed by category.
        for (int k = 0; k < 12; ++k) {
          words.push_back(g.labels[i] * 50 + static_cast<int>(uni(rng) * 50));
        }
      }
      std::string title = Sentence(words, title_len(rng), rng);
      if (!title.empty()) title[0] = static_cast<char>(std::toupper(title[0]));
      std::string abstract = Sentence(words, abstract_len(rng), rng) + ".";
      g.text[i] = TextFeatures{std::move(title), std::move(abstract)};
    }
  }

  g.meta.name = g.name;
  g.meta.nodes = n;
  g.meta.feats = d;
  g.meta.classes = c;
  g.meta.links = spec.declared_links;
  g.meta.link_convention = spec.link_convention;
  g.meta.whitebox_link_budget = spec.whitebox_link_budget;
  g.RebuildIndex();
  return g;
}

SyntheticSpec CoraLike(uint64_t seed) {
  SyntheticSpec s;
  s.name = "cora";
  s.num_nodes = 2708;
  s.num_categories = 7;
  s.class_weights = {351, 217, 418, 818, 426, 298, 180};
  s.feature_dim = 1433;
  s.feature_kind = FeatureKind::kBinaryBagOfWords;
  s.words_per_node = 18.2;
  s.topic_share = 0.16;
  s.num_edges = 5278;
  s.homophily = 0.81;
  s.declared_links = 10556;
  s.whitebox_link_budget = 2000;
  s.seed = seed;
  return s;
}

SyntheticSpec CiteseerLike(uint64_t seed) {
  SyntheticSpec s;
  s.name = "citeseer";
  s.num_nodes = 3327;
  s.num_categories = 6;
  s.class_weights = {264, 590, 668, 701, 596, 508};
  s.feature_dim = 3703;
  s.feature_kind = FeatureKind::kBinaryBagOfWords;
  s.words_per_node = 31.7;
  s.topic_share = 0.12;
  s.num_edges = 4614;
  s.homophily = 0.74;
  s.declared_links = 9228;
  s.whitebox_link_budget = 2000;
  s.seed = seed;
  return s;
}

SyntheticSpec PubmedLike(uint64_t seed) {
  SyntheticSpec s;
  s.name = "pubmed";
  s.num_nodes = 19717;
  s.num_categories = 3;
  s.class_weights = {4103, 7739, 7875};
  s.feature_dim = 500;
  s.feature_kind = FeatureKind::kWeightedBagOfWords;
  s.words_per_node = 50.1;
  s.topic_share = 0.16;
  s.num_edges = 44324;
  s.homophily = 0.80;
  s.declared_links = 88651;
  s.whitebox_link_budget = 5000;
  s.seed = seed;
  return s;
}

SyntheticSpec ArxivLike(int num_nodes, uint64_t seed) {
  SyntheticSpec s;
  s.name = "ogbn-arxiv";
  s.num_nodes = num_nodes;
  s.num_categories = 40;
  s.class_weights.resize(40);
  for (int k = 0; k < 40; ++k) s.class_weights[k] = 1.0 / std::pow(k + 1.0, 0.9);
  s.feature_dim = 128;
  s.feature_kind = FeatureKind::kDenseEmbedding;
  s.centroid_scale = 1.0;
  // 1,166,243 edges over 169,343 nodes.
  s.num_edges = static_cast<int64_t>(std::llround(num_nodes * 1166243.0 / 169343.0));
  s.homophily = 0.65;
  s.declared_links = std::nullopt;
  s.link_convention = LinkConvention::kUndirected;
  s.whitebox_link_budget = 30000;
  s.seed = seed;
  return s;
}

SyntheticSpec PresetByName(const std::string& name, int num_nodes,
                           uint64_t seed) {
  if (name == "cora") return CoraLike(seed);
  if (name == "citeseer") return CiteseerLike(seed);
  if (name == "pubmed") return PubmedLike(seed);
  if (name == "ogbn-arxiv") return ArxivLike(num_nodes > 0 ? num_nodes : 169343, seed);
  throw ConfigError("no synthetic preset named '" + name + "'");
}

std::vector<NodeId> SnowballNodes(const Graph& graph, int count, uint64_t seed) {
  if (count > graph.num_nodes) {
    throw ConfigError("snowball sample larger than the graph");
  }
  std::mt19937_64 rng(seed);
  std::vector<NodeId> order(graph.num_nodes);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<char> taken(graph.num_nodes, 0);
  std::vector<NodeId> out;
  out.reserve(count);
  size_t next_root = 0;
  std::deque<NodeId> frontier;
  while (static_cast<int>(out.size()) < count) {
    if (frontier.empty()) {
      while (taken[order[next_root]]) ++next_root;
      frontier.push_back(order[next_root]);
      taken[order[next_root]] = 1;
    }
    const NodeId v = frontier.front();
    frontier.pop_front();
    out.push_back(v);
    std::vector<NodeId> nb = graph.adjacency[v];
    std::shuffle(nb.begin(), nb.end(), rng);
    for (NodeId u : nb) {
      if (!taken[u]) {
        taken[u] = 1;
        frontier.push_back(u);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace linksteal
