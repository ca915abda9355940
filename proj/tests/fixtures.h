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

// Small hand-built graphs shared by the unit tests.

#ifndef LINKSTEAL_TESTS_FIXTURES_H_
#define LINKSTEAL_TESTS_FIXTURES_H_

#include <algorithm>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "linksteal/graph.h"

namespace linksteal::testing {

inline Graph MakeGraph(std::string name, int n, int classes, int dim,
                       std::vector<std::pair<int, int>> edge_list,
                       std::vector<int> labels, uint64_t feature_seed = 1) {
  Graph g;
  g.name = std::move(name);
  g.num_nodes = n;
  g.num_categories = classes;
  g.feature_dim = dim;
  g.labels = std::move(labels);
  g.features.resize(n, dim);
  std::mt19937_64 rng(feature_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) g.features(i, j) = normal(rng);
  }
  for (auto [a, b] : edge_list) {
    if (a != b) g.edges.push_back(CanonicalEdge(a, b));
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  g.meta.name = g.name;
  g.meta.classes = classes;
  g.meta.feats = dim;
  g.meta.nodes = n;
  g.RebuildIndex();
  return g;
}

// Random graph with `n` nodes, each pair linked with probability `p`.
inline Graph RandomGraph(std::string name, int n, int classes, int dim,
                         double p, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> label(0, classes - 1);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (uni(rng) < p) edges.emplace_back(i, j);
    }
  }
  std::vector<int> labels(n);
  for (int& y : labels) y = label(rng);
  return MakeGraph(std::move(name), n, classes, dim, std::move(edges),
                   std::move(labels), seed + 17);
}

// Path 0-1-2 with two categories.
inline Graph PathGraph3() {
  return MakeGraph("path3", 3, 2, 4, {{0, 1}, {1, 2}}, {0, 0, 1});
}

}  // namespace linksteal::testing

#endif  // LINKSTEAL_TESTS_FIXTURES_H_
