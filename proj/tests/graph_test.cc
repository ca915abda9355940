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

#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "linksteal/errors.h"

namespace linksteal {
namespace {

namespace fs = std::filesystem;

class DatasetDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("linksteal_graph_test_" +
            std::string(::testing::UnitTest::GetInstance()
                            ->current_test_info()
                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  void Write(const std::string& file, const std::string& content) {
    std::ofstream(dir_ / file) << content;
  }

  void WriteThreeNodes(const std::string& edges) {
    Write("meta.json",
          R"({"name":"tiny","classes":2,"feature_dim":2,"link_convention":"undirected"})");
    Write("nodes.jsonl",
          "{\"id\":0,\"label\":0,\"features\":[1,0],\"title\":\"A\",\"abstract\":\"x\"}\n"
          "{\"id\":1,\"label\":1,\"features\":[0,1]}\n"
          "{\"id\":2,\"label\":1,\"features\":[1,1]}\n");
    Write("edges.csv", "u,v\n" + edges);
  }

  fs::path dir_;
};

TEST_F(DatasetDir, CanonicalizesEdgesAndCountsDrops) {
  WriteThreeNodes("0,1\n1,0\n2,2\n");
  const LoadedDataset ds = LoadDataset(dir_);
  ASSERT_EQ(ds.graph.edges.size(), 1u);
  EXPECT_EQ(ds.graph.edges[0], (Edge{0, 1}));
  EXPECT_EQ(ds.stats.self_loops_dropped, 1);
  EXPECT_EQ(ds.stats.duplicates_merged, 1);
  EXPECT_TRUE(Validate(ds.graph).ok());
  ASSERT_EQ(ds.graph.text.size(), 3u);
  EXPECT_EQ(ds.graph.text[0]->title, "A");
  EXPECT_FALSE(ds.graph.text[1].has_value());
}

TEST_F(DatasetDir, MissingFileNamesTheFile) {
  Write("meta.json", R"({"name":"x","classes":1,"feature_dim":0})");
  try {
    LoadDataset(dir_);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("nodes.jsonl"), std::string::npos);
  }
}

TEST_F(DatasetDir, LabelOutOfRangeIsValidationError) {
  Write("meta.json", R"({"name":"x","classes":2,"feature_dim":1})");
  Write("nodes.jsonl",
        "{\"id\":0,\"label\":0,\"features\":[1]}\n"
        "{\"id\":1,\"label\":2,\"features\":[1]}\n");
  Write("edges.csv", "u,v\n");
  try {
    LoadDataset(dir_);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("node 1"), std::string::npos);
  }
}

TEST_F(DatasetDir, RaggedFeaturesIsValidationError) {
  Write("meta.json", R"({"name":"x","classes":2,"feature_dim":2})");
  Write("nodes.jsonl",
        "{\"id\":0,\"label\":0,\"features\":[1,2]}\n"
        "{\"id\":1,\"label\":1,\"features\":[1]}\n");
  Write("edges.csv", "u,v\n");
  EXPECT_THROW(LoadDataset(dir_), ValidationError);
}

TEST_F(DatasetDir, DanglingEdgeIsValidationError) {
  WriteThreeNodes("0,99\n");
  try {
    LoadDataset(dir_);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("(0,99)"), std::string::npos);
  }
}

TEST_F(DatasetDir, ExportThenLoadIsIdentity) {
  Graph g = testing::RandomGraph("roundtrip", 12, 3, 5, 0.3, 4);
  g.text.assign(12, std::nullopt);
  g.text[3] = TextFeatures{"Title \"quoted\"", "Abstract, with commas\nand ü"};
  g.meta.links = 2 * g.NumEdges();
  g.meta.link_convention = LinkConvention::kDirectedIncidence;
  SplitSpec split = TrainTestNodeSplit(g, {0.5, 0.25, 0.25}, 3);
  ExportDataset(g, dir_, split);
  const LoadedDataset ds = LoadDataset(dir_);
  EXPECT_EQ(ds.graph.edges, g.edges);
  EXPECT_EQ(ds.graph.labels, g.labels);
  EXPECT_EQ(ds.graph.features, g.features);
  EXPECT_EQ(ds.graph.text, g.text);
  EXPECT_EQ(ds.graph.meta.links, g.meta.links);
  EXPECT_EQ(ds.graph.meta.link_convention, LinkConvention::kDirectedIncidence);
  ASSERT_TRUE(ds.split.has_value());
  EXPECT_EQ(*ds.split, split);
}

TEST(ValidateTest, WellFormedFixtureIsOk) {
  EXPECT_TRUE(Validate(testing::PathGraph3()).ok());
}

TEST(ValidateTest, LabelAtCategoryCountIsReported) {
  Graph g = testing::MakeGraph("g", 3, 7, 1, {{0, 1}}, {0, 1, 7});
  const ValidationReport r = Validate(g);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].detail, "label out of range, node 2");
}

TEST(ValidateTest, DanglingEndpointIsReported) {
  Graph g = testing::MakeGraph("g", 3, 2, 1, {}, {0, 1, 1});
  g.edges.push_back({0, 99});
  const ValidationReport r = Validate(g);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.violations[0].invariant, "dangling endpoint");
}

TEST(ValidateTest, DuplicateAndReversedEdgesAreReported) {
  Graph g = testing::MakeGraph("g", 3, 2, 1, {}, {0, 1, 1});
  g.edges = {{0, 1}, {0, 1}, {2, 1}};
  const ValidationReport r = Validate(g);
  std::set<std::string> kinds;
  for (const auto& v : r.violations) kinds.insert(v.invariant);
  EXPECT_TRUE(kinds.count("duplicate edge"));
  EXPECT_TRUE(kinds.count("non-canonical edge"));
}

TEST(NormalizedAdjacencyTest, SingleNodeIsOne) {
  Graph g = testing::MakeGraph("one", 1, 1, 1, {}, {0});
  const Eigen::MatrixXd a = NormalizedAdjacency(g, AdjacencyMode::kGcnSymmetric);
  ASSERT_EQ(a.rows(), 1);
  EXPECT_DOUBLE_EQ(a(0, 0), 1.0);
}

TEST(NormalizedAdjacencyTest, SingleEdgeIsAllHalves) {
  Graph g = testing::MakeGraph("two", 2, 1, 1, {{0, 1}}, {0, 0});
  const Eigen::MatrixXd a = NormalizedAdjacency(g, AdjacencyMode::kGcnSymmetric);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(a(i, j), 0.5);
  }
}

TEST(NormalizedAdjacencyTest, MeanNeighborOnPath) {
  const Eigen::MatrixXd a =
      NormalizedAdjacency(testing::PathGraph3(), AdjacencyMode::kMeanNeighbor);
  for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(a(1, j), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(a(0, 2), 0.0);
}

TEST(NormalizedAdjacencyTest, NoneIsAdjacencyPlusIdentity) {
  const Eigen::MatrixXd a =
      NormalizedAdjacency(testing::PathGraph3(), AdjacencyMode::kNone);
  const Eigen::Matrix3d expected{{1, 1, 0}, {1, 1, 1}, {0, 1, 1}};
  EXPECT_EQ(a, Eigen::MatrixXd(expected));
}

TEST(NormalizedAdjacencyTest, SymmetryAndRowSumsOnRandomGraphs) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Graph g = testing::RandomGraph("r", 15, 2, 1, 0.2, seed);
    const Eigen::MatrixXd sym =
        NormalizedAdjacency(g, AdjacencyMode::kGcnSymmetric);
    EXPECT_LT((sym - sym.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    const Eigen::MatrixXd mean =
        NormalizedAdjacency(g, AdjacencyMode::kMeanNeighbor);
    for (int i = 0; i < g.num_nodes; ++i) {
      EXPECT_NEAR(mean.row(i).sum(), 1.0, 1e-9);
    }
  }
}

TEST(NodeSplitTest, SizesAreFloorOfFractions) {
  Graph g = testing::RandomGraph("r", 10, 2, 1, 0.2, 0);
  const SplitSpec s = TrainTestNodeSplit(g, {0.6, 0.2, 0.2}, 7);
  EXPECT_EQ(s.train.size(), 6u);
  EXPECT_EQ(s.val.size(), 2u);
  EXPECT_EQ(s.test.size(), 2u);
  std::set<NodeId> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 10u);
}

TEST(NodeSplitTest, DeterministicPerSeed) {
  Graph g = testing::RandomGraph("r", 50, 2, 1, 0.2, 0);
  EXPECT_EQ(TrainTestNodeSplit(g, {0.6, 0.2, 0.2}, 7),
            TrainTestNodeSplit(g, {0.6, 0.2, 0.2}, 7));
}

TEST(NodeSplitTest, FractionsAboveOneRejected) {
  Graph g = testing::RandomGraph("r", 10, 2, 1, 0.2, 0);
  EXPECT_THROW(TrainTestNodeSplit(g, {0.9, 0.2, 0.2}, 7), ConfigError);
}

TEST(InducedSubgraphTest, KeepsOnlyInternalEdges) {
  Graph g = testing::PathGraph3();
  Graph sub = InducedSubgraph(g, {2, 1});
  EXPECT_EQ(sub.num_nodes, 2);
  ASSERT_EQ(sub.edges.size(), 1u);
  EXPECT_EQ(sub.edges[0], (Edge{0, 1}));
  EXPECT_EQ(sub.labels, (std::vector<int>{1, 0}));
  EXPECT_TRUE(Validate(sub).ok());
}

}  // namespace
}  // namespace linksteal
