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

#include "linksteal/gnn.h"

#include <filesystem>
#include <numeric>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "linksteal/errors.h"

namespace linksteal {
namespace {

ModelConfig SmallConfig(Architecture arch, uint64_t seed = 0) {
  ModelConfig c;
  c.arch = arch;
  c.hidden_dim = 5;
  c.seed = seed;
  return c;
}

void ExpectRowsNormalized(const PosteriorMatrix& p) {
  for (int i = 0; i < p.num_nodes(); ++i) {
    EXPECT_NEAR(p.rows.row(i).sum(), 1.0, 1e-6);
    EXPECT_GE(p.rows.row(i).minCoeff(), 0.0);
    EXPECT_LE(p.rows.row(i).maxCoeff(), 1.0);
  }
}

TEST(ForwardTest, RowsSumToOneForEveryArchitecture) {
  for (Architecture arch :
       {Architecture::kGcn, Architecture::kSage, Architecture::kGat}) {
    Graph g = testing::RandomGraph("r", 30, 4, 6, 0.15, 3);
    TargetModel m = InitializeModel(SmallConfig(arch), 6, 4);
    ExpectRowsNormalized(Forward(m, g));
  }
}

TEST(ForwardTest, ZeroWeightsGiveUniformRow) {
  Graph g = testing::MakeGraph("one", 1, 3, 2, {}, {0});
  TargetModel m = InitializeModel(SmallConfig(Architecture::kGcn), 2, 3);
  for (auto& p : m.params) p.value.setZero();
  const PosteriorMatrix p = Forward(m, g);
  for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(p.rows(0, c), 1.0 / 3.0);
}

// Independent dense computation of softmax(Â relu(Â X W0 + b0) W1 + b1)
// with Â built entry by entry from degrees.
TEST(ForwardTest, GcnMatchesHandRolledMatrixProducts) {
  Graph g = testing::PathGraph3();
  ModelConfig c = SmallConfig(Architecture::kGcn);
  c.hidden_dim = 3;
  TargetModel m = InitializeModel(c, 4, 2);
  // Hand-set weights.
  double v = 0.1;
  for (auto& p : m.params) {
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      p.value(k) = std::sin(v);
      v += 0.37;
    }
  }
  const int n = 3;
  const int adj[3][3] = {{1, 1, 0}, {1, 1, 1}, {0, 1, 1}};
  double deg[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) deg[i] += adj[i][j];
  }
  double a_hat[3][3];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a_hat[i][j] = adj[i][j] / std::sqrt(deg[i] * deg[j]);
  }
  auto layer = [&](const std::vector<std::vector<double>>& h,
                   const Eigen::MatrixXd& w, const Eigen::MatrixXd& b) {
    const int in = static_cast<int>(w.rows()), out = static_cast<int>(w.cols());
    std::vector<std::vector<double>> hw(n, std::vector<double>(out, 0.0));
    for (int i = 0; i < n; ++i)
      for (int o = 0; o < out; ++o)
        for (int k = 0; k < in; ++k) hw[i][o] += h[i][k] * w(k, o);
    std::vector<std::vector<double>> z(n, std::vector<double>(out, 0.0));
    for (int i = 0; i < n; ++i)
      for (int o = 0; o < out; ++o) {
        z[i][o] = b(0, o);
        for (int j = 0; j < n; ++j) z[i][o] += a_hat[i][j] * hw[j][o];
      }
    return z;
  };
  std::vector<std::vector<double>> x(n, std::vector<double>(4));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 4; ++k) x[i][k] = g.features(i, k);
  auto h1 = layer(x, m.params[0].value, m.params[1].value);
  for (auto& row : h1)
    for (double& e : row) e = std::max(e, 0.0);
  auto z = layer(h1, m.params[2].value, m.params[3].value);
  const PosteriorMatrix p = Forward(m, g);
  for (int i = 0; i < n; ++i) {
    const double mx = std::max(z[i][0], z[i][1]);
    const double e0 = std::exp(z[i][0] - mx), e1 = std::exp(z[i][1] - mx);
    EXPECT_NEAR(p.rows(i, 0), e0 / (e0 + e1), 1e-12);
    EXPECT_NEAR(p.rows(i, 1), e1 / (e0 + e1), 1e-12);
  }
}

TEST(ForwardTest, ShapeMismatchNamesLayer) {
  Graph g = testing::RandomGraph("r", 5, 2, 3, 0.5, 1);
  TargetModel m = InitializeModel(SmallConfig(Architecture::kGcn), 4, 2);
  try {
    Forward(m, g);
    FAIL();
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos);
  }
}

TEST(ForwardTest, PermutationEquivariance) {
  for (Architecture arch :
       {Architecture::kGcn, Architecture::kSage, Architecture::kGat}) {
    Graph g = testing::RandomGraph("r", 12, 3, 4, 0.3, 9);
    std::vector<NodeId> perm(g.num_nodes);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(5);
    std::shuffle(perm.begin(), perm.end(), rng);
    // InducedSubgraph with all nodes is a relabeling: new id i = old perm[i].
    Graph permuted = InducedSubgraph(g, perm);
    TargetModel m = InitializeModel(SmallConfig(arch, 2), 4, 3);
    const PosteriorMatrix a = Forward(m, g);
    const PosteriorMatrix b = Forward(m, permuted);
    for (int i = 0; i < g.num_nodes; ++i) {
      for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(b.rows(i, c), a.rows(perm[i], c), 1e-12)
            << ArchitectureName(arch);
      }
    }
  }
}

TEST(TrainTest, LossDecreasesOnToyGraph) {
  Graph g = testing::MakeGraph("toy", 3, 2, 4, {{0, 1}}, {0, 0, 1});
  SplitSpec split;
  split.train = {0, 1, 2};
  ModelConfig c = SmallConfig(Architecture::kGcn);
  c.epochs = 50;
  const TargetModel m = TrainTarget(g, split, c);
  ASSERT_EQ(m.training_log.size(), 50u);
  EXPECT_LT(m.training_log.back().loss, m.training_log.front().loss);
}

TEST(TrainTest, DeterministicPerSeed) {
  Graph g = testing::RandomGraph("r", 40, 3, 8, 0.1, 2);
  SplitSpec split = TrainTestNodeSplit(g, {0.5, 0.2, 0.3}, 1);
  for (Architecture arch :
       {Architecture::kGcn, Architecture::kSage, Architecture::kGat}) {
    ModelConfig c = SmallConfig(arch, 11);
    c.epochs = 20;
    const TargetModel a = TrainTarget(g, split, c);
    const TargetModel b = TrainTarget(g, split, c);
    EXPECT_EQ(a.training_log, b.training_log);
    for (size_t i = 0; i < a.params.size(); ++i) {
      EXPECT_EQ(a.params[i].value, b.params[i].value);
    }
  }
}

TEST(TrainTest, BeatsMajorityOnHomophilousGraph) {
  // Two dense communities with informative features.
  std::vector<std::pair<int, int>> edges;
  std::vector<int> labels(40);
  for (int i = 0; i < 40; ++i) labels[i] = i < 26 ? 0 : 1;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(0, 39);
  for (int k = 0; k < 150; ++k) {
    int a = pick(rng), b = pick(rng);
    if (labels[a] == labels[b]) edges.emplace_back(a, b);
  }
  Graph g = testing::MakeGraph("comm", 40, 2, 4, edges, labels, 3);
  for (int i = 0; i < 40; ++i) g.features(i, 0) += labels[i] ? 1.5 : -1.5;
  SplitSpec split = TrainTestNodeSplit(g, {0.5, 0.0, 0.5}, 2);
  ModelConfig c = SmallConfig(Architecture::kGcn);
  c.epochs = 100;
  const TargetModel m = TrainTarget(g, split, c);
  const PosteriorMatrix p = Forward(m, g);
  EXPECT_GE(Accuracy(p, g, split.train),
            MajorityShare(g.labels, split.train, 2));
  EXPECT_GT(Accuracy(p, g, split.test), MajorityShare(g.labels, split.test, 2));
}

TEST(TrainTest, EmptyTrainSplitIsContractError) {
  Graph g = testing::PathGraph3();
  EXPECT_THROW(TrainTarget(g, SplitSpec{}, ModelConfig{}), ContractError);
}

TEST(TrainTest, DivergenceReportsEpochAndRate) {
  Graph g = testing::RandomGraph("r", 20, 3, 4, 0.2, 2);
  g.features *= 1e200;
  SplitSpec split = TrainTestNodeSplit(g, {0.5, 0.2, 0.3}, 1);
  ModelConfig c = SmallConfig(Architecture::kGcn);
  c.optimizer = Optimizer::kGradientDescent;
  c.learning_rate = 1e10;
  c.dropout = 0.0;
  try {
    TrainTarget(g, split, c);
    FAIL();
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("learning rate"), std::string::npos);
  }
}

TEST(ExtractPosteriorsTest, MatchesForwardRowsInOrder) {
  Graph g = testing::RandomGraph("r", 8, 3, 4, 0.3, 1);
  TargetModel m = InitializeModel(SmallConfig(Architecture::kSage), 4, 3);
  const PosteriorMatrix all = Forward(m, g);
  std::vector<NodeId> ids(8);
  std::iota(ids.begin(), ids.end(), 0);
  EXPECT_EQ(ExtractPosteriors(m, g, ids).rows, all.rows);
  const PosteriorMatrix sel = ExtractPosteriors(m, g, {5, 2});
  EXPECT_EQ(Eigen::MatrixXd(sel.rows.row(0)), Eigen::MatrixXd(all.rows.row(5)));
  EXPECT_EQ(Eigen::MatrixXd(sel.rows.row(1)), Eigen::MatrixXd(all.rows.row(2)));
  const PosteriorMatrix rep = ExtractPosteriors(m, g, {2, 2});
  EXPECT_EQ(Eigen::MatrixXd(rep.rows.row(0)), Eigen::MatrixXd(rep.rows.row(1)));
  EXPECT_THROW(ExtractPosteriors(m, g, {8}), ContractError);
}

class GradCheckTest : public ::testing::TestWithParam<Architecture> {};

TEST_P(GradCheckTest, FourNodeFixture) {
  Graph g = testing::MakeGraph("four", 4, 3, 3, {{0, 1}, {1, 2}, {2, 3}, {0, 2}},
                               {0, 1, 2, 1});
  ModelConfig c = SmallConfig(GetParam());
  const GradCheckResult r = GradCheck(c, g);
  EXPECT_GT(r.checked, 0);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_parameter;
}

TEST_P(GradCheckTest, RandomFixturesAndSeeds) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Graph g = testing::RandomGraph("r", 6 + static_cast<int>(seed % 4), 3, 4,
                                   0.35, 100 + seed);
    ModelConfig c = SmallConfig(GetParam(), seed);
    c.hidden_dim = 4;
    const GradCheckResult r = GradCheck(c, g);
    EXPECT_LT(r.max_relative_error, 1e-4)
        << "seed " << seed << " worst " << r.worst_parameter;
  }
}

TEST_P(GradCheckTest, ThreeLayers) {
  Graph g = testing::RandomGraph("r", 7, 2, 3, 0.4, 8);
  ModelConfig c = SmallConfig(GetParam(), 4);
  c.num_layers = 3;
  c.hidden_dim = 3;
  EXPECT_LT(GradCheck(c, g).max_relative_error, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(AllArchitectures, GradCheckTest,
                         ::testing::Values(Architecture::kGcn,
                                           Architecture::kSage,
                                           Architecture::kGat),
                         [](const auto& info) {
                           return std::string(ArchitectureName(info.param));
                         });

TEST(GradCheckTest, ZeroParameterModelHasZeroError) {
  TargetModel empty;
  const GradCheckResult r = GradCheckModel(empty, testing::PathGraph3());
  EXPECT_EQ(r.max_relative_error, 0.0);
  EXPECT_EQ(r.checked, 0);
}

TEST(CheckpointTest, SaveLoadPreservesForward) {
  namespace fs = std::filesystem;
  Graph g = testing::RandomGraph("r", 10, 3, 4, 0.3, 1);
  SplitSpec split = TrainTestNodeSplit(g, {0.5, 0.2, 0.3}, 1);
  ModelConfig c = SmallConfig(Architecture::kGat);
  c.epochs = 5;
  const TargetModel m = TrainTarget(g, split, c);
  const fs::path path = fs::temp_directory_path() / "linksteal_ckpt_test.json";
  SaveCheckpoint(m, path);
  const TargetModel loaded = LoadCheckpoint(path);
  EXPECT_EQ(Forward(loaded, g).rows, Forward(m, g).rows);
  EXPECT_EQ(loaded.training_log, m.training_log);

  const fs::path csv = fs::temp_directory_path() / "linksteal_post_test.csv";
  const PosteriorMatrix p = Forward(m, g);
  WritePosteriorsCsv(p, csv);
  EXPECT_EQ(ReadPosteriorsCsv(csv).rows, p.rows);
  fs::remove(path);
  fs::remove(csv);
}

}  // namespace
}  // namespace linksteal
