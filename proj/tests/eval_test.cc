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

#include "linksteal/eval.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "linksteal/errors.h"

namespace linksteal {
namespace {

constexpr auto L = Prediction::kLink;
constexpr auto U = Prediction::kUnlink;
constexpr auto X = Prediction::kUnparseable;
constexpr auto GL = LinkLabel::kLink;
constexpr auto GU = LinkLabel::kUnlink;

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(ComputeMetricsTest, AllCorrect) {
  const auto r = ComputeMetrics({L, U, L}, {GL, GU, GL});
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.f1, 1.0);
}

TEST(ComputeMetricsTest, OneOfEach) {
  const auto r = ComputeMetrics({L, L, U, U}, {GL, GU, GL, GU});
  EXPECT_EQ(r.tp, 1);
  EXPECT_EQ(r.fp, 1);
  EXPECT_EQ(r.fn, 1);
  EXPECT_EQ(r.tn, 1);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_DOUBLE_EQ(r.f1, 0.5);
}

TEST(ComputeMetricsTest, ConstantLinkOnBalancedSet) {
  std::vector<Prediction> preds(100, L);
  std::vector<LinkLabel> gold(100, GU);
  std::fill(gold.begin(), gold.begin() + 50, GL);
  const auto r = ComputeMetrics(preds, gold);
  EXPECT_EQ(r.accuracy, 0.5);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.precision, 0.5);
  EXPECT_DOUBLE_EQ(r.f1, 2.0 / 3.0);
}

TEST(ComputeMetricsTest, ConstantUnlinkHasZeroF1) {
  const auto r = ComputeMetrics({U, U}, {GL, GU});
  EXPECT_EQ(r.accuracy, 0.5);
  EXPECT_EQ(r.f1, 0.0);
}

TEST(ComputeMetricsTest, LengthMismatch) {
  EXPECT_THROW(ComputeMetrics({L}, {GL, GU}), ContractError);
  EXPECT_THROW(ComputeMetrics({}, {}), ContractError);
}

TEST(ComputeMetricsTest, UnparseablePolicies) {
  const auto wrong = ComputeMetrics({X, X, L}, {GL, GU, GL});
  EXPECT_EQ(wrong.unparseable_count, 2);
  EXPECT_EQ(wrong.fn, 1);
  EXPECT_EQ(wrong.fp, 1);
  EXPECT_DOUBLE_EQ(wrong.accuracy, 1.0 / 3.0);

  const auto excl =
      ComputeMetrics({X, X, L}, {GL, GU, GL}, UnparseablePolicy::kExclude);
  EXPECT_EQ(excl.excluded_count, 2);
  EXPECT_EQ(excl.accuracy, 1.0);
  EXPECT_EQ(excl.tp + excl.fp + excl.tn + excl.fn + excl.excluded_count,
            excl.n_test);
}

// Independent recount over random vectors.
TEST(ComputeMetricsTest, MatchesBruteForceRecount) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 60);
    std::vector<Prediction> preds(n);
    std::vector<LinkLabel> gold(n);
    for (int i = 0; i < n; ++i) {
      preds[i] = static_cast<Prediction>(rng() % 3);
      gold[i] = static_cast<LinkLabel>(rng() % 2);
    }
    const auto policy = trial % 2 ? UnparseablePolicy::kExclude
                                  : UnparseablePolicy::kScoreAsWrong;
    int64_t tp = 0, fp = 0, tn = 0, fn = 0, right = 0, scored = 0;
    for (int i = 0; i < n; ++i) {
      int p = static_cast<int>(preds[i]);
      const int g = static_cast<int>(gold[i]);
      if (p == 2) {
        if (policy == UnparseablePolicy::kExclude) continue;
        p = 1 - g;
      }
      ++scored;
      right += p == g;
      tp += p == 1 && g == 1;
      fp += p == 1 && g == 0;
      tn += p == 0 && g == 0;
      fn += p == 0 && g == 1;
    }
    const auto r = ComputeMetrics(preds, gold, policy);
    ASSERT_EQ(r.tp, tp);
    ASSERT_EQ(r.fp, fp);
    ASSERT_EQ(r.tn, tn);
    ASSERT_EQ(r.fn, fn);
    ASSERT_EQ(r.tp + r.fp + r.tn + r.fn + r.excluded_count, r.n_test);
    const double acc = scored ? static_cast<double>(right) / scored : 0.0;
    const double prec = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double rec = tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0;
    const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    ASSERT_NEAR(r.accuracy, acc, 1e-12);
    ASSERT_NEAR(r.precision, prec, 1e-12);
    ASSERT_NEAR(r.recall, rec, 1e-12);
    ASSERT_NEAR(r.f1, f1, 1e-12);
  }
}

TEST(SummarizeTest, SampleStd) {
  const auto s = Summarize({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.std, 1.0);
  EXPECT_EQ(s.count, 3);
  EXPECT_EQ(Summarize({0.7}).std, 0.0);
}

AttackReport Cell(const std::string& train, const std::string& eval,
                  double acc) {
  AttackReport r;
  r.id.method = "llm";
  r.id.train_dataset = train;
  r.id.dataset = eval;
  r.accuracy = acc;
  r.f1 = acc / 2;
  return r;
}

TEST(CrossMatrixTest, FourByFourGrid) {
  const std::vector<std::string> names = {"cora", "citeseer", "pubmed",
                                          "ogbn-arxiv"};
  std::vector<AttackReport> cells;
  for (size_t i = 0; i < 4; ++i) {
    for (size_t j = 0; j < 4; ++j) cells.push_back(Cell(names[i], names[j], 0.5 + 0.1 * i + 0.01 * j));
  }
  const auto m = BuildCrossMatrix(cells, names);
  EXPECT_EQ(m.cells.size(), 16u);
  EXPECT_TRUE(m.warnings.empty());
  const auto prefix = std::filesystem::temp_directory_path() / "ls_cross" / "grid";
  const auto files = WriteCrossMatrix(m, prefix);
  ASSERT_EQ(files.size(), 3u);
  const std::string acc = Slurp(files[0]);
  EXPECT_EQ(acc.substr(0, acc.find('\n')), "train\\eval,cora,citeseer,pubmed,ogbn-arxiv");
  EXPECT_NE(acc.find("pubmed,0.7000,0.7100,0.7200,0.7300"), std::string::npos);
  const std::string cells_csv = Slurp(files[2]);
  EXPECT_NE(cells_csv.find("cora,cora,0.5000,0.2500,1"), std::string::npos);
  EXPECT_NE(cells_csv.find("cora,citeseer,0.5100,0.2550,0"), std::string::npos);
  std::filesystem::remove_all(prefix.parent_path());
}

TEST(CrossMatrixTest, SingleDataset) {
  const auto m = BuildCrossMatrix({Cell("cora", "cora", 0.9)});
  EXPECT_EQ(m.train_datasets.size(), 1u);
  EXPECT_EQ(m.eval_datasets.size(), 1u);
}

TEST(CrossMatrixTest, MissingCellIsEmptyWithWarning) {
  const auto m = BuildCrossMatrix(
      {Cell("a", "a", 0.9), Cell("a", "b", 0.8), Cell("b", "a", 0.7)});
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_EQ(m.warnings[0], "missing cell (b, b)");
  const auto prefix = std::filesystem::temp_directory_path() / "ls_cross_missing";
  const auto files = WriteCrossMatrix(m, prefix);
  EXPECT_NE(Slurp(files[0]).find("b,0.7000,\n"), std::string::npos);
  for (const auto& f : files) std::filesystem::remove(f);
}

TEST(CrossMatrixTest, DuplicateKey) {
  EXPECT_THROW(BuildCrossMatrix({Cell("a", "b", 0.9), Cell("a", "b", 0.8)}),
               ContractError);
}

TEST(ReportIoTest, CsvRowAndHeader) {
  AttackReport r = ComputeMetrics({L, L, U}, {GL, GU, GU});
  r.id = {"mlp", "cora", "cora", "white-box", 3};
  r.detail = "PP";
  const auto path = std::filesystem::temp_directory_path() / "ls_reports.csv";
  WriteReportsCsv({r}, path);
  const std::string text = Slurp(path);
  EXPECT_EQ(text, ReportsCsvHeader() + "\n" +
                      "mlp,cora,cora,white-box,3,PP,0.6667,0.5000,1.0000,"
                      "0.6667,1,1,1,0,3,0,0,0,0\n");
  std::filesystem::remove(path);
}

TEST(ReportIoTest, JsonRoundTripKeepsFullPrecision) {
  AttackReport r = ComputeMetrics({L, L, U}, {GL, GU, GU});
  r.id = {"similarity", "pubmed", "pubmed", "white-box", 8};
  r.detail = "cosine";
  r.skipped_count = 4;
  r.flagged = true;
  const auto path = std::filesystem::temp_directory_path() / "ls_reports.json";
  WriteReportsJson({r, r}, path);
  const auto back = ReadReportsJson(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(ReportToJson(back[0]), ReportToJson(r));
  EXPECT_EQ(back[0].accuracy, 2.0 / 3.0);
  std::filesystem::remove(path);
}

TEST(ReportIoTest, MalformedJson) {
  EXPECT_THROW(ReportFromJson(nlohmann::json{{"method", "x"}}), ValidationError);
}

}  // namespace
}  // namespace linksteal
