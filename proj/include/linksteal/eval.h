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

// Attack scoring, cross-dataset grids and report emission.

#ifndef LINKSTEAL_EVAL_H_
#define LINKSTEAL_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "linksteal/pairs.h"

namespace linksteal {

enum class Prediction { kUnlink = 0, kLink = 1, kUnparseable = 2 };

// How unparseable verdicts enter the confusion matrix.
enum class UnparseablePolicy {
  kScoreAsWrong,  // counted as the wrong answer for its gold label
  kExclude,       // dropped from scoring, still counted
};

const char* PredictionName(Prediction p);
Prediction ToPrediction(LinkLabel l);
UnparseablePolicy ParseUnparseablePolicy(const std::string& s);
const char* UnparseablePolicyName(UnparseablePolicy p);

struct AttackId {
  std::string method;
  std::string dataset;        // evaluation dataset
  std::string train_dataset;  // dataset the attack was fitted on
  std::string setting;        // white-box / black-box
  uint64_t seed = 0;
};

// Confusion counts use Link as the positive class.
struct AttackReport {
  AttackId id;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  int64_t n_test = 0;
  int64_t unparseable_count = 0;
  int64_t excluded_count = 0;  // unparseable verdicts left out of scoring
  int64_t skipped_count = 0;   // pairs a metric could not score
  std::string detail;          // e.g. metric name or feature mode
  bool flagged = false;        // degenerate threshold or similar warning
};

// Throws ContractError on length mismatch or empty input.
AttackReport ComputeMetrics(const std::vector<Prediction>& predictions,
                            const std::vector<LinkLabel>& gold,
                            UnparseablePolicy policy =
                                UnparseablePolicy::kScoreAsWrong);

// Gold link labels of a pair set, in order. Throws ContractError when a pair
// lacks a link label.
std::vector<LinkLabel> GoldLabels(const PairSet& pairs);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
  int count = 0;
};
MeanStd Summarize(const std::vector<double>& values);

// Grid of reports keyed by (train dataset, eval dataset).
struct CrossMatrix {
  std::vector<std::string> train_datasets;
  std::vector<std::string> eval_datasets;
  std::map<std::pair<std::string, std::string>, AttackReport> cells;
  std::vector<std::string> warnings;  // one per missing cell

  const AttackReport* Cell(const std::string& train,
                           const std::string& eval) const;
};

// Builds the grid from reports keyed by id.train_dataset/id.dataset. Row and
// column order follow first appearance unless `order` is given. Throws
// ContractError on duplicate keys.
CrossMatrix BuildCrossMatrix(const std::vector<AttackReport>& cells,
                             const std::vector<std::string>& order = {});

// Writes <prefix>_accuracy.csv, <prefix>_f1.csv (rows = train, cols = eval,
// empty for missing cells) and <prefix>_cells.csv (long form with a
// same_dataset flag). Returns the written paths.
std::vector<std::filesystem::path> WriteCrossMatrix(
    const CrossMatrix& matrix, const std::filesystem::path& prefix);

nlohmann::json ReportToJson(const AttackReport& report);
AttackReport ReportFromJson(const nlohmann::json& j);

// CSV: fixed column order, metrics at 4 decimals. JSON: full precision.
void WriteReportsCsv(const std::vector<AttackReport>& reports,
                     const std::filesystem::path& path);
void WriteReportsJson(const std::vector<AttackReport>& reports,
                      const std::filesystem::path& path);
std::vector<AttackReport> ReadReportsJson(const std::filesystem::path& path);

std::string ReportsCsvHeader();
std::string ReportCsvRow(const AttackReport& report);

}  // namespace linksteal

#endif  // LINKSTEAL_EVAL_H_
