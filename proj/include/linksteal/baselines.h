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

// Comparison attacks: distance-threshold attacks over posterior pairs and a
// supervised MLP over symmetric pair features.

#ifndef LINKSTEAL_BASELINES_H_
#define LINKSTEAL_BASELINES_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "linksteal/eval.h"
#include "linksteal/gnn.h"
#include "linksteal/graph.h"
#include "linksteal/pairs.h"

namespace linksteal {

enum class MetricKind {
  kCosine,
  kEuclidean,
  kCorrelation,
  kChebyshev,
  kBraycurtis,
  kCanberra,
  kCityblock,
  kSqeuclidean,
};

inline constexpr std::array<MetricKind, 8> kAllMetrics = {
    MetricKind::kCosine,     MetricKind::kEuclidean, MetricKind::kCorrelation,
    MetricKind::kChebyshev,  MetricKind::kBraycurtis, MetricKind::kCanberra,
    MetricKind::kCityblock,  MetricKind::kSqeuclidean};

const char* MetricName(MetricKind m);  // lower case, e.g. "braycurtis"
MetricKind ParseMetric(const std::string& s);

using VectorRef = Eigen::Ref<const Eigen::RowVectorXd>;

// Throws ContractError on length mismatch or empty input and
// MetricUndefinedError for a zero vector under cosine, a constant vector
// under correlation, or an all-zero denominator under braycurtis.
double PairDistance(MetricKind metric, const VectorRef& a, const VectorRef& b);

// Link iff distance <= tau.
struct ThresholdRule {
  MetricKind metric = MetricKind::kCosine;
  double tau = 0.0;
  double train_accuracy = 0.0;
  bool degenerate = false;  // one distinct distance: majority label
  bool flagged = false;     // no better than the majority label on train
};

// Candidates are the midpoints between consecutive distinct distances plus
// one below the minimum (all Unlink) and the maximum (all Link). Ties go to
// the smaller tau. Throws ContractError unless both labels are present.
ThresholdRule FitThreshold(MetricKind metric,
                           const std::vector<double>& distances,
                           const std::vector<LinkLabel>& labels);

Prediction ApplyRule(const ThresholdRule& rule, double distance);

// Distances of the posterior rows of each pair. Undefined pairs are left out;
// `kept` receives the indices that were scored.
std::vector<double> PairDistances(MetricKind metric, const PairSet& pairs,
                                  const PosteriorMatrix& posteriors,
                                  std::vector<size_t>* kept);

AttackReport SimilarityAttack(const PairSet& train, const PairSet& test,
                              const PosteriorMatrix& posteriors,
                              MetricKind metric,
                              ThresholdRule* fitted = nullptr);

// Mean and max over the eight per-metric reports. Accuracy and F1 are
// maximized independently; the max report's detail names the metric with the
// best accuracy. Throws ContractError unless exactly eight reports are given.
std::pair<AttackReport, AttackReport> AggregateMeanMax(
    const std::vector<AttackReport>& reports);

// CSV u,v,label,distance; undefined distances are written as empty cells.
void WriteDistanceDump(MetricKind metric, const PairSet& pairs,
                       const PosteriorMatrix& posteriors,
                       const std::filesystem::path& path);

enum class FeatureMode { kFeature, kPP, kPPFeature };
const char* FeatureModeName(FeatureMode m);  // "Feature", "PP", "PP+Feature"
FeatureMode ParseFeatureMode(const std::string& s);

// Per-dataset inputs, keyed by NodePair::dataset.
struct AttackSource {
  const Graph* graph = nullptr;
  const PosteriorMatrix* posteriors = nullptr;
};
using AttackSources = std::map<std::string, AttackSource>;

// Length of the pair feature for one source.
int PairFeatureDim(FeatureMode mode, const AttackSource& source);

// [|s_u - s_v|, s_u * s_v] per source vector; PP+Feature is the PP block
// followed by the Feature block.
Eigen::RowVectorXd BuildPairFeature(const NodePair& pair, FeatureMode mode,
                                    const AttackSource& source);

// Stacks pair features for all pairs. Throws IncompatibleDimensionsError
// naming both datasets when the sets mix widths, ContractError when a pair's
// dataset has no source or a row is missing.
Eigen::SparseMatrix<double, Eigen::RowMajor> BuildPairFeatureMatrix(
    const std::vector<const PairSet*>& sets, FeatureMode mode,
    const AttackSources& sources);

struct MlpConfig {
  std::vector<int> hidden_dims = {64, 32};
  int epochs = 100;
  double learning_rate = 1e-3;
  int batch_size = 64;
  uint64_t seed = 0;

  void Check() const;  // ConfigError
};

// ReLU MLP with a 2-way softmax head, trained with Adam on cross-entropy.
class MlpClassifier {
 public:
  explicit MlpClassifier(MlpConfig config) : config_(std::move(config)) {}

  // Mostly non-zero inputs are densified internally for speed.
  using Input = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  // Returns the mean training loss per epoch.
  std::vector<double> Train(const Input& x, const std::vector<int>& y);
  Eigen::MatrixXd PredictProba(const Input& x) const;
  std::vector<int> Predict(const Input& x) const;

 private:
  Eigen::MatrixXd Hidden(const Input& x, std::vector<Eigen::MatrixXd>* acts) const;

  MlpConfig config_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::RowVectorXd> biases_;
};

AttackReport MlpAttack(const PairSet& train, const PairSet& test,
                       FeatureMode mode, const MlpConfig& config,
                       const AttackSources& sources);

}  // namespace linksteal

#endif  // LINKSTEAL_BASELINES_H_
