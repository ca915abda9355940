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

#include "linksteal/baselines.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "linksteal/errors.h"

namespace linksteal {
namespace {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

double CosineOf(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b,
                const char* what) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw MetricUndefinedError(std::string(what) + " distance undefined for " +
                               (na == 0.0 && nb == 0.0 ? "two" : "a") +
                               (std::string(what) == "correlation"
                                    ? " constant vector"
                                    : " zero vector"));
  }
  return std::max(0.0, 1.0 - a.dot(b) / (na * nb));
}

std::string PairDataset(const PairSet& set, const NodePair& p) {
  return p.dataset.empty() ? set.source_graph : p.dataset;
}

void CheckCovered(const PosteriorMatrix& post, const NodePair& p) {
  if (p.u < 0 || p.v < 0 || p.u >= post.num_nodes() ||
      p.v >= post.num_nodes()) {
    throw ContractError(fmt::format("no posterior row for pair ({}, {}); {} rows",
                                    p.u, p.v, post.num_nodes()));
  }
}

void AppendComposition(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b,
                       Eigen::RowVectorXd& out, Eigen::Index at) {
  const Eigen::Index d = a.size();
  out.segment(at, d) = (a - b).cwiseAbs();
  out.segment(at + d, d) = a.cwiseProduct(b);
}

struct Adam {
  Eigen::MatrixXd m, v;
  void Init(Eigen::Index rows, Eigen::Index cols) {
    m = Eigen::MatrixXd::Zero(rows, cols);
    v = Eigen::MatrixXd::Zero(rows, cols);
  }
  template <typename Param, typename Grad>
  void Step(Param& param, const Grad& grad, double lr, int t) {
    constexpr double kB1 = 0.9, kB2 = 0.999, kEps = 1e-8;
    m = kB1 * m + (1 - kB1) * grad;
    v = kB2 * v + (1 - kB2) * grad.cwiseProduct(grad);
    const double c1 = 1 - std::pow(kB1, t), c2 = 1 - std::pow(kB2, t);
    param.array() -=
        lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  }
};

Eigen::MatrixXd SoftmaxRows(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd out = z;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    out.row(i).array() -= z.row(i).maxCoeff();
    out.row(i) = out.row(i).array().exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

}  // namespace

const char* MetricName(MetricKind m) {
  switch (m) {
    case MetricKind::kCosine:
      return "cosine";
    case MetricKind::kEuclidean:
      return "euclidean";
    case MetricKind::kCorrelation:
      return "correlation";
    case MetricKind::kChebyshev:
      return "chebyshev";
    case MetricKind::kBraycurtis:
      return "braycurtis";
    case MetricKind::kCanberra:
      return "canberra";
    case MetricKind::kCityblock:
      return "cityblock";
    case MetricKind::kSqeuclidean:
      return "sqeuclidean";
  }
  return "?";
}

MetricKind ParseMetric(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (MetricKind m : kAllMetrics) {
    if (lower == MetricName(m)) return m;
  }
  throw ConfigError("unknown metric '" + s + "'");
}

double PairDistance(MetricKind metric, const VectorRef& a, const VectorRef& b) {
  if (a.size() != b.size()) {
    throw ContractError(fmt::format("distance between vectors of length {} and {}",
                                    a.size(), b.size()));
  }
  if (a.size() == 0) throw ContractError("distance of empty vectors");
  const Eigen::RowVectorXd diff = a - b;
  switch (metric) {
    case MetricKind::kCosine:
      return CosineOf(a, b, "cosine");
    case MetricKind::kEuclidean:
      return diff.norm();
    case MetricKind::kCorrelation: {
      const Eigen::RowVectorXd ca = a.array() - a.mean();
      const Eigen::RowVectorXd cb = b.array() - b.mean();
      return CosineOf(ca, cb, "correlation");
    }
    case MetricKind::kChebyshev:
      return diff.cwiseAbs().maxCoeff();
    case MetricKind::kBraycurtis: {
      const double den = (a + b).cwiseAbs().sum();
      if (den == 0.0) {
        throw MetricUndefinedError("braycurtis distance undefined: zero denominator");
      }
      return diff.cwiseAbs().sum() / den;
    }
    case MetricKind::kCanberra: {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double den = std::abs(a(i)) + std::abs(b(i));
        if (den > 0.0) sum += std::abs(a(i) - b(i)) / den;
      }
      return sum;
    }
    case MetricKind::kCityblock:
      return diff.cwiseAbs().sum();
    case MetricKind::kSqeuclidean:
      return diff.squaredNorm();
  }
  throw ContractError("unknown metric");
}

ThresholdRule FitThreshold(MetricKind metric,
                           const std::vector<double>& distances,
                           const std::vector<LinkLabel>& labels) {
  if (distances.size() != labels.size()) {
    throw ContractError("fit_threshold: distance and label counts differ");
  }
  const auto n = static_cast<int64_t>(labels.size());
  const int64_t links = std::count(labels.begin(), labels.end(), LinkLabel::kLink);
  if (links == 0 || links == n) {
    throw ContractError("fit_threshold needs both Link and Unlink examples");
  }
  for (double d : distances) {
    if (!std::isfinite(d)) throw ContractError("fit_threshold: non-finite distance");
  }
  const double majority =
      static_cast<double>(std::max(links, n - links)) / static_cast<double>(n);

  std::vector<size_t> order(distances.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return distances[a] < distances[b]; });

  ThresholdRule rule;
  rule.metric = metric;
  const double lo = distances[order.front()], hi = distances[order.back()];
  if (lo == hi) {
    rule.degenerate = true;
    rule.flagged = true;
    rule.tau = links > n - links ? hi : lo - 1.0;
    rule.train_accuracy = majority;
    return rule;
  }

  // Sweep: after consuming each group of equal distances, everything so far
  // is predicted Link. Start from the all-Unlink rule.
  int64_t correct = n - links;
  int64_t best = correct;
  double second = hi;
  for (size_t i : order) {
    if (distances[i] > lo) {
      second = distances[i];
      break;
    }
  }
  rule.tau = lo - 0.5 * (second - lo);
  for (size_t k = 0; k < order.size();) {
    const double d = distances[order[k]];
    size_t end = k;
    while (end < order.size() && distances[order[end]] == d) {
      correct += labels[order[end]] == LinkLabel::kLink ? 1 : -1;
      ++end;
    }
    if (correct > best) {
      best = correct;
      rule.tau = end < order.size() ? 0.5 * (d + distances[order[end]]) : d;
    }
    k = end;
  }
  rule.train_accuracy = static_cast<double>(best) / static_cast<double>(n);
  rule.flagged = rule.train_accuracy <= majority;
  return rule;
}

Prediction ApplyRule(const ThresholdRule& rule, double distance) {
  return distance <= rule.tau ? Prediction::kLink : Prediction::kUnlink;
}

std::vector<double> PairDistances(MetricKind metric, const PairSet& pairs,
                                  const PosteriorMatrix& posteriors,
                                  std::vector<size_t>* kept) {
  std::vector<double> out;
  out.reserve(pairs.size());
  if (kept) kept->clear();
  for (size_t i = 0; i < pairs.pairs.size(); ++i) {
    const NodePair& p = pairs.pairs[i];
    CheckCovered(posteriors, p);
    try {
      out.push_back(PairDistance(metric, posteriors.rows.row(p.u),
                                 posteriors.rows.row(p.v)));
      if (kept) kept->push_back(i);
    } catch (const MetricUndefinedError&) {
    }
  }
  return out;
}

AttackReport SimilarityAttack(const PairSet& train, const PairSet& test,
                              const PosteriorMatrix& posteriors,
                              MetricKind metric, ThresholdRule* fitted) {
  std::vector<size_t> kept;
  const std::vector<double> train_d = PairDistances(metric, train, posteriors, &kept);
  const std::vector<LinkLabel> train_gold = GoldLabels(train);
  std::vector<LinkLabel> train_labels;
  for (size_t i : kept) train_labels.push_back(train_gold[i]);
  const int64_t train_skipped = static_cast<int64_t>(train.size() - kept.size());
  const ThresholdRule rule = FitThreshold(metric, train_d, train_labels);
  if (fitted) *fitted = rule;

  const std::vector<double> test_d = PairDistances(metric, test, posteriors, &kept);
  const std::vector<LinkLabel> test_gold = GoldLabels(test);
  std::vector<Prediction> preds;
  std::vector<LinkLabel> gold;
  for (size_t k = 0; k < kept.size(); ++k) {
    preds.push_back(ApplyRule(rule, test_d[k]));
    gold.push_back(test_gold[kept[k]]);
  }
  if (preds.empty()) {
    throw MetricUndefinedError(std::string(MetricName(metric)) +
                               " distance undefined for every test pair");
  }
  AttackReport r = ComputeMetrics(preds, gold);
  r.id.method = "similarity";
  r.id.dataset = test.source_graph;
  r.id.train_dataset = train.source_graph;
  r.id.setting = "white-box";
  r.id.seed = test.seed;
  r.detail = MetricName(metric);
  r.skipped_count = static_cast<int64_t>(test.size() - kept.size()) + train_skipped;
  r.flagged = rule.flagged;
  if (r.skipped_count > 0) {
    spdlog::warn("{}: {} pairs skipped, distance undefined", MetricName(metric),
                 r.skipped_count);
  }
  return r;
}

std::pair<AttackReport, AttackReport> AggregateMeanMax(
    const std::vector<AttackReport>& reports) {
  if (reports.size() != kAllMetrics.size()) {
    throw ContractError(fmt::format("mean/max aggregation needs {} reports, got {}",
                                    kAllMetrics.size(), reports.size()));
  }
  AttackReport mean;
  mean.id = reports.front().id;
  mean.detail = "mean";
  size_t best = 0;
  double best_f1 = reports.front().f1;
  for (size_t i = 0; i < reports.size(); ++i) {
    const AttackReport& r = reports[i];
    mean.accuracy += r.accuracy / reports.size();
    mean.precision += r.precision / reports.size();
    mean.recall += r.recall / reports.size();
    mean.f1 += r.f1 / reports.size();
    mean.skipped_count += r.skipped_count;
    mean.flagged = mean.flagged || r.flagged;
    if (r.accuracy > reports[best].accuracy) best = i;
    best_f1 = std::max(best_f1, r.f1);
  }
  AttackReport max = reports[best];
  max.f1 = best_f1;
  max.detail = "max:" + reports[best].detail;
  return {mean, max};
}

void WriteDistanceDump(MetricKind metric, const PairSet& pairs,
                       const PosteriorMatrix& posteriors,
                       const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  out << "u,v,label,distance\n";
  for (const NodePair& p : pairs.pairs) {
    CheckCovered(posteriors, p);
    out << p.u << "," << p.v << ","
        << (p.link_label ? LinkLabelName(*p.link_label) : "") << ",";
    try {
      out << fmt::format("{}", PairDistance(metric, posteriors.rows.row(p.u),
                                            posteriors.rows.row(p.v)));
    } catch (const MetricUndefinedError&) {
    }
    out << "\n";
  }
}

const char* FeatureModeName(FeatureMode m) {
  switch (m) {
    case FeatureMode::kFeature:
      return "Feature";
    case FeatureMode::kPP:
      return "PP";
    case FeatureMode::kPPFeature:
      return "PP+Feature";
  }
  return "?";
}

FeatureMode ParseFeatureMode(const std::string& s) {
  if (s == "Feature" || s == "feature") return FeatureMode::kFeature;
  if (s == "PP" || s == "pp") return FeatureMode::kPP;
  if (s == "PP+Feature" || s == "pp+feature") return FeatureMode::kPPFeature;
  throw ConfigError("unknown feature mode '" + s + "'");
}

int PairFeatureDim(FeatureMode mode, const AttackSource& source) {
  int dim = 0;
  if (mode != FeatureMode::kFeature) {
    if (!source.posteriors) throw ContractError("pair features need posteriors");
    dim += 2 * source.posteriors->num_classes();
  }
  if (mode != FeatureMode::kPP) {
    if (!source.graph) throw ContractError("pair features need node features");
    dim += 2 * static_cast<int>(source.graph->features.cols());
  }
  return dim;
}

Eigen::RowVectorXd BuildPairFeature(const NodePair& pair, FeatureMode mode,
                                    const AttackSource& source) {
  Eigen::RowVectorXd out(PairFeatureDim(mode, source));
  Eigen::Index at = 0;
  if (mode != FeatureMode::kFeature) {
    const PosteriorMatrix& post = *source.posteriors;
    CheckCovered(post, pair);
    AppendComposition(post.rows.row(pair.u), post.rows.row(pair.v), out, at);
    at += 2 * post.num_classes();
  }
  if (mode != FeatureMode::kPP) {
    const Eigen::MatrixXd& x = source.graph->features;
    if (std::max(pair.u, pair.v) >= x.rows()) {
      throw ContractError(fmt::format("no feature row for pair ({}, {})", pair.u,
                                      pair.v));
    }
    AppendComposition(x.row(pair.u), x.row(pair.v), out, at);
  }
  return out;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> BuildPairFeatureMatrix(
    const std::vector<const PairSet*>& sets, FeatureMode mode,
    const AttackSources& sources) {
  int dim = -1;
  std::string first;
  std::vector<Eigen::Triplet<double>> triplets;
  int64_t row = 0;
  for (const PairSet* set : sets) {
    for (const NodePair& p : set->pairs) {
      const std::string name = PairDataset(*set, p);
      auto it = sources.find(name);
      if (it == sources.end()) {
        throw ContractError("no attack inputs for dataset '" + name + "'");
      }
      const int d = PairFeatureDim(mode, it->second);
      if (dim < 0) {
        dim = d;
        first = name;
      } else if (d != dim) {
        const bool pp = mode != FeatureMode::kFeature &&
                        it->second.posteriors->num_classes() !=
                            sources.at(first).posteriors->num_classes();
        throw IncompatibleDimensionsError(fmt::format(
            "incompatible {} dimensions: {} has {}, {} has {}",
            pp ? "posterior" : "feature", first,
            pp ? sources.at(first).posteriors->num_classes() : dim, name,
            pp ? it->second.posteriors->num_classes() : d));
      }
      const Eigen::RowVectorXd f = BuildPairFeature(p, mode, it->second);
      for (Eigen::Index j = 0; j < f.size(); ++j) {
        if (f(j) != 0.0) triplets.emplace_back(row, j, f(j));
      }
      ++row;
    }
  }
  SparseRows x(row, std::max(dim, 0));
  x.setFromTriplets(triplets.begin(), triplets.end());
  return x;
}

void MlpConfig::Check() const {
  if (hidden_dims.empty()) throw ConfigError("mlp hidden_dims must be non-empty");
  for (int h : hidden_dims) {
    if (h <= 0) throw ConfigError("mlp hidden width must be positive");
  }
  if (epochs <= 0) throw ConfigError("mlp epochs must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("mlp learning_rate must be positive");
  if (batch_size <= 0) throw ConfigError("mlp batch_size must be positive");
}

namespace {

// Inputs denser than this are trained as dense matrices; sparse-times-dense
// products lose to dense GEMM well before full density.
constexpr double kDenseInputThreshold = 0.25;

bool PreferDense(const MlpClassifier::Input& x) {
  const double cells = static_cast<double>(x.rows()) * static_cast<double>(x.cols());
  return cells > 0.0 && static_cast<double>(x.nonZeros()) / cells > kDenseInputThreshold;
}

using DenseRows = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename X>
Eigen::MatrixXd MlpForward(const X& x, const std::vector<Eigen::MatrixXd>& weights,
                           const std::vector<Eigen::RowVectorXd>& biases,
                           std::vector<Eigen::MatrixXd>* acts) {
  Eigen::MatrixXd h = x * weights[0];
  h.rowwise() += biases[0];
  for (size_t l = 1; l < weights.size(); ++l) {
    h = h.cwiseMax(0.0);
    if (acts) acts->push_back(h);
    Eigen::MatrixXd next = h * weights[l];
    next.rowwise() += biases[l];
    h = std::move(next);
  }
  return h;
}

template <typename X>
std::vector<double> MlpTrainLoop(const X& x, const std::vector<int>& y,
                                 const MlpConfig& config, std::mt19937_64& rng,
                                 std::vector<Eigen::MatrixXd>& weights,
                                 std::vector<Eigen::RowVectorXd>& biases) {
  const size_t layers = weights.size();
  std::vector<Adam> w_opt(layers), b_opt(layers);
  for (size_t l = 0; l < layers; ++l) {
    w_opt[l].Init(weights[l].rows(), weights[l].cols());
    b_opt[l].Init(1, biases[l].cols());
  }
  const Eigen::Index n = x.rows();
  std::vector<double> losses;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic> perm(n);
  perm.setIdentity();
  int step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(perm.indices().data(), perm.indices().data() + n, rng);
    const X xp = perm * x;
    std::vector<int> yp(n);
    for (Eigen::Index i = 0; i < n; ++i) yp[perm.indices()(i)] = y[i];
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(config.batch_size, n - start);
      const X xb = xp.middleRows(start, len);
      std::vector<Eigen::MatrixXd> acts;
      const Eigen::MatrixXd prob = SoftmaxRows(MlpForward(xb, weights, biases, &acts));
      Eigen::MatrixXd delta = prob;
      for (Eigen::Index i = 0; i < len; ++i) {
        const int label = yp[start + i];
        epoch_loss -= std::log(std::max(prob(i, label), 1e-300));
        delta(i, label) -= 1.0;
      }
      delta /= static_cast<double>(len);
      ++step;
      for (size_t l = layers; l-- > 0;) {
        const Eigen::RowVectorXd gb = delta.colwise().sum();
        Eigen::MatrixXd gw;
        if (l == 0) {
          gw = xb.transpose() * delta;
        } else {
          gw = acts[l - 1].transpose() * delta;
          Eigen::MatrixXd back = delta * weights[l].transpose();
          delta = back.cwiseProduct(
              (acts[l - 1].array() > 0.0).cast<double>().matrix());
        }
        w_opt[l].Step(weights[l], gw, config.learning_rate, step);
        b_opt[l].Step(biases[l], gb, config.learning_rate, step);
      }
    }
    losses.push_back(epoch_loss / static_cast<double>(n));
    if (!std::isfinite(losses.back())) {
      throw TrainingError(fmt::format("mlp loss diverged at epoch {}", epoch));
    }
  }
  return losses;
}

}  // namespace

Eigen::MatrixXd MlpClassifier::Hidden(const Input& x,
                                      std::vector<Eigen::MatrixXd>* acts) const {
  if (PreferDense(x)) return MlpForward(DenseRows(x), weights_, biases_, acts);
  return MlpForward(x, weights_, biases_, acts);
}

std::vector<double> MlpClassifier::Train(const Input& x, const std::vector<int>& y) {
  config_.Check();
  if (x.rows() == 0) throw ContractError("mlp training set is empty");
  if (static_cast<size_t>(x.rows()) != y.size()) {
    throw ContractError("mlp: feature rows and labels differ");
  }
  std::mt19937_64 rng(config_.seed);
  std::vector<int> dims = {static_cast<int>(x.cols())};
  dims.insert(dims.end(), config_.hidden_dims.begin(), config_.hidden_dims.end());
  dims.push_back(2);
  weights_.clear();
  biases_.clear();
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const double limit = std::sqrt(6.0 / (dims[l] + dims[l + 1]));
    std::uniform_real_distribution<double> uni(-limit, limit);
    Eigen::MatrixXd w(dims[l], dims[l + 1]);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = uni(rng);
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::RowVectorXd::Zero(dims[l + 1]));
  }
  if (PreferDense(x)) return MlpTrainLoop(DenseRows(x), y, config_, rng, weights_, biases_);
  return MlpTrainLoop(x, y, config_, rng, weights_, biases_);
}

Eigen::MatrixXd MlpClassifier::PredictProba(const Input& x) const {
  if (weights_.empty()) throw ContractError("mlp used before training");
  return SoftmaxRows(Hidden(x, nullptr));
}

std::vector<int> MlpClassifier::Predict(const Input& x) const {
  const Eigen::MatrixXd prob = PredictProba(x);
  std::vector<int> out(prob.rows());
  for (Eigen::Index i = 0; i < prob.rows(); ++i) out[i] = prob(i, 1) > prob(i, 0);
  return out;
}

AttackReport MlpAttack(const PairSet& train, const PairSet& test,
                       FeatureMode mode, const MlpConfig& config,
                       const AttackSources& sources) {
  if (train.size() == 0) throw ContractError("mlp attack needs training pairs");
  const SparseRows all = BuildPairFeatureMatrix({&train, &test}, mode, sources);
  const auto n_train = static_cast<Eigen::Index>(train.size());
  const SparseRows x_train = all.topRows(n_train);
  const SparseRows x_test = all.bottomRows(all.rows() - n_train);
  std::vector<int> y;
  for (LinkLabel l : GoldLabels(train)) y.push_back(static_cast<int>(l));

  MlpClassifier mlp(config);
  mlp.Train(x_train, y);
  std::vector<Prediction> preds;
  for (int p : mlp.Predict(x_test)) {
    preds.push_back(p ? Prediction::kLink : Prediction::kUnlink);
  }
  AttackReport r = ComputeMetrics(preds, GoldLabels(test));
  r.id.method = "mlp";
  r.id.dataset = test.source_graph;
  r.id.train_dataset = train.source_graph;
  r.id.setting = "white-box";
  r.id.seed = config.seed;
  r.detail = FeatureModeName(mode);
  return r;
}

}  // namespace linksteal
