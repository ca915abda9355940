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

// Target node-classification models (GCN, GraphSAGE-mean, GAT) with a
// hand-written backward pass. All training is full-batch and deterministic
// for a fixed seed.

#ifndef LINKSTEAL_GNN_H_
#define LINKSTEAL_GNN_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "linksteal/graph.h"

namespace linksteal {

enum class Architecture { kGcn, kSage, kGat };
enum class Optimizer { kGradientDescent, kAdam };

const char* ArchitectureName(Architecture a);
Architecture ParseArchitecture(const std::string& s);
const char* OptimizerName(Optimizer o);
Optimizer ParseOptimizer(const std::string& s);

struct ModelConfig {
  Architecture arch = Architecture::kGcn;
  int num_layers = 2;
  int hidden_dim = 16;
  double dropout = 0.5;
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  int epochs = 200;
  uint64_t seed = 0;
  int gat_heads = 2;  // hidden layers; the output layer always uses one head
  double gat_leaky_slope = 0.2;
  Optimizer optimizer = Optimizer::kAdam;

  // Throws ConfigError on out-of-range values.
  void Check() const;
};

struct Parameter {
  std::string name;
  Eigen::MatrixXd value;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;

  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

struct TargetModel {
  ModelConfig config;
  int input_dim = 0;
  int num_classes = 0;
  std::vector<Parameter> params;
  std::vector<EpochLog> training_log;

  int64_t NumParameters() const;
};

// Per-node class probabilities. Rows sum to one.
struct PosteriorMatrix {
  Eigen::MatrixXd rows;  // num_nodes x num_classes
  std::string source_model;
  std::string dataset;

  int num_nodes() const { return static_cast<int>(rows.rows()); }
  int num_classes() const { return static_cast<int>(rows.cols()); }
  Eigen::VectorXd Row(NodeId v) const { return rows.row(v).transpose(); }
};

struct LayerActivation {
  int layer_index = 0;
  Eigen::MatrixXd values;
};

// Glorot-initialized parameters for `config` on the given shapes.
TargetModel InitializeModel(const ModelConfig& config, int input_dim,
                            int num_classes);

// Inference-mode forward pass (dropout off). When `trace` is non-null it
// receives each layer's post-activation output. Throws ContractError when
// the parameter shapes do not match the graph.
PosteriorMatrix Forward(const TargetModel& model, const Graph& graph,
                        std::vector<LayerActivation>* trace = nullptr);

// Trains a fresh model on `split.train`. Throws TrainingError if the loss
// turns non-finite and ContractError if the train split is empty.
TargetModel TrainTarget(const Graph& graph, const SplitSpec& split,
                        const ModelConfig& config);

// Rows of Forward() for `node_ids`, in that order.
PosteriorMatrix ExtractPosteriors(const TargetModel& model, const Graph& graph,
                                  const std::vector<NodeId>& node_ids);

// Fraction of `ids` whose argmax posterior matches the label.
double Accuracy(const PosteriorMatrix& posteriors, const Graph& graph,
                const std::vector<NodeId>& ids);

struct GradCheckResult {
  double max_relative_error = 0.0;
  int64_t checked = 0;
  std::string worst_parameter;
};

// Compares analytic cross-entropy gradients (over all nodes, dropout off)
// with central finite differences for every parameter entry. The relative
// error of one entry is |a - n| / max(|a|, |n|, 1e-7).
GradCheckResult GradCheck(const ModelConfig& config, const Graph& tiny_graph,
                          double step = 1e-5);

// Same, against an explicit parameter set.
GradCheckResult GradCheckModel(const TargetModel& model, const Graph& graph,
                               double step = 1e-5);

// Mean cross-entropy over `ids` in inference mode, plus analytic gradients
// aligned with model.params.
double LossAndGradients(const TargetModel& model, const Graph& graph,
                        const std::vector<NodeId>& ids,
                        std::vector<Eigen::MatrixXd>* grads);

// Checkpoint I/O: a single JSON document with config, parameters as plain
// arrays, and the training log.
void SaveCheckpoint(const TargetModel& model, const std::filesystem::path& path);
TargetModel LoadCheckpoint(const std::filesystem::path& path);

// Posterior CSV with header node_id,p_0..p_{C-1}.
void WritePosteriorsCsv(const PosteriorMatrix& posteriors,
                        const std::filesystem::path& path);
PosteriorMatrix ReadPosteriorsCsv(const std::filesystem::path& path,
                                  const std::string& dataset = "");

}  // namespace linksteal

#endif  // LINKSTEAL_GNN_H_
