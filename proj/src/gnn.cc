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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "linksteal/errors.h"

namespace linksteal {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;

// Dense input features whose nonzero share falls below this are multiplied
// as sparse matrices (bag-of-words citation features are ~1% dense).
constexpr double kSparseInputDensity = 0.15;

// Operators derived from the graph once per forward/training run.
struct GraphOps {
  SparseMatrix gcn;
  SparseMatrix mean;
  // CSR over N(v) ∪ {v} for attention layers.
  std::vector<int> offsets;
  std::vector<NodeId> cols;
  bool sparse_input = false;
  SparseMatrix x_sparse;
  const MatrixXd* x_dense = nullptr;
};

GraphOps BuildOps(const Graph& g, Architecture arch) {
  GraphOps ops;
  switch (arch) {
    case Architecture::kGcn:
      ops.gcn = NormalizedAdjacency(g, AdjacencyMode::kGcnSymmetric);
      break;
    case Architecture::kSage:
      ops.mean = NeighborMeanOperator(g);
      break;
    case Architecture::kGat:
      ops.offsets.assign(1, 0);
      for (int i = 0; i < g.num_nodes; ++i) {
        const auto& nb = g.adjacency[i];
        auto it = std::lower_bound(nb.begin(), nb.end(), i);
        ops.cols.insert(ops.cols.end(), nb.begin(), it);
        ops.cols.push_back(i);
        ops.cols.insert(ops.cols.end(), it, nb.end());
        ops.offsets.push_back(static_cast<int>(ops.cols.size()));
      }
      break;
  }
  const double total = static_cast<double>(g.features.size());
  const double nonzero = total == 0 ? 0.0 : (g.features.array() != 0.0).count();
  ops.sparse_input = total > 0 && nonzero / total < kSparseInputDensity;
  if (ops.sparse_input) {
    ops.x_sparse = g.features.sparseView();
  } else {
    ops.x_dense = &g.features;
  }
  return ops;
}

int HeadsForLayer(const ModelConfig& c, int layer) {
  if (c.arch != Architecture::kGat) return 1;
  return layer + 1 == c.num_layers ? 1 : c.gat_heads;
}

// Output width of `layer` (after head concatenation).
int LayerWidth(const ModelConfig& c, int layer, int num_classes) {
  if (layer + 1 == c.num_layers) return num_classes;
  return c.hidden_dim * HeadsForLayer(c, layer);
}

// Per-head output width of `layer`.
int HeadWidth(const ModelConfig& c, int layer, int num_classes) {
  return layer + 1 == c.num_layers ? num_classes : c.hidden_dim;
}

// Parameters are stored flat; this locates a layer's block.
struct LayerSlots {
  int first = 0;  // index into params
  int heads = 1;
};

std::vector<LayerSlots> Slots(const ModelConfig& c) {
  std::vector<LayerSlots> slots;
  int next = 0;
  for (int l = 0; l < c.num_layers; ++l) {
    LayerSlots s{next, HeadsForLayer(c, l)};
    switch (c.arch) {
      case Architecture::kGcn:
        next += 2;
        break;
      case Architecture::kSage:
        next += 3;
        break;
      case Architecture::kGat:
        next += 3 * s.heads + 1;
        break;
    }
    slots.push_back(s);
  }
  return slots;
}

// Input to a layer: either the (possibly dropped-out) sparse feature matrix
// or a dense activation.
struct LayerInput {
  bool sparse = false;
  SparseMatrix s;
  MatrixXd d;

  MatrixXd Times(const MatrixXd& w) const { return sparse ? MatrixXd(s * w) : MatrixXd(d * w); }
  MatrixXd TransposeTimes(const MatrixXd& g) const {
    return sparse ? MatrixXd(s.transpose() * g) : MatrixXd(d.transpose() * g);
  }
};

struct HeadCache {
  MatrixXd z;                 // n x F
  std::vector<double> pre;    // per CSR entry
  std::vector<double> alpha;  // per CSR entry
};

struct LayerCache {
  LayerInput input;
  MatrixXd dropout_mask;  // dense inputs only; empty when no dropout
  MatrixXd neighbor_mean;  // SAGE: M * input (dense form)
  SparseMatrix neighbor_mean_sparse;
  bool neighbor_mean_is_sparse = false;
  std::vector<HeadCache> heads;
  MatrixXd pre_activation;  // n x width
};

struct ForwardState {
  std::vector<LayerCache> layers;
  MatrixXd logits;
  MatrixXd probs;
};

double Elu(double x) { return x > 0 ? x : std::expm1(x); }
double EluGrad(double x) { return x > 0 ? 1.0 : std::exp(x); }

MatrixXd RowSoftmax(const MatrixXd& logits) {
  MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      out(i, j) = std::exp(logits(i, j) - m);
      sum += out(i, j);
    }
    out.row(i) /= sum;
  }
  return out;
}

void CheckShapes(const TargetModel& model, const Graph& graph) {
  const ModelConfig& c = model.config;
  if (model.input_dim != graph.feature_dim) {
    throw ContractError("layer 0: model expects " +
                        std::to_string(model.input_dim) +
                        " input features, graph has " +
                        std::to_string(graph.feature_dim));
  }
  if (model.num_classes != graph.num_categories) {
    throw ContractError("layer " + std::to_string(c.num_layers - 1) +
                        ": model outputs " + std::to_string(model.num_classes) +
                        " classes, graph has " +
                        std::to_string(graph.num_categories));
  }
  const auto slots = Slots(c);
  const size_t expected = c.num_layers == 0
                              ? 0
                              : static_cast<size_t>(
                                    slots.back().first +
                                    (c.arch == Architecture::kGcn    ? 2
                                     : c.arch == Architecture::kSage ? 3
                                                                     : 3 * slots.back().heads + 1));
  if (model.params.size() != expected) {
    throw ContractError("model has " + std::to_string(model.params.size()) +
                        " parameter tensors, expected " +
                        std::to_string(expected));
  }
  int in_dim = model.input_dim;
  for (int l = 0; l < c.num_layers; ++l) {
    const int hw = HeadWidth(c, l, model.num_classes);
    const int width = LayerWidth(c, l, model.num_classes);
    const auto check = [&](int idx, Eigen::Index r, Eigen::Index cc) {
      const MatrixXd& v = model.params[idx].value;
      if (v.rows() != r || v.cols() != cc) {
        throw ContractError("layer " + std::to_string(l) + ": parameter " +
                            model.params[idx].name + " is " +
                            std::to_string(v.rows()) + "x" +
                            std::to_string(v.cols()) + ", expected " +
                            std::to_string(r) + "x" + std::to_string(cc));
      }
    };
    const int p = slots[l].first;
    switch (c.arch) {
      case Architecture::kGcn:
        check(p, in_dim, hw);
        check(p + 1, 1, hw);
        break;
      case Architecture::kSage:
        check(p, in_dim, hw);
        check(p + 1, in_dim, hw);
        check(p + 2, 1, hw);
        break;
      case Architecture::kGat:
        for (int h = 0; h < slots[l].heads; ++h) {
          check(p + 3 * h, in_dim, hw);
          check(p + 3 * h + 1, hw, 1);
          check(p + 3 * h + 2, hw, 1);
        }
        check(p + 3 * slots[l].heads, 1, width);
        break;
    }
    in_dim = width;
  }
}

class Network {
 public:
  Network(const TargetModel& model, const Graph& graph)
      : model_(model), graph_(graph), ops_(BuildOps(graph, model.config.arch)) {}

  // Runs the forward pass; `rng` non-null enables dropout.
  ForwardState Run(std::mt19937_64* rng) const {
    const ModelConfig& c = model_.config;
    const auto slots = Slots(c);
    ForwardState st;
    st.layers.resize(c.num_layers);

    LayerInput current;
    if (ops_.sparse_input) {
      current.sparse = true;
      current.s = ops_.x_sparse;
    } else {
      current.d = *ops_.x_dense;
    }

    for (int l = 0; l < c.num_layers; ++l) {
      LayerCache& cache = st.layers[l];
      if (rng != nullptr && c.dropout > 0) ApplyDropout(&current, &cache, *rng);
      cache.input = std::move(current);
      MatrixXd out = LayerForward(l, slots[l], &cache);
      cache.pre_activation = out;
      if (l + 1 < c.num_layers) {
        if (c.arch == Architecture::kGat) {
          out = out.unaryExpr(&Elu);
        } else {
          out = out.cwiseMax(0.0);
        }
        current = LayerInput{};
        current.d = std::move(out);
      } else {
        st.logits = std::move(out);
      }
    }
    st.probs = RowSoftmax(st.logits);
    return st;
  }

  // Accumulates gradients of the mean cross-entropy over `ids`.
  double Backward(const ForwardState& st, const std::vector<NodeId>& ids,
                  std::vector<MatrixXd>* grads) const {
    const ModelConfig& c = model_.config;
    const auto slots = Slots(c);
    grads->assign(model_.params.size(), MatrixXd());
    for (size_t i = 0; i < model_.params.size(); ++i) {
      (*grads)[i] = MatrixXd::Zero(model_.params[i].value.rows(),
                                   model_.params[i].value.cols());
    }
    const double scale = 1.0 / static_cast<double>(ids.size());
    double loss = 0.0;
    MatrixXd d_out = MatrixXd::Zero(st.logits.rows(), st.logits.cols());
    for (NodeId v : ids) {
      const int y = graph_.labels[v];
      loss -= std::log(std::max(st.probs(v, y), std::numeric_limits<double>::min()));
      d_out.row(v) += st.probs.row(v) * scale;
      d_out(v, y) -= scale;
    }
    loss *= scale;

    for (int l = c.num_layers - 1; l >= 0; --l) {
      const LayerCache& cache = st.layers[l];
      if (l + 1 < c.num_layers) {
        // Through the activation that followed this layer.
        if (c.arch == Architecture::kGat) {
          d_out = d_out.cwiseProduct(cache.pre_activation.unaryExpr(&EluGrad));
        } else {
          d_out = d_out.cwiseProduct(
              (cache.pre_activation.array() > 0.0).cast<double>().matrix());
        }
      }
      MatrixXd d_in = LayerBackward(l, slots[l], cache, d_out, grads, l > 0);
      if (l > 0) {
        if (st.layers[l].dropout_mask.size() > 0) {
          d_in = d_in.cwiseProduct(st.layers[l].dropout_mask);
        }
        d_out = std::move(d_in);
      }
    }
    return loss;
  }

 private:
  void ApplyDropout(LayerInput* in, LayerCache* cache,
                    std::mt19937_64& rng) const {
    const double keep = 1.0 - model_.config.dropout;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    if (in->sparse) {
      for (int k = 0; k < in->s.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(in->s, k); it; ++it) {
          it.valueRef() = uni(rng) < keep ? it.value() / keep : 0.0;
        }
      }
      in->s.prune(0.0);
    } else {
      cache->dropout_mask.resize(in->d.rows(), in->d.cols());
      for (Eigen::Index j = 0; j < in->d.cols(); ++j) {
        for (Eigen::Index i = 0; i < in->d.rows(); ++i) {
          cache->dropout_mask(i, j) = uni(rng) < keep ? 1.0 / keep : 0.0;
        }
      }
      in->d = in->d.cwiseProduct(cache->dropout_mask);
    }
  }

  MatrixXd LayerForward(int l, const LayerSlots& slot, LayerCache* cache) const {
    const auto& p = model_.params;
    const LayerInput& in = cache->input;
    switch (model_.config.arch) {
      case Architecture::kGcn: {
        MatrixXd hw = in.Times(p[slot.first].value);
        MatrixXd z = ops_.gcn * hw;
        z.rowwise() += p[slot.first + 1].value.row(0);
        return z;
      }
      case Architecture::kSage: {
        MatrixXd z = in.Times(p[slot.first].value);
        if (in.sparse) {
          cache->neighbor_mean_sparse = ops_.mean * in.s;
          cache->neighbor_mean_is_sparse = true;
          z += cache->neighbor_mean_sparse * p[slot.first + 1].value;
        } else {
          cache->neighbor_mean = ops_.mean * in.d;
          z += cache->neighbor_mean * p[slot.first + 1].value;
        }
        z.rowwise() += p[slot.first + 2].value.row(0);
        return z;
      }
      case Architecture::kGat:
        return GatForward(l, slot, cache);
    }
    return {};
  }

  MatrixXd GatForward(int l, const LayerSlots& slot, LayerCache* cache) const {
    const auto& p = model_.params;
    const int n = graph_.num_nodes;
    const int hw = HeadWidth(model_.config, l, model_.num_classes);
    const double slope = model_.config.gat_leaky_slope;
    MatrixXd out(n, hw * slot.heads);
    cache->heads.resize(slot.heads);
    for (int h = 0; h < slot.heads; ++h) {
      HeadCache& hc = cache->heads[h];
      const int base = slot.first + 3 * h;
      hc.z = cache->input.Times(p[base].value);
      const VectorXd src = hc.z * p[base + 1].value;
      const VectorXd dst = hc.z * p[base + 2].value;
      hc.pre.resize(ops_.cols.size());
      hc.alpha.resize(ops_.cols.size());
      for (int i = 0; i < n; ++i) {
        const int b = ops_.offsets[i], e = ops_.offsets[i + 1];
        double m = -std::numeric_limits<double>::infinity();
        for (int k = b; k < e; ++k) {
          const double x = dst(i) + src(ops_.cols[k]);
          hc.pre[k] = x;
          m = std::max(m, x > 0 ? x : slope * x);
        }
        double sum = 0.0;
        for (int k = b; k < e; ++k) {
          const double x = hc.pre[k];
          hc.alpha[k] = std::exp((x > 0 ? x : slope * x) - m);
          sum += hc.alpha[k];
        }
        for (int k = b; k < e; ++k) hc.alpha[k] /= sum;
        auto row = out.block(i, h * hw, 1, hw);
        row.setZero();
        for (int k = b; k < e; ++k) row += hc.alpha[k] * hc.z.row(ops_.cols[k]);
      }
    }
    out.rowwise() += p[slot.first + 3 * slot.heads].value.row(0);
    return out;
  }

  // Returns d(loss)/d(input) when `need_input_grad`.
  MatrixXd LayerBackward(int l, const LayerSlots& slot, const LayerCache& cache,
                         const MatrixXd& d_out, std::vector<MatrixXd>* grads,
                         bool need_input_grad) const {
    const auto& p = model_.params;
    const LayerInput& in = cache.input;
    switch (model_.config.arch) {
      case Architecture::kGcn: {
        (*grads)[slot.first + 1] += d_out.colwise().sum();
        // The symmetric normalization is its own transpose.
        const MatrixXd d_hw = ops_.gcn * d_out;
        (*grads)[slot.first] += in.TransposeTimes(d_hw);
        if (!need_input_grad) return {};
        return d_hw * p[slot.first].value.transpose();
      }
      case Architecture::kSage: {
        (*grads)[slot.first + 2] += d_out.colwise().sum();
        (*grads)[slot.first] += in.TransposeTimes(d_out);
        if (cache.neighbor_mean_is_sparse) {
          (*grads)[slot.first + 1] +=
              cache.neighbor_mean_sparse.transpose() * d_out;
        } else {
          (*grads)[slot.first + 1] += cache.neighbor_mean.transpose() * d_out;
        }
        if (!need_input_grad) return {};
        MatrixXd d_in = d_out * p[slot.first].value.transpose();
        const MatrixXd d_mean = d_out * p[slot.first + 1].value.transpose();
        d_in += SparseMatrix(ops_.mean.transpose()) * d_mean;
        return d_in;
      }
      case Architecture::kGat:
        return GatBackward(l, slot, cache, d_out, grads, need_input_grad);
    }
    return {};
  }

  MatrixXd GatBackward(int l, const LayerSlots& slot, const LayerCache& cache,
                       const MatrixXd& d_out, std::vector<MatrixXd>* grads,
                       bool need_input_grad) const {
    const auto& p = model_.params;
    const int n = graph_.num_nodes;
    const int hw = HeadWidth(model_.config, l, model_.num_classes);
    const double slope = model_.config.gat_leaky_slope;
    (*grads)[slot.first + 3 * slot.heads] += d_out.colwise().sum();
    MatrixXd d_in;
    if (need_input_grad) {
      d_in = MatrixXd::Zero(n, p[slot.first].value.rows());
    }
    std::vector<double> d_alpha;
    for (int h = 0; h < slot.heads; ++h) {
      const HeadCache& hc = cache.heads[h];
      const int base = slot.first + 3 * h;
      const auto d_head = d_out.middleCols(h * hw, hw);
      MatrixXd d_z = MatrixXd::Zero(n, hw);
      VectorXd d_src = VectorXd::Zero(n);
      VectorXd d_dst = VectorXd::Zero(n);
      d_alpha.resize(ops_.cols.size());
      for (int i = 0; i < n; ++i) {
        const int b = ops_.offsets[i], e = ops_.offsets[i + 1];
        double weighted = 0.0;
        for (int k = b; k < e; ++k) {
          const int j = ops_.cols[k];
          d_z.row(j) += hc.alpha[k] * d_head.row(i);
          d_alpha[k] = d_head.row(i).dot(hc.z.row(j));
          weighted += hc.alpha[k] * d_alpha[k];
        }
        for (int k = b; k < e; ++k) {
          const double d_e = hc.alpha[k] * (d_alpha[k] - weighted);
          const double d_pre = d_e * (hc.pre[k] > 0 ? 1.0 : slope);
          d_dst(i) += d_pre;
          d_src(ops_.cols[k]) += d_pre;
        }
      }
      const MatrixXd& a_src = p[base + 1].value;
      const MatrixXd& a_dst = p[base + 2].value;
      (*grads)[base + 1] += hc.z.transpose() * d_src;
      (*grads)[base + 2] += hc.z.transpose() * d_dst;
      d_z += d_src * a_src.transpose();
      d_z += d_dst * a_dst.transpose();
      (*grads)[base] += cache.input.TransposeTimes(d_z);
      if (need_input_grad) d_in += d_z * p[base].value.transpose();
    }
    return d_in;
  }

  const TargetModel& model_;
  const Graph& graph_;
  GraphOps ops_;
};

MatrixXd Glorot(int rows, int cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> uni(-limit, limit);
  MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = uni(rng);
  }
  return m;
}

bool AllFinite(const MatrixXd& m) { return m.allFinite(); }

}  // namespace

const char* ArchitectureName(Architecture a) {
  switch (a) {
    case Architecture::kGcn:
      return "GCN";
    case Architecture::kSage:
      return "SAGE";
    case Architecture::kGat:
      return "GAT";
  }
  return "?";
}

Architecture ParseArchitecture(const std::string& s) {
  std::string u = s;
  std::transform(u.begin(), u.end(), u.begin(), ::toupper);
  if (u == "GCN") return Architecture::kGcn;
  if (u == "SAGE" || u == "GRAPHSAGE") return Architecture::kSage;
  if (u == "GAT") return Architecture::kGat;
  throw ConfigError("unknown architecture '" + s + "'");
}

const char* OptimizerName(Optimizer o) {
  return o == Optimizer::kAdam ? "adam" : "gd";
}

Optimizer ParseOptimizer(const std::string& s) {
  if (s == "adam") return Optimizer::kAdam;
  if (s == "gd" || s == "sgd") return Optimizer::kGradientDescent;
  throw ConfigError("unknown optimizer '" + s + "'");
}

void ModelConfig::Check() const {
  if (num_layers < 1) throw ConfigError("num_layers must be >= 1");
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) {
    throw ConfigError("dropout must lie in [0, 1)");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (arch == Architecture::kGat && gat_heads < 1) {
    throw ConfigError("gat_heads must be >= 1");
  }
}

int64_t TargetModel::NumParameters() const {
  int64_t n = 0;
  for (const auto& p : params) n += p.value.size();
  return n;
}

TargetModel InitializeModel(const ModelConfig& config, int input_dim,
                            int num_classes) {
  config.Check();
  TargetModel model;
  model.config = config;
  model.input_dim = input_dim;
  model.num_classes = num_classes;
  std::mt19937_64 rng(config.seed);
  int in_dim = input_dim;
  for (int l = 0; l < config.num_layers; ++l) {
    const int hw = HeadWidth(config, l, num_classes);
    const int width = LayerWidth(config, l, num_classes);
    const std::string prefix = "layer" + std::to_string(l) + ".";
    switch (config.arch) {
      case Architecture::kGcn:
        model.params.push_back({prefix + "weight", Glorot(in_dim, hw, rng)});
        model.params.push_back({prefix + "bias", MatrixXd::Zero(1, hw)});
        break;
      case Architecture::kSage:
        model.params.push_back({prefix + "weight_self", Glorot(in_dim, hw, rng)});
        model.params.push_back({prefix + "weight_neigh", Glorot(in_dim, hw, rng)});
        model.params.push_back({prefix + "bias", MatrixXd::Zero(1, hw)});
        break;
      case Architecture::kGat:
        for (int h = 0; h < HeadsForLayer(config, l); ++h) {
          const std::string hp = prefix + "head" + std::to_string(h) + ".";
          model.params.push_back({hp + "weight", Glorot(in_dim, hw, rng)});
          model.params.push_back({hp + "att_src", Glorot(hw, 1, rng)});
          model.params.push_back({hp + "att_dst", Glorot(hw, 1, rng)});
        }
        model.params.push_back({prefix + "bias", MatrixXd::Zero(1, width)});
        break;
    }
    in_dim = width;
  }
  return model;
}

PosteriorMatrix Forward(const TargetModel& model, const Graph& graph,
                        std::vector<LayerActivation>* trace) {
  CheckShapes(model, graph);
  Network net(model, graph);
  ForwardState st = net.Run(nullptr);
  if (trace != nullptr) {
    trace->clear();
    for (int l = 0; l < model.config.num_layers; ++l) {
      LayerActivation act;
      act.layer_index = l;
      if (l + 1 < model.config.num_layers) {
        act.values = st.layers[l + 1].input.d;
      } else {
        act.values = st.probs;
      }
      trace->push_back(std::move(act));
    }
  }
  PosteriorMatrix out;
  out.rows = std::move(st.probs);
  out.source_model = ArchitectureName(model.config.arch);
  out.dataset = graph.name;
  return out;
}

double LossAndGradients(const TargetModel& model, const Graph& graph,
                        const std::vector<NodeId>& ids,
                        std::vector<MatrixXd>* grads) {
  CheckShapes(model, graph);
  if (ids.empty()) throw ContractError("loss over an empty node set");
  Network net(model, graph);
  const ForwardState st = net.Run(nullptr);
  return net.Backward(st, ids, grads);
}

TargetModel TrainTarget(const Graph& graph, const SplitSpec& split,
                        const ModelConfig& config) {
  if (split.train.empty()) throw ContractError("train split is empty");
  for (NodeId v : split.train) {
    if (v < 0 || v >= graph.num_nodes) {
      throw ContractError("train split contains invalid node " +
                          std::to_string(v));
    }
  }
  TargetModel model =
      InitializeModel(config, graph.feature_dim, graph.num_categories);
  CheckShapes(model, graph);
  Network net(model, graph);
  std::mt19937_64 dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  // Adam state.
  std::vector<MatrixXd> m1, m2;
  for (const auto& p : model.params) {
    m1.push_back(MatrixXd::Zero(p.value.rows(), p.value.cols()));
    m2.push_back(MatrixXd::Zero(p.value.rows(), p.value.cols()));
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  std::vector<MatrixXd> grads;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const ForwardState st = net.Run(&dropout_rng);
    const double loss = net.Backward(st, split.train, &grads);
    if (!std::isfinite(loss)) {
      throw TrainingError("loss diverged at epoch " + std::to_string(epoch) +
                          " (learning rate " +
                          std::to_string(config.learning_rate) + ")");
    }
    int correct = 0;
    for (NodeId v : split.train) {
      Eigen::Index arg = 0;
      st.logits.row(v).maxCoeff(&arg);
      if (arg == graph.labels[v]) ++correct;
    }
    model.training_log.push_back(
        {epoch, loss, static_cast<double>(correct) / split.train.size()});

    const double bc1 = 1.0 - std::pow(kBeta1, epoch);
    const double bc2 = 1.0 - std::pow(kBeta2, epoch);
    for (size_t i = 0; i < model.params.size(); ++i) {
      MatrixXd& w = model.params[i].value;
      MatrixXd g = grads[i] + config.weight_decay * w;
      if (config.optimizer == Optimizer::kGradientDescent) {
        w -= config.learning_rate * g;
      } else {
        m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * g;
        m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * g.cwiseProduct(g);
        w.array() -= config.learning_rate * (m1[i].array() / bc1) /
                     ((m2[i].array() / bc2).sqrt() + kEps);
      }
      if (!AllFinite(w)) {
        throw TrainingError("parameter " + model.params[i].name +
                            " diverged at epoch " + std::to_string(epoch) +
                            " (learning rate " +
                            std::to_string(config.learning_rate) + ")");
      }
    }
  }
  return model;
}

PosteriorMatrix ExtractPosteriors(const TargetModel& model, const Graph& graph,
                                  const std::vector<NodeId>& node_ids) {
  for (NodeId v : node_ids) {
    if (v < 0 || v >= graph.num_nodes) {
      throw ContractError("extract_posteriors: invalid node id " +
                          std::to_string(v));
    }
  }
  const PosteriorMatrix all = Forward(model, graph);
  PosteriorMatrix out;
  out.source_model = all.source_model;
  out.dataset = all.dataset;
  out.rows.resize(static_cast<Eigen::Index>(node_ids.size()), all.num_classes());
  for (size_t i = 0; i < node_ids.size(); ++i) {
    out.rows.row(static_cast<Eigen::Index>(i)) = all.rows.row(node_ids[i]);
  }
  return out;
}

double Accuracy(const PosteriorMatrix& posteriors, const Graph& graph,
                const std::vector<NodeId>& ids) {
  if (ids.empty()) return 0.0;
  int correct = 0;
  for (NodeId v : ids) {
    Eigen::Index arg = 0;
    posteriors.rows.row(v).maxCoeff(&arg);
    if (arg == graph.labels[v]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ids.size());
}

GradCheckResult GradCheckModel(const TargetModel& model, const Graph& graph,
                               double step) {
  GradCheckResult result;
  if (model.NumParameters() == 0) return result;
  std::vector<NodeId> all(graph.num_nodes);
  for (int i = 0; i < graph.num_nodes; ++i) all[i] = i;
  std::vector<MatrixXd> analytic;
  LossAndGradients(model, graph, all, &analytic);

  TargetModel probe = model;
  std::vector<MatrixXd> scratch;
  for (size_t p = 0; p < probe.params.size(); ++p) {
    MatrixXd& w = probe.params[p].value;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      const double original = w(k);
      w(k) = original + step;
      const double plus = LossAndGradients(probe, graph, all, &scratch);
      w(k) = original - step;
      const double minus = LossAndGradients(probe, graph, all, &scratch);
      w(k) = original;
      const double numeric = (plus - minus) / (2.0 * step);
      const double a = analytic[p](k);
      const double denom =
          std::max({std::abs(a), std::abs(numeric), 1e-7});
      const double rel = std::abs(a - numeric) / denom;
      ++result.checked;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = probe.params[p].name;
      }
    }
  }
  return result;
}

GradCheckResult GradCheck(const ModelConfig& config, const Graph& tiny_graph,
                          double step) {
  if (tiny_graph.num_nodes > 10) {
    throw ContractError("grad_check expects a graph of at most 10 nodes");
  }
  const TargetModel model =
      InitializeModel(config, tiny_graph.feature_dim, tiny_graph.num_categories);
  return GradCheckModel(model, tiny_graph, step);
}

void SaveCheckpoint(const TargetModel& model, const std::filesystem::path& path) {
  const ModelConfig& c = model.config;
  json j;
  j["format"] = "linksteal-checkpoint-v1";
  j["config"] = {{"arch", ArchitectureName(c.arch)},
                 {"num_layers", c.num_layers},
                 {"hidden_dim", c.hidden_dim},
                 {"dropout", c.dropout},
                 {"learning_rate", c.learning_rate},
                 {"weight_decay", c.weight_decay},
                 {"epochs", c.epochs},
                 {"seed", c.seed},
                 {"gat_heads", c.gat_heads},
                 {"gat_leaky_slope", c.gat_leaky_slope},
                 {"optimizer", OptimizerName(c.optimizer)}};
  j["input_dim"] = model.input_dim;
  j["num_classes"] = model.num_classes;
  json params = json::array();
  for (const auto& p : model.params) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      std::vector<double> row(p.value.cols());
      for (Eigen::Index c2 = 0; c2 < p.value.cols(); ++c2) row[c2] = p.value(r, c2);
      rows.push_back(std::move(row));
    }
    params.push_back({{"name", p.name}, {"values", std::move(rows)}});
  }
  j["params"] = std::move(params);
  json log = json::array();
  for (const auto& e : model.training_log) {
    log.push_back({{"epoch", e.epoch},
                   {"loss", e.loss},
                   {"train_accuracy", e.train_accuracy}});
  }
  j["training_log"] = std::move(log);
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  out << j.dump() << "\n";
}

TargetModel LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  TargetModel model;
  try {
    const json j = json::parse(in);
    const json& c = j.at("config");
    ModelConfig& mc = model.config;
    mc.arch = ParseArchitecture(c.at("arch").get<std::string>());
    mc.num_layers = c.at("num_layers").get<int>();
    mc.hidden_dim = c.at("hidden_dim").get<int>();
    mc.dropout = c.at("dropout").get<double>();
    mc.learning_rate = c.at("learning_rate").get<double>();
    mc.weight_decay = c.at("weight_decay").get<double>();
    mc.epochs = c.at("epochs").get<int>();
    mc.seed = c.at("seed").get<uint64_t>();
    mc.gat_heads = c.at("gat_heads").get<int>();
    mc.gat_leaky_slope = c.at("gat_leaky_slope").get<double>();
    mc.optimizer = ParseOptimizer(c.value("optimizer", std::string("adam")));
    model.input_dim = j.at("input_dim").get<int>();
    model.num_classes = j.at("num_classes").get<int>();
    for (const auto& p : j.at("params")) {
      const auto rows = p.at("values").get<std::vector<std::vector<double>>>();
      const Eigen::Index cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size());
      MatrixXd value(static_cast<Eigen::Index>(rows.size()), cols);
      for (size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != cols) {
          throw ValidationError("ragged parameter " +
                                p.at("name").get<std::string>());
        }
        for (Eigen::Index c2 = 0; c2 < cols; ++c2) value(r, c2) = rows[r][c2];
      }
      model.params.push_back({p.at("name").get<std::string>(), std::move(value)});
    }
    for (const auto& e : j.value("training_log", json::array())) {
      model.training_log.push_back({e.at("epoch").get<int>(),
                                    e.at("loss").get<double>(),
                                    e.at("train_accuracy").get<double>()});
    }
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return model;
}

void WritePosteriorsCsv(const PosteriorMatrix& posteriors,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  out << "node_id";
  for (int c = 0; c < posteriors.num_classes(); ++c) out << ",p_" << c;
  out << "\n";
  out.precision(std::numeric_limits<double>::max_digits10);
  for (int v = 0; v < posteriors.num_nodes(); ++v) {
    out << v;
    for (int c = 0; c < posteriors.num_classes(); ++c) {
      out << "," << posteriors.rows(v, c);
    }
    out << "\n";
  }
}

PosteriorMatrix ReadPosteriorsCsv(const std::filesystem::path& path,
                                  const std::string& dataset) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty");
  const int classes = static_cast<int>(std::count(line.begin(), line.end(), ','));
  std::vector<std::pair<int, std::vector<double>>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    const int id = std::stoi(cell);
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    if (static_cast<int>(values.size()) != classes) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected " + std::to_string(classes) +
                            " probabilities");
    }
    rows.emplace_back(id, std::move(values));
  }
  PosteriorMatrix out;
  out.dataset = dataset;
  out.rows = MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), classes);
  for (const auto& [id, values] : rows) {
    if (id < 0 || id >= static_cast<int>(rows.size())) {
      throw ValidationError(path.string() + ": node ids are not dense");
    }
    for (int c = 0; c < classes; ++c) out.rows(id, c) = values[c];
  }
  return out;
}

}  // namespace linksteal
