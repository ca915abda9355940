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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "linksteal/errors.h"

namespace linksteal {
namespace {

using json = nlohmann::json;

std::ofstream OpenOut(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  return out;
}

double Ratio(int64_t num, int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

const char* PredictionName(Prediction p) {
  switch (p) {
    case Prediction::kLink:
      return "Link";
    case Prediction::kUnlink:
      return "Unlink";
    case Prediction::kUnparseable:
      return "Unparseable";
  }
  return "?";
}

Prediction ToPrediction(LinkLabel l) {
  return l == LinkLabel::kLink ? Prediction::kLink : Prediction::kUnlink;
}

UnparseablePolicy ParseUnparseablePolicy(const std::string& s) {
  if (s == "score-as-wrong" || s == "wrong") return UnparseablePolicy::kScoreAsWrong;
  if (s == "exclude") return UnparseablePolicy::kExclude;
  throw ConfigError("unknown unparseable policy '" + s + "'");
}

const char* UnparseablePolicyName(UnparseablePolicy p) {
  return p == UnparseablePolicy::kExclude ? "exclude" : "score-as-wrong";
}

AttackReport ComputeMetrics(const std::vector<Prediction>& predictions,
                            const std::vector<LinkLabel>& gold,
                            UnparseablePolicy policy) {
  if (predictions.size() != gold.size()) {
    throw ContractError("compute_metrics: " + std::to_string(predictions.size()) +
                        " predictions for " + std::to_string(gold.size()) +
                        " gold labels");
  }
  if (predictions.empty()) throw ContractError("compute_metrics: empty input");
  AttackReport r;
  r.n_test = static_cast<int64_t>(gold.size());
  for (size_t i = 0; i < gold.size(); ++i) {
    const bool positive = gold[i] == LinkLabel::kLink;
    Prediction p = predictions[i];
    if (p == Prediction::kUnparseable) {
      ++r.unparseable_count;
      if (policy == UnparseablePolicy::kExclude) {
        ++r.excluded_count;
        continue;
      }
      p = positive ? Prediction::kUnlink : Prediction::kLink;
    }
    if (p == Prediction::kLink) {
      ++(positive ? r.tp : r.fp);
    } else {
      ++(positive ? r.fn : r.tn);
    }
  }
  const int64_t scored = r.tp + r.fp + r.tn + r.fn;
  r.accuracy = Ratio(r.tp + r.tn, scored);
  r.precision = Ratio(r.tp, r.tp + r.fp);
  r.recall = Ratio(r.tp, r.tp + r.fn);
  r.f1 = r.precision + r.recall == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

std::vector<LinkLabel> GoldLabels(const PairSet& pairs) {
  std::vector<LinkLabel> gold;
  gold.reserve(pairs.size());
  for (size_t i = 0; i < pairs.pairs.size(); ++i) {
    if (!pairs.pairs[i].link_label) {
      throw ContractError("pair " + std::to_string(i) + " has no link label");
    }
    gold.push_back(*pairs.pairs[i].link_label);
  }
  return gold;
}

MeanStd Summarize(const std::vector<double>& values) {
  MeanStd out;
  out.count = static_cast<int>(values.size());
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / (values.size() - 1));
  }
  return out;
}

const AttackReport* CrossMatrix::Cell(const std::string& train,
                                      const std::string& eval) const {
  auto it = cells.find({train, eval});
  return it == cells.end() ? nullptr : &it->second;
}

CrossMatrix BuildCrossMatrix(const std::vector<AttackReport>& reports,
                             const std::vector<std::string>& order) {
  CrossMatrix m;
  auto note = [](std::vector<std::string>& list, const std::string& name) {
    if (std::find(list.begin(), list.end(), name) == list.end()) {
      list.push_back(name);
    }
  };
  for (const auto& name : order) {
    note(m.train_datasets, name);
    note(m.eval_datasets, name);
  }
  for (const AttackReport& r : reports) {
    const std::string train =
        r.id.train_dataset.empty() ? r.id.dataset : r.id.train_dataset;
    if (!m.cells.emplace(std::make_pair(train, r.id.dataset), r).second) {
      throw ContractError("duplicate cross-matrix cell (" + train + ", " +
                          r.id.dataset + ")");
    }
    note(m.train_datasets, train);
    note(m.eval_datasets, r.id.dataset);
  }
  for (const auto& t : m.train_datasets) {
    for (const auto& e : m.eval_datasets) {
      if (m.Cell(t, e) == nullptr) {
        m.warnings.push_back("missing cell (" + t + ", " + e + ")");
      }
    }
  }
  return m;
}

std::vector<std::filesystem::path> WriteCrossMatrix(
    const CrossMatrix& matrix, const std::filesystem::path& prefix) {
  std::vector<std::filesystem::path> written;
  const std::string base = prefix.string();
  for (const auto& [suffix, pick] :
       std::vector<std::pair<std::string, double AttackReport::*>>{
           {"_accuracy.csv", &AttackReport::accuracy},
           {"_f1.csv", &AttackReport::f1}}) {
    const std::filesystem::path path = base + suffix;
    auto out = OpenOut(path);
    out << "train\\eval";
    for (const auto& e : matrix.eval_datasets) out << "," << e;
    out << "\n";
    for (const auto& t : matrix.train_datasets) {
      out << t;
      for (const auto& e : matrix.eval_datasets) {
        out << ",";
        if (const AttackReport* r = matrix.Cell(t, e)) {
          out << fmt::format("{:.4f}", r->*pick);
        }
      }
      out << "\n";
    }
    written.push_back(path);
  }
  const std::filesystem::path cells = base + "_cells.csv";
  auto out = OpenOut(cells);
  out << "train,eval,accuracy,f1,same_dataset\n";
  for (const auto& t : matrix.train_datasets) {
    for (const auto& e : matrix.eval_datasets) {
      out << t << "," << e << ",";
      if (const AttackReport* r = matrix.Cell(t, e)) {
        out << fmt::format("{:.4f},{:.4f}", r->accuracy, r->f1);
      } else {
        out << ",";
      }
      out << "," << (t == e ? 1 : 0) << "\n";
    }
  }
  written.push_back(cells);
  return written;
}

json ReportToJson(const AttackReport& r) {
  return json{{"method", r.id.method},
              {"dataset", r.id.dataset},
              {"train_dataset", r.id.train_dataset},
              {"setting", r.id.setting},
              {"seed", r.id.seed},
              {"accuracy", r.accuracy},
              {"precision", r.precision},
              {"recall", r.recall},
              {"f1", r.f1},
              {"tp", r.tp},
              {"fp", r.fp},
              {"tn", r.tn},
              {"fn", r.fn},
              {"n_test", r.n_test},
              {"unparseable_count", r.unparseable_count},
              {"excluded_count", r.excluded_count},
              {"skipped_count", r.skipped_count},
              {"detail", r.detail},
              {"flagged", r.flagged}};
}

AttackReport ReportFromJson(const json& j) {
  AttackReport r;
  try {
    r.id.method = j.at("method").get<std::string>();
    r.id.dataset = j.at("dataset").get<std::string>();
    r.id.train_dataset = j.value("train_dataset", r.id.dataset);
    r.id.setting = j.value("setting", std::string());
    r.id.seed = j.value("seed", uint64_t{0});
    r.accuracy = j.at("accuracy").get<double>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.f1 = j.at("f1").get<double>();
    r.tp = j.at("tp").get<int64_t>();
    r.fp = j.at("fp").get<int64_t>();
    r.tn = j.at("tn").get<int64_t>();
    r.fn = j.at("fn").get<int64_t>();
    r.n_test = j.at("n_test").get<int64_t>();
    r.unparseable_count = j.value("unparseable_count", int64_t{0});
    r.excluded_count = j.value("excluded_count", int64_t{0});
    r.skipped_count = j.value("skipped_count", int64_t{0});
    r.detail = j.value("detail", std::string());
    r.flagged = j.value("flagged", false);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string ReportsCsvHeader() {
  return "method,dataset,train_dataset,setting,seed,detail,accuracy,precision,"
         "recall,f1,tp,fp,tn,fn,n_test,unparseable_count,excluded_count,"
         "skipped_count,flagged";
}

std::string ReportCsvRow(const AttackReport& r) {
  return fmt::format("{},{},{},{},{},{},{:.4f},{:.4f},{:.4f},{:.4f},{},{},{},{},{},{},{},{},{}",
                     r.id.method, r.id.dataset, r.id.train_dataset, r.id.setting,
                     r.id.seed, r.detail, r.accuracy, r.precision, r.recall,
                     r.f1, r.tp, r.fp, r.tn, r.fn, r.n_test,
                     r.unparseable_count, r.excluded_count, r.skipped_count,
                     r.flagged ? 1 : 0);
}

void WriteReportsCsv(const std::vector<AttackReport>& reports,
                     const std::filesystem::path& path) {
  auto out = OpenOut(path);
  out << ReportsCsvHeader() << "\n";
  for (const auto& r : reports) out << ReportCsvRow(r) << "\n";
}

void WriteReportsJson(const std::vector<AttackReport>& reports,
                      const std::filesystem::path& path) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(ReportToJson(r));
  auto out = OpenOut(path);
  out << arr.dump(2) << "\n";
}

std::vector<AttackReport> ReadReportsJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  std::vector<AttackReport> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(ReportFromJson(item));
  } else {
    out.push_back(ReportFromJson(j));
  }
  return out;
}

}  // namespace linksteal
