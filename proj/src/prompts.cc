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

#include "linksteal/prompts.h"

#include <algorithm>
#include <fstream>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "linksteal/errors.h"

namespace linksteal {
namespace {

using ojson = nlohmann::ordered_json;

const std::string& TextOf(const std::optional<TextFeatures>& t,
                          bool title) {
  static const std::string kEmpty;
  if (!t) return kEmpty;
  return title ? t->title : t->abstract;
}

void CountRecord(FinetuneSet& set, const PromptRecord& r) {
  ++set.source_counts[r.dataset];
}

}  // namespace

const char* SettingName(Setting s) {
  return s == Setting::kBlackBox ? "black-box" : "white-box";
}

Setting ParseSetting(const std::string& s) {
  if (s == "white-box" || s == "whitebox") return Setting::kWhiteBox;
  if (s == "black-box" || s == "blackbox") return Setting::kBlackBox;
  throw ConfigError("unknown setting '" + s + "'");
}

const char* QuestionKindName(QuestionKind q) {
  return q == QuestionKind::kSameCategory ? "same-category" : "link";
}

QuestionKind ParseQuestionKind(const std::string& s) {
  if (s == "link") return QuestionKind::kLink;
  if (s == "same-category") return QuestionKind::kSameCategory;
  throw ValidationError("unknown question kind '" + s + "'");
}

void PromptConfig::Check() const {
  if (probability_precision < 1) {
    throw ConfigError("probability_precision must be at least 1");
  }
  if (max_abstract_chars < 0) throw ConfigError("max_abstract_chars is negative");
  if (!include_posteriors && !include_text) {
    throw ConfigError("prompt config includes neither posteriors nor text");
  }
}

std::string FormatProbabilities(const Eigen::Ref<const Eigen::RowVectorXd>& p,
                                int precision) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (i > 0) out += ", ";
    out += fmt::format("{:.{}f}", p(i), precision);
  }
  out += "]";
  return out;
}

std::string TruncateUtf8(const std::string& text, int max_chars, bool* truncated) {
  if (truncated) *truncated = false;
  int count = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    // Continuation bytes do not start a code point.
    if ((static_cast<unsigned char>(text[i]) & 0xC0) == 0x80) continue;
    if (count == max_chars) {
      if (truncated) *truncated = true;
      return text.substr(0, i) + kTruncationMarker;
    }
    ++count;
  }
  return text;
}

RenderedPair RenderPairInfo(const NodePair& pair, const Graph& graph,
                            const PosteriorMatrix* posteriors,
                            const PromptConfig& config) {
  const bool use_text = config.include_text && graph.HasText();
  if (!use_text && !config.include_posteriors) {
    throw ConfigError("nothing to render for dataset '" + graph.name +
                      "': it has no text and posteriors are excluded");
  }
  if (config.probability_precision < 1) {
    throw ConfigError("probability_precision must be at least 1");
  }
  const NodeId ids[2] = {std::min(pair.u, pair.v), std::max(pair.u, pair.v)};
  for (NodeId id : ids) {
    if (id < 0 || id >= graph.num_nodes) {
      throw ContractError(fmt::format("node {} outside graph '{}'", id, graph.name));
    }
  }
  RenderedPair out;
  if (use_text) {
    for (int k = 0; k < 2; ++k) {
      const auto& t = graph.text[ids[k]];
      bool cut = false;
      const std::string abstract =
          TruncateUtf8(TextOf(t, false), config.max_abstract_chars, &cut);
      out.truncated = out.truncated || cut;
      out.text += fmt::format("Paper {}:\ntitle: {}\nabstract: {}\n\n", k + 1,
                              TextOf(t, true), abstract);
    }
  }
  if (config.include_posteriors) {
    if (!posteriors) throw ContractError("posteriors requested but not supplied");
    for (int k = 0; k < 2; ++k) {
      if (ids[k] >= posteriors->num_nodes()) {
        throw ContractError(fmt::format("no posterior row for node {}", ids[k]));
      }
      out.text += fmt::format(
          "Paper {} posterior probabilities: {}\n", k + 1,
          FormatProbabilities(posteriors->rows.row(ids[k]),
                              config.probability_precision));
    }
    out.text += "\n";
  }
  return out;
}

std::string RenderUserText(const NodePair& pair, const Graph& graph,
                           const PosteriorMatrix* posteriors,
                           const PromptConfig& config, QuestionKind question) {
  return RenderPairInfo(pair, graph, posteriors, config).text +
         fmt::format("Question: {} Answer Yes or No.",
                     question == QuestionKind::kLink ? kLinkQuestion
                                                     : kSameCategoryQuestion);
}

bool PromptRecord::HasAnswer() const {
  return !messages.empty() && messages.back().role == "assistant";
}

namespace {

PromptRecord MakeRecord(const NodePair& pair, const PromptConfig& config,
                        const Graph& graph, const PosteriorMatrix* posteriors,
                        QuestionKind question) {
  PromptRecord r;
  r.dataset = pair.dataset.empty() ? graph.name : pair.dataset;
  r.u = std::min(pair.u, pair.v);
  r.v = std::max(pair.u, pair.v);
  r.question_kind = question;
  r.messages.push_back({"system", kSystemPreamble});
  r.messages.push_back(
      {"user", RenderUserText(pair, graph, posteriors, config, question)});
  return r;
}

}  // namespace

PromptRecord BuildFinetuneRecord(const NodePair& pair, const PromptConfig& config,
                                 const Graph& graph,
                                 const PosteriorMatrix* posteriors) {
  bool yes = false;
  QuestionKind question = QuestionKind::kLink;
  if (config.setting == Setting::kWhiteBox) {
    if (!pair.link_label) {
      throw ContractError(fmt::format(
          "white-box record for ({}, {}) needs a link label", pair.u, pair.v));
    }
    yes = *pair.link_label == LinkLabel::kLink;
  } else {
    if (!pair.shadow_label) {
      throw ContractError(fmt::format(
          "black-box record for ({}, {}) needs a shadow label", pair.u, pair.v));
    }
    yes = *pair.shadow_label == ShadowLabel::kSame;
    question = QuestionKind::kSameCategory;
  }
  PromptRecord r = MakeRecord(pair, config, graph, posteriors, question);
  r.messages.push_back({"assistant", yes ? "Yes" : "No"});
  return r;
}

PromptRecord BuildInferenceRecord(const NodePair& pair, const PromptConfig& config,
                                  const Graph& graph,
                                  const PosteriorMatrix* posteriors) {
  return MakeRecord(pair, config, graph, posteriors, QuestionKind::kLink);
}

FinetuneSet BuildFinetuneSet(const PairSet& pairs, const PromptConfig& config,
                             const Graph& graph,
                             const PosteriorMatrix* posteriors) {
  config.Check();
  FinetuneSet set;
  set.shuffle_seed = pairs.seed;
  set.records.reserve(pairs.size());
  for (const NodePair& p : pairs.pairs) {
    set.records.push_back(BuildFinetuneRecord(p, config, graph, posteriors));
    CountRecord(set, set.records.back());
  }
  return set;
}

FinetuneSet MergeFinetuneSets(const std::vector<FinetuneSet>& sets,
                              uint64_t seed) {
  if (sets.empty()) throw ContractError("merge needs at least one set");
  FinetuneSet out;
  out.shuffle_seed = seed;
  for (const FinetuneSet& s : sets) {
    out.records.insert(out.records.end(), s.records.begin(), s.records.end());
    for (const auto& [name, n] : s.source_counts) out.source_counts[name] += n;
  }
  std::mt19937_64 rng(seed);
  std::shuffle(out.records.begin(), out.records.end(), rng);
  return out;
}

std::string RecordToJsonLine(const PromptRecord& r) {
  ojson messages = ojson::array();
  for (const ChatMessage& m : r.messages) {
    messages.push_back(ojson{{"role", m.role}, {"content", m.content}});
  }
  ojson line{{"messages", std::move(messages)},
             {"meta",
              ojson{{"dataset", r.dataset},
                    {"u", r.u},
                    {"v", r.v},
                    {"question_kind", QuestionKindName(r.question_kind)}}}};
  return line.dump(-1, ' ', false, ojson::error_handler_t::replace);
}

PromptRecord RecordFromJsonLine(const std::string& line) {
  PromptRecord r;
  try {
    const ojson j = ojson::parse(line);
    for (const auto& m : j.at("messages")) {
      r.messages.push_back(
          {m.at("role").get<std::string>(), m.at("content").get<std::string>()});
    }
    const auto& meta = j.at("meta");
    r.dataset = meta.at("dataset").get<std::string>();
    r.u = meta.at("u").get<NodeId>();
    r.v = meta.at("v").get<NodeId>();
    r.question_kind = ParseQuestionKind(meta.at("question_kind").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(e.what());
  }
  if (r.messages.size() < 2 || r.messages[0].role != "system" ||
      r.messages[1].role != "user") {
    throw ValidationError("messages must start with system and user");
  }
  if (r.messages.size() > 3 ||
      (r.messages.size() == 3 && r.messages[2].role != "assistant")) {
    throw ValidationError("unexpected message after user");
  }
  if (r.HasAnswer() && r.messages[2].content != "Yes" &&
      r.messages[2].content != "No") {
    throw ValidationError("assistant answer must be Yes or No, got '" +
                          r.messages[2].content + "'");
  }
  return r;
}

int64_t ExportJsonl(const std::vector<PromptRecord>& records,
                    const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  for (const PromptRecord& r : records) out << RecordToJsonLine(r) << "\n";
  if (!out) throw LoadError("write failed for " + path.string());
  return static_cast<int64_t>(records.size());
}

FinetuneSet ImportJsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  FinetuneSet set;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      set.records.push_back(RecordFromJsonLine(line));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
    CountRecord(set, set.records.back());
  }
  return set;
}

}  // namespace linksteal
