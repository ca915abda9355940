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

// Prompt rendering for node pairs, fine-tuning corpora and the JSONL wire
// format shared with the fine-tuning tools.

#ifndef LINKSTEAL_PROMPTS_H_
#define LINKSTEAL_PROMPTS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "linksteal/gnn.h"
#include "linksteal/graph.h"
#include "linksteal/pairs.h"

namespace linksteal {

inline constexpr char kPromptTemplateVersion[] = "prompt_template_v1";
inline constexpr char kSystemPreamble[] =
    "You are given information about two papers from a citation network. "
    "Answer the question about them with Yes or No.";
inline constexpr char kLinkQuestion[] = "do they have a link?";
inline constexpr char kSameCategoryQuestion[] =
    "Do they belong to the same category?";
inline constexpr char kTruncationMarker[] = "\xE2\x80\xA6";  // U+2026

enum class Setting { kWhiteBox, kBlackBox };
const char* SettingName(Setting s);  // "white-box" / "black-box"
Setting ParseSetting(const std::string& s);

enum class QuestionKind { kLink, kSameCategory };
const char* QuestionKindName(QuestionKind q);  // "link" / "same-category"
QuestionKind ParseQuestionKind(const std::string& s);

struct PromptConfig {
  int probability_precision = 2;
  int max_abstract_chars = 1500;  // Unicode code points
  bool include_posteriors = true;
  bool include_text = true;
  Setting setting = Setting::kWhiteBox;

  void Check() const;  // ConfigError
};

// Fixed-precision list, e.g. "[0.05, 0.58]". Rounds the exact binary value
// to nearest, ties to even.
std::string FormatProbabilities(const Eigen::Ref<const Eigen::RowVectorXd>& p,
                                int precision);

// First `max_chars` code points of UTF-8 text followed by the marker, or the
// text unchanged when it is short enough.
std::string TruncateUtf8(const std::string& text, int max_chars, bool* truncated);

struct RenderedPair {
  std::string text;  // pair info, without the question line
  bool truncated = false;
};

// With text, the title/abstract blocks come first and the text-free render
// follows verbatim, so the text-free prompt is a substring of the full one.
// Text is dropped silently for graphs without text; ConfigError when that
// leaves nothing to render. `posteriors` may be null when posteriors are
// excluded.
RenderedPair RenderPairInfo(const NodePair& pair, const Graph& graph,
                            const PosteriorMatrix* posteriors,
                            const PromptConfig& config);

// Pair info followed by the question line.
std::string RenderUserText(const NodePair& pair, const Graph& graph,
                           const PosteriorMatrix* posteriors,
                           const PromptConfig& config, QuestionKind question);

struct ChatMessage {
  std::string role;
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct PromptRecord {
  std::vector<ChatMessage> messages;
  std::string dataset;
  NodeId u = 0;
  NodeId v = 0;
  QuestionKind question_kind = QuestionKind::kLink;

  bool HasAnswer() const;
  friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

// White-box: link question, answer from link_label. Black-box: same-category
// question, answer from shadow_label. ContractError if the label is missing.
PromptRecord BuildFinetuneRecord(const NodePair& pair, const PromptConfig& config,
                                 const Graph& graph,
                                 const PosteriorMatrix* posteriors);

// Always the link question, never an answer.
PromptRecord BuildInferenceRecord(const NodePair& pair, const PromptConfig& config,
                                  const Graph& graph,
                                  const PosteriorMatrix* posteriors);

struct FinetuneSet {
  std::vector<PromptRecord> records;
  std::map<std::string, int64_t> source_counts;
  uint64_t shuffle_seed = 0;
};

FinetuneSet BuildFinetuneSet(const PairSet& pairs, const PromptConfig& config,
                             const Graph& graph,
                             const PosteriorMatrix* posteriors);

// Union with a seeded shuffle. Posterior widths may differ between sets.
FinetuneSet MergeFinetuneSets(const std::vector<FinetuneSet>& sets,
                              uint64_t seed);

// One JSON object per line: {"messages":[...],"meta":{...}}.
std::string RecordToJsonLine(const PromptRecord& record);
PromptRecord RecordFromJsonLine(const std::string& line);

int64_t ExportJsonl(const std::vector<PromptRecord>& records,
                    const std::filesystem::path& path);
// ValidationError naming the line number of the first malformed line.
FinetuneSet ImportJsonl(const std::filesystem::path& path);

}  // namespace linksteal

#endif  // LINKSTEAL_PROMPTS_H_
