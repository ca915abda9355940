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

// Chat-completions client: sends inference prompts, parses Yes/No verdicts.

#ifndef LINKSTEAL_LLM_CLIENT_H_
#define LINKSTEAL_LLM_CLIENT_H_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "linksteal/eval.h"
#include "linksteal/prompts.h"

namespace linksteal {

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8089";
  std::string model_name = "linksteal-attack";
  double temperature = 0.0;
  int max_tokens = 8;
  double timeout_s = 60.0;
  int max_retries = 3;
  int backoff_ms = 250;  // doubled after every failed attempt
  int max_in_flight = 4;
  std::string api_key;  // sent as a bearer token when non-empty
  // Adds {"metadata":{"dataset","u","v"}} (string values) so test endpoints
  // can look the pair up. Gold labels are never sent.
  bool send_pair_metadata = true;

  void Check() const;  // ConfigError
};

struct Verdict {
  Prediction prediction = Prediction::kUnparseable;
  std::string raw_text;
};

// First standalone "yes" or "no" token, case-insensitive, punctuation
// stripped from token edges.
Verdict ParseVerdict(const std::string& text);

nlohmann::json BuildChatRequest(const PromptRecord& record,
                                const EndpointConfig& endpoint);

// choices[0].message.content of a response body. ProtocolError otherwise.
std::string ExtractCompletion(const std::string& body);

// One request with retries on transport failures and 5xx responses.
// TransportError once retries are exhausted or on other non-200 statuses,
// ProtocolError on a malformed body, ContractError if the record carries an
// answer.
Verdict QueryVerdict(const PromptRecord& record, const EndpointConfig& endpoint);

struct LlmRun {
  std::vector<Verdict> verdicts;  // aligned with the input records
  int64_t unparseable = 0;

  std::vector<Prediction> Predictions() const;
};

// Up to max_in_flight concurrent requests. When any record fails, throws a
// TransportError listing the failed record indices.
LlmRun RunAttack(const std::vector<PromptRecord>& records,
                 const EndpointConfig& endpoint);

}  // namespace linksteal

#endif  // LINKSTEAL_LLM_CLIENT_H_
