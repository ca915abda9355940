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

// JSON forms of the component configs. Missing keys keep their defaults;
// unknown keys are a ConfigError so typos do not pass silently.

#ifndef LINKSTEAL_CONFIG_H_
#define LINKSTEAL_CONFIG_H_

#include <nlohmann/json.hpp>

#include "linksteal/baselines.h"
#include "linksteal/gnn.h"
#include "linksteal/llm_client.h"
#include "linksteal/prompts.h"

namespace linksteal {

nlohmann::json ToJson(const ModelConfig& c);
nlohmann::json ToJson(const MlpConfig& c);
nlohmann::json ToJson(const PromptConfig& c);
nlohmann::json ToJson(const EndpointConfig& c);  // api_key is never written

ModelConfig ModelConfigFromJson(const nlohmann::json& j);
MlpConfig MlpConfigFromJson(const nlohmann::json& j);
PromptConfig PromptConfigFromJson(const nlohmann::json& j);
EndpointConfig EndpointConfigFromJson(const nlohmann::json& j);

// ConfigError naming `where` and the first key of `j` not in `allowed`.
void RejectUnknownKeys(const nlohmann::json& j,
                       std::initializer_list<const char*> allowed,
                       const std::string& where);

}  // namespace linksteal

#endif  // LINKSTEAL_CONFIG_H_
