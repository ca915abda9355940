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

#include "linksteal/config.h"

#include <cstdlib>

#include "linksteal/errors.h"

namespace linksteal {
namespace {

using json = nlohmann::json;

template <typename T>
void Read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

void RequireObject(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

}  // namespace

void RejectUnknownKeys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

json ToJson(const ModelConfig& c) {
  return {{"arch", ArchitectureName(c.arch)},
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
}

ModelConfig ModelConfigFromJson(const json& j) {
  const std::string where = "model";
  RequireObject(j, where);
  RejectUnknownKeys(j,
                    {"arch", "num_layers", "hidden_dim", "dropout", "learning_rate",
                     "weight_decay", "epochs", "seed", "gat_heads",
                     "gat_leaky_slope", "optimizer"},
                    where);
  ModelConfig c;
  std::string arch = ArchitectureName(c.arch), opt = OptimizerName(c.optimizer);
  Read(j, "arch", arch, where);
  Read(j, "optimizer", opt, where);
  c.arch = ParseArchitecture(arch);
  c.optimizer = ParseOptimizer(opt);
  Read(j, "num_layers", c.num_layers, where);
  Read(j, "hidden_dim", c.hidden_dim, where);
  Read(j, "dropout", c.dropout, where);
  Read(j, "learning_rate", c.learning_rate, where);
  Read(j, "weight_decay", c.weight_decay, where);
  Read(j, "epochs", c.epochs, where);
  Read(j, "seed", c.seed, where);
  Read(j, "gat_heads", c.gat_heads, where);
  Read(j, "gat_leaky_slope", c.gat_leaky_slope, where);
  c.Check();
  return c;
}

json ToJson(const MlpConfig& c) {
  return {{"hidden_dims", c.hidden_dims},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"seed", c.seed}};
}

MlpConfig MlpConfigFromJson(const json& j) {
  const std::string where = "mlp";
  RequireObject(j, where);
  RejectUnknownKeys(j, {"hidden_dims", "epochs", "learning_rate", "batch_size", "seed"},
                    where);
  MlpConfig c;
  Read(j, "hidden_dims", c.hidden_dims, where);
  Read(j, "epochs", c.epochs, where);
  Read(j, "learning_rate", c.learning_rate, where);
  Read(j, "batch_size", c.batch_size, where);
  Read(j, "seed", c.seed, where);
  c.Check();
  return c;
}

json ToJson(const PromptConfig& c) {
  return {{"probability_precision", c.probability_precision},
          {"max_abstract_chars", c.max_abstract_chars},
          {"include_posteriors", c.include_posteriors},
          {"include_text", c.include_text},
          {"setting", SettingName(c.setting)}};
}

PromptConfig PromptConfigFromJson(const json& j) {
  const std::string where = "prompt";
  RequireObject(j, where);
  RejectUnknownKeys(j,
                    {"probability_precision", "max_abstract_chars",
                     "include_posteriors", "include_text", "setting"},
                    where);
  PromptConfig c;
  std::string setting = SettingName(c.setting);
  Read(j, "probability_precision", c.probability_precision, where);
  Read(j, "max_abstract_chars", c.max_abstract_chars, where);
  Read(j, "include_posteriors", c.include_posteriors, where);
  Read(j, "include_text", c.include_text, where);
  Read(j, "setting", setting, where);
  c.setting = ParseSetting(setting);
  c.Check();
  return c;
}

json ToJson(const EndpointConfig& c) {
  return {{"base_url", c.base_url},
          {"model_name", c.model_name},
          {"temperature", c.temperature},
          {"max_tokens", c.max_tokens},
          {"timeout_s", c.timeout_s},
          {"max_retries", c.max_retries},
          {"backoff_ms", c.backoff_ms},
          {"max_in_flight", c.max_in_flight},
          {"send_pair_metadata", c.send_pair_metadata}};
}

EndpointConfig EndpointConfigFromJson(const json& j) {
  const std::string where = "endpoint";
  RequireObject(j, where);
  RejectUnknownKeys(j,
                    {"base_url", "model_name", "temperature", "max_tokens",
                     "timeout_s", "max_retries", "backoff_ms", "max_in_flight",
                     "send_pair_metadata", "api_key_env"},
                    where);
  EndpointConfig c;
  Read(j, "base_url", c.base_url, where);
  Read(j, "model_name", c.model_name, where);
  Read(j, "temperature", c.temperature, where);
  Read(j, "max_tokens", c.max_tokens, where);
  Read(j, "timeout_s", c.timeout_s, where);
  Read(j, "max_retries", c.max_retries, where);
  Read(j, "backoff_ms", c.backoff_ms, where);
  Read(j, "max_in_flight", c.max_in_flight, where);
  Read(j, "send_pair_metadata", c.send_pair_metadata, where);
  std::string key_env;
  Read(j, "api_key_env", key_env, where);
  if (!key_env.empty()) {
    const char* key = std::getenv(key_env.c_str());
    if (!key) throw ConfigError("environment variable " + key_env + " is not set");
    c.api_key = key;
  }
  c.Check();
  return c;
}

}  // namespace linksteal
