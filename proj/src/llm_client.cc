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

#include "linksteal/llm_client.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "linksteal/errors.h"

namespace linksteal {
namespace {

using json = nlohmann::json;

struct Target {
  std::string origin;  // scheme://host[:port]
  std::string path;    // full request path
};

Target ParseBaseUrl(const std::string& base_url) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(base_url, m, kUrl)) {
    throw ConfigError("endpoint base_url must look like http://host:port, got '" +
                      base_url + "'");
  }
  std::string prefix = m[2].str();
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {m[1].str(), prefix + "/v1/chat/completions"};
}

std::unique_ptr<httplib::Client> MakeClient(const Target& target,
                                            const EndpointConfig& endpoint) {
  auto client = std::make_unique<httplib::Client>(target.origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(endpoint.timeout_s));
  client->set_connection_timeout(timeout);
  client->set_read_timeout(timeout);
  client->set_write_timeout(timeout);
  if (!endpoint.api_key.empty()) {
    client->set_bearer_token_auth(endpoint.api_key);
  }
  return client;
}

Verdict Query(httplib::Client& client, const Target& target,
              const PromptRecord& record, const EndpointConfig& endpoint) {
  if (record.HasAnswer()) {
    throw ContractError(fmt::format("record ({}, {}) carries an answer; inference "
                                    "records must not",
                                    record.u, record.v));
  }
  const std::string body = BuildChatRequest(record, endpoint).dump();
  int last_status = -1;
  std::string last_problem;
  for (int attempt = 0; attempt <= endpoint.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(endpoint.backoff_ms << (attempt - 1)));
    }
    auto res = client.Post(target.path, body, "application/json");
    if (!res) {
      last_status = -1;
      last_problem = httplib::to_string(res.error());
      continue;
    }
    last_status = res->status;
    if (res->status >= 500) {
      last_problem = fmt::format("HTTP {}", res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError(
          fmt::format("endpoint answered HTTP {}: {}", res->status, res->body),
          res->status);
    }
    return ParseVerdict(ExtractCompletion(res->body));
  }
  throw TransportError(fmt::format("{} attempts failed, last: {}",
                                   endpoint.max_retries + 1, last_problem),
                       last_status);
}

}  // namespace

void EndpointConfig::Check() const {
  ParseBaseUrl(base_url);
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (!(timeout_s > 0.0)) throw ConfigError("timeout must be positive");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (backoff_ms < 0) throw ConfigError("backoff_ms must be >= 0");
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
}

Verdict ParseVerdict(const std::string& text) {
  Verdict v;
  v.raw_text = text;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    size_t begin = 0, end = token.size();
    while (begin < end && std::ispunct(static_cast<unsigned char>(token[begin]))) ++begin;
    while (end > begin && std::ispunct(static_cast<unsigned char>(token[end - 1]))) --end;
    std::string word = token.substr(begin, end - begin);
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (word == "yes") {
      v.prediction = Prediction::kLink;
      return v;
    }
    if (word == "no") {
      v.prediction = Prediction::kUnlink;
      return v;
    }
  }
  return v;
}

json BuildChatRequest(const PromptRecord& record, const EndpointConfig& endpoint) {
  json messages = json::array();
  for (const ChatMessage& m : record.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  json body{{"model", endpoint.model_name},
            {"messages", std::move(messages)},
            {"temperature", endpoint.temperature},
            {"max_tokens", endpoint.max_tokens}};
  if (endpoint.send_pair_metadata) {
    body["metadata"] = {{"dataset", record.dataset},
                        {"u", std::to_string(record.u)},
                        {"v", std::to_string(record.v)}};
  }
  return body;
}

std::string ExtractCompletion(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("response is not JSON: ") + e.what());
  }
  try {
    const json& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return "";
    return content.get<std::string>();
  } catch (const json::exception&) {
    throw ProtocolError("response lacks choices[0].message.content: " +
                        body.substr(0, 200));
  }
}

Verdict QueryVerdict(const PromptRecord& record, const EndpointConfig& endpoint) {
  endpoint.Check();
  const Target target = ParseBaseUrl(endpoint.base_url);
  auto client = MakeClient(target, endpoint);
  return Query(*client, target, record, endpoint);
}

std::vector<Prediction> LlmRun::Predictions() const {
  std::vector<Prediction> out;
  out.reserve(verdicts.size());
  for (const Verdict& v : verdicts) out.push_back(v.prediction);
  return out;
}

LlmRun RunAttack(const std::vector<PromptRecord>& records,
                 const EndpointConfig& endpoint) {
  endpoint.Check();
  const Target target = ParseBaseUrl(endpoint.base_url);
  LlmRun run;
  run.verdicts.resize(records.size());
  std::atomic<size_t> next{0};
  std::mutex failures_mu;
  std::vector<std::pair<size_t, std::string>> failures;
  int first_status = -1;

  auto worker = [&] {
    auto client = MakeClient(target, endpoint);
    for (size_t i = next++; i < records.size(); i = next++) {
      try {
        run.verdicts[i] = Query(*client, target, records[i], endpoint);
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lock(failures_mu);
        if (failures.empty()) {
          if (const auto* t = dynamic_cast<const TransportError*>(&e)) {
            first_status = t->last_status();
          }
        }
        failures.emplace_back(i, e.what());
      }
    }
  };
  const size_t workers =
      std::min<size_t>(endpoint.max_in_flight, std::max<size_t>(records.size(), 1));
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    std::string list;
    for (size_t k = 0; k < failures.size() && k < 10; ++k) {
      list += fmt::format("{}#{}: {}", k ? "; " : "", failures[k].first,
                          failures[k].second);
    }
    if (failures.size() > 10) list += fmt::format("; {} more", failures.size() - 10);
    throw TransportError(fmt::format("{} of {} requests failed ({})", failures.size(),
                                     records.size(), list),
                         first_status);
  }
  for (const Verdict& v : run.verdicts) {
    run.unparseable += v.prediction == Prediction::kUnparseable;
  }
  if (run.unparseable > 0) {
    spdlog::warn("{} of {} completions were unparseable", run.unparseable,
                 records.size());
  }
  return run;
}

}  // namespace linksteal
