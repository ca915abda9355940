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

#include "linksteal/mock_server.h"

#include <chrono>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "linksteal/baselines.h"
#include "linksteal/errors.h"

namespace linksteal {
namespace {

using json = nlohmann::json;

constexpr char kUndecided[] = "I cannot determine this.";

NodeId MetaNode(const json& meta, const char* key) {
  const json& v = meta.at(key);
  if (v.is_string()) return static_cast<NodeId>(std::stol(v.get<std::string>()));
  return v.get<NodeId>();
}

json Completion(int64_t id, const std::string& model, const std::string& text) {
  return {{"id", fmt::format("mock-{}", id)},
          {"object", "chat.completion"},
          {"model", model},
          {"choices",
           json::array({{{"index", 0},
                         {"message", {{"role", "assistant"}, {"content", text}}},
                         {"finish_reason", "stop"}}})}};
}

}  // namespace

const char* MockModeName(MockMode m) {
  switch (m) {
    case MockMode::kOracle:
      return "oracle";
    case MockMode::kConstantYes:
      return "constant-yes";
    case MockMode::kPosteriorCosine:
      return "posterior-cosine";
  }
  return "?";
}

MockMode ParseMockMode(const std::string& s) {
  if (s == "oracle") return MockMode::kOracle;
  if (s == "constant-yes") return MockMode::kConstantYes;
  if (s == "posterior-cosine") return MockMode::kPosteriorCosine;
  throw ConfigError("unknown mock mode '" + s + "'");
}

MockServer::MockServer(MockOptions options, MockData data)
    : options_(options), data_(std::move(data)) {}

MockServer::~MockServer() { Stop(); }

std::string MockServer::Answer(const json& request) const {
  if (!request.is_object() || !request.contains("messages") ||
      !request["messages"].is_array()) {
    throw ValidationError("request has no messages array");
  }
  if (options_.mode == MockMode::kConstantYes) return "Yes";

  std::string dataset;
  NodeId u = 0, v = 0;
  try {
    const json& meta = request.at("metadata");
    dataset = meta.at("dataset").get<std::string>();
    u = MetaNode(meta, "u");
    v = MetaNode(meta, "v");
  } catch (const std::exception& e) {
    throw ValidationError(std::string("request metadata missing or malformed: ") +
                          e.what());
  }
  if (options_.mode == MockMode::kOracle) {
    auto it = data_.graphs.find(dataset);
    if (it == data_.graphs.end()) {
      throw ValidationError("mock has no graph for dataset '" + dataset + "'");
    }
    const Graph& g = *it->second;
    if (u < 0 || v < 0 || u >= g.num_nodes || v >= g.num_nodes) {
      throw ValidationError(fmt::format("pair ({}, {}) outside '{}'", u, v, dataset));
    }
    return g.HasEdge(u, v) ? "Yes" : "No";
  }
  auto it = data_.posteriors.find(dataset);
  if (it == data_.posteriors.end()) {
    throw ValidationError("mock has no posteriors for dataset '" + dataset + "'");
  }
  const PosteriorMatrix& p = *it->second;
  if (u < 0 || v < 0 || u >= p.num_nodes() || v >= p.num_nodes()) {
    throw ValidationError(fmt::format("pair ({}, {}) outside '{}'", u, v, dataset));
  }
  try {
    const double d =
        PairDistance(MetricKind::kCosine, p.rows.row(u), p.rows.row(v));
    return d <= options_.tau ? "Yes" : "No";
  } catch (const MetricUndefinedError&) {
    return kUndecided;
  }
}

void MockServer::Start(const std::string& host, int port) {
  if (server_) throw ContractError("mock server already started");
  server_ = std::make_unique<httplib::Server>();
  server_->new_task_queue = [] { return new httplib::ThreadPool(16); };
  // The library default adds SO_REUSEPORT, which lets a second server bind a
  // port that is already listening.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  server_->Post("/v1/chat/completions", [this](const httplib::Request& req,
                                               httplib::Response& res) {
    const int now = ++in_flight_;
    int seen = max_in_flight_.load();
    while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
    }
    const int64_t id = requests_++;
    if (options_.delay_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(options_.delay_ms));
    }
    if (id < options_.fail_first_n) {
      res.status = 500;
      res.set_content(R"({"error":"scripted failure"})", "application/json");
    } else {
      json body = json::parse(req.body, nullptr, false);
      if (body.is_discarded()) {
        res.status = 400;
        res.set_content(R"({"error":"malformed JSON"})", "application/json");
      } else {
        try {
          const std::string text = Answer(body);
          json reply = Completion(id, body.value("model", "mock"), text);
          if (options_.omit_choices) reply.erase("choices");
          res.set_content(reply.dump(), "application/json");
        } catch (const ValidationError& e) {
          res.status = 400;
          res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        }
      }
    }
    --in_flight_;
  });
  server_->Get("/mock/stats", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"mode", MockModeName(options_.mode)},
                         {"requests", requests_.load()},
                         {"max_in_flight", max_in_flight_.load()}}
                        .dump(),
                    "application/json");
  });

  host_ = host;
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    if (port_ < 0) throw Error("mock server cannot bind " + host);
  } else {
    if (!server_->bind_to_port(host, port)) {
      server_.reset();
      throw Error(fmt::format("mock server cannot bind {}:{} (port busy?)", host, port));
    }
    port_ = port;
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  // stop() is a no-op until the listen loop is running.
  server_->wait_until_ready();
  spdlog::info("mock endpoint ({}) listening on {}", MockModeName(options_.mode),
               base_url());
}

void MockServer::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void MockServer::Wait() {
  if (thread_.joinable()) thread_.join();
}

std::string MockServer::base_url() const {
  return fmt::format("http://{}:{}", host_, port_);
}

}  // namespace linksteal
