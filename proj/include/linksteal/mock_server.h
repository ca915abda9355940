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

// In-process chat-completions endpoint with scripted answers, used by tests,
// the acceptance suite and the serve-mock command.

#ifndef LINKSTEAL_MOCK_SERVER_H_
#define LINKSTEAL_MOCK_SERVER_H_

#include <atomic>
#include <map>
#include <memory>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "linksteal/gnn.h"
#include "linksteal/graph.h"

namespace httplib {
class Server;
}

namespace linksteal {

enum class MockMode { kOracle, kConstantYes, kPosteriorCosine };
const char* MockModeName(MockMode m);  // "oracle", "constant-yes", "posterior-cosine"
MockMode ParseMockMode(const std::string& s);

struct MockOptions {
  MockMode mode = MockMode::kOracle;
  double tau = 0.5;          // posterior-cosine: Yes iff distance <= tau
  int delay_ms = 0;          // per-request latency
  int fail_first_n = 0;      // answer HTTP 500 to the first n requests
  bool omit_choices = false; // reply 200 without a choices field
};

// Ground truth and posteriors by dataset name. The pointees must outlive the
// server.
struct MockData {
  std::map<std::string, const Graph*> graphs;
  std::map<std::string, const PosteriorMatrix*> posteriors;
};

class MockServer {
 public:
  MockServer(MockOptions options, MockData data);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  // Binds and serves on a background thread. Port 0 picks a free port.
  // Throws Error when the address cannot be bound.
  void Start(const std::string& host, int port);
  void Stop();
  // Blocks until Stop() is called from another thread.
  void Wait();

  int port() const { return port_; }
  std::string base_url() const;
  int64_t requests() const { return requests_.load(); }
  int max_in_flight() const { return max_in_flight_.load(); }

  // The completion text for a parsed request body. Throws ValidationError
  // when the body lacks what the mode needs.
  std::string Answer(const nlohmann::json& request) const;

 private:
  MockOptions options_;
  MockData data_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
  std::atomic<int64_t> requests_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
};

}  // namespace linksteal

#endif  // LINKSTEAL_MOCK_SERVER_H_
