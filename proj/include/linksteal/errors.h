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

#ifndef LINKSTEAL_ERRORS_H_
#define LINKSTEAL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace linksteal {

// Root of every error thrown by the library. Callers that only need to
// report a failure can catch this; the subclasses name the failure kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or unreadable input file.
class LoadError : public Error {
 public:
  using Error::Error;
};

// Input data violates a structural invariant (ragged rows, bad labels...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Invalid user-supplied configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller broke a function precondition (shape mismatch, bad id, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Target-model training diverged.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Pair sampling could not satisfy the requested counts.
class SamplingError : public Error {
 public:
  using Error::Error;
};

// A distance is undefined for the given inputs (zero or constant vectors).
class MetricUndefinedError : public Error {
 public:
  using Error::Error;
};

// Attack inputs from datasets whose feature widths differ.
class IncompatibleDimensionsError : public Error {
 public:
  using Error::Error;
};

// Network failure or retry budget exhausted talking to an endpoint.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int last_status)
      : Error(what), last_status_(last_status) {}
  // HTTP status of the last attempt, or -1 when no response was received.
  int last_status() const { return last_status_; }

 private:
  int last_status_;
};

// Endpoint answered with a body that does not follow the wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Pipeline stage failure; wraps the underlying message with the stage name.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace linksteal

#endif  // LINKSTEAL_ERRORS_H_
