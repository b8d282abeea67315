// Copyright 2026 The EMM Monitor Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace emm {

/// Caller supplied data that violates an operation's precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// default_policy() was asked for an ensemble size it has no thresholds for.
class UnsupportedEnsembleSize : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// An error-detection curve could not be built (e.g. the dataset has no errors).
class CurveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fewer than two usable points for a trapezoidal area.
class UndefinedAuc : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A bootstrapped metric was undefined on more than half of the draws.
class UnstableMetric : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A log entry failed schema validation; nothing was written.
class SchemaError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// I/O failure on a log or dataset file. The message carries the path.
class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace emm
