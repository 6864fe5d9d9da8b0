// Copyright 2026 The miaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace mia {

/// Base class for all library errors. The CLI maps subclasses to exit codes:
/// configuration problems -> 1, runtime/training problems -> 2, I/O -> 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration values or violated call preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Problems with ingested data content (CSV parsing and validation).
class DataError : public Error {
 public:
  using Error::Error;
};

class MissingColumnError : public DataError {
 public:
  using DataError::DataError;
};

class NonNumericCellError : public DataError {
 public:
  using DataError::DataError;
};

class SingleClassError : public DataError {
 public:
  using DataError::DataError;
};

/// Dimension, label-range, or alignment mismatches between runtime values.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Optimization failures (non-finite loss); message carries epoch/step.
class TrainError : public Error {
 public:
  using Error::Error;
};

/// Metric computations on degenerate inputs (e.g. single-class ground truth).
class EvalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Unrecognized version tag in a persisted report or model file.
class VersionError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace mia
