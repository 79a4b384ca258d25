// Copyright 2026 The selftrig Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace selftrig {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
  kSuccess = 0,
  kConfig = 2,
  kNumeric = 3,
  kCertificate = 4,
  kScheduling = 5,
};

/// Base class for every error raised by the library. Each subclass maps to
/// one CLI exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

/// Malformed input: bad dimensions, non-PD weights, schema violations,
/// inadmissible networks, unreadable files.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
};

/// A wait that is not present in a gain table.
class LookupError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Riccati non-convergence, singular solves, loss of controllability.
class NumericError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kNumeric; }
};

class SynthesisError : public NumericError {
 public:
  using NumericError::NumericError;
};

class CertificateError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override {
    return ExitCode::kCertificate;
  }
};

/// Slot conflicts and empty feasible sets.
class SchedulingError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override {
    return ExitCode::kScheduling;
  }
};

}  // namespace selftrig
