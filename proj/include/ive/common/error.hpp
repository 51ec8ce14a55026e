// Copyright 2026 The IVE-PIR Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace ive {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameter set (non-NTT-friendly modulus, z^ell < Q, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A value outside its mathematical domain (coefficient >= Q, index >= D).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// API misuse: domain-flag mismatch, wrong evk exponent, shape mismatch.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or mismatched serialized object (bad magic, params digest).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Protocol violation between client, server, and cluster peers.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// A schedule whose working set does not fit the modeled on-chip capacity.
class InfeasibleSchedule : public Error {
 public:
  using Error::Error;
};

/// Wraps an error with the PIR pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace ive
