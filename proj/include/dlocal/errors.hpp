/*
 *   Copyright 2026 The dlocal Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dlocal {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied parameters that are out of range or inconsistent.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A message pattern the active communication model does not permit.
class ModelViolation : public Error {
 public:
  using Error::Error;
};

/// Lenzen routing demand exceeding the per-node n-in / n-out quota.
class QuotaError : public Error {
 public:
  QuotaError(std::uint32_t node, const std::string& what)
      : Error(what), node_(node) {}
  std::uint32_t node() const noexcept { return node_; }

 private:
  std::uint32_t node_;
};

/// Seed enumeration would exceed the configured budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// A minimized estimator starts at or above its feasibility threshold
/// (or a maximized one starts below it).
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::string value, const std::string& what)
      : Error(what), value_(std::move(value)) {}
  /// Offending estimator value as an exact "p/q" string.
  const std::string& value() const noexcept { return value_; }

 private:
  std::string value_;
};

/// An internal invariant did not hold. Always a bug.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// A proven round/size bound was not met on this instance.
class BoundViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace dlocal
