// Copyright 2026 The CDS Authors
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

namespace cds
{

/// Invalid configuration or argument: a caller-side precondition was violated.
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Input data cannot be used as given (unreadable, malformed, degenerate).
class DataError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// The consistent pool came out empty, so no one-class model can be trained.
class EmptyPoolError : public DataError
{
public:
  using DataError::DataError;
};

/// An iterative solver stopped before meeting its tolerance.
class ConvergenceError : public std::runtime_error
{
public:
  ConvergenceError(const std::string & what, double final_violation)
  : std::runtime_error(what), final_violation_(final_violation)
  {
  }

  double final_violation() const noexcept { return final_violation_; }

private:
  double final_violation_;
};

}  // namespace cds
