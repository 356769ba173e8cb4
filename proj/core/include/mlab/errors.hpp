// Copyright 2026 The momentum-lab Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlab {

// Input rejected before any computation ran.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UsageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A computation started but could not produce a trustworthy number.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonMorseError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class TopologyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class GenericAssumptionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotIndexOneError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ClassificationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoMetastabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : NumericalError(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class HorizonError : public NumericalError {
 public:
  HorizonError(const std::string& what, std::size_t censored, std::size_t total)
      : NumericalError(what), censored_(censored), total_(total) {}
  std::size_t censored() const noexcept { return censored_; }
  std::size_t total() const noexcept { return total_; }

 private:
  std::size_t censored_;
  std::size_t total_;
};

class InconclusiveError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BoxTooSmallError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SolverError : public NumericalError {
 public:
  SolverError(const std::string& what, std::vector<double> residuals)
      : NumericalError(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& best_residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

}  // namespace mlab
