// Copyright 2026 The flexauction Authors
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

namespace flexauction {

// Argument outside the mathematical domain of an operation (bad level,
// valuation outside the support, mismatched dimensions).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Target value beyond the range of a monotone map (e.g. a virtual valuation
// larger than w(theta_max)).
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

// A consumer type model violates its own invariants or a distributional
// assumption the mechanism relies on.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Brute-force enumeration would exceed its size guard.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Caller broke a documented precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed configuration, model or profile file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flexauction
