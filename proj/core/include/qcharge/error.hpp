// Copyright 2026 The qcharge Authors
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

namespace qcharge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument or a domain-type invariant was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A truncated basis or an iterative solver did not reach the requested tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}

  /// Best relative change (or residual) reached before giving up.
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Level identification could not choose between two candidate states.
class AmbiguityError : public Error {
 public:
  AmbiguityError(const std::string& what, int first, int second)
      : Error(what), first_(first), second_(second) {}

  int first() const noexcept { return first_; }
  int second() const noexcept { return second_; }

 private:
  int first_;
  int second_;
};

/// File, parse, or schema problem at the I/O boundary.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qcharge
