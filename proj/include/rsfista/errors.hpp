// Copyright 2026 The rsfista Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RSFISTA_ERRORS_HPP
#define RSFISTA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rsfista {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidRefinement : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A dual vector outside the domain of the conjugate fidelity.
class InfeasibleDual : public Error {
 public:
  using Error::Error;
};

/// A negative gap beyond the numerical floor; indicates an unsound bound.
class SoundnessError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration document. `path` is the offending JSON key path.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace rsfista

#endif  // RSFISTA_ERRORS_HPP
