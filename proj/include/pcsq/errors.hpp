// Copyright 2026 The pcsq Authors
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

namespace pcsq {

/// Base class for every error raised by the library. `exit_code()` is the
/// process status the CLI reports for this error category.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

class InvalidArgument : public Error {
   public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class ConfigError : public Error {
   public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class IngestError : public Error {
   public:
    IngestError(const std::string &what, long line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    long line() const noexcept { return line_; }
    int exit_code() const noexcept override { return 3; }

   private:
    long line_;
};

/// NaN/Inf or an undefined logarithm encountered during evaluation.
class NumericError : public Error {
   public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

/// The modelled function integrates to zero (or is identically zero).
class DegenerateModel : public Error {
   public:
    using Error::Error;
    int exit_code() const noexcept override { return 5; }
};

/// An input value lies outside the domain of an input family.
class DomainError : public Error {
   public:
    using Error::Error;
    int exit_code() const noexcept override { return 6; }
};

class UnsupportedStructure : public Error {
   public:
    using Error::Error;
    int exit_code() const noexcept override { return 7; }
};

class UnsupportedOperation : public Error {
   public:
    using Error::Error;
    int exit_code() const noexcept override { return 7; }
};

class PreconditionViolation : public Error {
   public:
    using Error::Error;
    int exit_code() const noexcept override { return 8; }
};

}  // namespace pcsq
