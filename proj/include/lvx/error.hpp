// Copyright 2026 The lvx Authors. All Rights Reserved.
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

namespace lvx {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or layer shapes disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or arguments (CLI exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A dataset manifest or annotation failed validation.
class ValidationError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// quantize_model was given stats that do not cover some activation tensor.
class CalibrationCoverageError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A metric was requested over an empty evaluation.
class UndefinedInputError : public Error {
 public:
  using Error::Error;
};

/// File system failure (CLI exit code 2).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed on-disk data (CLI exit code 2).
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

class MagicMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedFileError : public FormatError {
 public:
  using FormatError::FormatError;
};

class ChecksumMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Broken internal invariant; indicates a bug, not bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lvx
