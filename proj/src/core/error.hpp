// Copyright 2026 The Glyce Desk Authors.
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

namespace glyce {

/// Failure categories. The C API maps these one-to-one onto status codes.
enum class ErrorKind {
  kConfig,
  kIo,
  kFormat,
  kVocab,
  kShape,
  kIndex,
  kNumeric,
  kContract,
  kInput,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define GLYCE_DEFINE_ERROR(Name, Kind)                                    \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

GLYCE_DEFINE_ERROR(ConfigError, kConfig)
GLYCE_DEFINE_ERROR(IoError, kIo)
GLYCE_DEFINE_ERROR(FormatError, kFormat)
GLYCE_DEFINE_ERROR(VocabError, kVocab)
GLYCE_DEFINE_ERROR(ShapeError, kShape)
GLYCE_DEFINE_ERROR(IndexError, kIndex)
GLYCE_DEFINE_ERROR(NumericError, kNumeric)
GLYCE_DEFINE_ERROR(ContractError, kContract)
GLYCE_DEFINE_ERROR(InputError, kInput)

#undef GLYCE_DEFINE_ERROR

}  // namespace glyce
