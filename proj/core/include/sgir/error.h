// Copyright 2026 The SGIR Authors.
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

#ifndef SGIR_ERROR_H_
#define SGIR_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace sgir {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateGeometry,
  kTooFewObjects,
  kMalformedAnnotation,
  kEmptyCorpus,
  kShapeMismatch,
  kIndexOutOfRange,
  kNonFinite,
  kGraphConsumed,
  kMissingGradient,
  kUnknownClass,
  kForeignTriplet,
  kNumericalDivergence,
  kIncompatibleCheckpoint,
  kMalformedFile,
  kUnknownLabel,
  kEmptyDatabase,
  kEmptyQuerySet,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure in the library surfaces as an sgir::Error carrying a code so
// callers (CLI exit codes, HTTP status mapping, tests) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sgir

#endif  // SGIR_ERROR_H_
