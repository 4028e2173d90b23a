/*
 * Copyright 2026 The mupax project contributors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mupax {

// Every failure the library reports carries one of these kinds. The CLI maps
// kinds onto exit codes, so keep the list in sync with tools/exit_codes.
enum class ErrorKind {
  kNotFound,
  kIo,
  kBadMagic,
  kShapeOverflow,
  kLengthMismatch,
  kNegativeValue,
  kNonFinite,
  kRankMismatch,
  kZeroChunkExtent,
  kOutOfBounds,
  kShapeMismatch,
  kDegenerateReference,
  kNotAProbability,
  kEmptyInput,
  kInvalidLoss,
  kInvalidConfig,
  kTooFewChunks,
  kTooManyChunks,
  kZeroAcceptance,
  kBudgetExhausted,
  kEmptyAccumulator,
  kConfigMismatch,
  kLabelMismatch,
  kEmptyBatch,
  kMixedShapes,
  kProtocolError,
  kConnectionLost,
  kServerError,
  kTimeout,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace mupax
