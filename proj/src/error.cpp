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

#include "mupax/error.hpp"

namespace mupax {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNotFound: return "NotFound";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kBadMagic: return "BadMagic";
    case ErrorKind::kShapeOverflow: return "ShapeOverflow";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kNegativeValue: return "NegativeValue";
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kRankMismatch: return "RankMismatch";
    case ErrorKind::kZeroChunkExtent: return "ZeroChunkExtent";
    case ErrorKind::kOutOfBounds: return "OutOfBounds";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kDegenerateReference: return "DegenerateReference";
    case ErrorKind::kNotAProbability: return "NotAProbability";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kInvalidLoss: return "InvalidLoss";
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
    case ErrorKind::kTooFewChunks: return "TooFewChunks";
    case ErrorKind::kTooManyChunks: return "TooManyChunks";
    case ErrorKind::kZeroAcceptance: return "ZeroAcceptance";
    case ErrorKind::kBudgetExhausted: return "BudgetExhausted";
    case ErrorKind::kEmptyAccumulator: return "EmptyAccumulator";
    case ErrorKind::kConfigMismatch: return "ConfigMismatch";
    case ErrorKind::kLabelMismatch: return "LabelMismatch";
    case ErrorKind::kEmptyBatch: return "EmptyBatch";
    case ErrorKind::kMixedShapes: return "MixedShapes";
    case ErrorKind::kProtocolError: return "ProtocolError";
    case ErrorKind::kConnectionLost: return "ConnectionLost";
    case ErrorKind::kServerError: return "ServerError";
    case ErrorKind::kTimeout: return "Timeout";
  }
  return "Unknown";
}

}  // namespace mupax
