/*
 * Copyright 2026 The OTS Authors.
 *
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

#include "ots/error.hpp"

namespace ots {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kMalformedFile: return "MalformedFile";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kUnknownId: return "UnknownId";
    case ErrorKind::kExtractorFailure: return "ExtractorFailure";
    case ErrorKind::kProtocolViolation: return "ProtocolViolation";
    case ErrorKind::kRegionOutOfBounds: return "RegionOutOfBounds";
    case ErrorKind::kDimMismatch: return "DimMismatch";
    case ErrorKind::kSingleClassData: return "SingleClassData";
    case ErrorKind::kDegenerateImage: return "DegenerateImage";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kNoPositives: return "NoPositives";
    case ErrorKind::kUnknownLabel: return "UnknownLabel";
    case ErrorKind::kEmptyClassRow: return "EmptyClassRow";
    case ErrorKind::kEmptyRelevantSet: return "EmptyRelevantSet";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace ots
