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

#ifndef OTS_ERROR_HPP_
#define OTS_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ots {

enum class ErrorKind {
  kInvalidArgument,
  kMalformedFile,
  kIoError,
  kUnknownId,
  kExtractorFailure,
  kProtocolViolation,
  kRegionOutOfBounds,
  kDimMismatch,
  kSingleClassData,
  kDegenerateImage,
  kEmptyInput,
  kNoPositives,
  kUnknownLabel,
  kEmptyClassRow,
  kEmptyRelevantSet,
};

std::string_view to_string(ErrorKind kind);

// All recoverable failures raised by the library. Programming errors
// (broken internal invariants) surface as std::logic_error instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace ots

#endif  // OTS_ERROR_HPP_
