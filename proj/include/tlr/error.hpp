// Copyright 2026 The TLR Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tlr {

/// Base of every error raised by the toolkit. `code()` is the stable,
/// machine-readable identifier also used on the wire.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define TLR_DEFINE_ERROR(Name, Code)                                  \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& message) : Error(Code, message) {} \
  }

TLR_DEFINE_ERROR(NonPositiveDepth, "non_positive_depth");
TLR_DEFINE_ERROR(InvalidArgument, "invalid_argument");
TLR_DEFINE_ERROR(DetectorUnavailable, "detector_unavailable");
TLR_DEFINE_ERROR(VersionMismatch, "version_mismatch");
TLR_DEFINE_ERROR(InvalidScenario, "invalid_scenario");
TLR_DEFINE_ERROR(InvalidMap, "invalid_map");
TLR_DEFINE_ERROR(UnknownRoute, "unknown_route");
TLR_DEFINE_ERROR(UnknownCandidate, "unknown_candidate");
TLR_DEFINE_ERROR(InvalidGroup, "invalid_group");
TLR_DEFINE_ERROR(InvalidDecision, "invalid_decision");
TLR_DEFINE_ERROR(FrameNotFound, "frame_not_found");
TLR_DEFINE_ERROR(PointIndexOutOfRange, "point_index_out_of_range");
TLR_DEFINE_ERROR(PendingRemain, "pending_remain");
TLR_DEFINE_ERROR(SessionLocked, "session_locked");
TLR_DEFINE_ERROR(LengthMismatch, "length_mismatch");
TLR_DEFINE_ERROR(NoGroundTruth, "no_ground_truth");
TLR_DEFINE_ERROR(IoError, "io_error");

#undef TLR_DEFINE_ERROR

/// Malformed input; `line()` is 1-based, 0 when not line oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("parse_error", line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace tlr
