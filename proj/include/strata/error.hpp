// strata/error.hpp
//
// Copyright 2026 STRATA authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace strata {

// Every failure in the toolkit carries one of these codes. exit_class()
// groups them into the process exit codes used by the CLI:
// 1 usage error, 2 data error, 3 numeric failure.
enum class Errc {
  usage_error,

  // data errors
  missing_file,
  io_error,
  malformed_riff,
  unsupported_encoding,
  unknown_symbol,
  empty_word,
  empty_transcript,
  invalid_transcript,
  duplicate_symbol,
  empty_inventory,
  bad_manifest,
  signal_too_short,
  empty_signal,
  bad_config,
  shape_mismatch,
  version_mismatch,
  truncated_file,
  corrupt_checkpoint,
  infeasible_target,
  empty_reference,
  no_boundaries,
  degenerate_filterbank,

  // numeric failures
  non_finite,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  Errc code() const { return code_; }

  int exit_class() const {
    switch (code_) {
      case Errc::usage_error:
        return 1;
      case Errc::non_finite:
        return 3;
      default:
        return 2;
    }
  }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace strata
