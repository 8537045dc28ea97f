// Copyright 2026 The proxyform Authors. All Rights Reserved.
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

#ifndef PROXYFORM_ERROR_H_
#define PROXYFORM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace proxyform {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateTransform,
  kInvalidBounds,
  kEmptyInput,
  kCorruptedClusterSet,
  kShape,
  kEvaluation,
  kInvalidConfig,
  kIo,
  kParse,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library is an Error; callers that care about
// the category switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace proxyform

#endif  // PROXYFORM_ERROR_H_
