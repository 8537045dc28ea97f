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

#ifndef PROXYFORM_GRADCHECK_SUITE_H_
#define PROXYFORM_GRADCHECK_SUITE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace proxyform {

// Finite-difference verification of every hand-written pullback used by the
// enhancement pipeline, on small random instances.
struct GradCheckSuiteOptions {
  std::uint64_t seed = 0;
  std::size_t instances = 20;
  double step = 1e-6;
};

struct GradCheckGroup {
  std::string name;
  std::size_t instances = 0;
  std::size_t coordinates = 0;
  double max_rel_error = 0.0;
  double seconds = 0.0;
};

struct GradCheckSuiteResult {
  std::vector<GradCheckGroup> groups;

  double max_rel_error() const;
  double seconds() const;
  bool passed(double tolerance) const { return max_rel_error() <= tolerance; }
};

// Groups: offsetnet, proxy_block, translation_head, transform_head,
// attention_pool.
GradCheckSuiteResult run_gradcheck_suite(const GradCheckSuiteOptions& opts = {});

}  // namespace proxyform

#endif  // PROXYFORM_GRADCHECK_SUITE_H_
