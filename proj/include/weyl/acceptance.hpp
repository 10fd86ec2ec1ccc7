// Copyright 2026 The weylsum Authors
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
// The acceptance suite: fourteen numbered checks, each reporting pass or fail
// with a one-line detail.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace weyl {

struct AcceptanceOptions {
  std::uint64_t seed = 20240601;
  int threads = 0;
  std::filesystem::path out_dir = "acceptance_out";
  std::filesystem::path fixture_dir;  // empty: the fixtures shipped with the sources
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

inline constexpr int kAcceptanceCriteria = 14;

/// Runs criterion `id` in 1..14.
CriterionResult run_criterion(int id, const AcceptanceOptions& opt);

/// "[PASS] 3 Weil bound: ..." form.
std::string format_result(const CriterionResult& r);

}  // namespace weyl
