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
// Runs the fourteen acceptance criteria and prints one line per criterion.
// Usage: acceptance [OUT_DIR] [FIRST_ID [LAST_ID]]

#include <cstdlib>
#include <iostream>
#include <string>

#include "weyl/acceptance.hpp"

int main(int argc, char** argv) {
  weyl::AcceptanceOptions opt;
  if (argc > 1) opt.out_dir = argv[1];
  const int first = argc > 2 ? std::atoi(argv[2]) : 1;
  const int last = argc > 3 ? std::atoi(argv[3]) : (argc > 2 ? first : weyl::kAcceptanceCriteria);
  int failed = 0;
  for (int id = first; id <= last; ++id) {
    const auto r = weyl::run_criterion(id, opt);
    std::cout << weyl::format_result(r) << std::endl;
    failed += !r.pass;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << '\n';
  return failed ? 1 : 0;
}
