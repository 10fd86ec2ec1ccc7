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

#include "weyl/numeric.hpp"

namespace weyl::num {

namespace {

DoubleDouble frac_of(DoubleDouble p) {
  // Both parts may be huge; integer parts drop out exactly.
  const double fh = p.hi - std::floor(p.hi);
  const double fl = p.lo - std::floor(p.lo);
  return wrap_unit(two_sum(fh, fl));
}

}  // namespace

DoubleDouble frac_mul(double c, std::int64_t k) {
  // k = kh * 2^32 + kl with both halves exactly representable.
  const std::int64_t kh = k >> 32;
  const std::int64_t kl = k - kh * (std::int64_t{1} << 32);
  const DoubleDouble low = frac_of(two_prod(c, static_cast<double>(kl)));
  if (kh == 0) return low;
  DoubleDouble high = two_prod(c, static_cast<double>(kh));
  high.hi = std::ldexp(high.hi, 32);
  high.lo = std::ldexp(high.lo, 32);
  return add_mod1(low, frac_of(high));
}

}  // namespace weyl::num
