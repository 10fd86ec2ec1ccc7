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

// Complete rational sums S_{d,q}(b) = sum_{n=1}^q e_q(b_1 n + ... + b_d n^d).

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace weyl {

/// Coefficients b_1..b_d reduced into [0, q).
struct ResidueVector {
  std::uint64_t q = 1;
  std::vector<std::uint64_t> b;
  /// True when the vector has been divided through by gcd(q, b_1, ..., b_d).
  bool primitive = false;

  /// Reduces signed coefficients mod q. Throws on q = 0.
  static ResidueVector make(std::uint64_t q, const std::vector<std::int64_t>& b);
  /// Divides q and b by gcd(q, b); the result has gcd 1 and primitive = true.
  ResidueVector normalized() const;
  std::uint64_t content() const;  // gcd(q, b_1, ..., b_d)
  int d() const { return static_cast<int>(b.size()); }
};

/// q = q_2 q_3 ... q_d with parts[i - 2] = q_i.
struct PowerClassFactorization {
  std::uint64_t q = 1;
  int d = 3;
  std::vector<std::uint64_t> parts;

  std::uint64_t part(int i) const { return parts.at(static_cast<std::size_t>(i - 2)); }
  /// Checks product, coprimality and the power-full/power-free conditions.
  bool satisfies_invariants() const;
};

struct BoundReport {
  bool holds = false;
  double magnitude = 0.0;
  double bound = 0.0;
  double ratio = 0.0;  // magnitude / bound, 0 when both vanish
};

std::complex<double> complete_sum_direct(int d, const ResidueVector& rv);
std::complex<double> complete_sum_crt(int d, const ResidueVector& rv);

/// |S_{2,q}(b_1, b_2)| from the Gauss sum evaluation; O(log q) after factoring out gcds.
double quadratic_complete_sum_magnitude(std::uint64_t q, std::uint64_t b1, std::uint64_t b2);

PowerClassFactorization factor_power_classes(std::uint64_t q, int d);

/// |S_{d,p}(b)| <= (d - 1) sqrt(p); for d = 1 checks |S| in {0, p}.
BoundReport check_weil(std::uint64_t p, int d, const ResidueVector& rv);

/// |S_{d,p^m}(b)| <= (d - 1) p^{m - 1} for m >= 2; m = 1 is the Weil check.
BoundReport check_prime_power(std::uint64_t p, int m, int d, const ResidueVector& rv);

/// ratio = |S_{d,q}(b)| / q^{1 - 1/d}; holds is always true.
BoundReport check_hua(std::uint64_t q, int d, const ResidueVector& rv);

/// |S_{d,q}(b)| <= (d - 1)^{omega(q)} prod_i q_i^{1 - 1/i} for primitive b.
BoundReport check_power_class_product(int d, const ResidueVector& rv);

/// All i-th-power-full integers <= x in increasing order (1 included).
std::vector<std::uint64_t> powerful_numbers(int i, std::uint64_t x);

}  // namespace weyl
