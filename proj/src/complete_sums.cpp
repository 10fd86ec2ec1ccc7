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

#include "weyl/complete_sums.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "weyl/arith.hpp"
#include "weyl/error.hpp"
#include "weyl/numeric.hpp"

namespace weyl {

namespace {

constexpr double kSlack = 1e-6;

void require_shape(int d, const ResidueVector& rv) {
  require(rv.q >= 1, "complete sum: q must be positive");
  require(d >= 1 && rv.d() == d, "complete sum: coefficient vector must have d entries");
}

// b_1 n + ... + b_d n^d mod q by Horner.
std::uint64_t phase_mod(const std::vector<std::uint64_t>& b, std::uint64_t n, std::uint64_t q) {
  unsigned __int128 acc = 0;
  for (std::size_t j = b.size(); j > 0; --j) acc = (acc + b[j - 1]) % q * n % q;
  return static_cast<std::uint64_t>(acc);
}

}  // namespace

ResidueVector ResidueVector::make(std::uint64_t q, const std::vector<std::int64_t>& b) {
  require(q >= 1, "ResidueVector: q must be positive");
  ResidueVector rv;
  rv.q = q;
  rv.b.reserve(b.size());
  const auto sq = static_cast<__int128>(q);
  for (std::int64_t v : b) {
    __int128 r = static_cast<__int128>(v) % sq;
    if (r < 0) r += sq;
    rv.b.push_back(static_cast<std::uint64_t>(r));
  }
  rv.primitive = rv.content() == 1;
  return rv;
}

std::uint64_t ResidueVector::content() const {
  std::uint64_t g = q;
  for (std::uint64_t v : b) g = std::gcd(g, v);
  return g;
}

ResidueVector ResidueVector::normalized() const {
  const std::uint64_t g = content();
  ResidueVector out;
  out.q = q / g;
  out.b.reserve(b.size());
  for (std::uint64_t v : b) out.b.push_back(v / g);
  out.primitive = true;
  return out;
}

bool PowerClassFactorization::satisfies_invariants() const {
  if (d < 3 || parts.size() != static_cast<std::size_t>(d - 1)) return false;
  unsigned __int128 product = 1;
  for (std::uint64_t v : parts) {
    if (v == 0) return false;
    product *= v;
  }
  if (product != q) return false;
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t j = i + 1; j < parts.size(); ++j)
      if (std::gcd(parts[i], parts[j]) != 1) return false;
  for (int i = 2; i <= d; ++i) {
    for (const auto& [p, m] : nt::factorize(part(i))) {
      if (i == 2 && m >= 3) return false;
      if (i > 2 && m < i) return false;
      if (i > 2 && i < d && m >= i + 1) return false;
    }
  }
  return true;
}

std::complex<double> complete_sum_direct(int d, const ResidueVector& rv) {
  require_shape(d, rv);
  const double inv_q = 1.0 / static_cast<double>(rv.q);
  num::CompensatedComplexSum acc;
  for (std::uint64_t n = 1; n <= rv.q; ++n) {
    acc.add(num::unit_phasor(static_cast<double>(phase_mod(rv.b, n % rv.q, rv.q)) * inv_q));
  }
  return acc.value();
}

std::complex<double> complete_sum_crt(int d, const ResidueVector& rv) {
  require_shape(d, rv);
  // 1/q = sum_p c_p / p^m mod 1 with c_p = (q / p^m)^{-1} mod p^m, so
  // e_q(f(n)) = prod_p e_{p^m}(c_p f(n)) and the sum splits over n mod p^m.
  std::complex<double> product = 1.0;
  for (const auto& pp : nt::factorize(rv.q)) {
    const std::uint64_t pm = pp.value();
    const std::uint64_t c = nt::modinv((rv.q / pm) % pm, pm);
    ResidueVector local;
    local.q = pm;
    local.b.reserve(rv.b.size());
    for (std::uint64_t v : rv.b) local.b.push_back(nt::mulmod(c, v % pm, pm));
    product *= complete_sum_direct(d, local);
  }
  return product;
}

double quadratic_complete_sum_magnitude(std::uint64_t q, std::uint64_t b1, std::uint64_t b2) {
  require(q >= 1, "quadratic_complete_sum_magnitude: q must be positive");
  b1 %= q;
  b2 %= q;
  const std::uint64_t g = std::gcd(b2, q);  // gcd(0, q) = q
  if (b1 % g != 0) return 0.0;
  const std::uint64_t qq = q / g;
  const std::uint64_t c1 = b1 / g;
  const auto scale = static_cast<double>(g);
  if (qq % 2 == 1) return scale * std::sqrt(static_cast<double>(qq));
  const bool b1_odd = (c1 % 2) == 1;
  if (qq % 4 == 2) return b1_odd ? scale * std::sqrt(2.0 * static_cast<double>(qq)) : 0.0;
  return b1_odd ? 0.0 : scale * std::sqrt(2.0 * static_cast<double>(qq));
}

PowerClassFactorization factor_power_classes(std::uint64_t q, int d) {
  require(q >= 1, "factor_power_classes: q must be positive");
  require(d >= 3, "factor_power_classes: d must be at least 3");
  PowerClassFactorization f;
  f.q = q;
  f.d = d;
  f.parts.assign(static_cast<std::size_t>(d - 1), 1);
  for (const auto& pp : nt::factorize(q)) {
    const int cls = pp.m <= 2 ? 2 : std::min(pp.m, d);
    f.parts[static_cast<std::size_t>(cls - 2)] *= pp.value();
  }
  return f;
}

BoundReport check_weil(std::uint64_t p, int d, const ResidueVector& rv) {
  require(nt::is_prime(p), "check_weil: p must be prime");
  require(rv.q == p, "check_weil: modulus must equal p");
  require(d >= 1 && static_cast<std::uint64_t>(d) < p, "check_weil: need 1 <= d < p");
  require(rv.content() == 1, "check_weil: coefficients must be primitive");
  BoundReport r;
  r.magnitude = std::abs(complete_sum_direct(d, rv));
  if (d == 1) {
    const double pd = static_cast<double>(p);
    r.holds = r.magnitude <= kSlack || std::abs(r.magnitude - pd) <= kSlack;
    r.bound = 0.0;
    r.ratio = r.magnitude <= kSlack ? 0.0 : r.magnitude;
    return r;
  }
  r.bound = (d - 1) * std::sqrt(static_cast<double>(p));
  r.holds = r.magnitude <= r.bound + kSlack;
  r.ratio = r.magnitude / r.bound;
  return r;
}

BoundReport check_prime_power(std::uint64_t p, int m, int d, const ResidueVector& rv) {
  require(nt::is_prime(p), "check_prime_power: p must be prime");
  require(m >= 1, "check_prime_power: m must be positive");
  if (m == 1) return check_weil(p, d, rv);
  require(rv.q == nt::ipow(p, m), "check_prime_power: modulus must equal p^m");
  require(rv.content() == 1, "check_prime_power: coefficients must be primitive");
  BoundReport r;
  r.magnitude = std::abs(complete_sum_direct(d, rv));
  r.bound = (d - 1) * static_cast<double>(nt::ipow(p, m - 1));
  r.holds = r.magnitude <= r.bound + kSlack;
  r.ratio = r.bound > 0.0 ? r.magnitude / r.bound : (r.magnitude <= kSlack ? 0.0 : r.magnitude);
  return r;
}

BoundReport check_hua(std::uint64_t q, int d, const ResidueVector& rv) {
  require(rv.q == q, "check_hua: modulus mismatch");
  BoundReport r;
  r.magnitude = std::abs(complete_sum_direct(d, rv));
  r.bound = std::pow(static_cast<double>(q), 1.0 - 1.0 / d);
  r.ratio = r.magnitude / r.bound;
  r.holds = true;
  return r;
}

BoundReport check_power_class_product(int d, const ResidueVector& rv) {
  require(rv.content() == 1, "check_power_class_product: coefficients must be primitive");
  const auto f = factor_power_classes(rv.q, d);
  BoundReport r;
  r.magnitude = std::abs(complete_sum_crt(d, rv));
  double bound = std::pow(static_cast<double>(d - 1), nt::omega(rv.q));
  for (int i = 2; i <= d; ++i) bound *= std::pow(static_cast<double>(f.part(i)), 1.0 - 1.0 / i);
  r.bound = bound;
  r.holds = r.magnitude <= bound + kSlack;
  r.ratio = r.magnitude / bound;
  return r;
}

std::vector<std::uint64_t> powerful_numbers(int i, std::uint64_t x) {
  require(i >= 2, "powerful_numbers: i must be at least 2");
  require(x >= 1, "powerful_numbers: x must be positive");
  const std::uint64_t pmax = nt::iroot(x, i);
  const auto& primes = nt::small_primes();
  require(pmax <= primes.back(), "powerful_numbers: x too large for the prime table");
  const auto end = std::upper_bound(primes.begin(), primes.end(), pmax);
  std::vector<std::uint64_t> out;
  // Depth-first over primes in increasing order; each prime enters with exponent >= i or not at all.
  auto recurse = [&](auto&& self, std::size_t idx, std::uint64_t value) -> void {
    out.push_back(value);
    for (auto it = primes.begin() + static_cast<std::ptrdiff_t>(idx); it != end; ++it) {
      const std::uint64_t p = *it;
      unsigned __int128 v = value;
      bool fits = true;
      for (int e = 0; e < i && fits; ++e) {
        v *= p;
        fits = v <= x;
      }
      if (!fits) break;
      const std::size_t next = static_cast<std::size_t>(it - primes.begin()) + 1;
      while (v <= x) {
        self(self, next, static_cast<std::uint64_t>(v));
        v *= p;
      }
    }
  };
  recurse(recurse, 0, 1);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace weyl
