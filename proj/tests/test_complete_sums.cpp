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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "weyl/arith.hpp"
#include "weyl/complete_sums.hpp"
#include "weyl/error.hpp"

using namespace weyl;
using cd = std::complex<double>;

namespace {

// Brute force with long double phases taken straight from the definition.
cd brute(const std::vector<std::int64_t>& b, std::int64_t q) {
  std::complex<long double> acc = 0;
  for (std::int64_t n = 1; n <= q; ++n) {
    __int128 e = 0, pw = 1;
    for (std::int64_t c : b) {
      pw = pw * n % q;
      e = (e + static_cast<__int128>(c) * pw) % q;
    }
    if (e < 0) e += q;
    acc += std::polar(1.0L, 2 * std::numbers::pi_v<long double> * static_cast<long double>(e) / q);
  }
  return {double(acc.real()), double(acc.imag())};
}

bool brute_power_full(std::uint64_t n, int i) {
  for (std::uint64_t p = 2; p <= n; ++p) {
    if (n % p) continue;
    int m = 0;
    while (n % p == 0) {
      n /= p;
      ++m;
    }
    if (m < i) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("arithmetic helpers") {
  CHECK(nt::is_prime(2));
  CHECK(nt::is_prime(1'000'000'007ULL));
  CHECK_FALSE(nt::is_prime(1));
  CHECK_FALSE(nt::is_prime(561));
  CHECK(nt::is_prime(18446744073709551557ULL));
  const auto f = nt::factorize(999'999'000'001ULL * 3ULL);
  std::uint64_t prod = 1;
  for (const auto& pp : f) {
    CHECK(nt::is_prime(pp.p));
    prod *= pp.value();
  }
  CHECK(prod == 2'999'997'000'003ULL);
  const auto g = nt::factorize(600851475143ULL);
  REQUIRE(g.size() == 4);
  CHECK(g.back().p == 6857);
  CHECK(nt::factorize(1).empty());
  CHECK(nt::modinv(3, 7) == 5);
  CHECK_THROWS_AS(nt::modinv(6, 9), ContractViolation);
  CHECK(nt::iroot(1'000'000, 3) == 100);
  CHECK(nt::iroot(999'999, 3) == 99);
}

TEST_CASE("direct sums on small cases") {
  CHECK(std::abs(complete_sum_direct(1, ResidueVector::make(5, {0})) - cd(5, 0)) < 1e-12);
  CHECK(std::abs(complete_sum_direct(1, ResidueVector::make(5, {2}))) < 1e-12);
  CHECK(std::abs(complete_sum_direct(2, ResidueVector::make(5, {0, 1}))) ==
        doctest::Approx(std::sqrt(5.0)));
  const cd s = complete_sum_direct(2, ResidueVector::make(4, {0, 1}));
  CHECK(std::abs(s - cd(2, 2)) < 1e-12);
  CHECK_THROWS_AS(ResidueVector::make(0, {1}), ContractViolation);
  CHECK_THROWS_AS(complete_sum_direct(3, ResidueVector::make(5, {1})), ContractViolation);
}

TEST_CASE("residue vector normalization") {
  const auto rv = ResidueVector::make(12, {-2, 4, 14});
  CHECK(rv.b == std::vector<std::uint64_t>{10, 4, 2});
  CHECK(rv.content() == 2);
  CHECK_FALSE(rv.primitive);
  const auto n = rv.normalized();
  CHECK(n.q == 6);
  CHECK(n.b == std::vector<std::uint64_t>{5, 2, 1});
  CHECK(n.primitive);
}

TEST_CASE("direct and CRT sums agree with brute force") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 4);
    const std::int64_t q = 1 + static_cast<std::int64_t>(rng() % 3000);
    std::vector<std::int64_t> b(d);
    for (auto& v : b) v = static_cast<std::int64_t>(rng() % (2 * q)) - q;
    const auto rv = ResidueVector::make(q, b);
    const cd ref = brute(b, q);
    CHECK(std::abs(complete_sum_direct(d, rv) - ref) < 1e-9 * q);
    CHECK(std::abs(complete_sum_crt(d, rv) - ref) < 1e-8 * q);
  }
  const auto rv = ResidueVector::make(15, {1, 1});
  CHECK(std::abs(complete_sum_crt(2, rv) - complete_sum_direct(2, rv)) < 1e-9 * 15);
}

TEST_CASE("quadratic magnitude matches direct evaluation") {
  for (std::uint64_t q = 1; q <= 60; ++q)
    for (std::uint64_t b1 = 0; b1 < q; ++b1)
      for (std::uint64_t b2 = 0; b2 < q; ++b2) {
        const auto rv = ResidueVector::make(q, {std::int64_t(b1), std::int64_t(b2)});
        CHECK(quadratic_complete_sum_magnitude(q, b1, b2) ==
              doctest::Approx(std::abs(complete_sum_direct(2, rv))).epsilon(1e-9).scale(1.0));
      }
}

TEST_CASE("power class factorization") {
  auto f = factor_power_classes(72, 3);
  CHECK(f.part(2) == 9);
  CHECK(f.part(3) == 8);
  f = factor_power_classes(32 * 27 * 5, 4);
  CHECK(f.part(2) == 5);
  CHECK(f.part(3) == 27);
  CHECK(f.part(4) == 32);
  f = factor_power_classes(1, 5);
  CHECK(f.parts == std::vector<std::uint64_t>(4, 1));
  for (std::uint64_t q = 1; q <= 20000; ++q) {
    for (int d : {3, 4, 6}) CHECK(factor_power_classes(q, d).satisfies_invariants());
  }
  PowerClassFactorization bad{8, 3, {8, 1}};
  CHECK_FALSE(bad.satisfies_invariants());
}

TEST_CASE("Weil checks") {
  auto r = check_weil(7, 2, ResidueVector::make(7, {0, 1}));
  CHECK(r.holds);
  CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(check_weil(11, 3, ResidueVector::make(11, {0, 0, 1})).holds);
  r = check_weil(13, 1, ResidueVector::make(13, {5}));
  CHECK(r.holds);
  CHECK(r.magnitude < 1e-9);
  CHECK_THROWS_AS(check_weil(15, 2, ResidueVector::make(15, {0, 1})), ContractViolation);
}

TEST_CASE("prime power checks") {
  auto r = check_prime_power(2, 3, 2, ResidueVector::make(8, {1, 1}));
  CHECK(r.holds);
  CHECK(r.magnitude <= 4.0 + 1e-9);
  // p | d: the sum 3(1 + 2 cos(2 pi / 9)) exceeds (d - 1) p^{m - 1} = 6.
  r = check_prime_power(3, 2, 3, ResidueVector::make(9, {0, 0, 1}));
  CHECK(r.magnitude == doctest::Approx(3.0 * (1.0 + 2.0 * std::cos(2 * std::numbers::pi / 9))));
  CHECK_FALSE(r.holds);
  // m = 1 is the Weil bound.
  r = check_prime_power(5, 1, 2, ResidueVector::make(5, {0, 1}));
  CHECK(r.holds);
  CHECK(r.bound == doctest::Approx(std::sqrt(5.0)));
  CHECK(check_prime_power(5, 3, 2, ResidueVector::make(125, {3, 7})).holds);
}

TEST_CASE("Hua ratios") {
  CHECK(check_hua(1, 2, ResidueVector::make(1, {0, 0})).ratio == doctest::Approx(1.0));
  CHECK(check_hua(4, 2, ResidueVector::make(4, {0, 1})).ratio == doctest::Approx(std::sqrt(2.0)));
  const double ratio = check_hua(9, 3, ResidueVector::make(9, {0, 0, 1})).ratio;
  CHECK(ratio == doctest::Approx(std::abs(brute({0, 0, 1}, 9)) / std::pow(9.0, 2.0 / 3.0)));
}

TEST_CASE("powerful numbers") {
  CHECK(powerful_numbers(2, 50) ==
        std::vector<std::uint64_t>{1, 4, 8, 9, 16, 25, 27, 32, 36, 49});
  CHECK(powerful_numbers(3, 40) == std::vector<std::uint64_t>{1, 8, 16, 27, 32});
  CHECK(powerful_numbers(5, 1) == std::vector<std::uint64_t>{1});
  for (int i = 2; i <= 4; ++i) {
    std::vector<std::uint64_t> ref;
    for (std::uint64_t n = 1; n <= 3000; ++n)
      if (brute_power_full(n, i)) ref.push_back(n);
    CHECK(powerful_numbers(i, 3000) == ref);
  }
  for (int i = 2; i <= 6; ++i) {
    const double x = 1e6;
    const auto count = static_cast<double>(powerful_numbers(i, 1'000'000).size());
    CHECK(count <= 4.0 * std::pow(x, 1.0 / i));
  }
}
