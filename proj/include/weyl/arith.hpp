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

// Integer helpers: primality, factorization, modular inverses.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace weyl::nt {

struct PrimePower {
  std::uint64_t p = 0;
  int m = 0;

  std::uint64_t value() const;
  bool operator==(const PrimePower&) const = default;
};

/// Primes below 10^6, built once on first use.
const std::vector<std::uint32_t>& small_primes();

/// Deterministic Miller-Rabin for 64-bit inputs.
bool is_prime(std::uint64_t n);

/// Prime factorization sorted by prime. factorize(1) is empty.
std::vector<PrimePower> factorize(std::uint64_t n);

/// Number of distinct prime factors.
int omega(std::uint64_t n);

/// x with a x = 1 mod m; throws ContractViolation if gcd(a, m) != 1.
std::uint64_t modinv(std::uint64_t a, std::uint64_t m);

/// a * b mod m without overflow.
inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m);

/// Exact integer power; throws ContractViolation on overflow.
std::uint64_t ipow(std::uint64_t base, int e);

/// Largest r with r^k <= x.
std::uint64_t iroot(std::uint64_t x, int k);

}  // namespace weyl::nt
