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
#include <vector>

#include "weyl/error.hpp"
#include "weyl/weyl_core.hpp"

using namespace weyl;
using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

namespace {

// Exact reference: every double is m * 2^-k, so frac(c n^e) is an exact
// dyadic rational computed in 128-bit integers.
long double exact_frac(double c, std::int64_t n, int e) {
  int exp2 = 0;
  const double mant = std::frexp(c, &exp2);
  auto m = static_cast<__int128>(std::ldexp(mant, 53));
  const int k = 53 - exp2;
  REQUIRE(k >= 0);
  REQUIRE(k < 120);
  __int128 pw = 1;
  for (int t = 0; t < e; ++t) pw *= n;
  const __int128 mod = static_cast<__int128>(1) << k;
  __int128 r = ((m % mod) * (pw % mod)) % mod;
  if (r < 0) r += mod;
  return std::ldexp(static_cast<long double>(r), -k);
}

cd naive_sum(const std::vector<double>& coeffs, std::int64_t N) {
  std::complex<long double> acc = 0;
  for (std::int64_t n = 1; n <= N; ++n) {
    long double p = 0;
    for (std::size_t e = 0; e < coeffs.size(); ++e) {
      if (coeffs[e] != 0.0) p += exact_frac(coeffs[e], n, static_cast<int>(e));
    }
    p -= std::floor(p);
    acc += std::polar(1.0L, 2.0L * std::numbers::pi_v<long double> * p);
  }
  return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

cd geometric(double x, std::int64_t N) {
  const cd z = std::polar(1.0, 2 * kPi * x);
  return z * (std::pow(z, static_cast<double>(N)) - 1.0) / (z - 1.0);
}

}  // namespace

TEST_CASE("linear sums match the geometric series") {
  for (double x : {0.1, 0.25, 1.0 / 3.0, 0.123456789, 0.999}) {
    for (std::int64_t N : {1, 7, 100, 1000}) {
      const cd s = eval_polynomial_sum(std::vector<double>{0.0, x}, N).value;
      CHECK(std::abs(s - geometric(x, N)) < 1e-9 * N);
    }
  }
  CHECK(eval_polynomial_sum(std::vector<double>{0.0, 0.0}, 50).value == cd(50.0, 0.0));
}

TEST_CASE("recurrence agrees with direct long double evaluation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 6;
    std::vector<double> c(d + 1);
    for (int e = 1; e <= d; ++e) c[e] = u(rng);
    const std::int64_t N = 50 + trial * 7;
    const cd fast = eval_polynomial_sum(c, N).value;
    CHECK(std::abs(fast - naive_sum(c, N)) < 1e-9 * N);
  }
}

TEST_CASE("Gauss fast path and short interval agree with the general recurrence") {
  for (auto [x, y] : {std::pair{0.3, 0.7}, std::pair{0.0, 0.5}, std::pair{0.618, 0.1234567}}) {
    const cd g = eval_gauss_sum(x, y, 2000).value;
    const cd p = eval_polynomial_sum(std::vector<double>{0.0, x, y}, 2000).value;
    CHECK(std::abs(g - p) < 1e-8);
    CHECK(std::abs(gauss_short_interval(x, y, 0, 2000).value - g) < 1e-8);
  }
  // Shifted window equals a sum with shifted coefficients.
  const double x = 0.21, y = 0.377;
  const std::int64_t M = 1234;
  const cd shifted = gauss_short_interval(x, y, M, 300).value;
  const double x2 = x + 2 * M * y;
  const double c0 = x * M + y * static_cast<double>(M) * M;
  const cd ref = eval_polynomial_sum(std::vector<double>{std::fmod(c0, 1.0), std::fmod(x2, 1.0), y},
                                     300).value;
  CHECK(std::abs(shifted - ref) < 1e-7);
}

TEST_CASE("family evaluation and conjugation symmetry") {
  const auto fam = SplitFamily::standard(3, 1);
  const TorusPoint x({0.13});
  const TorusPoint y({0.41, 0.77});
  const TorusPoint xm({-0.13});
  const TorusPoint ym({-0.41, -0.77});
  const cd s = eval_weyl_sum(fam, x, y, 500).value;
  const cd t = eval_weyl_sum(fam, xm, ym, 500).value;
  CHECK(std::abs(s - std::conj(t)) < 1e-9);
  CHECK(std::abs(s) <= 500.0);
  CHECK(std::abs(s - naive_sum({0.0, 0.13, 0.41, 0.77}, 500)) < 1e-9 * 500);
}

TEST_CASE("integer coefficients give exactly N") {
  const cd s = eval_polynomial_sum(std::vector<double>{0.0, 3.0, -2.0, 5.0}, 10000).value;
  CHECK(std::abs(s - cd(10000.0, 0.0)) < 1e-9);
}

TEST_CASE("mean square over a rational grid is N") {
  // Orthogonality: averaging |sum e(j n / M)|^2 over j gives N when M >= N.
  const std::int64_t N = 64, M = 128;
  double mean = 0.0;
  for (std::int64_t j = 0; j < M; ++j) {
    mean += std::norm(eval_polynomial_sum(std::vector<double>{0.0, double(j) / M, 0.3}, N).value);
  }
  CHECK(mean / M == doctest::Approx(double(N)).epsilon(1e-9));
}

TEST_CASE("grid scans match direct sums") {
  const std::int64_t N = 37;
  std::vector<cd> w(N);
  for (std::int64_t n = 1; n <= N; ++n) w[n - 1] = std::polar(1.0, 2 * kPi * 0.137 * n * n);
  for (std::int64_t M : {1, 5, 16, 37, 100}) {
    const auto out = grid_scan_dft(w, M);
    REQUIRE(out.size() == static_cast<std::size_t>(M));
    for (std::int64_t j = 0; j < M; ++j) {
      cd ref = 0;
      for (std::int64_t n = 1; n <= N; ++n) ref += w[n - 1] * std::polar(1.0, 2 * kPi * double(j * n % M) / M);
      CHECK(std::abs(out[j] - ref) < 1e-10);
    }
  }
  const auto sq = grid_scan_dft_power(w, 30, 3);
  for (std::int64_t j = 0; j < 30; ++j) {
    cd ref = 0;
    for (std::int64_t n = 1; n <= N; ++n) {
      ref += w[n - 1] * std::polar(1.0, 2 * kPi * double((j * n * n * n) % 30) / 30.0);
    }
    CHECK(std::abs(sq[j] - ref) < 1e-10);
  }
}

TEST_CASE("oscillatory integral") {
  // int_0^1 e(z^2) dz from the series sum (2 pi i)^k / (k! (2k+1)).
  cd series = 0, term = 1;
  for (int k = 0; k < 60; ++k) {
    series += term / double(2 * k + 1);
    term *= cd(0.0, 2 * kPi) / double(k + 1);
  }
  const std::vector<double> quad{0.0, 1.0};
  CHECK(std::abs(oscillatory_integral(quad, 1.0) - series) < 1e-9);
  CHECK(std::abs(series - cd(0.2441, 0.1717)) < 1e-3);

  const std::vector<double> zero{0.0, 0.0};
  CHECK(oscillatory_integral(zero, 123.0) == cd(123.0, 0.0));

  // Linear phase closed form.
  const double a = 0.37, N = 50.0;
  const std::vector<double> lin{a};
  const cd exact = (std::polar(1.0, 2 * kPi * a * N) - 1.0) / cd(0.0, 2 * kPi * a);
  CHECK(std::abs(oscillatory_integral(lin, N) - exact) < 1e-8 * N);

  // Cubic: compare against a fine composite Simpson rule.
  const std::vector<double> cub{0.01, -0.002, 0.0004};
  const double L = 20.0;
  const int steps = 200000;
  cd simpson = 0;
  auto f = [&](double z) { return std::polar(1.0, 2 * kPi * (0.01 * z - 0.002 * z * z + 0.0004 * z * z * z)); };
  const double h = L / steps;
  for (int i = 0; i <= steps; ++i) {
    const double wgt = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    simpson += wgt * f(i * h);
  }
  simpson *= h / 3.0;
  CHECK(std::abs(oscillatory_integral(cub, L) - simpson) < 1e-7 * L);

  CHECK_THROWS_AS(oscillatory_integral(quad, 1.0, 0.0), ContractViolation);
  const std::vector<double> bad{std::nan("")};
  CHECK_THROWS_AS(oscillatory_integral(bad, 1.0), ContractViolation);
}

TEST_CASE("oscillatory integral decay envelope") {
  // |I| <= N always; |I| <= C N min_j {1, |xi_j|^{-1/d} N^{-j/d}} with a fitted C.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), mag(-4.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 2;
    const double N = 40.0;
    std::vector<double> xi(static_cast<std::size_t>(d));
    for (int j = 1; j <= d; ++j) xi[j - 1] = unit(rng) * std::pow(10.0, mag(rng)) * std::pow(N, 1 - j);
    const double I = std::abs(oscillatory_integral(xi, N));
    CHECK(I <= N * (1 + 1e-9));
    double env = 1.0;
    for (int j = 1; j <= d; ++j)
      if (xi[j - 1] != 0.0) env = std::min(env, std::pow(std::abs(xi[j - 1]), -1.0 / d) * std::pow(N, -double(j) / d));
    worst = std::max(worst, I / (N * env));
  }
  MESSAGE("fitted decay constant " << worst);
  CHECK(worst < 10.0);
}

TEST_CASE("contract violations") {
  CHECK_THROWS_AS(SplitFamily::make({1}, {3}), ContractViolation);
  CHECK_THROWS_AS(SplitFamily::make({1, 1}, {2}), ContractViolation);
  CHECK_THROWS_AS(eval_gauss_sum(0.1, 0.2, 0), ContractViolation);
  CHECK_THROWS_AS(TorusPoint({std::nan("")}), ContractViolation);
  const auto fam = SplitFamily::standard(3, 1);
  CHECK_THROWS_AS(eval_weyl_sum(fam, TorusPoint({0.1, 0.2}), TorusPoint({0.1, 0.2}), 10),
                  ContractViolation);
  CHECK(fam.tau() == 1);
  CHECK(fam.sigma() == 5);
  CHECK(fam.s_d() == 6);
  CHECK(TorusPoint({1.25})[0] == doctest::Approx(0.25));
}
