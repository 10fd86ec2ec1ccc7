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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "weyl/error.hpp"
#include "weyl/maximal_operators.hpp"
#include "weyl/numeric.hpp"
#include "weyl/weyl_core.hpp"

using namespace weyl;

namespace {

double gauss_abs(double x, double y, std::int64_t N) { return eval_gauss_sum(x, y, N).magnitude(); }

// Golden-section refinement of a one-dimensional maximum bracketed by [lo, hi].
template <class F>
double refine_max(F&& f, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80; ++it) {
    if (fc > fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a), fd = f(d);
    }
  }
  return std::max({fc, fd, f(lo), f(hi)});
}

// Exhaustive grid over a parameter interval, refined around the best grid points.
template <class F>
double exhaustive_max(F&& f, double lo, double hi, int points) {
  const double h = (hi - lo) / (points - 1);
  std::vector<std::pair<double, int>> vals(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) vals[static_cast<std::size_t>(j)] = {f(lo + j * h), j};
  std::partial_sort(vals.begin(), vals.begin() + 16, vals.end(), std::greater<>());
  double best = vals[0].first;
  for (int i = 0; i < 16; ++i) {
    const int j = vals[static_cast<std::size_t>(i)].second;
    best = std::max(best, refine_max(f, std::max(lo, lo + (j - 1) * h), std::min(hi, lo + (j + 1) * h)));
  }
  return best;
}

// Exhaustive y-grid {j / M} for |G(x, y; N)| through the folded transform, refined.
double gauss_sup_y_oracle(double x, std::int64_t N, std::int64_t M) {
  std::vector<std::complex<double>> w(static_cast<std::size_t>(N));
  for (std::int64_t n = 1; n <= N; ++n) w[static_cast<std::size_t>(n - 1)] = eval_gauss_sum(x * n, 0.0, 1).value;
  const auto grid = grid_scan_dft_power(w, M, 2);
  std::vector<std::int64_t> idx(static_cast<std::size_t>(M));
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + 16, idx.end(), [&](auto a, auto b) {
    return std::abs(grid[static_cast<std::size_t>(a)]) > std::abs(grid[static_cast<std::size_t>(b)]);
  });
  double best = std::abs(grid[static_cast<std::size_t>(idx[0])]);
  const double h = 1.0 / static_cast<double>(M);
  for (int i = 0; i < 16; ++i) {
    const double c = idx[static_cast<std::size_t>(i)] * h;
    best = std::max(best, refine_max([&](double y) { return gauss_abs(x, y, N); }, c - h, c + h));
  }
  return best;
}

}  // namespace

TEST_CASE("origin attains N for every family") {
  for (const auto& fam : {SplitFamily::gauss_linear_x(), SplitFamily::gauss_quadratic_x(),
                          SplitFamily::make({3}, {1, 2}), SplitFamily::make({1}, {2, 3}),
                          SplitFamily::standard(4, 2)}) {
    const SupResult r = sup_over_y(fam, TorusPoint::zeros(static_cast<std::size_t>(fam.k())), 100);
    CHECK(r.value == doctest::Approx(100.0).epsilon(1e-12));
    for (double c : r.argmax.coords()) CHECK(std::min(c, 1.0 - c) < 1e-9);
  }
}

TEST_CASE("Gauss sup over the quadratic coordinate matches an exhaustive grid") {
  const auto fam = SplitFamily::gauss_linear_x();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  constexpr std::int64_t N = 64;
  for (int trial = 0; trial < 25; ++trial) {
    const double x = U(rng);
    const double oracle = exhaustive_max([&](double y) { return gauss_abs(x, y, N); }, 0.0, 1.0, 1 << 16);
    const SupResult r = sup_over_y(fam, TorusPoint({x}), N, 2000, 3);
    CHECK(r.value >= 0.995 * oracle);
    CHECK(r.value <= oracle * (1 + 1e-9) + 1e-9);
  }
}

TEST_CASE("default budget tracks the exhaustive grid at moderate N") {
  const auto fam = SplitFamily::gauss_linear_x();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (std::int64_t N : {256, 1024}) {
    for (int trial = 0; trial < 8; ++trial) {
      const double x = U(rng);
      const double oracle = gauss_sup_y_oracle(x, N, 4 * N * N);
      CHECK(sup_over_y(fam, TorusPoint({x}), N).value >= 0.99 * oracle);
    }
  }
}

TEST_CASE("sup over the linear coordinate matches an exhaustive grid") {
  const auto fam = SplitFamily::gauss_quadratic_x();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  constexpr std::int64_t N = 200;
  for (int trial = 0; trial < 10; ++trial) {
    const double y = U(rng);
    const double oracle = exhaustive_max([&](double x) { return gauss_abs(x, y, N); }, 0.0, 1.0, 1 << 16);
    const SupResult r = sup_over_y(fam, TorusPoint({y}), N);
    CHECK(r.strategy == SupStrategy::grid_dft);
    CHECK(r.value == doctest::Approx(oracle).epsilon(1e-6));
  }
}

TEST_CASE("reported value is |S| at the argmax and dominates y = 0") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const auto& fam : {SplitFamily::gauss_linear_x(), SplitFamily::gauss_quadratic_x(),
                          SplitFamily::make({3}, {1, 2}), SplitFamily::make({1, 3}, {2})}) {
    for (int trial = 0; trial < 6; ++trial) {
      std::vector<double> x(static_cast<std::size_t>(fam.k()));
      for (auto& c : x) c = U(rng);
      constexpr std::int64_t N = 300;
      const SupResult r = sup_over_y(fam, TorusPoint(x), N, kAutoBudget, 9);
      const double at = eval_weyl_sum(fam, TorusPoint(x), r.argmax, N).magnitude();
      CHECK(std::abs(at - r.value) <= 1e-8 * N);
      CHECK(r.value <= N * (1 + 1e-12));
      const double at_zero =
          eval_weyl_sum(fam, TorusPoint(x), TorusPoint::zeros(fam.y_degrees().size()), N).magnitude();
      CHECK(r.value >= at_zero - 1e-9);
    }
  }
}

TEST_CASE("doubling the budget never lowers the supremum") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const auto& fam : {SplitFamily::gauss_linear_x(), SplitFamily::make({3}, {1, 2})}) {
    for (int trial = 0; trial < 6; ++trial) {
      std::vector<double> x(static_cast<std::size_t>(fam.k()));
      for (auto& c : x) c = U(rng);
      double prev = 0.0;
      for (std::int64_t budget = 8; budget <= 1024; budget *= 2) {
        const SupResult r = sup_over_y(fam, TorusPoint(x), 512, budget, 1);
        CHECK(r.value >= prev);
        CHECK(r.budget_used <= budget);
        prev = r.value;
      }
    }
  }
}

TEST_CASE("two-coordinate sup matches an exhaustive grid at small N") {
  // x n^3 fixed, sup over (y1 n + y2 n^2).
  const auto fam = SplitFamily::make({3}, {1, 2});
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  constexpr std::int64_t N = 24;
  constexpr int G = 384;
  for (int trial = 0; trial < 4; ++trial) {
    const double x = U(rng);
    double oracle = 0.0;
    for (int i = 0; i < G; ++i) {
      for (int j = 0; j < G; ++j) {
        const double v =
            eval_weyl_sum(fam, TorusPoint({x}), TorusPoint({double(i) / G, double(j) / G}), N).magnitude();
        oracle = std::max(oracle, v);
      }
    }
    CHECK(sup_over_y(fam, TorusPoint({x}), N, 2000, 2).value >= 0.99 * oracle);
  }
}

TEST_CASE("power means are monotone in rho and approach the maximum") {
  const SupSampleSet set = sample_K_sups(256, 64, 42);
  double prev = 0.0;
  for (double rho : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    const NormEstimate e = norm_from_sups(set, rho);
    CHECK(e.estimate >= prev * (1 - 1e-12));
    CHECK(e.estimate >= 0.0);
    CHECK(e.estimate <= 256.0);
    prev = e.estimate;
  }
  const SupSampleSet two = sample_K_sups(256, 2, 42, kAutoBudget, {Sampler::uniform, 1});
  const double top = std::max(two.sups[0], two.sups[1]);
  const double e64 = norm_from_sups(two, 64.0).estimate;
  CHECK(e64 <= top * (1 + 1e-12));
  CHECK(e64 >= 0.98 * top);
}

TEST_CASE("norm estimates do not depend on the thread count") {
  for (Sampler s : {Sampler::importance, Sampler::uniform}) {
    const NormEstimate a = gauss_K_norm(4.0, 512, 24, 99, kAutoBudget, {s, 1});
    const NormEstimate b = gauss_K_norm(4.0, 512, 24, 99, kAutoBudget, {s, 3});
    CHECK(a.estimate == b.estimate);
    CHECK(a.std_error == b.std_error);
  }
  const NormEstimate a = projection_P_norm(0.5, 2.0, 256, 16, 4, kAutoBudget, {Sampler::uniform, 1});
  const NormEstimate b = projection_P_norm(0.5, 2.0, 256, 16, 4, kAutoBudget, {Sampler::uniform, 4});
  CHECK(a.estimate == b.estimate);
}

TEST_CASE("importance and uniform sampling estimate the same integral") {
  const NormEstimate imp = gauss_K_norm(2.0, 256, 400, 8, kAutoBudget, {Sampler::importance, 0});
  const NormEstimate uni = gauss_K_norm(2.0, 256, 400, 8, kAutoBudget, {Sampler::uniform, 0});
  const double se = std::hypot(imp.std_error, uni.std_error);
  CHECK(std::abs(imp.estimate - uni.estimate) <= 3.0 * se);
}

TEST_CASE("trivial norms") {
  const auto k0 = SplitFamily::make({}, {1, 2});
  const NormEstimate e = max_operator_norm(k0, 3.0, 77, 4, 1);
  CHECK(e.estimate == 77.0);
  CHECK(e.std_error == 0.0);
  for (double rho : {1.0, 2.0, 8.0}) {
    CHECK(gauss_K_norm(rho, 1, 8, 1).estimate == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gauss_L_norm(rho, 1, 8, 1).estimate == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sup over the linear coordinate never falls below sqrt N") {
  const SupSampleSet set = sample_L_sups(1000, 200, 5);
  CHECK(set.floor_violations == 0);
  for (double v : set.sups) CHECK(v >= std::sqrt(1000.0) * (1 - 1e-6));
  const SupResult r = sup_over_y(SplitFamily::gauss_quadratic_x(), TorusPoint({0.0}), 1000);
  CHECK(r.value == doctest::Approx(1000.0).epsilon(1e-12));
}

TEST_CASE("fibers of the projection") {
  CHECK(fiber_interval({0.5, 1.6}).empty());
  CHECK(fiber_interval({0.5, -0.1}).empty());
  CHECK(fiber_interval({-1.0, 0.5}).length() == doctest::Approx(0.5));
  CHECK(projection_support(-2.0).lo == -2.0);
  CHECK(projection_support(2.0).hi == 3.0);

  const SupResult empty = sup_over_fiber(1.0, 2.5, 64);
  CHECK(empty.empty_fiber);
  CHECK(empty.value == 0.0);

  const SupResult vertical = sup_over_fiber(0.0, 0.3, 128, 500, 1);
  const SupResult direct = sup_over_y(SplitFamily::gauss_linear_x(), TorusPoint({0.3}), 128, 500, 1);
  CHECK(vertical.value == direct.value);
  CHECK(vertical.argmax[0] == doctest::Approx(0.3));
}

TEST_CASE("fiber suprema match an exhaustive fiber grid") {
  constexpr std::int64_t N = 256;
  for (auto [t, z] : {std::pair{1.0, 1.0}, {1.0, 0.37}, {0.5, 1.21}, {-0.5, 0.1}, {2.0, 1.7}}) {
    const Interval J = fiber_interval({t, z});
    const double oracle = exhaustive_max([&](double y) { return gauss_abs(z - t * y, y, N); },
                                         J.lo, J.hi, 1 << 16);
    const SupResult r = sup_over_fiber(t, z, N, 2000, 1);
    CHECK(r.value >= 0.995 * oracle);
    const double at = gauss_abs(r.argmax[0], r.argmax[1], N);
    CHECK(std::abs(at - r.value) <= 1e-8 * N);
    CHECK(std::abs(num::frac(r.argmax[0] + t * r.argmax[1] - z + 0.5) - 0.5) < 1e-9);
  }
}

TEST_CASE("projection norm at t = 0 agrees with K") {
  const NormEstimate p = projection_P_norm(0.0, 2.0, 256, 300, 3);
  const NormEstimate k = gauss_K_norm(2.0, 256, 300, 4);
  CHECK(std::abs(p.estimate - k.estimate) <= 2.0 * std::hypot(p.std_error, k.std_error));
}

TEST_CASE("rational surrogates of irrational slopes") {
  const RationalSurrogate r = rational_surrogate(std::numbers::sqrt2, 1000000);
  CHECK(r.q > 1000000);
  CHECK(std::abs(std::numbers::sqrt2 - r.value()) < 1.0 / (double(r.q) * double(r.q)) + 1e-15);
  const RationalSurrogate h = rational_surrogate(0.5, 1);
  CHECK(h.p == 1);
  CHECK(h.q == 2);
  CHECK_THROWS_AS(rational_surrogate(0.5, 10), ContractViolation);
}

TEST_CASE("short-sum brackets") {
  const ShortSumSample zero = short_sum_bracket(0.0, 0.0, 64);
  CHECK(zero.lower == doctest::Approx(64.0));
  CHECK(zero.upper == doctest::Approx(64.0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double x = U(rng), y = U(rng);
    const ShortSumSample s = short_sum_bracket(x, y, 128);
    CHECK(s.lower <= s.upper * (1 + 1e-12));
    const double direct = gauss_short_interval(x, y, s.best_shift, 128).magnitude();
    CHECK(direct == doctest::Approx(s.lower).epsilon(1e-9));
    // The shift identity: |G(x, y; M, N)| = |G(x + 2 M y, y; N)|.
    CHECK(gauss_abs(num::frac(x + 2.0 * s.best_shift * y), y, 128) ==
          doctest::Approx(s.lower).epsilon(1e-7));
  }
  const ShortSumMoment m = short_sum_moment(2.0, 64, 16, 1);
  CHECK(m.lower.estimate <= m.upper.estimate * (1 + 1e-12));
}

TEST_CASE("contract violations") {
  const auto fam = SplitFamily::gauss_linear_x();
  CHECK_THROWS_AS(sup_over_y(fam, TorusPoint({0.1}), 10, 0), ContractViolation);
  CHECK_THROWS_AS(sup_over_y(fam, TorusPoint({0.1, 0.2}), 10), ContractViolation);
  CHECK_THROWS_AS(gauss_K_norm(0.0, 10, 4, 1), ContractViolation);
  CHECK_THROWS_AS(gauss_K_norm(-1.0, 10, 4, 1), ContractViolation);
  CHECK_THROWS_AS(gauss_K_norm(2.0, 10, 1, 1), ContractViolation);
  CHECK_THROWS_AS(sup_over_fiber(std::nan(""), 0.0, 10), ContractViolation);
}
