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

#include "weyl/level_structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "affine_search.hpp"
#include "weyl/complete_sums.hpp"
#include "weyl/error.hpp"
#include "weyl/numeric.hpp"

namespace weyl {

// ---------------------------------------------------------------------------
// Level sets

LevelSetEstimate level_from_sups(const SupSampleSet& set, double A) {
  require(std::isfinite(A) && A > 0.0, "level set: threshold must be positive");
  require(!set.sups.empty() && set.sups.size() == set.weights.size(), "level set: empty sample set");
  LevelSetEstimate est;
  est.A = A;
  est.N = set.N;
  est.seed = set.seed;
  est.samples = static_cast<std::int64_t>(set.sups.size());
  num::CompensatedSum wsum, hit;
  std::int64_t hits = 0;
  for (std::size_t i = 0; i < set.sups.size(); ++i) {
    wsum.add(set.weights[i]);
    if (set.sups[i] >= A) {
      hit.add(set.weights[i]);
      ++hits;
    }
  }
  const double W = wsum.value();
  const double p = hit.value() / W;
  num::CompensatedSum var;
  for (std::size_t i = 0; i < set.sups.size(); ++i) {
    const double dev = set.weights[i] * ((set.sups[i] >= A ? 1.0 : 0.0) - p);
    var.add(dev * dev);
  }
  const double L = set.support_length;
  est.measure = L * p;
  est.std_error = L * std::sqrt(var.value()) / W;
  est.upper95 = hits == 0 ? L * 3.0 / static_cast<double>(est.samples)
                          : std::min(L, est.measure + 1.96 * est.std_error);
  return est;
}

std::vector<LevelSetEstimate> level_curve(const SupSampleSet& set, const std::vector<double>& A_grid) {
  std::vector<LevelSetEstimate> out;
  out.reserve(A_grid.size());
  for (double A : A_grid) out.push_back(level_from_sups(set, A));
  return out;
}

LevelSetEstimate level_set_measure(const SplitFamily& family, double A, std::int64_t N,
                                   std::int64_t samples, std::uint64_t seed, std::int64_t budget,
                                   const MonteCarloOptions& opt) {
  require(N >= 1, "level_set_measure: N must be positive");
  require(std::isfinite(A) && A >= 1.0, "level_set_measure: need A >= 1");
  require(samples >= 2, "level_set_measure: need at least two samples");
  if (A > static_cast<double>(N)) {
    LevelSetEstimate est;
    est.A = A;
    est.N = N;
    est.samples = samples;
    est.seed = seed;
    return est;
  }
  return level_from_sups(sample_family_sups(family, N, samples, seed, budget, opt), A);
}

// ---------------------------------------------------------------------------
// Envelopes

int structure_degree(int d) {
  require(d >= 1 && d <= 30, "structure_degree: degree out of range");
  return std::min(1 << (d - 1), 2 * d * (d - 1));
}

LevelEnvelope all_A_envelope(const SplitFamily& family) {
  const int d = family.d(), k = family.k();
  const int b = 2 * family.s_d() + d - k;
  return {static_cast<double>(b - family.tau()), static_cast<double>(b), 0.0};
}

std::optional<LevelEnvelope> large_A_envelope(const SplitFamily& family) {
  const int d = family.d(), k = family.k();
  if (d == 2 && k == 1) {
    const bool quadratic_fixed = family.x_degrees()[0] == 2;
    return LevelEnvelope{quadratic_fixed ? 2.0 : 3.0, 4.0, 0.5};
  }
  if (d < 3) return std::nullopt;
  const int D = structure_degree(d);
  return LevelEnvelope{static_cast<double>(d * k + 1 - family.tau()), static_cast<double>(d * k + 1),
                       1.0 - 1.0 / D};
}

LevelBoundReport check_levelset_bounds(const SplitFamily& family, std::int64_t N,
                                       const std::vector<LevelSetEstimate>& estimates, double eps) {
  require(N >= 1, "check_levelset_bounds: N must be positive");
  require(std::isfinite(eps) && eps >= 0.0, "check_levelset_bounds: eps must be non-negative");
  LevelBoundReport rep;
  rep.D = structure_degree(family.d());
  rep.eps = eps;
  const auto dN = static_cast<double>(N);
  const LevelEnvelope all = all_A_envelope(family);
  const auto large = large_A_envelope(family);
  for (const auto& e : estimates) {
    LevelBoundRow row;
    row.A = e.A;
    row.measure = e.measure;
    row.all_A_envelope = all.value(dN, e.A, eps);
    row.all_A_ratio = e.measure == 0.0 ? 0.0 : e.measure / row.all_A_envelope;
    if (large && e.A > std::pow(dN, large->threshold_exponent + eps)) {
      row.large_A_applies = true;
      row.large_A_envelope = large->value(dN, e.A, eps);
      row.large_A_ratio = e.measure == 0.0 ? 0.0 : e.measure / row.large_A_envelope;
      rep.max_large_A_ratio = std::max(rep.max_large_A_ratio, row.large_A_ratio);
    }
    rep.max_all_A_ratio = std::max(rep.max_all_A_ratio, row.all_A_ratio);
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Rational structure

double structure_radius(std::int64_t q, int j, int d, std::int64_t N, double A, double eps) {
  const auto dN = static_cast<double>(N);
  return std::pow(dN / A, d) * std::pow(dN, eps - j) / static_cast<double>(q);
}

namespace {

std::int64_t gcd_all(std::int64_t q, const std::vector<std::int64_t>& r) {
  std::int64_t g = q;
  for (auto v : r) g = std::gcd(g, v);
  return g;
}

// |u - r / q| in extended precision.
double rounding_error(double u, std::int64_t r, std::int64_t q) {
  return static_cast<double>(std::abs(static_cast<long double>(u) -
                                      static_cast<long double>(r) / static_cast<long double>(q)));
}

std::optional<RationalApprox> accept(const std::vector<double>& u, std::int64_t q, std::int64_t N,
                                     double A, double eps) {
  const int d = static_cast<int>(u.size());
  RationalApprox out;
  out.q = q;
  out.r.resize(u.size());
  for (int j = 1; j <= d; ++j) {
    const double uj = u[static_cast<std::size_t>(j - 1)];
    out.r[static_cast<std::size_t>(j - 1)] =
        static_cast<std::int64_t>(std::nearbyint(static_cast<double>(static_cast<long double>(uj) * q)));
  }
  const std::int64_t g = gcd_all(q, out.r);
  out.q /= g;
  for (auto& v : out.r) v /= g;
  out.errors.resize(u.size());
  for (int j = 1; j <= d; ++j) {
    const auto i = static_cast<std::size_t>(j - 1);
    out.errors[i] = rounding_error(u[i], out.r[i], out.q);
    if (!(out.errors[i] <= structure_radius(out.q, j, d, N, A, eps))) return std::nullopt;
  }
  return out;
}

}  // namespace

std::optional<RationalApprox> find_rational_structure(const std::vector<double>& u, std::int64_t N,
                                                      double A, double eps) {
  require(!u.empty() && u.size() <= static_cast<std::size_t>(kMaxDegree), "structure: bad degree");
  require(N >= 1 && std::isfinite(A) && A > 0.0, "structure: need N >= 1 and A > 0");
  for (double v : u) require(std::isfinite(v), "structure: non-finite coordinate");
  const int d = static_cast<int>(u.size());
  const double Qd = std::ceil(std::pow(static_cast<double>(N) / A, d) *
                              std::pow(static_cast<double>(N), eps));
  require(Qd < 1e9, "structure: denominator range too large");
  const auto Q = std::max<std::int64_t>(1, static_cast<std::int64_t>(Qd));
  if (d == 1) {
    // The smallest q with |q u - r| small enough is a convergent denominator.
    long double rem = static_cast<long double>(u[0]) - std::floor(static_cast<long double>(u[0]));
    std::int64_t k_prev = 0, k = 1;
    while (k <= Q) {
      if (auto hit = accept(u, k, N, A, eps)) return hit;
      if (rem == 0.0L) break;
      const long double inv = 1.0L / rem;
      const auto a = static_cast<std::int64_t>(std::floor(inv));
      rem = inv - std::floor(inv);
      if (a > Q) break;
      const std::int64_t next = a * k + k_prev;
      k_prev = k;
      k = next;
    }
    return std::nullopt;
  }
  for (std::int64_t q = 1; q <= Q; ++q) {
    if (auto hit = accept(u, q, N, A, eps)) return hit;
  }
  return std::nullopt;
}

VaughanDecomposition vaughan_decompose(const std::vector<double>& u, std::int64_t q,
                                       const std::vector<std::int64_t>& r, std::int64_t N) {
  require(q >= 1 && N >= 1, "vaughan_decompose: need q >= 1 and N >= 1");
  require(u.size() == r.size() && !u.empty(), "vaughan_decompose: u and r differ in length");
  require(gcd_all(q, r) == 1, "vaughan_decompose: gcd(q, r) must be 1");
  const int d = static_cast<int>(u.size());
  std::vector<double> xi(u.size());
  double budget = 1.0;
  for (int j = 1; j <= d; ++j) {
    const auto i = static_cast<std::size_t>(j - 1);
    xi[i] = static_cast<double>(static_cast<long double>(u[i]) -
                                static_cast<long double>(r[i]) / static_cast<long double>(q));
    budget += std::abs(xi[i]) * std::pow(static_cast<double>(N), j);
  }
  const auto S = complete_sum_crt(d, ResidueVector::make(static_cast<std::uint64_t>(q), r));
  std::vector<double> coeffs(u.size() + 1, 0.0);
  std::copy(u.begin(), u.end(), coeffs.begin() + 1);
  const auto value = eval_polynomial_sum(coeffs, N).value;
  VaughanDecomposition out;
  out.main = S / static_cast<double>(q) * oscillatory_integral(xi, static_cast<double>(N));
  out.delta = value - out.main;
  out.bound = static_cast<double>(q) * budget;
  return out;
}

StructureReport analyze_structure(const std::vector<double>& u, std::int64_t N, double A, double eps) {
  StructureReport rep;
  rep.u = u;
  rep.A = A;
  std::vector<double> coeffs(u.size() + 1, 0.0);
  std::copy(u.begin(), u.end(), coeffs.begin() + 1);
  rep.value = eval_polynomial_sum(coeffs, N).value;
  rep.found = find_rational_structure(u, N, A, eps);
  if (rep.found) {
    const auto v = vaughan_decompose(u, rep.found->q, rep.found->r, N);
    rep.vaughan_main = v.main;
    rep.vaughan_delta = v.delta;
  }
  return rep;
}

StructureSurvey structure_survey(std::int64_t N, double A, std::int64_t wanted,
                                 std::int64_t max_attempts, std::uint64_t seed, double eps,
                                 const MonteCarloOptions& opt) {
  require(N >= 1 && wanted >= 1 && max_attempts >= 2, "structure_survey: bad counts");
  StructureSurvey out;
  out.N = N;
  out.A = A;
  out.eps = eps;
  constexpr std::int64_t kBatch = 64;
  for (std::uint64_t batch = 0; out.attempts < max_attempts &&
                                static_cast<std::int64_t>(out.reports.size()) < wanted;
       ++batch) {
    const std::int64_t n = std::max<std::int64_t>(2, std::min(kBatch, max_attempts - out.attempts));
    const SupSampleSet set = sample_K_sups(N, n, detail::splitmix64(seed + batch), kAutoBudget, opt);
    out.attempts += n;
    for (std::size_t i = 0; i < set.sups.size(); ++i) {
      if (set.sups[i] < A || static_cast<std::int64_t>(out.reports.size()) >= wanted) continue;
      StructureReport rep = analyze_structure({set.points[i][0], set.argmax[i][0]}, N, A, eps);
      if (rep.found) {
        ++out.with_structure;
        out.max_q = std::max(out.max_q, rep.found->q);
      }
      out.reports.push_back(std::move(rep));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sumsets and moments

std::vector<std::int64_t> sumset_cardinalities(std::int64_t n_max, std::int64_t a, std::int64_t b) {
  require(b != 0, "sumset_cardinality: denominator must be nonzero");
  require(n_max >= 1, "sumset_cardinality: n must be positive");
  if (b < 0) {
    a = -a;
    b = -b;
  }
  const std::int64_t g = std::gcd(a, b);
  a /= g;
  b /= g;
  // a1 + (a / b) a2 = (b a1 + a a2) / b, so count distinct b a1 + a a2.
  const __int128 lo = std::min<__int128>(0, static_cast<__int128>(a) * (n_max - 1));
  const __int128 hi =
      static_cast<__int128>(b) * (n_max - 1) + std::max<__int128>(0, static_cast<__int128>(a) * (n_max - 1));
  require(hi - lo < (static_cast<__int128>(1) << 33), "sumset_cardinality: range too large");
  std::vector<bool> seen(static_cast<std::size_t>(hi - lo + 1), false);
  std::int64_t count = 0;
  auto mark = [&](std::int64_t a1, std::int64_t a2) {
    const auto v = static_cast<std::size_t>(static_cast<__int128>(b) * a1 + static_cast<__int128>(a) * a2 - lo);
    if (!seen[v]) {
      seen[v] = true;
      ++count;
    }
  };
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(n_max));
  // growing n by one adds the pairs with a1 = n - 1 or a2 = n - 1
  for (std::int64_t m = 0; m < n_max; ++m) {
    for (std::int64_t j = 0; j <= m; ++j) {
      mark(m, j);
      mark(j, m);
    }
    const std::int64_t bound = (std::abs(a) + b) * m + 1;
    if (count > bound) throw std::logic_error("sumset_cardinality: count exceeds (|a| + |b|)(n - 1) + 1");
    out.push_back(count);
  }
  return out;
}

std::int64_t sumset_cardinality(std::int64_t n, std::int64_t a, std::int64_t b) {
  return sumset_cardinalities(n, a, b).back();
}

double dyadic_moment_bound(const std::function<double(double)>& level, double M, double N, double rho,
                           double total_measure) {
  require(M > 0.0 && M <= N, "dyadic_moment_bound: need 0 < M <= N");
  require(rho > 0.0 && std::isfinite(rho), "dyadic_moment_bound: rho must be positive");
  num::CompensatedSum acc;
  acc.add(total_measure * std::pow(M, rho));
  for (double lower = M; lower <= N; lower *= 2.0) {
    acc.add(std::pow(2.0 * lower, rho) * level(lower));
  }
  return acc.value();
}

double dyadic_moment_envelope(double a, double b, double M, double N, double rho, double total_measure) {
  require(M > 0.0 && M <= N && N > 1.0, "dyadic_moment_envelope: need 0 < M <= N, N > 1");
  const double L = std::log(N);
  return total_measure * std::pow(M, rho) + std::pow(N, a) * std::pow(M, rho - b) * L +
         std::pow(N, rho + a - b) * L;
}

std::function<double(double)> empirical_level(const SupSampleSet& set) {
  return [&set](double A) { return level_from_sups(set, A).measure; };
}

double empirical_moment(const SupSampleSet& set, double rho) {
  require(rho > 0.0, "empirical_moment: rho must be positive");
  num::CompensatedSum w, wv;
  for (std::size_t i = 0; i < set.sups.size(); ++i) {
    w.add(set.weights[i]);
    wv.add(set.weights[i] * std::pow(set.sups[i], rho));
  }
  return set.support_length * wv.value() / w.value();
}

// ---------------------------------------------------------------------------
// Quadratic level sets

LevelSetEstimate gauss_levelset_y(double A, std::int64_t N, std::int64_t samples, std::uint64_t seed,
                                  std::int64_t budget, const MonteCarloOptions& opt) {
  return level_from_sups(sample_L_sups(N, samples, seed, budget, opt), A);
}

namespace {

std::int64_t small_denominator(double t, std::int64_t limit) {
  long double rem = static_cast<long double>(t) - std::floor(static_cast<long double>(t));
  long double h_prev = 1, h = std::floor(static_cast<long double>(t));
  std::int64_t k_prev = 0, k = 1;
  while (k <= limit) {
    if (std::abs(h / k - static_cast<long double>(t)) <= 1e-12L * std::max(1.0L, std::abs(static_cast<long double>(t))))
      return k;
    if (rem == 0.0L) return k;
    const long double inv = 1.0L / rem;
    const long double a = std::floor(inv);
    rem = inv - a;
    if (a > static_cast<long double>(limit)) return 0;
    const long double h_next = a * h + h_prev;
    const auto k_next = static_cast<std::int64_t>(a) * k + k_prev;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  return 0;
}

ProjectionLevelReport projection_report(const SupSampleSet& fibers, double t, double A, double eps) {
  ProjectionLevelReport rep;
  rep.estimate = level_from_sups(fibers, A);
  const auto dN = static_cast<double>(fibers.N);
  rep.slope_denominator = small_denominator(t, fibers.N);
  rep.rational_envelope = std::pow(dN, 3.0 + eps) * std::pow(A, -4.0);
  rep.any_t_envelope = std::pow(dN, 5.0 + eps) * std::pow(A, -6.0);
  return rep;
}

}  // namespace

ProjectionLevelReport projection_levelset(double t, double A, std::int64_t N, std::int64_t samples,
                                          std::uint64_t seed, std::int64_t budget, double eps,
                                          const MonteCarloOptions& opt) {
  require(std::isfinite(t), "projection_levelset: t must be finite");
  return projection_report(sample_fiber_sups(t, N, samples, seed, budget, opt), t, A, eps);
}

std::vector<ProjectionLevelReport> projection_level_curve(const SupSampleSet& fibers, double t,
                                                          const std::vector<double>& A_grid, double eps) {
  std::vector<ProjectionLevelReport> out;
  for (double A : A_grid) out.push_back(projection_report(fibers, t, A, eps));
  return out;
}

}  // namespace weyl
