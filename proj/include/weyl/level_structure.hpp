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

// Level-set measures of large sums, rational structure of large values,
// the main-term decomposition near rationals, sumsets and the dyadic moment
// estimate.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "weyl/maximal_operators.hpp"
#include "weyl/weyl_core.hpp"

namespace weyl {

struct LevelSetEstimate {
  double A = 0.0;
  std::int64_t N = 0;
  double measure = 0.0;  // in [0, support length]
  double std_error = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  double upper95 = 0.0;  // one-sided bound; 3 / samples scaled by the support when nothing is hit
};

/// Measure of {sup >= A} on a sample set; non-increasing in A for a fixed set.
LevelSetEstimate level_from_sups(const SupSampleSet& set, double A);

/// Level curve over a grid of thresholds on one shared sample set.
std::vector<LevelSetEstimate> level_curve(const SupSampleSet& set, const std::vector<double>& A_grid);

/// lambda({x in T_k : sup_y |S(x, y; N)| >= A}); A > N gives measure 0.
LevelSetEstimate level_set_measure(const SplitFamily& family, double A, std::int64_t N,
                                   std::int64_t samples, std::uint64_t seed,
                                   std::int64_t budget = kAutoBudget, const MonteCarloOptions& opt = {});

// ---------------------------------------------------------------------------
// Envelopes N^{a + eps} A^{-b}.

struct LevelEnvelope {
  double a = 0.0;
  double b = 0.0;
  double threshold_exponent = 0.0;  // applies for A > N^{threshold_exponent + eps}
  double value(double N, double A, double eps) const { return std::pow(N, a + eps) * std::pow(A, -b); }
};

/// Bound valid for every 1 <= A <= N: a = 2s + d - k - tau, b = 2s + d - k.
LevelEnvelope all_A_envelope(const SplitFamily& family);

/// Bound for large A, when one exists. For d >= 3: a = dk + 1 - tau, b = dk + 1
/// above N^{1 - 1/D}. For d = 2, k = 1: (2, 4) when the fixed coordinate is
/// quadratic and (3, 4) when it is linear, above N^{1/2}.
std::optional<LevelEnvelope> large_A_envelope(const SplitFamily& family);

/// D = min(2^{d-1}, 2d(d-1)).
int structure_degree(int d);

struct LevelBoundRow {
  double A = 0.0;
  double measure = 0.0;
  double all_A_envelope = 0.0;
  double all_A_ratio = 0.0;
  bool large_A_applies = false;
  double large_A_envelope = 0.0;
  double large_A_ratio = 0.0;
};

struct LevelBoundReport {
  std::vector<LevelBoundRow> rows;
  double max_all_A_ratio = 0.0;
  double max_large_A_ratio = 0.0;
  int D = 0;
  double eps = 0.0;
};

LevelBoundReport check_levelset_bounds(const SplitFamily& family, std::int64_t N,
                                       const std::vector<LevelSetEstimate>& estimates,
                                       double eps = 0.05);

// ---------------------------------------------------------------------------
// Rational structure of large sums.

struct RationalApprox {
  std::int64_t q = 1;
  std::vector<std::int64_t> r;  // r_j for degrees j = 1..d
  std::vector<double> errors;   // |u_j - r_j / q|
};

/// Radius q^{-1} (N / A)^d N^{-j + eps} allowed for coordinate j.
double structure_radius(std::int64_t q, int j, int d, std::int64_t N, double A, double eps);

/// First q <= (N / A)^d N^eps whose rounding r_j = round(q u_j) meets every
/// radius; u holds the coefficients of n, n^2, ..., n^d.
std::optional<RationalApprox> find_rational_structure(const std::vector<double>& u, std::int64_t N,
                                                      double A, double eps = 0.05);

struct VaughanDecomposition {
  std::complex<double> main;
  std::complex<double> delta;  // S(u; N) - main
  double bound = 0.0;          // q (1 + sum |xi_j| N^j)
};

/// Main term q^{-1} S_q(r) I(u - r / q) and its residual.
VaughanDecomposition vaughan_decompose(const std::vector<double>& u, std::int64_t q,
                                       const std::vector<std::int64_t>& r, std::int64_t N);

struct StructureReport {
  std::vector<double> u;
  std::complex<double> value;
  double A = 0.0;
  std::optional<RationalApprox> found;
  std::complex<double> vaughan_main;
  std::complex<double> vaughan_delta;
};

StructureReport analyze_structure(const std::vector<double>& u, std::int64_t N, double A,
                                  double eps = 0.05);

struct StructureSurvey {
  std::int64_t N = 0;
  double A = 0.0;
  double eps = 0.0;
  std::int64_t attempts = 0;
  std::vector<StructureReport> reports;  // one per large value found
  std::int64_t with_structure = 0;
  std::int64_t max_q = 0;
};

/// Large values |G(x, y; N)| >= A located by sup_y searches at sampled x,
/// each tested for rational structure. Stops after `wanted` large values or
/// `max_attempts` samples.
StructureSurvey structure_survey(std::int64_t N, double A, std::int64_t wanted,
                                 std::int64_t max_attempts, std::uint64_t seed, double eps = 0.05,
                                 const MonteCarloOptions& opt = {});

// ---------------------------------------------------------------------------
// Sumsets and moments.

/// #{a1 + (a / b) a2 : 0 <= a1, a2 < n}.
std::int64_t sumset_cardinality(std::int64_t n, std::int64_t a, std::int64_t b);

/// Entry n - 1 is sumset_cardinality(n, a, b), for n = 1..n_max.
std::vector<std::int64_t> sumset_cardinalities(std::int64_t n_max, std::int64_t a, std::int64_t b);

/// nu(X) M^rho + sum_{i=1}^{I} (2^i M)^rho level(2^{i-1} M) with 2^{I-1} M <= N < 2^I M.
double dyadic_moment_bound(const std::function<double(double)>& level, double M, double N,
                           double rho, double total_measure = 1.0);

/// nu(X) M^rho + N^a M^{rho - b} log N + N^{rho + a - b} log N.
double dyadic_moment_envelope(double a, double b, double M, double N, double rho,
                              double total_measure = 1.0);

/// A -> measure of {sup >= A} on a sample set.
std::function<double(double)> empirical_level(const SupSampleSet& set);

/// support * weighted mean of sup^rho.
double empirical_moment(const SupSampleSet& set, double rho);

// ---------------------------------------------------------------------------
// Quadratic level sets.

/// lambda({y : sup_x |G(x, y; N)| >= A}).
LevelSetEstimate gauss_levelset_y(double A, std::int64_t N, std::int64_t samples,
                                  std::uint64_t seed, std::int64_t budget = kAutoBudget,
                                  const MonteCarloOptions& opt = {});

struct ProjectionLevelReport {
  LevelSetEstimate estimate;
  std::int64_t slope_denominator = 0;  // q when t = p / q with q <= N, else 0
  double rational_envelope = 0.0;      // N^{3 + eps} A^{-4}
  double any_t_envelope = 0.0;         // N^{5 + eps} A^{-6}
};

/// Measure in z of {sup over the fiber of pi_t >= A}.
ProjectionLevelReport projection_levelset(double t, double A, std::int64_t N, std::int64_t samples,
                                          std::uint64_t seed, std::int64_t budget = kAutoBudget,
                                          double eps = 0.05, const MonteCarloOptions& opt = {});

/// Levels over a grid of thresholds on one shared fiber sample set.
std::vector<ProjectionLevelReport> projection_level_curve(const SupSampleSet& fibers, double t,
                                                          const std::vector<double>& A_grid,
                                                          double eps = 0.05);

}  // namespace weyl
