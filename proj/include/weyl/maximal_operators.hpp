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

// Suprema of |S| over sub-tori and fibers, and Monte Carlo estimates of the
// maximal-operator norms built from them.

#pragma once

#include <cstdint>
#include <vector>

#include "weyl/weyl_core.hpp"

namespace weyl {

enum class SupStrategy { grid_dft, rational_seeded, multistart_ascent, hybrid };

const char* to_string(SupStrategy s);

/// A lower bound on a supremum, attained at `argmax`.
struct SupResult {
  double value = 0.0;
  TorusPoint argmax;
  std::int64_t budget_used = 0;
  SupStrategy strategy = SupStrategy::hybrid;
  bool empty_fiber = false;
};

struct NormEstimate {
  double rho = 0.0;
  std::int64_t N = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

/// How integration points are drawn. `importance` mixes uniform draws with
/// draws concentrated near rationals of small denominator and reweights, so
/// the estimator stays unbiased for the same integral.
enum class Sampler { importance, uniform };

struct MonteCarloOptions {
  Sampler sampler = Sampler::importance;
  int threads = 0;  // 0: hardware concurrency; never affects results
};

/// Per-sample suprema with their integration weights (self-normalized).
struct SupSampleSet {
  std::int64_t N = 0;
  std::uint64_t seed = 0;
  double support_length = 1.0;  // measure of the integration domain
  std::vector<std::vector<double>> points;
  std::vector<double> sups;
  std::vector<double> weights;
  std::vector<TorusPoint> argmax;
  std::int64_t floor_violations = 0;  // L-type sets only
};

/// (support_length * weighted mean of sup^rho)^{1/rho} with a delta-method stderr.
NormEstimate norm_from_sups(const SupSampleSet& set, double rho);

/// Budget sentinel selecting default_budget(). Budgets count evaluations: one
/// unit is one full length-N sum or one grid point of a scan.
inline constexpr std::int64_t kAutoBudget = -1;

/// 16 N for one linear y-coordinate, 192 for one nonlinear y-coordinate,
/// 128 (d - k) otherwise.
std::int64_t default_budget(const SplitFamily& family, std::int64_t N);

/// sup over y of |S(x, y; N)|; rng_seed drives the random multistarts.
SupResult sup_over_y(const SplitFamily& family, const TorusPoint& x, std::int64_t N,
                     std::int64_t budget = kAutoBudget, std::uint64_t rng_seed = 0);

SupSampleSet sample_family_sups(const SplitFamily& family, std::int64_t N, std::int64_t samples,
                                std::uint64_t seed, std::int64_t budget,
                                const MonteCarloOptions& opt = {});

NormEstimate max_operator_norm(const SplitFamily& family, double rho, std::int64_t N,
                               std::int64_t samples, std::uint64_t seed, std::int64_t budget = kAutoBudget,
                               const MonteCarloOptions& opt = {});

/// ||sup_y |G(x, y; N)| ||_{L^rho(dx)}.
NormEstimate gauss_K_norm(double rho, std::int64_t N, std::int64_t samples, std::uint64_t seed,
                          std::int64_t budget = kAutoBudget, const MonteCarloOptions& opt = {});

/// ||sup_x |G(x, y; N)| ||_{L^rho(dy)}; throws if a sample violates sup >= sqrt(N).
NormEstimate gauss_L_norm(double rho, std::int64_t N, std::int64_t samples, std::uint64_t seed,
                          std::int64_t budget = kAutoBudget, const MonteCarloOptions& opt = {});

SupSampleSet sample_K_sups(std::int64_t N, std::int64_t samples, std::uint64_t seed,
                           std::int64_t budget = kAutoBudget, const MonteCarloOptions& opt = {});
SupSampleSet sample_L_sups(std::int64_t N, std::int64_t samples, std::uint64_t seed,
                           std::int64_t budget = kAutoBudget, const MonteCarloOptions& opt = {});

// ---------------------------------------------------------------------------
// Projections pi_t(x, y) = x + t y.

struct ProjectionLine {
  double t = 0.0;
  double z = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(lo <= hi); }
  double length() const { return empty() ? 0.0 : hi - lo; }
};

/// {y in [0, 1] : z - t y in [0, 1]}.
Interval fiber_interval(const ProjectionLine& line);

/// Range of x + t y over the unit square.
Interval projection_support(double t);

/// sup over the fiber {(z - t y, y) : y in J} of |G|; argmax holds (x, y).
SupResult sup_over_fiber(double t, double z, std::int64_t N, std::int64_t budget = kAutoBudget,
                         std::uint64_t rng_seed = 0);

SupSampleSet sample_fiber_sups(double t, std::int64_t N, std::int64_t samples, std::uint64_t seed,
                               std::int64_t budget = kAutoBudget, const MonteCarloOptions& opt = {});

/// (int sup_fiber |G|^rho dz)^{1/rho}, z uniform on the support of pi_t.
NormEstimate projection_P_norm(double t, double rho, std::int64_t N, std::int64_t samples,
                               std::uint64_t seed, std::int64_t budget = kAutoBudget,
                               const MonteCarloOptions& opt = {});

/// Continued-fraction convergent p/q of t with the first q > min_denominator.
struct RationalSurrogate {
  std::int64_t p = 0;
  std::int64_t q = 1;
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
};
RationalSurrogate rational_surrogate(double t, std::int64_t min_denominator);

// ---------------------------------------------------------------------------
// Short sums sum_{n=M+1}^{M+N} e(x n + y n^2).

struct ShortSumSample {
  double x = 0.0, y = 0.0;
  double lower = 0.0;          // max over scanned shifts M
  std::int64_t best_shift = 0;
  double upper = 0.0;          // sup_u |G(u, y; N)|
};

struct ShortSumMoment {
  NormEstimate lower;
  NormEstimate upper;
  std::vector<ShortSumSample> samples;
};

/// Lower and upper brackets for sup_M |G(x, y; M, N)| at one point.
ShortSumSample short_sum_bracket(double x, double y, std::int64_t N, std::int64_t budget = kAutoBudget);

/// Brackets for (int sup_M |G(x, y; M, N)|^rho dx dy)^{1/rho} from uniform (x, y) samples.
ShortSumMoment short_sum_moment(double rho, std::int64_t N, std::int64_t samples,
                                std::uint64_t seed, std::int64_t budget = kAutoBudget,
                                const MonteCarloOptions& opt = {});

}  // namespace weyl
