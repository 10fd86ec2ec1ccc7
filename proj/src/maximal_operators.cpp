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

#include "weyl/maximal_operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "affine_search.hpp"
#include "monte_carlo.hpp"
#include "weyl/error.hpp"
#include "weyl/numeric.hpp"

namespace weyl {

using detail::AffinePhase;
using detail::CoordinateRange;

// ---------------------------------------------------------------------------
// Samplers

namespace detail {

PointSampler::PointSampler(std::vector<int> degrees, std::int64_t N, Sampler kind)
    : degrees_(std::move(degrees)), kind_(kind) {
  double total = 0.0;
  for (int q = 1; q <= kMaxDenominator; ++q) total += 1.0 / (double(q) * q);
  double acc = 0.0;
  for (int q = 1; q <= kMaxDenominator; ++q) {
    q_prob_.push_back(1.0 / (double(q) * q) / total);
    acc += q_prob_.back();
    q_cdf_.push_back(acc);
  }
  q_cdf_.back() = 1.0;
  for (int e : degrees_) spread_.push_back(std::pow(static_cast<double>(N), e));
}

double PointSampler::density(const std::vector<double>& point) const {
  double g = 0.0;
  for (int q = 1; q <= kMaxDenominator; ++q) {
    const double dq = q;
    double prod = q_prob_[static_cast<std::size_t>(q - 1)];
    for (std::size_t j = 0; j < point.size(); ++j) {
      const double s = 1.0 / (dq * spread_[j]);
      const double half_range = spread_[j] / 2.0;
      const double dist = (dq * point[j] - std::nearbyint(dq * point[j])) / dq;
      prod *= (1.0 / dq) * s / (s * s + dist * dist) / (2.0 * std::atan(half_range));
    }
    g += prod;
  }
  return g;
}

double PointSampler::draw(std::mt19937_64& rng, std::vector<double>& point) const {
  point.resize(degrees_.size());
  if (kind_ == Sampler::uniform) {
    for (double& v : point) v = unit_uniform(rng);
    return 1.0;
  }
  if (unit_uniform(rng) < 0.5) {
    for (double& v : point) v = unit_uniform(rng);
  } else {
    const double pick = unit_uniform(rng);
    const auto q = static_cast<int>(std::lower_bound(q_cdf_.begin(), q_cdf_.end(), pick) -
                                    q_cdf_.begin()) + 1;
    const double dq = q;
    for (std::size_t j = 0; j < point.size(); ++j) {
      const double b = std::floor(unit_uniform(rng) * dq);
      const double u = 2.0 * unit_uniform(rng) - 1.0;
      const double s = 1.0 / (dq * spread_[j]);
      const double delta = s * std::tan(u * std::atan(spread_[j] / 2.0));
      point[j] = num::frac(b / dq + delta);
    }
  }
  return 1.0 / (0.5 + 0.5 * density(point));
}

}  // namespace detail

// ---------------------------------------------------------------------------

const char* to_string(SupStrategy s) {
  switch (s) {
    case SupStrategy::grid_dft: return "grid_dft";
    case SupStrategy::rational_seeded: return "rational_seeded";
    case SupStrategy::multistart_ascent: return "multistart_ascent";
    case SupStrategy::hybrid: return "hybrid";
  }
  return "unknown";
}

NormEstimate norm_from_sups(const SupSampleSet& set, double rho) {
  require(rho > 0.0 && std::isfinite(rho), "norm: rho must be positive");
  require(set.sups.size() == set.weights.size(), "norm: weights and sups differ in length");
  require(set.sups.size() >= 2, "norm: need at least two samples");
  NormEstimate est;
  est.rho = rho;
  est.N = set.N;
  est.samples = static_cast<std::int64_t>(set.sups.size());
  est.seed = set.seed;
  const double top = *std::max_element(set.sups.begin(), set.sups.end());
  if (top <= 0.0) return est;
  std::vector<double> r(set.sups.size());
  num::CompensatedSum wsum, wrsum;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = std::pow(set.sups[i] / top, rho);
    wsum.add(set.weights[i]);
    wrsum.add(set.weights[i] * r[i]);
  }
  const double W = wsum.value();
  const double m = wrsum.value() / W;
  num::CompensatedSum var;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double dev = set.weights[i] * (r[i] - m);
    var.add(dev * dev);
  }
  const double se_m = std::sqrt(var.value()) / W;
  est.estimate = top * std::pow(set.support_length * m, 1.0 / rho);
  est.std_error = m > 0.0 ? est.estimate * se_m / (rho * m) : 0.0;
  return est;
}

std::int64_t default_budget(const SplitFamily& family, std::int64_t N) {
  const auto& y = family.y_degrees();
  if (y.empty()) return 1;
  if (y.size() == 1) return y[0] == 1 ? 16 * N : 192;
  return 128 * static_cast<std::int64_t>(y.size());
}

namespace {

std::int64_t resolve_budget(std::int64_t budget, std::int64_t fallback) {
  if (budget == kAutoBudget) return fallback;
  require(budget >= 1, "budget must be positive");
  return budget;
}

std::vector<double> unit_direction(int degree) {
  std::vector<double> v(static_cast<std::size_t>(degree) + 1, 0.0);
  v[static_cast<std::size_t>(degree)] = 1.0;
  return v;
}

}  // namespace

SupResult sup_over_y(const SplitFamily& family, const TorusPoint& x, std::int64_t N,
                     std::int64_t budget, std::uint64_t rng_seed) {
  require(N >= 1, "sup_over_y: N must be positive");
  require(x.dim() == static_cast<std::size_t>(family.k()), "sup_over_y: x has the wrong dimension");
  budget = resolve_budget(budget, default_budget(family, N));
  const auto& ydeg = family.y_degrees();
  const std::size_t m = ydeg.size();
  const std::vector<double> zeros(m, 0.0);
  const std::vector<double> base = family.coefficients(x.coords(), zeros);

  SupResult out;
  if (m == 0) {
    out.value = eval_polynomial_sum(base, N).magnitude();
    out.argmax = TorusPoint::zeros(0);
    out.budget_used = 1;
    return out;
  }
  std::vector<std::vector<double>> dirs;
  for (int e : ydeg) dirs.push_back(unit_direction(e));
  const AffinePhase phase(base, std::move(dirs), N);
  std::vector<CoordinateRange> ranges(m);

  detail::SearchResult found;
  if (m == 1 && ydeg[0] == 1) {
    found = detail::search_linear_coordinate(phase, ranges[0], budget);
    out.strategy = SupStrategy::grid_dft;
  } else {
    detail::SeedOptions opt;
    opt.rng_seed = rng_seed;
    found = m == 1 ? detail::search_rational_seeded(phase, ranges[0], budget, opt)
                   : detail::search_multi(phase, ranges, budget, opt);
    out.strategy = found.from_random ? SupStrategy::multistart_ascent
                                     : (m == 1 ? SupStrategy::rational_seeded : SupStrategy::hybrid);
  }
  out.value = found.best.value;
  out.argmax = TorusPoint(found.best.s);
  out.budget_used = found.used;
  return out;
}

namespace {

template <class SupFn>
SupSampleSet sample_sups(std::int64_t N, std::int64_t samples, std::uint64_t seed,
                         const std::vector<int>& degrees, Sampler sampler, int threads,
                         SupFn&& sup_at) {
  require(samples >= 2, "need at least two samples");
  SupSampleSet set;
  set.N = N;
  set.seed = seed;
  const auto n = static_cast<std::size_t>(samples);
  set.points.resize(n);
  set.sups.resize(n);
  set.weights.resize(n);
  set.argmax.resize(n);
  const detail::PointSampler draw(degrees, N, sampler);
  detail::parallel_for(samples, threads, [&](std::int64_t i) {
    auto rng = detail::stream_rng(seed, static_cast<std::uint64_t>(i));
    const auto k = static_cast<std::size_t>(i);
    set.weights[k] = draw.draw(rng, set.points[k]);
    const SupResult r = sup_at(set.points[k], rng());
    set.sups[k] = r.value;
    set.argmax[k] = r.argmax;
  });
  return set;
}

}  // namespace

SupSampleSet sample_family_sups(const SplitFamily& family, std::int64_t N, std::int64_t samples,
                                std::uint64_t seed, std::int64_t budget,
                                const MonteCarloOptions& opt) {
  require(N >= 1, "N must be positive");
  budget = resolve_budget(budget, default_budget(family, N));
  return sample_sups(N, samples, seed, family.x_degrees(), opt.sampler, opt.threads,
                     [&](const std::vector<double>& x, std::uint64_t rs) {
                       return sup_over_y(family, TorusPoint(x), N, budget, rs);
                     });
}

NormEstimate max_operator_norm(const SplitFamily& family, double rho, std::int64_t N,
                               std::int64_t samples, std::uint64_t seed, std::int64_t budget,
                               const MonteCarloOptions& opt) {
  require(rho > 0.0 && std::isfinite(rho), "max_operator_norm: rho must be positive");
  require(N >= 1, "max_operator_norm: N must be positive");
  require(samples >= 2, "max_operator_norm: need at least two samples");
  if (family.k() == 0) {
    return {rho, N, static_cast<double>(N), 0.0, samples, seed};
  }
  return norm_from_sups(sample_family_sups(family, N, samples, seed, budget, opt), rho);
}

SupSampleSet sample_K_sups(std::int64_t N, std::int64_t samples, std::uint64_t seed,
                           std::int64_t budget, const MonteCarloOptions& opt) {
  return sample_family_sups(SplitFamily::gauss_linear_x(), N, samples, seed, budget, opt);
}

SupSampleSet sample_L_sups(std::int64_t N, std::int64_t samples, std::uint64_t seed,
                           std::int64_t budget, const MonteCarloOptions& opt) {
  SupSampleSet set =
      sample_family_sups(SplitFamily::gauss_quadratic_x(), N, samples, seed, budget, opt);
  const double floor = std::sqrt(static_cast<double>(N)) * (1.0 - 1e-6);
  set.floor_violations = std::count_if(set.sups.begin(), set.sups.end(),
                                       [&](double v) { return v < floor; });
  return set;
}

NormEstimate gauss_K_norm(double rho, std::int64_t N, std::int64_t samples, std::uint64_t seed,
                          std::int64_t budget, const MonteCarloOptions& opt) {
  require(rho > 0.0 && std::isfinite(rho), "gauss_K_norm: rho must be positive");
  return norm_from_sups(sample_K_sups(N, samples, seed, budget, opt), rho);
}

NormEstimate gauss_L_norm(double rho, std::int64_t N, std::int64_t samples, std::uint64_t seed,
                          std::int64_t budget, const MonteCarloOptions& opt) {
  require(rho > 0.0 && std::isfinite(rho), "gauss_L_norm: rho must be positive");
  const SupSampleSet set = sample_L_sups(N, samples, seed, budget, opt);
  if (set.floor_violations > 0) {
    throw std::logic_error("gauss_L_norm: a sample fell below the sqrt(N) floor");
  }
  return norm_from_sups(set, rho);
}

// ---------------------------------------------------------------------------
// Projections

Interval fiber_interval(const ProjectionLine& line) {
  const double t = line.t, z = line.z;
  if (t == 0.0) return (z >= 0.0 && z <= 1.0) ? Interval{0.0, 1.0} : Interval{1.0, 0.0};
  // 0 <= z - t y <= 1  <=>  y between (z - 1)/t and z/t.
  const double a = (z - 1.0) / t, b = z / t;
  return {std::max(0.0, std::min(a, b)), std::min(1.0, std::max(a, b))};
}

Interval projection_support(double t) {
  require(std::isfinite(t), "projection_support: t must be finite");
  return {std::min(0.0, t), 1.0 + std::max(0.0, t)};
}

SupResult sup_over_fiber(double t, double z, std::int64_t N, std::int64_t budget,
                         std::uint64_t rng_seed) {
  require(std::isfinite(t) && std::isfinite(z), "sup_over_fiber: non-finite input");
  require(N >= 1, "sup_over_fiber: N must be positive");
  budget = resolve_budget(budget, 192);
  const Interval J = fiber_interval({t, z});
  SupResult out;
  if (J.empty()) {
    out.empty_fiber = true;
    out.argmax = TorusPoint::zeros(2);
    return out;
  }
  if (t == 0.0) {
    const SupResult r =
        sup_over_y(SplitFamily::gauss_linear_x(), TorusPoint({z}), N, budget, rng_seed);
    out = r;
    out.argmax = TorusPoint({z, r.argmax[0]});
    return out;
  }
  const AffinePhase phase({0.0, z, 0.0}, {{0.0, -t, 1.0}}, N);
  const CoordinateRange range{false, J.lo, J.hi};
  detail::SeedOptions opt;
  opt.rng_seed = rng_seed;
  const auto found = detail::search_rational_seeded(phase, range, budget, opt);
  const double y = found.best.s[0];
  out.value = found.best.value;
  out.argmax = TorusPoint({z - t * y, y});
  out.budget_used = found.used;
  out.strategy = found.from_random ? SupStrategy::multistart_ascent : SupStrategy::rational_seeded;
  return out;
}

SupSampleSet sample_fiber_sups(double t, std::int64_t N, std::int64_t samples, std::uint64_t seed,
                               std::int64_t budget, const MonteCarloOptions& opt) {
  require(N >= 1, "sample_fiber_sups: N must be positive");
  const Interval support = projection_support(t);
  SupSampleSet set = sample_sups(
      N, samples, seed, {1}, Sampler::uniform, opt.threads,
      [&](const std::vector<double>& u, std::uint64_t rs) {
        return sup_over_fiber(t, support.lo + support.length() * u[0], N, budget, rs);
      });
  for (auto& p : set.points) p[0] = support.lo + support.length() * p[0];
  set.support_length = support.length();
  return set;
}

NormEstimate projection_P_norm(double t, double rho, std::int64_t N, std::int64_t samples,
                               std::uint64_t seed, std::int64_t budget,
                               const MonteCarloOptions& opt) {
  require(rho > 0.0 && std::isfinite(rho), "projection_P_norm: rho must be positive");
  return norm_from_sups(sample_fiber_sups(t, N, samples, seed, budget, opt), rho);
}

RationalSurrogate rational_surrogate(double t, std::int64_t min_denominator) {
  require(std::isfinite(t), "rational_surrogate: t must be finite");
  require(min_denominator >= 0, "rational_surrogate: negative denominator bound");
  // Convergents h_k / k_k of the continued fraction of t.
  __int128 h_prev = 1, h = static_cast<__int128>(std::floor(t));
  __int128 k_prev = 0, k = 1;
  long double rem = static_cast<long double>(t) - std::floor(static_cast<long double>(t));
  while (k <= min_denominator) {
    require(rem != 0.0L, "rational_surrogate: t is rational with a small denominator");
    const long double inv = 1.0L / rem;
    const auto a = static_cast<__int128>(std::floor(inv));
    rem = inv - std::floor(inv);
    const __int128 h_next = a * h + h_prev;
    const __int128 k_next = a * k + k_prev;
    require(k_next < (static_cast<__int128>(1) << 62), "rational_surrogate: denominator overflow");
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  return {static_cast<std::int64_t>(h), static_cast<std::int64_t>(k)};
}

// ---------------------------------------------------------------------------
// Short sums

ShortSumSample short_sum_bracket(double x, double y, std::int64_t N, std::int64_t budget) {
  require(N >= 1, "short_sum_bracket: N must be positive");
  require(std::isfinite(x) && std::isfinite(y), "short_sum_bracket: non-finite input");
  budget = resolve_budget(budget, 16 * N);
  ShortSumSample s;
  s.x = num::frac(x);
  s.y = num::frac(y);
  const AffinePhase phase({0.0, 0.0, s.y}, {{0.0, 1.0}}, N);
  const auto upper = detail::search_linear_coordinate(phase, CoordinateRange{}, budget);
  const double target = upper.best.s[0];

  // Shifts whose effective linear coefficient frac(x + 2 M y) lands closest to the maximizer.
  const std::int64_t shifts = std::min<std::int64_t>(N * N, std::int64_t{1} << 22);
  constexpr int kKeep = 4;
  std::vector<std::pair<double, std::int64_t>> best;
  const num::DoubleDouble step = num::frac_mul(s.y, 2);
  num::DoubleDouble u = num::frac_mul(s.x, 1);
  for (std::int64_t M = 0; M <= shifts; ++M) {
    const double gap = std::abs(num::frac(u.hi + u.lo - target + 0.5) - 0.5);
    if (static_cast<int>(best.size()) < kKeep || gap < best.back().first) {
      if (static_cast<int>(best.size()) == kKeep) best.pop_back();
      best.insert(std::upper_bound(best.begin(), best.end(), std::pair{gap, M}), {gap, M});
    }
    u = num::add_mod1(u, step);
  }
  s.lower = gauss_short_interval(s.x, s.y, 0, N).magnitude();
  for (const auto& [gap, M] : best) {
    const double v = gauss_short_interval(s.x, s.y, M, N).magnitude();
    if (v > s.lower) {
      s.lower = v;
      s.best_shift = M;
    }
  }
  s.upper = std::max(upper.best.value, s.lower);
  return s;
}

ShortSumMoment short_sum_moment(double rho, std::int64_t N, std::int64_t samples,
                                std::uint64_t seed, std::int64_t budget,
                                const MonteCarloOptions& opt) {
  require(rho > 0.0 && std::isfinite(rho), "short_sum_moment: rho must be positive");
  require(samples >= 2, "short_sum_moment: need at least two samples");
  ShortSumMoment out;
  out.samples.resize(static_cast<std::size_t>(samples));
  detail::parallel_for(samples, opt.threads, [&](std::int64_t i) {
    auto rng = detail::stream_rng(seed, static_cast<std::uint64_t>(i));
    const double x = detail::unit_uniform(rng);
    const double y = detail::unit_uniform(rng);
    out.samples[static_cast<std::size_t>(i)] = short_sum_bracket(x, y, N, budget);
  });
  SupSampleSet lower, upper;
  lower.N = upper.N = N;
  lower.seed = upper.seed = seed;
  lower.weights.assign(out.samples.size(), 1.0);
  upper.weights = lower.weights;
  for (const auto& s : out.samples) {
    lower.sups.push_back(s.lower);
    upper.sups.push_back(s.upper);
  }
  out.lower = norm_from_sups(lower, rho);
  out.upper = norm_from_sups(upper, rho);
  return out;
}

}  // namespace weyl
