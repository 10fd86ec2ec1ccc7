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

#include "affine_search.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "weyl/arith.hpp"
#include "weyl/complete_sums.hpp"
#include "weyl/error.hpp"
#include "weyl/numeric.hpp"
#include "weyl/weyl_core.hpp"

namespace weyl::detail {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int top_degree(const std::vector<double>& c) {
  int deg = static_cast<int>(c.size()) - 1;
  while (deg > 0 && c[deg] == 0.0) --deg;
  return deg;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double CoordinateRange::project(double v) const {
  if (periodic) return num::frac(v);
  return std::clamp(v, lo, hi);
}

// ---------------------------------------------------------------------------

AffinePhase::AffinePhase(std::vector<double> base, std::vector<std::vector<double>> directions,
                         std::int64_t N)
    : base_(std::move(base)), directions_(std::move(directions)), N_(N) {
  require(N >= 1, "AffinePhase: N must be positive");
  std::size_t len = base_.size();
  for (const auto& d : directions_) len = std::max(len, d.size());
  require(len <= static_cast<std::size_t>(kMaxDegree) + 1, "AffinePhase: degree too large");
  base_.resize(len, 0.0);
  const double n = static_cast<double>(N);
  for (auto& d : directions_) {
    d.resize(len, 0.0);
    const int deg = top_degree(d);
    require(deg >= 1 && d[deg] != 0.0, "AffinePhase: directions must be nonconstant");
    const double scale = std::abs(d[deg]) * std::pow(n, deg);
    std::vector<double> scaled(static_cast<std::size_t>(deg) + 1);
    for (int e = 0; e <= deg; ++e) scaled[e] = d[e] * std::pow(n, e) / scale;
    dir_degree_.push_back(deg);
    scale_.push_back(scale);
    scaled_dirs_.push_back(std::move(scaled));
  }
}

std::vector<double> AffinePhase::coefficients(std::span<const double> s) const {
  std::vector<double> c = base_;
  for (std::size_t j = 0; j < directions_.size(); ++j)
    for (std::size_t e = 0; e < c.size(); ++e) c[e] += s[j] * directions_[j][e];
  return c;
}

std::complex<double> AffinePhase::value(std::span<const double> s) const {
  return eval_polynomial_sum(coefficients(s), N_).value;
}

PhaseDerivatives AffinePhase::derivatives(std::span<const double> s) const {
  const std::size_t m = directions_.size();
  PhaseStepper stepper(coefficients(s));
  num::CompensatedComplexSum total;
  std::vector<std::complex<double>> g(m, 0.0);
  std::vector<std::complex<double>> h(m * m, 0.0);
  std::vector<double> f(m);
  const double inv_n = 1.0 / static_cast<double>(N_);
  for (std::int64_t n = 1; n <= N_; ++n) {
    const std::complex<double> w = num::unit_phasor(stepper.phase());
    stepper.advance();
    total.add(w);
    const double z = static_cast<double>(n) * inv_n;
    for (std::size_t j = 0; j < m; ++j) {
      const auto& a = scaled_dirs_[j];
      double acc = 0.0;
      for (std::size_t e = a.size(); e > 0; --e) acc = acc * z + a[e - 1];
      f[j] = acc;
      g[j] += acc * w;
    }
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t l = j; l < m; ++l) h[j * m + l] += (f[j] * f[l]) * w;
  }
  PhaseDerivatives out;
  out.value = total.value();
  out.grad.resize(static_cast<Eigen::Index>(m));
  out.hess.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  const std::complex<double> i2pi(0.0, kTwoPi);
  for (std::size_t j = 0; j < m; ++j) {
    out.grad(static_cast<Eigen::Index>(j)) = i2pi * g[j];
    for (std::size_t l = j; l < m; ++l) {
      const std::complex<double> v = -kTwoPi * kTwoPi * h[j * m + l];
      out.hess(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) = v;
      out.hess(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

int ascent_cost(const AscentOptions& opt) {
  return 1 + opt.max_iterations * (1 + opt.max_halvings);
}

Candidate ascend(const AffinePhase& phase, std::span<const CoordinateRange> ranges,
                 std::vector<double> s, const AscentOptions& opt, EvalCounter& counter) {
  const auto m = static_cast<Eigen::Index>(phase.dim());
  for (Eigen::Index j = 0; j < m; ++j) s[j] = ranges[j].project(s[j]);
  PhaseDerivatives cur = phase.derivatives(s);
  counter.charge();
  for (int it = 0; it < opt.max_iterations; ++it) {
    const std::complex<double> S = cur.value;
    const double f = std::norm(S);
    Eigen::VectorXd g(m);
    Eigen::MatrixXd H(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      g(j) = 2.0 * std::real(std::conj(S) * cur.grad(j));
      for (Eigen::Index l = 0; l < m; ++l) {
        H(j, l) = 2.0 * std::real(std::conj(cur.grad(l)) * cur.grad(j) +
                                  std::conj(S) * cur.hess(j, l));
      }
    }
    Eigen::VectorXd step;
    const Eigen::MatrixXd negH = -H;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(negH);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
        (ldlt.vectorD().array() > 1e-12 * (1.0 + negH.cwiseAbs().maxCoeff())).all()) {
      step = ldlt.solve(g);
    } else {
      const double gg = g.squaredNorm();
      if (gg == 0.0) break;
      const double curvature = g.dot(H * g) / gg;
      step = curvature < 0.0 ? Eigen::VectorXd(g / -curvature)
                             : Eigen::VectorXd(g * (opt.step_clamp / g.cwiseAbs().maxCoeff()));
    }
    const double biggest = step.cwiseAbs().maxCoeff();
    if (!std::isfinite(biggest)) break;
    if (biggest > opt.step_clamp) step *= opt.step_clamp / biggest;
    if (step.cwiseAbs().maxCoeff() < opt.min_step) break;

    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      std::vector<double> trial(s);
      for (Eigen::Index j = 0; j < m; ++j)
        trial[j] = ranges[j].project(s[j] + step(j) / phase.scale(static_cast<std::size_t>(j)));
      PhaseDerivatives next = phase.derivatives(trial);
      counter.charge();
      if (std::norm(next.value) > f) {
        s = std::move(trial);
        cur = std::move(next);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return {std::move(s), std::abs(cur.value)};
}

// ---------------------------------------------------------------------------

SearchResult search_linear_coordinate(const AffinePhase& phase, const CoordinateRange& range,
                                      std::int64_t budget) {
  require(phase.dim() == 1, "linear search needs one coordinate");
  require(phase.direction_degree(0) == 1 && phase.direction(0)[1] == 1.0 &&
              phase.direction(0)[0] == 0.0,
          "linear search needs the direction n");
  require(range.periodic, "linear search needs a periodic coordinate");
  const std::int64_t N = phase.N();
  const std::int64_t M = 4 * N;
  EvalCounter counter(budget);

  std::vector<std::complex<double>> weights(static_cast<std::size_t>(N));
  PhaseStepper stepper(phase.base());
  for (auto& w : weights) {
    w = num::unit_phasor(stepper.phase());
    stepper.advance();
  }
  const auto grid = grid_scan_dft(weights, M);
  counter.charge(M);

  SearchResult out;
  std::vector<double> origin{0.0};
  out.best = {origin, std::abs(phase.value(origin))};
  counter.charge();

  std::vector<double> mag(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) mag[j] = std::abs(grid[j]);
  std::vector<std::size_t> peaks;
  const double top = *std::max_element(mag.begin(), mag.end());
  for (std::size_t j = 0; j < mag.size(); ++j) {
    const double prev = mag[(j + mag.size() - 1) % mag.size()];
    const double next = mag[(j + 1) % mag.size()];
    if (mag[j] >= prev && mag[j] >= next && mag[j] >= 0.8 * top) peaks.push_back(j);
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });
  if (peaks.size() > 8) peaks.resize(8);

  const auto to_coord = [&](std::size_t j) { return static_cast<double>(j) / static_cast<double>(M); };
  for (std::size_t j : peaks) {
    if (mag[j] > out.best.value) out.best = {{to_coord(j)}, mag[j]};
  }
  const AscentOptions opt{};
  const CoordinateRange ranges[1] = {range};
  for (std::size_t j : peaks) {
    if (counter.remaining() < ascent_cost(opt)) break;
    Candidate c = ascend(phase, ranges, {to_coord(j)}, opt, counter);
    if (c.value > out.best.value) out.best = std::move(c);
  }
  out.used = counter.used();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// max over L2 of |int_0^1 e(L1 t + L2 t^2) dt| and the maximizing L2, for L1 >= 0.
constexpr std::array<double, 65> kPeakL1 = {
    0,    0.25, 0.5,  0.75, 1,    1.25, 1.5,  1.75, 2,    2.25, 2.5,  2.75, 3,
    3.25, 3.5,  3.75, 4,    4.5,  5,    5.5,  6,    6.5,  7,    7.5,  8,    8.5,
    9,    9.5,  10,   10.5, 11,   11.5, 12,   12.5, 13,   13.5, 14,   14.5, 15,
    15.5, 16,   18,   20,   22,   24,   26,   28,   30,   32,   34,   36,   38,
    40,   42,   44,   46,   48,   50,   52,   54,   56,   58,   60,   62,   64};
constexpr std::array<double, 65> kPeakHeight = {
    1.0000, 0.9936, 0.9746, 0.9435, 0.9015, 0.8498, 0.7904, 0.7256, 0.6582, 0.5923, 0.5340,
    0.4959, 0.4982, 0.5138, 0.5232, 0.5239, 0.5158, 0.4767, 0.4201, 0.4010, 0.4180, 0.4145,
    0.3900, 0.3530, 0.3527, 0.3623, 0.3564, 0.3357, 0.3086, 0.3212, 0.3248, 0.3160, 0.2965,
    0.2888, 0.2971, 0.2959, 0.2846, 0.2664, 0.2735, 0.2768, 0.2717, 0.2585, 0.2459, 0.2340,
    0.2229, 0.2127, 0.2034, 0.1948, 0.1905, 0.1872, 0.1838, 0.1802, 0.1765, 0.1728, 0.1691,
    0.1655, 0.1620, 0.1585, 0.1551, 0.1519, 0.1487, 0.1456, 0.1427, 0.1401, 0.1387};
constexpr std::array<double, 65> kPeakL2 = {
    0.000,   -0.234,  -0.468,  -0.701,  -0.933,  -1.162,  -1.387,  -1.607,  -1.816,  -2.008,
    -2.163,  -2.219,  -2.173,  -2.322,  -2.522,  -2.736,  -2.953,  -3.379,  -3.739,  -3.647,
    -4.024,  -4.458,  -4.884,  -5.225,  -5.093,  -5.509,  -5.947,  -6.367,  -6.579,  -6.553,
    -6.988,  -7.427,  -7.828,  -7.605,  -8.022,  -8.466,  -8.899,  -9.238,  -9.055,  -9.495,
    -9.939,  -10.968, -11.991, -13.012, -14.032, -15.051, -16.073, -17.098, -18.866, -19.900,
    -20.924, -21.942, -22.958, -23.971, -24.983, -25.994, -27.004, -28.014, -29.024, -30.033,
    -31.043, -32.053, -33.063, -34.894, -35.911};

double interpolate_peak(const std::array<double, 65>& values, double l1) {
  const auto it = std::upper_bound(kPeakL1.begin(), kPeakL1.end(), l1);
  const auto hi = static_cast<std::size_t>(it - kPeakL1.begin());
  const std::size_t lo = hi - 1;
  const double w = (l1 - kPeakL1[lo]) / (kPeakL1[hi] - kPeakL1[lo]);
  return values[lo] + w * (values[hi] - values[lo]);
}

double quadratic_peak_height(double lambda1) {
  const double a = std::abs(lambda1);
  if (a >= kPeakL1.back()) return kPeakHeight.back() * std::sqrt(kPeakL1.back() / a);
  return interpolate_peak(kPeakHeight, a);
}

// Quadratic offset L2 maximizing the main term for a given linear offset L1.
double quadratic_peak_offset(double lambda1) {
  const double a = std::abs(lambda1);
  const double v = a >= kPeakL1.back() ? kPeakL2.back() * (a / kPeakL1.back())
                                        : interpolate_peak(kPeakL2, a);
  return lambda1 < 0.0 ? -v : v;
}

struct RationalSeed {
  double proxy = 0.0;
  std::int64_t q = 1;
  std::int64_t a = 0;
};

// Oscillatory decay of the main term for the non-seeded coordinates.
double decay_factor(const std::vector<double>& lambda, int seeded_degree, int exponent_degree) {
  double best = 1.0;
  for (std::size_t e = 1; e < lambda.size(); ++e) {
    if (static_cast<int>(e) == seeded_degree) continue;
    const double l = std::abs(lambda[e]);
    if (l > 1.0) best = std::min(best, std::pow(l, -1.0 / exponent_degree));
  }
  return best;
}

// Rounds u to r/q coordinatewise; returns Lambda_e = (u_e - r_e/q) N^e.
std::vector<double> rounding_offsets(const std::vector<double>& u, std::int64_t q, std::int64_t N,
                                     std::vector<std::int64_t>* residues) {
  std::vector<double> lambda(u.size(), 0.0);
  if (residues) residues->assign(u.size(), 0);
  const auto dq = static_cast<double>(q);
  for (std::size_t e = 1; e < u.size(); ++e) {
    const double fu = num::frac(u[e]);
    const double r = std::nearbyint(fu * dq);
    lambda[e] = (fu - r / dq) * std::pow(static_cast<double>(N), static_cast<double>(e));
    if (residues) (*residues)[e] = static_cast<std::int64_t>(r) % q;
  }
  return lambda;
}

std::int64_t default_q_max(std::int64_t N) {
  return std::min<std::int64_t>(
      2048, static_cast<std::int64_t>(std::ceil(4.0 * std::sqrt(static_cast<double>(N)))));
}

void keep_top(std::vector<RationalSeed>& local, int per_q, std::vector<RationalSeed>& out) {
  std::stable_sort(local.begin(), local.end(),
                   [](const RationalSeed& a, const RationalSeed& b) { return a.proxy > b.proxy; });
  for (int i = 0; i < per_q && i < static_cast<int>(local.size()); ++i) out.push_back(local[i]);
  local.clear();
}

std::vector<RationalSeed> rank_single_seeds(const AffinePhase& phase, const CoordinateRange& range,
                                            std::int64_t q_max, int per_q) {
  const std::int64_t N = phase.N();
  const auto& dir = phase.direction(0);
  const int e_star = phase.direction_degree(0);
  const int total_degree = std::max(top_degree(phase.base()), e_star);
  const int exponent_degree = total_degree;
  std::vector<RationalSeed> seeds;
  std::vector<RationalSeed> local;
  std::vector<std::int64_t> residues;

  bool monomial = true;
  for (int e = 0; e < e_star; ++e) monomial = monomial && dir[e] == 0.0;

  for (std::int64_t q = 1; q <= q_max; ++q) {
    const auto dq = static_cast<double>(q);
    std::int64_t a_lo = 0, a_hi = q - 1;
    if (!range.periodic) {
      a_lo = static_cast<std::int64_t>(std::ceil(range.lo * dq - 1e-12));
      a_hi = static_cast<std::int64_t>(std::floor(range.hi * dq + 1e-12));
    }
    if (total_degree <= 2) {
      for (std::int64_t a = a_lo; a <= a_hi; ++a) {
        const double y = static_cast<double>(a) / dq;
        std::vector<double> u = phase.base();
        for (std::size_t e = 0; e < u.size(); ++e) u[e] += y * dir[e];
        const auto lambda = rounding_offsets(u, q, N, &residues);
        const double mag = quadratic_complete_sum_magnitude(
            static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(residues[1]),
            static_cast<std::uint64_t>(residues.size() > 2 ? residues[2] : 0));
        if (mag < 1e-9) continue;
        const double decay = e_star == 2 ? quadratic_peak_height(lambda[1])
                                         : decay_factor(lambda, e_star, exponent_degree);
        local.push_back({mag / dq * decay, q, a});
      }
    } else {
      require(monomial, "rational seeding above degree 2 needs a monomial direction");
      std::vector<double> u = phase.base();
      const auto lambda = rounding_offsets(u, q, N, &residues);
      // S_q for every a at once: fold n^{e*} mod q and transform.
      std::vector<std::complex<double>> w(static_cast<std::size_t>(q));
      for (std::int64_t n = 1; n <= q; ++n) {
        unsigned __int128 acc = 0;
        for (std::size_t e = residues.size(); e > 1; --e) {
          const std::int64_t r = static_cast<int>(e - 1) == e_star ? 0 : residues[e - 1];
          acc = (acc + static_cast<unsigned __int128>(r)) * static_cast<unsigned __int128>(n) % q;
        }
        w[static_cast<std::size_t>(n - 1)] = num::unit_phasor(static_cast<double>(acc) / dq);
      }
      const auto sums = grid_scan_dft_power(w, q, e_star);
      const double decay = decay_factor(lambda, e_star, exponent_degree);
      for (std::int64_t a = a_lo; a <= a_hi; ++a) {
        const double mag = std::abs(sums[static_cast<std::size_t>(((a % q) + q) % q)]);
        if (mag < 1e-9) continue;
        local.push_back({mag / dq * decay, q, a});
      }
    }
    keep_top(local, per_q, seeds);
  }
  std::stable_sort(seeds.begin(), seeds.end(),
                   [](const RationalSeed& a, const RationalSeed& b) { return a.proxy > b.proxy; });
  return seeds;
}

}  // namespace

namespace {

// Upper proxy per denominator when every numerator shares the same rounding of the base.
std::vector<RationalSeed> rank_denominators(const AffinePhase& phase, std::int64_t q_max) {
  const std::int64_t N = phase.N();
  const int e_star = phase.direction_degree(0);
  const int total_degree = std::max(top_degree(phase.base()), e_star);
  std::vector<RationalSeed> out;
  std::vector<std::int64_t> residues;
  for (std::int64_t q = 1; q <= q_max; ++q) {
    const auto dq = static_cast<double>(q);
    const auto lambda = rounding_offsets(phase.base(), q, N, &residues);
    double best = 0.0;
    if (total_degree <= 2) {
      for (std::int64_t a = 0; a < q; ++a) {
        best = std::max(best, quadratic_complete_sum_magnitude(
                                  static_cast<std::uint64_t>(q),
                                  static_cast<std::uint64_t>(residues[1]),
                                  static_cast<std::uint64_t>(a)));
      }
    } else {
      std::vector<std::complex<double>> w(static_cast<std::size_t>(q));
      for (std::int64_t n = 1; n <= q; ++n) {
        unsigned __int128 acc = 0;
        for (std::size_t e = residues.size(); e > 1; --e) {
          acc = (acc + static_cast<unsigned __int128>(residues[e - 1])) *
                static_cast<unsigned __int128>(n) % q;
        }
        w[static_cast<std::size_t>(n - 1)] = num::unit_phasor(static_cast<double>(acc) / dq);
      }
      for (const auto& v : grid_scan_dft_power(w, q, e_star)) best = std::max(best, std::abs(v));
    }
    if (best < 1e-9) continue;
    const double decay = e_star == 2 && total_degree == 2
                             ? quadratic_peak_height(lambda[1])
                             : decay_factor(lambda, e_star, total_degree);
    out.push_back({best / dq * decay, q, 0});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RationalSeed& a, const RationalSeed& b) { return a.proxy > b.proxy; });
  return out;
}

// Offset L_{e*} of the predicted peak given the rounding offsets at a/q.
double predicted_top_offset(const std::vector<double>& lambda, int e_star) {
  const double lower = lambda[static_cast<std::size_t>(e_star - 1)];
  if (e_star == 2) return quadratic_peak_offset(lower);
  return -(e_star - 1) * lower / (e_star * 0.6);
}

}  // namespace

SearchResult search_rational_seeded(const AffinePhase& phase, const CoordinateRange& range,
                                    std::int64_t budget, const SeedOptions& opt) {
  require(phase.dim() == 1, "rational seeding needs one coordinate");
  const int e_star = phase.direction_degree(0);
  const auto& dir = phase.direction(0);
  require(std::abs(dir[e_star]) == 1.0 && phase.base()[e_star] == 0.0,
          "rational seeding needs a unit leading coefficient in a free degree");
  const std::int64_t N = phase.N();
  const double sign = dir[e_star];
  const int total_degree = std::max(top_degree(phase.base()), e_star);
  const std::int64_t q_max = opt.q_max > 0 ? opt.q_max : default_q_max(N);
  const double top_scale = std::pow(static_cast<double>(N), e_star);
  const bool shifted_peaks = e_star == total_degree && e_star >= 2;

  // With a monomial direction on a periodic coordinate, one pass over n
  // evaluates S at a/q + eta for every numerator a simultaneously.
  bool batched = range.periodic && sign == 1.0;
  for (int e = 0; e < e_star; ++e) batched = batched && dir[e] == 0.0;

  std::vector<RationalSeed> seeds = batched ? rank_denominators(phase, q_max)
                                            : rank_single_seeds(phase, range, q_max, opt.per_q);
  if (range.periodic && !batched) {
    std::erase_if(seeds, [](const RationalSeed& s) { return s.a % s.q == 0; });
  }

  struct Screened {
    double value;
    double y;
    bool random;
    bool ascended;
  };
  std::vector<Screened> screened;
  EvalCounter counter(budget);
  const CoordinateRange ranges[1] = {range};
  const int climb_cost = ascent_cost(opt.ascent);
  std::mt19937_64 rng(splitmix64(opt.rng_seed));
  SearchResult out;
  out.best = {{range.project(range.periodic ? 0.0 : range.lo)}, -1.0};

  auto record = [&](double y, double v, bool random) {
    screened.push_back({v, y, random, false});
    if (v > out.best.value) {
      out.best = {{y}, v};
      out.from_random = random;
    }
  };
  auto evaluate_at = [&](double y, bool random) {
    const double v = std::abs(phase.value(std::vector<double>{y}));
    counter.charge();
    record(y, v, random);
  };

  auto screen_denominator = [&](std::int64_t q) {
    const auto lambda = rounding_offsets(phase.base(), q, N, nullptr);
    const double eta = shifted_peaks ? predicted_top_offset(lambda, e_star) / top_scale : 0.0;
    PhaseStepper stepper(phase.coefficients(std::vector<double>{eta}));
    std::vector<num::CompensatedComplexSum> folded(static_cast<std::size_t>(q));
    std::int64_t r = 1 % q;
    for (std::int64_t n = 1; n <= N; ++n) {
      folded[static_cast<std::size_t>(r)].add(num::unit_phasor(stepper.phase()));
      stepper.advance();
      if (++r == q) r = 0;
    }
    counter.charge();
    std::vector<std::complex<double>> w(static_cast<std::size_t>(q));
    for (std::int64_t k = 1; k <= q; ++k) w[static_cast<std::size_t>(k - 1)] = folded[static_cast<std::size_t>(k % q)].value();
    const auto values = grid_scan_dft_power(w, q, e_star);
    // The two largest numerators.
    std::size_t first = 0, second = values.size();
    for (std::size_t a = 1; a < values.size(); ++a) {
      if (std::abs(values[a]) > std::abs(values[first])) {
        second = first;
        first = a;
      } else if (second == values.size() || std::abs(values[a]) > std::abs(values[second])) {
        second = a;
      }
    }
    for (std::size_t a : {first, second}) {
      if (a >= values.size()) continue;
      const double y = num::frac(static_cast<double>(a) / static_cast<double>(q) + eta);
      record(y, std::abs(values[a]), false);
    }
  };

  auto screen_seed = [&](const RationalSeed& seed) {
    const double y0 = static_cast<double>(seed.a) / static_cast<double>(seed.q);
    double y = y0;
    if (shifted_peaks) {
      std::vector<double> u = phase.base();
      for (std::size_t e = 0; e < u.size(); ++e) u[e] += y0 * dir[e];
      y = y0 + sign * predicted_top_offset(rounding_offsets(u, seed.q, N, nullptr), e_star) / top_scale;
    }
    evaluate_at(range.project(y), false);
  };

  // Fixed action sequence: screen kBlock starts with one evaluation each, then
  // climb from the best unclimbed start. The budget only truncates the sequence.
  constexpr int kBlock = 6;
  std::size_t next_seed = 0;
  int since_random = 0;
  auto screen_one = [&]() -> bool {
    if (opt.random_every > 0 && (since_random == opt.random_every || next_seed >= seeds.size())) {
      since_random = 0;
      evaluate_at(range.periodic ? unit_uniform(rng)
                                 : range.lo + (range.hi - range.lo) * unit_uniform(rng),
                  true);
      return true;
    }
    if (next_seed >= seeds.size()) return false;
    ++since_random;
    const RationalSeed& seed = seeds[next_seed++];
    if (batched) {
      screen_denominator(seed.q);
    } else {
      screen_seed(seed);
    }
    return true;
  };

  if (range.periodic && counter.remaining() >= 1) evaluate_at(0.0, false);
  bool exhausted = false;
  while (!exhausted) {
    for (int i = 0; i < kBlock; ++i) {
      if (counter.remaining() < 1) {
        exhausted = true;
        break;
      }
      if (!screen_one()) break;
    }
    if (exhausted) break;
    Screened* pick = nullptr;
    for (auto& s : screened) {
      if (!s.ascended && (pick == nullptr || s.value > pick->value)) pick = &s;
    }
    if (pick == nullptr || counter.remaining() < climb_cost) break;
    pick->ascended = true;
    const bool random = pick->random;
    Candidate c = ascend(phase, ranges, {pick->y}, opt.ascent, counter);
    if (c.value > out.best.value) {
      out.best = std::move(c);
      out.from_random = random;
    }
  }
  if (out.best.value < 0.0) {
    out.best.value = std::abs(phase.value(out.best.s));
    counter.charge();
  }
  out.used = counter.used();
  return out;
}

namespace {

// Values sum_r T_r e((a_1 r^{e_1} + ... + a_m r^{e_m}) / q) for every numerator
// vector a, indexed with a_1 varying fastest.
std::vector<std::complex<double>> all_numerators(const std::vector<std::complex<double>>& T,
                                                 std::int64_t q, const std::vector<int>& degrees) {
  const std::size_t m = degrees.size();
  std::size_t count = 1;
  for (std::size_t j = 0; j < m; ++j) count *= static_cast<std::size_t>(q);
  std::vector<std::complex<double>> roots(static_cast<std::size_t>(q));
  for (std::int64_t k = 0; k < q; ++k)
    roots[static_cast<std::size_t>(k)] = num::unit_phasor(static_cast<double>(k) / static_cast<double>(q));
  std::vector<std::complex<double>> out(count);
  std::vector<std::int64_t> pw(m);
  for (std::int64_t r = 0; r < q; ++r) {
    const auto t = T[static_cast<std::size_t>(r)];
    if (t == std::complex<double>{}) continue;
    for (std::size_t j = 0; j < m; ++j) pw[j] = static_cast<std::int64_t>(nt::powmod(static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(degrees[j]), static_cast<std::uint64_t>(q)));
    // Walk the numerator grid, updating the phase index incrementally.
    std::vector<std::int64_t> a(m, 0);
    std::int64_t idx = 0;
    for (std::size_t c = 0; c < count; ++c) {
      out[c] += t * roots[static_cast<std::size_t>(idx)];
      std::size_t j = 0;
      while (j < m) {
        idx = (idx + pw[j]) % q;
        if (++a[j] < q) break;
        a[j] = 0;
        ++j;
      }
    }
  }
  return out;
}

// Offsets eta_j (in units of N^{-e_j}) of the free coordinates cancelling the
// best L2[0, 1] fit of the fixed phase sum_e lambda_e t^e by free monomials.
std::vector<double> cancelling_offsets(const std::vector<double>& lambda, const std::vector<int>& free) {
  const auto m = static_cast<Eigen::Index>(free.size());
  std::vector<int> basis{0};
  basis.insert(basis.end(), free.begin(), free.end());
  const auto n = m + 1;
  Eigen::MatrixXd gram(n, n);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) gram(i, j) = 1.0 / (basis[i] + basis[j] + 1);
    double v = 0.0;
    for (std::size_t e = 1; e < lambda.size(); ++e) v -= lambda[e] / (static_cast<double>(e) + basis[i] + 1);
    rhs(i) = v;
  }
  const Eigen::VectorXd sol = gram.ldlt().solve(rhs);
  std::vector<double> eta(free.size());
  for (Eigen::Index j = 0; j < m; ++j) eta[static_cast<std::size_t>(j)] = sol(j + 1);
  return eta;
}

}  // namespace

SearchResult search_multi(const AffinePhase& phase, std::span<const CoordinateRange> ranges,
                          std::int64_t budget, const SeedOptions& opt) {
  const std::size_t m = phase.dim();
  require(m >= 1 && ranges.size() == m, "multi search: range count mismatch");
  const std::int64_t N = phase.N();
  std::vector<int> degrees(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& dir = phase.direction(j);
    degrees[j] = phase.direction_degree(j);
    for (int e = 0; e < degrees[j]; ++e)
      require(dir[e] == 0.0, "multi search needs monomial directions");
    require(dir[degrees[j]] == 1.0 && phase.base()[degrees[j]] == 0.0,
            "multi search needs unit directions in free degrees");
    require(ranges[j].periodic, "multi search needs periodic coordinates");
  }
  int d = top_degree(phase.base());
  for (int e : degrees) d = std::max(d, e);

  // Denominators ranked by the best complete sum over numerators times the
  // decay of the fixed coordinates; enumeration is capped by its total cost.
  constexpr double kCostCap = 2e6;
  const std::int64_t q_limit = opt.q_max > 0 ? opt.q_max : std::max(default_q_max(N), N);
  std::vector<RationalSeed> order;
  double spent = 0.0;
  for (std::int64_t q = 1; q <= q_limit; ++q) {
    const double cost = std::pow(static_cast<double>(q), static_cast<double>(m) + 1.0);
    if (spent + cost > kCostCap) break;
    spent += cost;
    std::vector<std::int64_t> res;
    const auto lambda = rounding_offsets(phase.base(), q, N, &res);
    std::vector<std::complex<double>> T(static_cast<std::size_t>(q));
    for (std::int64_t r = 0; r < q; ++r) {
      unsigned __int128 acc = 0;
      for (std::size_t e = res.size(); e > 1; --e) {
        acc = (acc + static_cast<unsigned __int128>(res[e - 1])) * static_cast<unsigned __int128>(r) % q;
      }
      T[static_cast<std::size_t>(r)] = num::unit_phasor(static_cast<double>(acc) / static_cast<double>(q));
    }
    double best = 0.0;
    for (const auto& v : all_numerators(T, q, degrees)) best = std::max(best, std::abs(v));
    if (best < 1e-9) continue;
    double decay = 1.0;
    for (std::size_t e = 1; e < lambda.size(); ++e) {
      if (std::find(degrees.begin(), degrees.end(), static_cast<int>(e)) != degrees.end()) continue;
      const double l = std::abs(lambda[e]);
      if (l > 1.0) decay = std::min(decay, std::pow(l, -1.0 / d));
    }
    order.push_back({best / static_cast<double>(q) * decay, q, 0});
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const RationalSeed& a, const RationalSeed& b) { return a.proxy > b.proxy; });

  struct Screened {
    double value;
    std::vector<double> y;
    bool random;
    bool ascended;
  };
  std::vector<Screened> screened;
  EvalCounter counter(budget);
  const int climb_cost = ascent_cost(opt.ascent);
  std::mt19937_64 rng(splitmix64(opt.rng_seed));
  SearchResult out;
  out.best = {std::vector<double>(m, 0.0), -1.0};
  auto record = [&](std::vector<double> y, double v, bool random) {
    if (v > out.best.value) {
      out.best = {y, v};
      out.from_random = random;
    }
    screened.push_back({v, std::move(y), random, false});
  };

  // One pass over n folds the sum by residue mod q; the folded vector then
  // yields S at every a / q exactly.
  auto screen_denominator = [&](std::int64_t q) {
    const auto eta = cancelling_offsets(rounding_offsets(phase.base(), q, N, nullptr), degrees);
    std::vector<double> shift(m);
    for (std::size_t j = 0; j < m; ++j)
      shift[j] = eta[j] / std::pow(static_cast<double>(N), static_cast<double>(degrees[j]));
    std::vector<num::CompensatedComplexSum> folded(static_cast<std::size_t>(q));
    PhaseStepper stepper(phase.coefficients(shift));
    std::int64_t r = 1 % q;
    for (std::int64_t n = 1; n <= N; ++n) {
      folded[static_cast<std::size_t>(r)].add(num::unit_phasor(stepper.phase()));
      stepper.advance();
      if (++r == q) r = 0;
    }
    counter.charge();
    std::vector<std::complex<double>> T(static_cast<std::size_t>(q));
    for (std::int64_t k = 0; k < q; ++k) T[static_cast<std::size_t>(k)] = folded[static_cast<std::size_t>(k)].value();
    const auto values = all_numerators(T, q, degrees);
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const std::size_t keep = std::min<std::size_t>(idx.size(), static_cast<std::size_t>(2 * opt.per_q));
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double va = std::abs(values[a]), vb = std::abs(values[b]);
                        return va != vb ? va > vb : a < b;
                      });
    for (std::size_t i = 0; i < keep; ++i) {
      std::vector<double> y(m);
      std::size_t c = idx[i];
      for (std::size_t j = 0; j < m; ++j) {
        y[j] = num::frac(static_cast<double>(c % static_cast<std::size_t>(q)) / static_cast<double>(q) + shift[j]);
        c /= static_cast<std::size_t>(q);
      }
      record(std::move(y), std::abs(values[idx[i]]), false);
    }
  };

  // The origin always counts as a screened candidate.
  std::erase_if(order, [](const RationalSeed& s) { return s.q == 1; });
  if (counter.remaining() >= 1) screen_denominator(1);

  constexpr int kBlock = 6;
  std::size_t next = 0;
  int since_random = 0;
  auto screen_one = [&]() -> bool {
    if (opt.random_every > 0 && (since_random == opt.random_every || next >= order.size())) {
      since_random = 0;
      std::vector<double> y(m);
      for (auto& v : y) v = unit_uniform(rng);
      const double v = std::abs(phase.value(y));
      counter.charge();
      record(std::move(y), v, true);
      return true;
    }
    if (next >= order.size()) return false;
    ++since_random;
    screen_denominator(order[next++].q);
    return true;
  };

  bool exhausted = false;
  while (!exhausted) {
    for (int i = 0; i < kBlock; ++i) {
      if (counter.remaining() < 1) {
        exhausted = true;
        break;
      }
      if (!screen_one()) break;
    }
    if (exhausted) break;
    Screened* pick = nullptr;
    for (auto& s : screened) {
      if (!s.ascended && (pick == nullptr || s.value > pick->value)) pick = &s;
    }
    if (pick == nullptr || counter.remaining() < climb_cost) break;
    pick->ascended = true;
    const bool random = pick->random;
    Candidate c = ascend(phase, ranges, pick->y, opt.ascent, counter);
    if (c.value > out.best.value) {
      out.best = std::move(c);
      out.from_random = random;
    }
  }
  if (out.best.value < 0.0) {
    out.best.value = std::abs(phase.value(out.best.s));
    counter.charge();
  }
  out.used = counter.used();
  return out;
}

}  // namespace weyl::detail
