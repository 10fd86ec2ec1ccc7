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

// Local search machinery for suprema of |S| over affine families of phases
// P_s(n) = base(n) + sum_j s_j F_j(n).

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace weyl::detail {

struct CoordinateRange {
  bool periodic = true;
  double lo = 0.0;
  double hi = 1.0;

  double project(double v) const;
  bool contains(double v) const { return periodic || (v >= lo && v <= hi); }
};

struct PhaseDerivatives {
  std::complex<double> value;
  Eigen::VectorXcd grad;  // w.r.t. scaled coordinates sigma_j = s_j * scale_j
  Eigen::MatrixXcd hess;
};

class AffinePhase {
 public:
  /// Coefficient vectors are indexed by degree. Every direction must be nonzero.
  AffinePhase(std::vector<double> base, std::vector<std::vector<double>> directions,
              std::int64_t N);

  std::size_t dim() const { return directions_.size(); }
  std::int64_t N() const { return N_; }
  /// |leading coefficient| * N^{degree} of direction j.
  double scale(std::size_t j) const { return scale_[j]; }
  int direction_degree(std::size_t j) const { return dir_degree_[j]; }
  const std::vector<double>& base() const { return base_; }
  const std::vector<double>& direction(std::size_t j) const { return directions_[j]; }

  std::vector<double> coefficients(std::span<const double> s) const;
  std::complex<double> value(std::span<const double> s) const;
  PhaseDerivatives derivatives(std::span<const double> s) const;

 private:
  std::vector<double> base_;
  std::vector<std::vector<double>> directions_;
  std::vector<int> dir_degree_;
  std::vector<double> scale_;
  // Horner coefficients of F_j(n) / scale_j in the variable n / N.
  std::vector<std::vector<double>> scaled_dirs_;
  std::int64_t N_;
};

/// Counts sum evaluations against a budget.
class EvalCounter {
 public:
  explicit EvalCounter(std::int64_t budget) : budget_(budget) {}
  void charge(std::int64_t n = 1) { used_ += n; }
  std::int64_t used() const { return used_; }
  std::int64_t remaining() const { return budget_ - used_; }

 private:
  std::int64_t budget_;
  std::int64_t used_ = 0;
};

struct Candidate {
  std::vector<double> s;
  double value = 0.0;  // |S(s)|
};

struct AscentOptions {
  int max_iterations = 6;
  int max_halvings = 2;
  double step_clamp = 0.5;  // in scaled units
  double min_step = 1e-9;
};

/// Worst-case number of evaluations made by ascend() with these options.
int ascent_cost(const AscentOptions& opt);

/// Newton ascent on |S|^2 with a scaled-gradient fallback; only improving steps are taken.
Candidate ascend(const AffinePhase& phase, std::span<const CoordinateRange> ranges,
                 std::vector<double> s0, const AscentOptions& opt, EvalCounter& counter);

/// Uniform double in [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t splitmix64(std::uint64_t x);

/// Independent stream for index i under a master seed.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t i) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(i + 0x632be59bd9b4e019ULL)));
}

struct SearchResult {
  Candidate best;
  std::int64_t used = 0;
  bool from_random = false;
};

/// Sup over one coordinate entering the phase linearly in degree 1: grid scan at
/// M = 4N followed by refinement of the highest local maxima.
SearchResult search_linear_coordinate(const AffinePhase& phase, const CoordinateRange& range,
                                      std::int64_t budget);

struct SeedOptions {
  std::int64_t q_max = 0;      // 0: chosen from N
  int per_q = 2;
  int random_every = 8;        // one random start after this many rational seeds
  std::uint64_t rng_seed = 0;
  AscentOptions ascent{};
};

/// Sup over one coordinate entering nonlinearly: rational seeds a/q in that
/// coordinate ranked by |S_q| and the oscillatory decay, then local ascent.
SearchResult search_rational_seeded(const AffinePhase& phase, const CoordinateRange& range,
                                    std::int64_t budget, const SeedOptions& opt);

/// Sup over several periodic monomial coordinates.
SearchResult search_multi(const AffinePhase& phase, std::span<const CoordinateRange> ranges,
                          std::int64_t budget, const SeedOptions& opt);

}  // namespace weyl::detail
