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

// Weyl and Gauss sums on the torus, grid scans over one coordinate and the
// oscillatory integral I(xi) that appears in their main terms.

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "weyl/numeric.hpp"

namespace weyl {

/// Highest polynomial degree supported by the phase recurrence.
inline constexpr int kMaxDegree = 12;

/// A monomial family {T^e} split into an integrated x-group and a
/// maximized y-group. The union of the degrees is exactly {1, ..., d}.
class SplitFamily {
 public:
  static SplitFamily make(std::vector<int> x_degrees, std::vector<int> y_degrees);
  /// x-group {T, ..., T^k}, y-group {T^{k+1}, ..., T^d}.
  static SplitFamily standard(int d, int k);
  /// G(x, y) with x paired to n and y to n^2 (sup over the quadratic coefficient).
  static SplitFamily gauss_linear_x();
  /// G(x, y) with the quadratic coefficient integrated and the linear one maximized.
  static SplitFamily gauss_quadratic_x();

  int d() const { return static_cast<int>(x_degrees_.size() + y_degrees_.size()); }
  int k() const { return static_cast<int>(x_degrees_.size()); }
  const std::vector<int>& x_degrees() const { return x_degrees_; }
  const std::vector<int>& y_degrees() const { return y_degrees_; }
  int tau() const;
  int sigma() const;
  int s_d() const { return d() * (d() + 1) / 2; }

  /// Phase coefficients indexed by degree (entry 0 is the constant term).
  std::vector<double> coefficients(std::span<const double> x, std::span<const double> y) const;

  bool operator==(const SplitFamily&) const = default;

 private:
  SplitFamily(std::vector<int> x, std::vector<int> y)
      : x_degrees_(std::move(x)), y_degrees_(std::move(y)) {}
  std::vector<int> x_degrees_;
  std::vector<int> y_degrees_;
};

/// A point of [0,1)^nu; coordinates are reduced mod 1 on construction.
class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(std::vector<double> coords);
  static TorusPoint zeros(std::size_t dim) { return TorusPoint(std::vector<double>(dim, 0.0)); }

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const { return coords_; }

 private:
  std::vector<double> coords_;
};

struct WeylSumValue {
  std::complex<double> value;
  std::int64_t n_terms = 0;

  double magnitude() const { return std::abs(value); }
};

/// Generates P(1), P(2), ... mod 1 for P(n) = sum_e c_e n^e from a forward
/// difference table held in double-double precision and reduced mod 1.
class PhaseStepper {
 public:
  explicit PhaseStepper(std::span<const double> coeffs_by_degree);

  double phase() const { return diff_[0].hi + diff_[0].lo; }
  void advance() {
    for (int i = 0; i < degree_; ++i) diff_[i] = num::add_mod1(diff_[i], diff_[i + 1]);
  }
  int degree() const { return degree_; }

 private:
  std::array<num::DoubleDouble, kMaxDegree + 1> diff_{};
  int degree_ = 0;
};

/// sum_{n=1}^N e(sum_e c_e n^e) for coefficients indexed by degree.
WeylSumValue eval_polynomial_sum(std::span<const double> coeffs_by_degree, std::int64_t N);

WeylSumValue eval_weyl_sum(const SplitFamily& family, const TorusPoint& x, const TorusPoint& y,
                           std::int64_t N);

/// G(x, y; N) = sum_{n=1}^N e(x n + y n^2).
WeylSumValue eval_gauss_sum(double x, double y, std::int64_t N);

/// sum_{n=M+1}^{M+N} e(x n + y n^2), evaluated term by term.
WeylSumValue gauss_short_interval(double x, double y, std::int64_t M, std::int64_t N);

/// For j in [0, M): sum_{n=1}^N w_n e(j n / M), with weights[n-1] = w_n.
std::vector<std::complex<double>> grid_scan_dft(std::span<const std::complex<double>> weights,
                                                std::int64_t M);

/// For j in [0, M): sum_{n=1}^N w_n e(j n^e / M). Folds n^e mod M before the transform.
std::vector<std::complex<double>> grid_scan_dft_power(
    std::span<const std::complex<double>> weights, std::int64_t M, int exponent);

/// Length-M transform out[j] = sum_r in[r] e(j r / M) (unnormalized).
std::vector<std::complex<double>> dft_positive(std::span<const std::complex<double>> in);

/// I(xi) = int_0^N e(xi_1 z + ... + xi_d z^d) dz with absolute error <= tol * N.
std::complex<double> oscillatory_integral(std::span<const double> xi, double N, double tol = 1e-8);

}  // namespace weyl
