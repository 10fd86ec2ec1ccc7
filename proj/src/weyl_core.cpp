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

#include "weyl/weyl_core.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "weyl/error.hpp"

namespace weyl {

namespace {

using num::DoubleDouble;

// Delta^i [m^e] evaluated at m = 1.
std::int64_t difference_at_one(int i, int e) {
  std::int64_t total = 0;
  std::int64_t binom = 1;
  for (int j = 0; j <= i; ++j) {
    std::int64_t power = 1;
    for (int t = 0; t < e; ++t) power *= (1 + j);
    const std::int64_t term = binom * power;
    total += ((i - j) % 2 == 0) ? term : -term;
    binom = binom * (i - j) / (j + 1);
  }
  return total;
}

struct DifferenceTable {
  std::array<std::array<std::int64_t, kMaxDegree + 1>, kMaxDegree + 1> value{};
  DifferenceTable() {
    for (int i = 0; i <= kMaxDegree; ++i)
      for (int e = 0; e <= kMaxDegree; ++e) value[i][e] = difference_at_one(i, e);
  }
};

const DifferenceTable& difference_table() {
  static const DifferenceTable table;
  return table;
}

void check_coefficients(std::span<const double> coeffs) {
  for (double c : coeffs) require(std::isfinite(c), "phase coefficients must be finite");
}

}  // namespace

// ---------------------------------------------------------------------------
// SplitFamily

SplitFamily SplitFamily::make(std::vector<int> x_degrees, std::vector<int> y_degrees) {
  const int d = static_cast<int>(x_degrees.size() + y_degrees.size());
  require(d >= 1, "SplitFamily: at least one degree is required");
  require(d <= kMaxDegree, "SplitFamily: degree exceeds supported maximum");
  std::vector<int> all(x_degrees);
  all.insert(all.end(), y_degrees.begin(), y_degrees.end());
  std::sort(all.begin(), all.end());
  for (int i = 0; i < d; ++i) {
    require(all[i] == i + 1, "SplitFamily: degrees must form the set {1, ..., d}");
  }
  return SplitFamily(std::move(x_degrees), std::move(y_degrees));
}

SplitFamily SplitFamily::standard(int d, int k) {
  require(d >= 1 && k >= 0 && k <= d, "SplitFamily::standard: need 0 <= k <= d");
  std::vector<int> x(k), y(d - k);
  std::iota(x.begin(), x.end(), 1);
  std::iota(y.begin(), y.end(), k + 1);
  return make(std::move(x), std::move(y));
}

SplitFamily SplitFamily::gauss_linear_x() { return make({1}, {2}); }
SplitFamily SplitFamily::gauss_quadratic_x() { return make({2}, {1}); }

int SplitFamily::tau() const { return std::accumulate(x_degrees_.begin(), x_degrees_.end(), 0); }
int SplitFamily::sigma() const {
  return std::accumulate(y_degrees_.begin(), y_degrees_.end(), 0);
}

std::vector<double> SplitFamily::coefficients(std::span<const double> x,
                                              std::span<const double> y) const {
  require(x.size() == x_degrees_.size(), "x has the wrong dimension for this family");
  require(y.size() == y_degrees_.size(), "y has the wrong dimension for this family");
  std::vector<double> c(static_cast<std::size_t>(d()) + 1, 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) c[x_degrees_[j]] = x[j];
  for (std::size_t j = 0; j < y.size(); ++j) c[y_degrees_[j]] = y[j];
  return c;
}

// ---------------------------------------------------------------------------
// TorusPoint

TorusPoint::TorusPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  for (double& v : coords_) {
    require(std::isfinite(v), "TorusPoint: coordinates must be finite");
    v = num::frac(v);
  }
}

// ---------------------------------------------------------------------------
// Phase recurrence

PhaseStepper::PhaseStepper(std::span<const double> coeffs) {
  check_coefficients(coeffs);
  int degree = static_cast<int>(coeffs.size()) - 1;
  while (degree > 0 && coeffs[degree] == 0.0) --degree;
  require(degree <= kMaxDegree, "PhaseStepper: degree exceeds supported maximum");
  degree_ = std::max(degree, 0);
  const auto& table = difference_table();
  for (int i = 0; i <= degree_; ++i) {
    DoubleDouble acc{};
    for (int e = 0; e <= degree_ && e < static_cast<int>(coeffs.size()); ++e) {
      if (coeffs[e] == 0.0 || table.value[i][e] == 0) continue;
      acc = num::add_mod1(acc, num::frac_mul(coeffs[e], table.value[i][e]));
    }
    diff_[i] = acc;
  }
}

WeylSumValue eval_polynomial_sum(std::span<const double> coeffs, std::int64_t N) {
  require(N >= 1, "eval_polynomial_sum: N must be positive");
  PhaseStepper stepper(coeffs);
  num::CompensatedComplexSum acc;
  for (std::int64_t n = 1; n <= N; ++n) {
    acc.add(num::unit_phasor(stepper.phase()));
    stepper.advance();
  }
  WeylSumValue out{acc.value(), N};
  assert(out.magnitude() <= static_cast<double>(N) * (1.0 + 1e-12));
  return out;
}

WeylSumValue eval_weyl_sum(const SplitFamily& family, const TorusPoint& x, const TorusPoint& y,
                           std::int64_t N) {
  require(N >= 1, "eval_weyl_sum: N must be positive");
  return eval_polynomial_sum(family.coefficients(x.coords(), y.coords()), N);
}

WeylSumValue eval_gauss_sum(double x, double y, std::int64_t N) {
  require(N >= 1, "eval_gauss_sum: N must be positive");
  require(std::isfinite(x) && std::isfinite(y), "eval_gauss_sum: non-finite coefficient");
  // P(1) = x + y, P(2) - P(1) = x + 3y, second difference 2y.
  DoubleDouble p = num::add_mod1(num::frac_mul(x, 1), num::frac_mul(y, 1));
  DoubleDouble d1 = num::add_mod1(num::frac_mul(x, 1), num::frac_mul(y, 3));
  const DoubleDouble d2 = num::frac_mul(y, 2);
  num::CompensatedComplexSum acc;
  for (std::int64_t n = 1; n <= N; ++n) {
    acc.add(num::unit_phasor(p.hi + p.lo));
    p = num::add_mod1(p, d1);
    d1 = num::add_mod1(d1, d2);
  }
  WeylSumValue out{acc.value(), N};
  assert(out.magnitude() <= static_cast<double>(N) * (1.0 + 1e-12));
  return out;
}

WeylSumValue gauss_short_interval(double x, double y, std::int64_t M, std::int64_t N) {
  require(N >= 1, "gauss_short_interval: N must be positive");
  require(std::isfinite(x) && std::isfinite(y), "gauss_short_interval: non-finite coefficient");
  constexpr std::int64_t kLimit = 3'000'000'000LL;
  require(M > -kLimit && M + N < kLimit, "gauss_short_interval: |M| + N too large");
  num::CompensatedComplexSum acc;
  for (std::int64_t n = M + 1; n <= M + N; ++n) {
    const DoubleDouble phase = num::add_mod1(num::frac_mul(x, n), num::frac_mul(y, n * n));
    acc.add(num::unit_phasor(phase.hi + phase.lo));
  }
  return {acc.value(), N};
}

// ---------------------------------------------------------------------------
// Grid scans

std::vector<std::complex<double>> grid_scan_dft(std::span<const std::complex<double>> weights,
                                                std::int64_t M) {
  return grid_scan_dft_power(weights, M, 1);
}

std::vector<std::complex<double>> grid_scan_dft_power(
    std::span<const std::complex<double>> weights, std::int64_t M, int exponent) {
  require(M >= 1, "grid_scan_dft: M must be positive");
  require(exponent >= 1, "grid_scan_dft: exponent must be positive");
  std::vector<num::CompensatedComplexSum> bins(static_cast<std::size_t>(M));
  const auto m = static_cast<unsigned __int128>(M);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto n = static_cast<unsigned __int128>(i + 1) % m;
    unsigned __int128 r = 1 % m;
    for (int e = 0; e < exponent; ++e) r = (r * n) % m;
    bins[static_cast<std::size_t>(r)].add(weights[i]);
  }
  std::vector<std::complex<double>> folded(bins.size());
  for (std::size_t r = 0; r < bins.size(); ++r) folded[r] = bins[r].value();
  return dft_positive(folded);
}

// ---------------------------------------------------------------------------
// Oscillatory integral

namespace {

// Gauss-Kronrod 7-15 nodes and weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Polynomial {
  std::span<const double> xi;  // xi[j-1] multiplies z^j

  double value(double z) const {
    double acc = 0.0;
    for (std::size_t j = xi.size(); j > 0; --j) acc = (acc + xi[j - 1]) * z;
    return acc;
  }
  double derivative(double z) const {
    double acc = 0.0;
    for (std::size_t j = xi.size(); j > 0; --j) acc = acc * z + static_cast<double>(j) * xi[j - 1];
    return acc;
  }
};

struct PanelResult {
  std::complex<double> kronrod;
  double error;
};

PanelResult gauss_kronrod(const Polynomial& poly, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto f = [&](double z) { return num::unit_phasor(num::frac(poly.value(z))); };
  const std::complex<double> fc = f(center);
  std::complex<double> kronrod = fc * kWgk[7];
  std::complex<double> gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const std::complex<double> sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

void integrate_panel(const Polynomial& poly, double a, double b, double tol_density,
                     double min_width, int depth, num::CompensatedComplexSum& acc) {
  const PanelResult r = gauss_kronrod(poly, a, b);
  if (r.error <= tol_density * (b - a) || (b - a) <= min_width || depth >= 40) {
    acc.add(r.kronrod);
    return;
  }
  const double mid = 0.5 * (a + b);
  integrate_panel(poly, a, mid, tol_density, min_width, depth + 1, acc);
  integrate_panel(poly, mid, b, tol_density, min_width, depth + 1, acc);
}

}  // namespace

std::complex<double> oscillatory_integral(std::span<const double> xi, double N, double tol) {
  require(N > 0.0 && std::isfinite(N), "oscillatory_integral: N must be positive");
  require(tol > 0.0, "oscillatory_integral: tol must be positive");
  for (double v : xi) require(std::isfinite(v), "oscillatory_integral: non-finite xi");
  if (std::all_of(xi.begin(), xi.end(), [](double v) { return v == 0.0; })) return {N, 0.0};

  const Polynomial poly{xi};
  auto width_at = [&](double z) { return 0.25 / (1.0 + std::abs(poly.derivative(z))); };
  num::CompensatedComplexSum acc;
  double z = 0.0;
  const double min_width = 1e-14 * N;
  while (z < N) {
    double h = std::min(width_at(z), N - z);
    for (int it = 0; it < 4; ++it) {
      const double hc = width_at(z + 0.5 * h);
      if (hc >= h) break;
      h = hc;
    }
    const double end = (N - (z + h) < 1e-12 * N) ? N : z + h;
    integrate_panel(poly, z, end, tol, min_width, 0, acc);
    z = end;
  }
  return acc.value();
}

}  // namespace weyl
