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

// Floating-point building blocks: error-free transforms, phases reduced
// mod 1 in double-double precision, and compensated complex accumulation.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace weyl::num {

struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;
};

inline DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

inline DoubleDouble fast_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline DoubleDouble two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

/// Fractional part in [0, 1). Values that round up to 1 are folded to 0.
inline double frac(double v) {
  double f = v - std::floor(v);
  return f >= 1.0 ? 0.0 : f;
}

/// Normalizes a double-double so that hi lies in [0, 1).
inline DoubleDouble wrap_unit(DoubleDouble v) {
  v.hi -= std::floor(v.hi);
  v = fast_two_sum(v.hi, v.lo);
  if (v.hi >= 1.0) {
    v.hi -= 1.0;
    v = fast_two_sum(v.hi, v.lo);
  } else if (v.hi < 0.0) {
    v.hi += 1.0;
    v = fast_two_sum(v.hi, v.lo);
  }
  return v;
}

inline DoubleDouble add_mod1(DoubleDouble a, DoubleDouble b) {
  DoubleDouble s = two_sum(a.hi, b.hi);
  s.lo += a.lo + b.lo;
  return wrap_unit(fast_two_sum(s.hi, s.lo));
}

/// frac(c * k) for an integer k with |k| < 2^62, accurate to a few ulps of 1.
DoubleDouble frac_mul(double c, std::int64_t k);

inline double to_double(DoubleDouble v) { return v.hi + v.lo; }

/// e(p) = exp(2 pi i p).
inline std::complex<double> unit_phasor(double p) {
  const double r = p - std::nearbyint(p);
  double s, c;
  ::sincos(2.0 * std::numbers::pi * r, &s, &c);
  return {c, s};
}

/// Compensated accumulation of real values (two-sum per term).
class CompensatedSum {
 public:
  void add(double v) {
    const DoubleDouble t = two_sum(sum_, v);
    sum_ = t.hi;
    comp_ += t.lo;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class CompensatedComplexSum {
 public:
  void add(double re, double im) {
    re_.add(re);
    im_.add(im);
  }
  void add(std::complex<double> z) { add(z.real(), z.imag()); }
  std::complex<double> value() const { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum re_;
  CompensatedSum im_;
};

}  // namespace weyl::num
