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
// Predicted exponents, log-log fits and the experiment runner behind the
// exp_lab command line tool.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "weyl/maximal_operators.hpp"
#include "weyl/weyl_core.hpp"

namespace weyl {

// ---------------------------------------------------------------------------
// Predicted exponents.

struct PredictedExponents {
  double rho = 0.0;
  double mu = 0.0;                     // 1 - tau / (2 s + d - k)
  double large_rho_threshold = 0.0;    // 2 s + d - k
  double large_rho = 0.0;              // 1 - tau / rho, sharp for rho >= threshold
  double small_rho_floor = 0.0;        // 1 - 1 / 2^{d-1}
  double a_rho = 0.0;                  // best known upper exponent of N
  double b_rho = 0.0;                  // matching power of log N
  int tau_k = 0;
  int sigma_k = 0;
  int s_d = 0;
  int D = 0;                           // min(2^{d-1}, 2 d (d - 1))
  bool thm12_improves = false;         // 2^{d-1} tau < 2 s + d - k with d >= 3
};

/// Exponent of N (and log N) for ||sup_y |G(x, y; N)| ||_rho: 3/4 up to rho = 4
/// with a log^{1/4} at rho = 4, then 1 - 1/rho.
std::pair<double, double> gauss_K_exponent(double rho);
/// max(1/2, 1 - 2/rho).
double gauss_L_exponent(double rho);
/// max(3/4, 1 - 1/rho) for rational slopes, max(5/6, 1 - 1/rho) otherwise;
/// slope 0 reduces to the K exponent.
std::pair<double, double> projection_exponent(double rho, bool rational, bool zero_slope);

PredictedExponents predicted_exponents(const SplitFamily& family, double rho);

/// One (d, k, x-degree set) for which 2^{d-1} tau < 2 s + d - k.
struct ImprovementCase {
  int d = 0;
  int k = 0;
  std::vector<int> x_degrees;
  int tau = 0;
};

/// All improving cases with d in [d_min, d_max], ordered by d, k, x-degrees.
std::vector<ImprovementCase> improvement_cases(int d_min, int d_max);

/// Text form: one line per case "d=3 k=2 T,T^2", and "d=7 none" for a d without cases.
std::string format_improvement_table(int d_min, int d_max);

// ---------------------------------------------------------------------------
// Fits of V = C N^alpha (log N)^beta.

struct ExponentFit {
  double alpha = 0.0;
  double beta = 0.0;
  double logC = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;  // in log V
  bool beta_fixed = false;
};

/// Least squares on log V = log C + alpha log N + beta log log N. Needs at
/// least 3 points with N > e and V > 0.
ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& points,
                         std::optional<double> fix_beta = std::nullopt);

// ---------------------------------------------------------------------------
// Experiments.

/// A real slope given as "p/q", a decimal, or "sqrt(m)".
struct Slope {
  std::string text = "0";
  double value = 0.0;
  bool rational = true;
  std::int64_t p = 0;
  std::int64_t q = 1;

  static Slope parse(const std::string& text);
  /// The slope used at length N: itself when rational, else the first
  /// continued-fraction convergent with denominator above N.
  double at(std::int64_t N) const;
};

enum class ExperimentKind { k_norm, l_norm, m_norm, p_norm, short_sum, levelset, structure };

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

enum class LevelTarget { gauss_y, family_x, projection };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::k_norm;
  std::string name;                       // output stem; defaults to the experiment name
  std::vector<int> x_degrees{1};
  std::vector<int> y_degrees{2};
  std::vector<double> rho{2.0};
  std::int64_t N_min = 1024;
  std::int64_t N_max = 8192;
  double N_ratio = 2.0;
  std::int64_t samples = 256;
  std::int64_t budget = kAutoBudget;
  std::uint64_t seed = 1;
  double eps = 0.05;
  Slope t;
  LevelTarget target = LevelTarget::gauss_y;
  std::vector<double> A_exponents{0.7, 0.8, 0.9};
  double envelope_constant = 10.0;
  std::int64_t wanted = 100;
  std::int64_t max_attempts = 20000;
  double tolerance = 0.05;
  std::optional<double> fix_beta;         // unset: the predicted beta
  bool free_beta = false;                 // fit beta as well
  Sampler sampler = Sampler::importance;
  int threads = 0;
  std::filesystem::path out_dir = "out";
  bool gnuplot = false;

  SplitFamily family() const;
  /// Geometric schedule N_min, round(N_min r), ... up to N_max.
  std::vector<std::int64_t> N_schedule() const;
  /// Throws ContractViolation on an empty or non-increasing schedule, too few
  /// samples for a fit experiment, or an invalid family.
  void validate() const;

  /// Applies one "key = value" assignment; throws ContractViolation on an unknown key or bad value.
  void set(const std::string& key, const std::string& value);
  /// Flat "key = value" lines with '#' comments.
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Canonical key-value form that parse() reads back.
  std::string to_text() const;
};

struct RhoSummary {
  double rho = 0.0;
  ExponentFit fit;
  double predicted_alpha = 0.0;
  double predicted_beta = 0.0;
  bool two_sided = true;  // |alpha - predicted| <= tol, else alpha <= predicted + tol
  bool pass = false;
};

struct ExperimentReport {
  std::filesystem::path csv_path;
  std::filesystem::path json_path;
  std::filesystem::path gnuplot_path;  // empty unless requested
  std::vector<RhoSummary> fits;        // norm sweeps
  bool pass = false;
  std::string summary_json;
  double wall_seconds = 0.0;
};

/// Runs the configured experiment, writing <out_dir>/<name>.csv row by row
/// and <out_dir>/<name>.json at the end. Progress lines go to `log`.
ExperimentReport run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Reads N, rho, estimate columns from a sweep CSV and fits each rho.
std::map<double, ExponentFit> fit_csv(const std::filesystem::path& path,
                                      std::optional<double> fix_beta = std::nullopt);

}  // namespace weyl
