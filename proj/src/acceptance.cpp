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
#include "weyl/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "weyl/complete_sums.hpp"
#include "weyl/exp_lab.hpp"
#include "weyl/level_structure.hpp"
#include "weyl/maximal_operators.hpp"
#include "weyl/weyl_core.hpp"

#ifndef WEYLSUM_FIXTURE_DIR
#define WEYLSUM_FIXTURE_DIR "tests/fixtures"
#endif

namespace weyl {
namespace {

namespace fs = std::filesystem;

std::string str(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

ResidueVector random_primitive(std::mt19937_64& rng, std::uint64_t q, int d) {
  std::uniform_int_distribution<std::int64_t> coef(0, static_cast<std::int64_t>(q) - 1);
  while (true) {
    std::vector<std::int64_t> b(static_cast<std::size_t>(d));
    for (auto& x : b) x = coef(rng);
    auto rv = ResidueVector::make(q, b);
    if (rv.content() == 1) return rv;
  }
}

ExperimentConfig sweep_config(const AcceptanceOptions& opt, ExperimentKind kind, const std::string& name,
                              std::int64_t N_min, std::int64_t N_max, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.experiment = kind;
  cfg.name = name;
  cfg.N_min = N_min;
  cfg.N_max = N_max;
  cfg.samples = 256;
  cfg.seed = seed;
  cfg.threads = opt.threads;
  cfg.out_dir = opt.out_dir;
  return cfg;
}

std::string fit_detail(const ExperimentReport& r) {
  std::string s;
  for (const auto& f : r.fits) {
    if (!s.empty()) s += ", ";
    s += "rho=" + str(f.rho) + " alpha=" + str(f.fit.alpha) + (f.fit.beta_fixed ? " (beta=" + str(f.fit.beta) + ")" : "") +
         (f.two_sided ? " vs " : " <= tol + ") + str(f.predicted_alpha) + (f.pass ? "" : " FAIL");
  }
  return s;
}

// 1 -------------------------------------------------------------------------
CriterionResult orthogonality(const AcceptanceOptions& opt) {
  CriterionResult r{1, "exact orthogonality", false, {}, 0.0};
  std::mt19937_64 rng(opt.seed + 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr std::int64_t N = 1000, M = 1024;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double y = unit(rng);
    num::CompensatedSum acc;
    for (std::int64_t j = 0; j < M; ++j) acc.add(std::norm(eval_gauss_sum(double(j) / M, y, N).value));
    worst = std::max(worst, std::abs(acc.value() / M - N) / N);
  }
  r.pass = worst <= 1e-6;
  r.detail = "max relative deviation " + str(worst, 3) + " over 20 y (N=1000, M=1024)";
  return r;
}

// 2 -------------------------------------------------------------------------
CriterionResult crt_equivalence(const AcceptanceOptions& opt) {
  CriterionResult r{2, "CRT oracle equivalence", false, {}, 0.0};
  std::mt19937_64 rng(opt.seed + 2);
  std::uniform_int_distribution<std::uint64_t> qd(1, 10000);
  std::uniform_int_distribution<int> dd(1, 4);
  double worst = 0.0;
  int bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::uint64_t q = qd(rng);
    const int d = dd(rng);
    std::uniform_int_distribution<std::int64_t> coef(0, static_cast<std::int64_t>(q) - 1);
    std::vector<std::int64_t> b(static_cast<std::size_t>(d));
    for (auto& x : b) x = coef(rng);
    const auto rv = ResidueVector::make(q, b);
    const double err = std::abs(complete_sum_crt(d, rv) - complete_sum_direct(d, rv)) / double(q);
    worst = std::max(worst, err);
    bad += err > 1e-8;
  }
  r.pass = bad == 0;
  r.detail = "500 cases, max |crt - direct| / q = " + str(worst, 3);
  return r;
}

// 3 -------------------------------------------------------------------------
CriterionResult weil(const AcceptanceOptions& opt) {
  CriterionResult r{3, "Weil bound", false, {}, 0.0};
  std::mt19937_64 rng(opt.seed + 3);
  int cases = 0, bad = 0, gauss_bad = 0;
  double worst = 0.0, gauss_dev = 0.0;
  for (std::uint64_t p = 3; p <= 199; p += 2) {
    if (!is_prime(p)) continue;
    for (int d : {2, 3}) {
      for (int trial = 0; trial < 50; ++trial) {
        const auto rv = random_primitive(rng, p, d);
        const double mag = std::abs(complete_sum_direct(d, rv));
        const double bound = (d - 1) * std::sqrt(double(p));
        worst = std::max(worst, mag / bound);
        bad += mag > bound + 1e-6;
        ++cases;
      }
    }
    for (std::uint64_t b2 = 1; b2 < p; ++b2) {
      const auto rv = ResidueVector::make(p, {0, static_cast<std::int64_t>(b2)});
      const double dev = std::abs(std::abs(complete_sum_direct(2, rv)) - std::sqrt(double(p)));
      gauss_dev = std::max(gauss_dev, dev);
      gauss_bad += dev > 1e-6;
    }
  }
  r.pass = bad == 0 && gauss_bad == 0;
  r.detail = std::to_string(cases) + " cases, max |S| / ((d-1) sqrt p) = " + str(worst) +
             ", max ||S_2(0,b)| - sqrt p| = " + str(gauss_dev, 3);
  return r;
}

// 4 -------------------------------------------------------------------------
CriterionResult power_classes(const AcceptanceOptions& opt) {
  CriterionResult r{4, "power-class invariant", false, {}, 0.0};
  std::int64_t bad_factor = 0;
  for (int d : {3, 4}) {
    for (std::uint64_t q = 1; q <= 1000000; ++q)
      if (!factor_power_classes(q, d).satisfies_invariants()) ++bad_factor;
  }
  std::mt19937_64 rng(opt.seed + 4);
  std::uniform_int_distribution<std::uint64_t> qd(2, 10000);
  std::uniform_int_distribution<int> dd(3, 4);
  int bad = 0;
  double worst = 0.0;
  std::string first_bad;
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint64_t q = qd(rng);
    const int d = dd(rng);
    const auto rv = random_primitive(rng, q, d);
    const auto rep = check_power_class_product(d, rv);
    worst = std::max(worst, rep.ratio);
    if (!rep.holds) {
      if (!bad) first_bad = " (first failure q=" + std::to_string(q) + ", d=" + std::to_string(d) + ")";
      ++bad;
    }
  }
  r.pass = bad_factor == 0 && bad == 0;
  r.detail = "factorizations q <= 10^6, d in {3,4}: " + std::to_string(bad_factor) + " invalid; product bound: " +
             std::to_string(bad) + "/200 violated, max ratio " + str(worst) + first_bad;
  return r;
}

// 5, 6 ----------------------------------------------------------------------
CriterionResult k_exponents(const AcceptanceOptions& opt) {
  CriterionResult r{5, "K_rho exponents", false, {}, 0.0};
  auto cfg = sweep_config(opt, ExperimentKind::k_norm, "criterion05_k_norm", 1 << 10, 1 << 15, opt.seed + 5);
  cfg.rho = {2.0, 4.0, 8.0};
  const auto rep = run_experiment(cfg);
  r.pass = rep.pass;
  r.detail = fit_detail(rep) + " (tolerance 0.05)";
  return r;
}

CriterionResult l_exponents(const AcceptanceOptions& opt) {
  CriterionResult r{6, "L_rho exponents", false, {}, 0.0};
  auto cfg = sweep_config(opt, ExperimentKind::l_norm, "criterion06_l_norm", 1 << 10, 1 << 15, opt.seed + 6);
  cfg.rho = {2.0, 8.0};
  const auto rep = run_experiment(cfg);
  const bool floor_ok = rep.summary_json.find("\"floor_violations\": 0") != std::string::npos;
  r.pass = rep.pass && floor_ok;
  r.detail = fit_detail(rep) + (floor_ok ? ", floor sup_x >= sqrt N on every sample" : ", floor violated");
  return r;
}

// 7 -------------------------------------------------------------------------
CriterionResult projections(const AcceptanceOptions& opt) {
  CriterionResult r{7, "projection norms", false, {}, 0.0};
  auto half = sweep_config(opt, ExperimentKind::p_norm, "criterion07_p_half", 1 << 10, 1 << 14, opt.seed + 7);
  half.t = Slope::parse("1/2");
  const auto rh = run_experiment(half);
  auto root = half;
  root.name = "criterion07_p_sqrt2";
  root.t = Slope::parse("sqrt(2)");
  const auto rr = run_experiment(root);

  constexpr std::int64_t N = 1 << 12;
  const MonteCarloOptions mc{Sampler::importance, opt.threads};
  const NormEstimate p0 = projection_P_norm(0.0, 2.0, N, 256, opt.seed + 70, kAutoBudget, mc);
  const NormEstimate k = gauss_K_norm(2.0, N, 256, opt.seed + 71, kAutoBudget, mc);
  const double se = std::hypot(p0.std_error, k.std_error);
  const bool match = std::abs(p0.estimate - k.estimate) <= 2.0 * se;
  r.pass = rh.pass && rr.pass && match;
  r.detail = "t=1/2: " + fit_detail(rh) + "; t=sqrt2: " + fit_detail(rr) + "; P_0=" + str(p0.estimate) +
             " K=" + str(k.estimate) + " (2 stderr " + str(2 * se) + ")";
  return r;
}

// 8 -------------------------------------------------------------------------
CriterionResult structure(const AcceptanceOptions& opt) {
  CriterionResult r{8, "structure survey", false, {}, 0.0};
  constexpr std::int64_t N = 1 << 12;
  constexpr double eps = 0.1;
  const double A = std::pow(double(N), 0.85);
  const MonteCarloOptions mc{Sampler::importance, opt.threads};
  const StructureSurvey sv = structure_survey(N, A, 100, 50000, opt.seed + 8, eps, mc);
  const long double Q = std::pow(static_cast<long double>(N) / A, 2) * std::pow(static_cast<long double>(N), eps);
  std::int64_t verified = 0;
  for (const auto& rep : sv.reports) {
    if (!rep.found) continue;
    const auto& ap = *rep.found;
    bool ok = ap.q >= 1 && ap.q <= Q && ap.r.size() == 2;
    for (int j = 1; ok && j <= 2; ++j) {
      const long double err = std::abs(static_cast<long double>(rep.u[j - 1]) -
                                       static_cast<long double>(ap.r[j - 1]) / ap.q);
      const long double radius = std::pow(static_cast<long double>(N) / A, 2) *
                                 std::pow(static_cast<long double>(N), -j + eps) / ap.q;
      ok = err <= radius;
    }
    verified += ok;
  }
  const auto found = static_cast<std::int64_t>(sv.reports.size());
  r.pass = found >= 100 && verified == found;
  r.detail = std::to_string(verified) + "/" + std::to_string(found) + " large values structured (" +
             std::to_string(sv.attempts) + " samples, max q " + std::to_string(sv.max_q) + ", q limit " +
             str(static_cast<double>(Q)) + ")";
  return r;
}

// 9 -------------------------------------------------------------------------
CriterionResult vaughan(const AcceptanceOptions& opt) {
  CriterionResult r{9, "Vaughan residual", false, {}, 0.0};
  std::mt19937_64 rng(opt.seed + 9);
  std::uniform_int_distribution<std::int64_t> qd(1, 50);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  constexpr std::int64_t N = 1000;
  int bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 2;
    const std::int64_t q = qd(rng);
    const auto rv = random_primitive(rng, static_cast<std::uint64_t>(q), d);
    std::vector<std::int64_t> rr(rv.b.begin(), rv.b.end());
    std::vector<double> u(static_cast<std::size_t>(d));
    for (int j = 1; j <= d; ++j) {
      const double xi = unit(rng) * 10.0 / (double(q) * std::pow(double(N), j));
      u[j - 1] = double(rr[j - 1]) / double(q) + xi;
    }
    const auto v = vaughan_decompose(u, q, rr, N);
    const double ratio = std::abs(v.delta) / v.bound;
    worst = std::max(worst, ratio);
    bad += ratio > 10.0;
  }
  r.pass = bad == 0;
  r.detail = "50 cases, max |delta| / (q (1 + sum |xi_j| N^j)) = " + str(worst) + " (limit 10)";
  return r;
}

// 10 ------------------------------------------------------------------------
ExperimentConfig level_config(const AcceptanceOptions& opt, LevelTarget target, const std::string& name) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::levelset;
  cfg.name = name;
  cfg.target = target;
  cfg.N_min = cfg.N_max = 1 << 12;
  cfg.samples = 512;
  cfg.seed = opt.seed + 10;
  cfg.eps = 0.0;
  cfg.envelope_constant = 10.0;
  cfg.A_exponents = {0.7, 0.8, 0.9};
  cfg.t = Slope::parse("1/2");
  cfg.threads = opt.threads;
  cfg.out_dir = opt.out_dir;
  return cfg;
}

std::string level_detail(const ExperimentReport& rep) {
  const auto pos = rep.summary_json.find("\"max_ratio\": ");
  std::string ratio = "?";
  if (pos != std::string::npos) {
    const auto start = pos + 13;
    ratio = str(std::stod(rep.summary_json.substr(start, rep.summary_json.find_first_of(",\n", start) - start)));
  }
  const bool monotone = rep.summary_json.find("\"monotone\": true") != std::string::npos;
  return "max measure/envelope " + ratio + (monotone ? ", monotone" : ", NOT monotone");
}

CriterionResult level_sets(const AcceptanceOptions& opt) {
  CriterionResult r{10, "level-set envelopes", false, {}, 0.0};
  const auto ry = run_experiment(level_config(opt, LevelTarget::gauss_y, "criterion10_levelset_y"));
  const auto rp = run_experiment(level_config(opt, LevelTarget::projection, "criterion10_levelset_t_half"));
  r.pass = ry.pass && rp.pass;
  r.detail = "y: " + level_detail(ry) + "; t=1/2: " + level_detail(rp) + " (limit 10)";
  return r;
}

// 11 ------------------------------------------------------------------------
CriterionResult sumsets(const AcceptanceOptions&) {
  CriterionResult r{11, "sumset bound", false, {}, 0.0};
  const bool exact = sumset_cardinality(100, 0, 1) == 100 && sumset_cardinality(100, 1, 1) == 199 &&
                     sumset_cardinality(100, 1, 2) == 298;
  std::int64_t checked = 0, bad = 0;
  for (std::int64_t a = -20; a <= 20; ++a) {
    for (std::int64_t b = -20; b <= 20; ++b) {
      if (b == 0) continue;
      const auto counts = sumset_cardinalities(1000, a, b);
      for (std::int64_t n = 1; n <= 1000; ++n) {
        bad += counts[n - 1] > (std::abs(a) + std::abs(b)) * (n - 1) + 1;
        ++checked;
      }
    }
  }
  r.pass = exact && bad == 0;
  r.detail = std::string(exact ? "exact counts 100, 199, 298" : "exact counts WRONG") + "; bound held in " +
             std::to_string(checked - bad) + "/" + std::to_string(checked) + " cases";
  return r;
}

// 12 ------------------------------------------------------------------------
CriterionResult dyadic(const AcceptanceOptions& opt) {
  CriterionResult r{12, "dyadic moment bound", false, {}, 0.0};
  constexpr std::int64_t N = 1 << 12;
  const MonteCarloOptions mc{Sampler::importance, opt.threads};
  const SupSampleSet set = sample_K_sups(N, 256, opt.seed + 12, kAutoBudget, mc);
  const double direct = empirical_moment(set, 4.0);
  const auto level = empirical_level(set);
  bool ok = true;
  double tightest = std::numeric_limits<double>::infinity();
  for (double e : {0.5, 0.6, 0.75, 0.9}) {
    const double bound = dyadic_moment_bound(level, std::pow(double(N), e), double(N), 4.0);
    ok = ok && bound >= direct;
    tightest = std::min(tightest, bound / direct);
  }
  r.pass = ok;
  r.detail = "K_4^4 direct " + str(direct) + ", smallest dyadic/direct over M in N^{0.5..0.9}: " + str(tightest);
  return r;
}

// 13 ------------------------------------------------------------------------
CriterionResult fixture(const AcceptanceOptions& opt) {
  CriterionResult r{13, "predicted-exponent fixture", false, {}, 0.0};
  const fs::path dir = opt.fixture_dir.empty() ? fs::path(WEYLSUM_FIXTURE_DIR) : opt.fixture_dir;
  const std::string expected = slurp(dir / "improvement_cases.txt");
  const std::string generated = format_improvement_table(3, 7);
  const bool d7 = improvement_cases(7, 12).empty();
  r.pass = generated == expected && d7;
  r.detail = std::string(generated == expected ? "generated d=3..7 table matches" : "table differs") +
             (d7 ? "; no case for 7 <= d <= 12" : "; unexpected case for d >= 7");
  return r;
}

// 14 ------------------------------------------------------------------------
// Numeric CSV fields only: wall time lives in the JSON summary.
CriterionResult determinism(const AcceptanceOptions& opt) {
  CriterionResult r{14, "determinism", false, {}, 0.0};
  std::vector<std::string> mismatched;
  auto compare = [&](ExperimentConfig cfg) {
    const std::string base = cfg.name;
    std::string first;
    for (int threads : {1, 2, 5}) {
      cfg.threads = threads;
      cfg.name = base + "_threads" + std::to_string(threads);
      const std::string csv = slurp(run_experiment(cfg).csv_path);
      if (first.empty()) first = csv;
      else if (csv != first) mismatched.push_back(cfg.name);
    }
  };
  auto k = sweep_config(opt, ExperimentKind::k_norm, "criterion14_k_norm", 1 << 10, 1 << 12, opt.seed + 5);
  k.rho = {2.0, 4.0, 8.0};
  compare(k);
  auto p = sweep_config(opt, ExperimentKind::p_norm, "criterion14_p_sqrt2", 1 << 8, 1 << 10, opt.seed + 7);
  p.t = Slope::parse("sqrt(2)");
  compare(p);
  compare(level_config(opt, LevelTarget::projection, "criterion14_levelset"));
  r.pass = mismatched.empty();
  r.detail = mismatched.empty() ? "K sweep, projection sweep and level-set grid identical at 1, 2, 5 threads"
                                : "differs: " + mismatched.front();
  return r;
}

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(opt.out_dir);
  CriterionResult r;
  try {
    switch (id) {
      case 1: r = orthogonality(opt); break;
      case 2: r = crt_equivalence(opt); break;
      case 3: r = weil(opt); break;
      case 4: r = power_classes(opt); break;
      case 5: r = k_exponents(opt); break;
      case 6: r = l_exponents(opt); break;
      case 7: r = projections(opt); break;
      case 8: r = structure(opt); break;
      case 9: r = vaughan(opt); break;
      case 10: r = level_sets(opt); break;
      case 11: r = sumsets(opt); break;
      case 12: r = dyadic(opt); break;
      case 13: r = fixture(opt); break;
      case 14: r = determinism(opt); break;
      default: throw std::out_of_range("acceptance criterion " + std::to_string(id) + " does not exist");
    }
  } catch (const std::out_of_range&) {
    throw;
  } catch (const std::exception& e) {
    r.id = id;
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string format_result(const CriterionResult& r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, " [%.1f s]", r.seconds);
  return std::string(r.pass ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.title + ": " + r.detail + buf;
}

}  // namespace weyl
