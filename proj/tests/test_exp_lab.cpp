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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "weyl/error.hpp"
#include "weyl/exp_lab.hpp"

using namespace weyl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("weylsum_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("quadratic exponents at rho = 4 carry a log power") {
  const auto p = predicted_exponents(SplitFamily::gauss_linear_x(), 4.0);
  CHECK(p.a_rho == doctest::Approx(0.75));
  CHECK(p.b_rho == doctest::Approx(0.25));
  CHECK(predicted_exponents(SplitFamily::gauss_linear_x(), 8.0).a_rho == doctest::Approx(0.875));
  CHECK(predicted_exponents(SplitFamily::gauss_linear_x(), 2.0).b_rho == 0.0);
  CHECK(predicted_exponents(SplitFamily::gauss_quadratic_x(), 2.0).a_rho == doctest::Approx(0.5));
  CHECK(predicted_exponents(SplitFamily::gauss_quadratic_x(), 8.0).a_rho == doctest::Approx(0.75));
}

TEST_CASE("cubic family with x-degrees 1, 2 improves") {
  const auto p = predicted_exponents(SplitFamily::make({1, 2}, {3}), 3.0);
  CHECK(p.tau_k == 3);
  CHECK(p.thm12_improves);
  CHECK(4 * p.tau_k < 13);
  CHECK(p.D == 4);
  CHECK(p.small_rho_floor == doctest::Approx(0.75));
  // below 2^{d-1} tau the floor wins over the trivial Hoelder bound
  CHECK(p.a_rho == doctest::Approx(std::max(0.75, 1.0 - 3.0 / 3.0)));
  CHECK(p.a_rho < p.mu);
  CHECK_FALSE(predicted_exponents(SplitFamily::make({1, 3}, {2}), 3.0).thm12_improves);
}

TEST_CASE("no improvement for d >= 7") {
  for (int d = 7; d <= 10; ++d)
    for (int k = 1; k < d; ++k) CHECK_FALSE(predicted_exponents(SplitFamily::standard(d, k), 2.0).thm12_improves);
  CHECK(improvement_cases(7, 12).empty());
}

TEST_CASE("predicted exponent invariants over all small families") {
  for (int d = 2; d <= 6; ++d) {
    for (int mask = 1; mask < (1 << d) - 1; ++mask) {
      std::vector<int> x, y;
      for (int e = 1; e <= d; ++e) (mask >> (e - 1) & 1 ? x : y).push_back(e);
      const SplitFamily f = SplitFamily::make(x, y);
      for (double rho : {1.0, 2.0, 4.0, 9.5, 100.0}) {
        const auto p = predicted_exponents(f, rho);
        CHECK(p.tau_k + p.sigma_k == p.s_d);
        CHECK(p.mu == doctest::Approx(1.0 - double(p.tau_k) / (2 * p.s_d + d - f.k())));
        if (rho >= p.large_rho_threshold) CHECK(p.a_rho == doctest::Approx(p.large_rho));
        if (d >= 3) CHECK(p.thm12_improves == ((1 << (d - 1)) * p.tau_k < 2 * p.s_d + d - f.k()));
        CHECK(p.a_rho <= 1.0);
      }
    }
  }
  CHECK_THROWS_AS(predicted_exponents(SplitFamily::gauss_linear_x(), 0.0), ContractViolation);
  CHECK_THROWS_AS(SplitFamily::make({1, 1}, {2}), ContractViolation);
}

TEST_CASE("improvement table matches the checked-in fixture") {
  const std::string fixture = slurp(fs::path(WEYLSUM_FIXTURE_DIR) / "improvement_cases.txt");
  CHECK(format_improvement_table(3, 7) == fixture);
}

TEST_CASE("fit recovers exact power laws") {
  std::vector<std::pair<double, double>> pure, logged;
  for (int e = 8; e <= 16; ++e) {
    const double N = std::ldexp(1.0, e);
    pure.push_back({N, 3.0 * std::pow(N, 0.75)});
    logged.push_back({N, 0.5 * std::pow(N, 0.75) * std::pow(std::log(N), 0.25)});
  }
  const auto f1 = fit_exponent(pure);
  CHECK(std::abs(f1.alpha - 0.75) < 1e-9);
  CHECK(std::abs(f1.beta) < 1e-6);
  CHECK(f1.r_squared == doctest::Approx(1.0));
  const auto f2 = fit_exponent(logged);
  CHECK(std::abs(f2.alpha - 0.75) < 1e-6);
  CHECK(std::abs(f2.beta - 0.25) < 1e-6);
  CHECK(std::abs(f2.logC - std::log(0.5)) < 1e-6);
  const auto f3 = fit_exponent(logged, 0.25);
  CHECK(f3.beta_fixed);
  CHECK(std::abs(f3.alpha - 0.75) < 1e-9);
  for (double r : f3.residuals) CHECK(std::abs(r) < 1e-9);
}

TEST_CASE("fit under 5% lognormal noise") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.05);
  int within = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<std::pair<double, double>> pts;
    for (int e = 8; e <= 15; ++e) {
      const double N = std::ldexp(1.0, e);
      pts.push_back({N, std::pow(N, 0.75) * std::exp(noise(rng))});
    }
    within += std::abs(fit_exponent(pts, 0.0).alpha - 0.75) <= 0.03;
  }
  CHECK(within >= 0.95 * trials);
}

TEST_CASE("fit contracts") {
  CHECK_THROWS_AS(fit_exponent({{16, 1}, {32, 2}}), ContractViolation);
  CHECK_THROWS_AS(fit_exponent({{16, 1}, {32, 0}, {64, 3}}), ContractViolation);
  CHECK_THROWS_AS(fit_exponent({{16, 1}, {32, -2}, {64, 3}}), ContractViolation);
}

TEST_CASE("slopes") {
  const Slope half = Slope::parse("1/2");
  CHECK(half.rational);
  CHECK(half.q == 2);
  CHECK(half.at(1000) == 0.5);
  const Slope dec = Slope::parse("0.25");
  CHECK((dec.p == 1 && dec.q == 4));
  CHECK(Slope::parse("2/4").q == 2);
  CHECK(Slope::parse("sqrt(9)").rational);
  const Slope r2 = Slope::parse("sqrt(2)");
  CHECK_FALSE(r2.rational);
  const auto s = rational_surrogate(std::sqrt(2.0), 1000);
  CHECK(s.q > 1000);
  CHECK(r2.at(1000) == s.value());
  CHECK_THROWS_AS(Slope::parse("1/0"), ContractViolation);
  CHECK_THROWS_AS(Slope::parse("abc"), ContractViolation);
}

TEST_CASE("config parsing and validation") {
  const auto cfg = ExperimentConfig::parse(
      "# K sweep\n"
      "experiment = k_norm   # Gauss, sup over y\n"
      "rho = 2, 4,8\n"
      "N_min = 128\nN_max = 1024\n"
      "samples = 32\nseed = 99\nbudget = auto\n"
      "\n"
      "t = 1/3\n");
  CHECK(cfg.experiment == ExperimentKind::k_norm);
  CHECK(cfg.rho == std::vector<double>{2, 4, 8});
  CHECK(cfg.N_schedule() == std::vector<std::int64_t>{128, 256, 512, 1024});
  CHECK(cfg.seed == 99);
  CHECK(cfg.t.q == 3);
  CHECK_NOTHROW(cfg.validate());
  const auto again = ExperimentConfig::parse(cfg.to_text());
  CHECK(again.to_text() == cfg.to_text());

  CHECK_THROWS_AS(ExperimentConfig::parse("colour = red\n"), ContractViolation);
  CHECK_THROWS_AS(ExperimentConfig::parse("samples = many\n"), ContractViolation);
  CHECK_THROWS_AS(ExperimentConfig::parse("no equals sign\n"), ContractViolation);
  auto few = cfg;
  few.samples = 8;
  CHECK_THROWS_AS(few.validate(), ContractViolation);
  auto flat = cfg;
  flat.N_min = 10;
  flat.N_max = 12;
  flat.N_ratio = 1.01;
  CHECK_THROWS_AS(flat.validate(), ContractViolation);
  auto short_sched = cfg;
  short_sched.N_max = 256;
  CHECK_THROWS_AS(short_sched.validate(), ContractViolation);
  auto bad_family = cfg;
  bad_family.experiment = ExperimentKind::m_norm;
  bad_family.x_degrees = {1};
  bad_family.y_degrees = {3};
  CHECK_THROWS_AS(bad_family.validate(), ContractViolation);
}

TEST_CASE("minimal K sweep writes CSV and summary, deterministically") {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::k_norm;
  cfg.rho = {2.0, 4.0};
  cfg.N_min = 64;
  cfg.N_max = 256;
  cfg.samples = 24;
  cfg.seed = 5;
  cfg.gnuplot = true;
  cfg.out_dir = scratch_dir("k_sweep_1");
  cfg.threads = 1;
  const auto r1 = run_experiment(cfg);
  const std::string csv1 = slurp(r1.csv_path);
  std::istringstream lines(csv1);
  std::string line;
  int rows = 0;
  std::getline(lines, line);
  CHECK(line == "N,rho,estimate,stderr,samples,seed,alpha_running,predicted_alpha,predicted_beta");
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 6);
  CHECK(fs::exists(r1.json_path));
  CHECK(fs::exists(r1.gnuplot_path));
  CHECK(slurp(r1.json_path).find("\"wall_seconds\"") != std::string::npos);
  REQUIRE(r1.fits.size() == 2);
  CHECK(r1.fits[1].predicted_beta == doctest::Approx(0.25));
  CHECK(r1.fits[1].fit.beta_fixed);

  cfg.out_dir = scratch_dir("k_sweep_2");
  cfg.threads = 3;
  const auto r2 = run_experiment(cfg);
  CHECK(slurp(r2.csv_path) == csv1);

  const auto fits = fit_csv(r1.csv_path, 0.0);
  REQUIRE(fits.size() == 2);
  CHECK(fits.at(2.0).alpha == doctest::Approx(r1.fits[0].fit.alpha).epsilon(1e-12));
}

TEST_CASE("level-set and structure experiments") {
  ExperimentConfig lv;
  lv.experiment = ExperimentKind::levelset;
  lv.target = LevelTarget::gauss_y;
  lv.N_min = lv.N_max = 256;
  lv.samples = 32;
  lv.eps = 0.0;
  lv.out_dir = scratch_dir("levelset");
  const auto rl = run_experiment(lv);
  std::istringstream lines(slurp(rl.csv_path));
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 1 + 3);
  CHECK(rl.summary_json.find("\"monotone\": true") != std::string::npos);

  ExperimentConfig st;
  st.experiment = ExperimentKind::structure;
  st.N_min = st.N_max = 512;
  st.A_exponents = {0.85};
  st.wanted = 5;
  st.max_attempts = 2000;
  st.eps = 0.1;
  st.out_dir = scratch_dir("structure");
  const auto rs = run_experiment(st);
  CHECK(rs.pass);
}

TEST_CASE("output failures name the path") {
  const fs::path dir = scratch_dir("blocked");
  fs::create_directories(dir);
  const fs::path file = dir / "plain_file";
  std::ofstream(file) << "x";
  ExperimentConfig cfg;
  cfg.N_min = 64;
  cfg.N_max = 256;
  cfg.samples = 16;
  cfg.out_dir = file / "sub";
  try {
    run_experiment(cfg);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("plain_file") != std::string::npos);
  }
}
