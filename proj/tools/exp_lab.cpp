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
// exp_lab: command line driver for sums, sweeps, level sets, fits and the
// acceptance suite. Exit codes: 0 success, 2 acceptance failure, 1 usage error.

#include <CLI11.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "weyl/acceptance.hpp"
#include "weyl/arith.hpp"
#include "weyl/complete_sums.hpp"
#include "weyl/error.hpp"
#include "weyl/exp_lab.hpp"
#include "weyl/maximal_operators.hpp"
#include "weyl/weyl_core.hpp"

namespace {

using namespace weyl;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kAcceptanceFailure = 2;

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> eps;
  std::optional<int> threads;
  bool gnuplot = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value experiment file")->check(CLI::ExistingFile);
  app->add_option("--set", c.sets, "override one config key, as key=value");
  app->add_option("--seed", c.seed, "RNG seed");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--eps", c.eps, "slack exponent in envelopes");
  app->add_option("--threads", c.threads, "worker threads (speed only)");
  app->add_flag("--gnuplot", c.gnuplot, "also write a gnuplot script");
}

ExperimentConfig build_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : ExperimentConfig::load(c.config);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ContractViolation("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.out_dir = *c.out;
  if (c.eps) cfg.eps = *c.eps;
  if (c.threads) cfg.threads = *c.threads;
  if (c.gnuplot) cfg.gnuplot = true;
  return cfg;
}

int run_and_print(const ExperimentConfig& cfg) {
  const ExperimentReport rep = run_experiment(cfg, &std::cerr);
  std::cout << "csv: " << rep.csv_path.string() << "\njson: " << rep.json_path.string() << '\n';
  if (!rep.gnuplot_path.empty()) std::cout << "gnuplot: " << rep.gnuplot_path.string() << '\n';
  for (const auto& f : rep.fits) {
    std::cout << "rho=" << f.rho << " alpha=" << std::setprecision(4) << f.fit.alpha << " beta=" << f.fit.beta
              << (f.fit.beta_fixed ? " (fixed)" : "") << " predicted=" << f.predicted_alpha
              << " r2=" << f.fit.r_squared << (f.pass ? " pass" : " FAIL") << '\n';
  }
  std::cout << (rep.pass ? "pass" : "FAIL") << " (" << rep.wall_seconds << " s)\n";
  return rep.pass ? kOk : kAcceptanceFailure;
}

void print_bound(const char* name, const BoundReport& b) {
  std::cout << name << ": |S|=" << b.magnitude << " bound=" << b.bound << " ratio=" << b.ratio
            << (b.holds ? " holds" : " VIOLATED") << '\n';
}

int csum(std::uint64_t q, const std::vector<std::int64_t>& b) {
  const auto rv = ResidueVector::make(q, b);
  const int d = rv.d();
  const auto direct = complete_sum_direct(d, rv);
  const auto crt = complete_sum_crt(d, rv);
  std::cout << std::setprecision(12) << "S_" << d << "," << q << " = " << direct.real() << " + " << direct.imag()
            << "i  |S|=" << std::abs(direct) << "\ncrt: " << crt.real() << " + " << crt.imag()
            << "i  difference " << std::abs(crt - direct) << "\ncontent: " << rv.content() << '\n';
  std::cout << "factorization:";
  for (const auto& pp : nt::factorize(q)) std::cout << ' ' << pp.p << '^' << pp.m;
  std::cout << '\n';
  if (d >= 3) {
    const auto f = factor_power_classes(q, d);
    std::cout << "power classes:";
    for (int i = 2; i <= d; ++i) std::cout << " q_" << i << "=" << f.part(i);
    std::cout << (f.satisfies_invariants() ? "" : " (INVALID)") << '\n';
  }
  if (rv.content() != 1) {
    std::cout << "coefficients not primitive; bound checks skipped\n";
    return kOk;
  }
  bool ok = true;
  const auto factors = nt::factorize(q);
  if (factors.size() == 1 && d >= 1) {
    const auto& pp = factors.front();
    if (pp.m == 1 && static_cast<std::uint64_t>(d) < pp.p) {
      const auto w = check_weil(pp.p, d, rv);
      print_bound("weil", w);
      ok = ok && w.holds;
    } else if (pp.m >= 2) {
      const auto w = check_prime_power(pp.p, pp.m, d, rv);
      print_bound("prime power", w);
      ok = ok && w.holds;
    }
  }
  print_bound("hua (ratio only)", check_hua(q, d, rv));
  if (d >= 2) {
    const auto pc = check_power_class_product(d, rv);
    print_bound("power-class product", pc);
    ok = ok && pc.holds;
  }
  return ok ? kOk : kAcceptanceFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weyl sum experiments"};
  app.require_subcommand(1);

  // sum
  auto* sum = app.add_subcommand("sum", "evaluate one Weyl or Gauss sum");
  std::vector<int> sum_xd{1}, sum_yd{2};
  std::vector<double> sum_x, sum_y;
  std::int64_t sum_N = 1000;
  bool sum_sup = false;
  std::int64_t sum_budget = kAutoBudget;
  sum->add_option("--x-degrees", sum_xd, "degrees of the x-group")->delimiter(',');
  sum->add_option("--y-degrees", sum_yd, "degrees of the y-group")->delimiter(',');
  sum->add_option("-x,--x", sum_x, "x coordinates")->delimiter(',')->required();
  sum->add_option("-y,--y", sum_y, "y coordinates")->delimiter(',');
  sum->add_option("-N", sum_N, "length")->check(CLI::PositiveNumber);
  sum->add_flag("--sup", sum_sup, "also report sup over y");
  sum->add_option("--budget", sum_budget, "sup search budget");

  // csum
  auto* cs = app.add_subcommand("csum", "complete sum, factorization and bound checks");
  std::uint64_t cs_q = 1;
  std::vector<std::int64_t> cs_b;
  cs->add_option("-q", cs_q, "modulus")->required()->check(CLI::PositiveNumber);
  cs->add_option("-b", cs_b, "coefficients b_1..b_d")->delimiter(',')->required();

  // sweeps
  Common c_max, c_p, c_short, c_level, c_struct;
  auto* maxnorm = app.add_subcommand("maxnorm", "K, L or general maximal-operator norm sweep");
  add_common(maxnorm, c_max);
  std::string which;
  maxnorm->add_option("--which", which, "K, L or M")->check(CLI::IsMember({"K", "L", "M"}));
  auto* pnorm = app.add_subcommand("pnorm", "projection norm sweep");
  add_common(pnorm, c_p);
  std::string p_t;
  pnorm->add_option("--t", p_t, "slope: p/q, decimal or sqrt(m)");
  auto* shortsum = app.add_subcommand("shortsum", "short-interval moment sweep");
  add_common(shortsum, c_short);
  auto* levelset = app.add_subcommand("levelset", "level-set grid against envelopes");
  add_common(levelset, c_level);
  std::string level_target, level_t;
  levelset->add_option("--target", level_target, "y, x or projection")->check(CLI::IsMember({"y", "x", "projection"}));
  levelset->add_option("--t", level_t, "slope for projection targets");
  auto* structure = app.add_subcommand("structure", "large-value survey with rational structure");
  add_common(structure, c_struct);

  // predict
  auto* predict = app.add_subcommand("predict", "predicted exponents and the improvement table");
  std::vector<int> pr_xd{1}, pr_yd{2};
  std::vector<double> pr_rho{2.0, 4.0, 8.0};
  bool pr_table = false;
  int pr_dmax = 7;
  predict->add_option("--x-degrees", pr_xd)->delimiter(',');
  predict->add_option("--y-degrees", pr_yd)->delimiter(',');
  predict->add_option("--rho", pr_rho)->delimiter(',');
  predict->add_flag("--table", pr_table, "print the cases 3 <= d <= d-max where the small-rho bound improves");
  predict->add_option("--d-max", pr_dmax)->check(CLI::Range(3, kMaxDegree));

  // fit
  auto* fit = app.add_subcommand("fit", "fit N^alpha (log N)^beta to a sweep CSV");
  std::string fit_path;
  std::optional<double> fit_beta;
  fit->add_option("csv", fit_path)->required()->check(CLI::ExistingFile);
  fit->add_option("--fix-beta", fit_beta, "hold beta fixed");

  // report
  auto* report = app.add_subcommand("report", "run the acceptance suite");
  std::vector<int> rep_ids;
  std::optional<std::uint64_t> rep_seed;
  std::string rep_out = "acceptance_out", rep_fixtures;
  int rep_threads = 0;
  report->add_option("--only", rep_ids, "criterion ids")->delimiter(',')->check(CLI::Range(1, kAcceptanceCriteria));
  report->add_option("--seed", rep_seed);
  report->add_option("--out", rep_out);
  report->add_option("--threads", rep_threads);
  report->add_option("--fixtures", rep_fixtures, "fixture directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sum) {
      const auto family = SplitFamily::make(sum_xd, sum_yd);
      if (sum_y.empty()) sum_y.assign(sum_yd.size(), 0.0);
      if (sum_x.size() != sum_xd.size() || sum_y.size() != sum_yd.size())
        throw ContractViolation("sum: coordinate counts must match the degree groups");
      const TorusPoint x(sum_x), y(sum_y);
      const auto v = eval_weyl_sum(family, x, y, sum_N);
      std::cout << std::setprecision(12) << "S = " << v.value.real() << " + " << v.value.imag()
                << "i  |S| = " << v.magnitude() << '\n';
      if (sum_sup) {
        const auto s = sup_over_y(family, x, sum_N, sum_budget);
        std::cout << "sup_y |S| >= " << s.value << " at y =";
        for (double c : s.argmax.coords()) std::cout << ' ' << c;
        std::cout << " (" << s.budget_used << " evaluations, " << to_string(s.strategy) << ")\n";
      }
      return kOk;
    }
    if (*cs) return csum(cs_q, cs_b);
    if (*maxnorm) {
      auto cfg = build_config(c_max);
      if (which == "K") cfg.experiment = ExperimentKind::k_norm;
      else if (which == "L") cfg.experiment = ExperimentKind::l_norm;
      else if (which == "M") cfg.experiment = ExperimentKind::m_norm;
      else if (cfg.experiment != ExperimentKind::l_norm && cfg.experiment != ExperimentKind::m_norm)
        cfg.experiment = ExperimentKind::k_norm;
      return run_and_print(cfg);
    }
    if (*pnorm) {
      auto cfg = build_config(c_p);
      cfg.experiment = ExperimentKind::p_norm;
      if (!p_t.empty()) cfg.t = Slope::parse(p_t);
      return run_and_print(cfg);
    }
    if (*shortsum) {
      auto cfg = build_config(c_short);
      cfg.experiment = ExperimentKind::short_sum;
      return run_and_print(cfg);
    }
    if (*levelset) {
      auto cfg = build_config(c_level);
      cfg.experiment = ExperimentKind::levelset;
      if (!level_target.empty()) cfg.set("target", level_target);
      if (!level_t.empty()) cfg.t = Slope::parse(level_t);
      return run_and_print(cfg);
    }
    if (*structure) {
      auto cfg = build_config(c_struct);
      cfg.experiment = ExperimentKind::structure;
      return run_and_print(cfg);
    }
    if (*predict) {
      if (pr_table) {
        std::cout << format_improvement_table(3, pr_dmax);
        return kOk;
      }
      const auto family = SplitFamily::make(pr_xd, pr_yd);
      std::cout << std::setprecision(6);
      for (double rho : pr_rho) {
        const auto p = predicted_exponents(family, rho);
        std::cout << "rho=" << rho << " a=" << p.a_rho << " b=" << p.b_rho << " mu=" << p.mu
                  << " large_rho=" << p.large_rho << " (rho >= " << p.large_rho_threshold << ")"
                  << " floor=" << p.small_rho_floor << " tau=" << p.tau_k << " sigma=" << p.sigma_k
                  << " s=" << p.s_d << " D=" << p.D << " improves=" << (p.thm12_improves ? "yes" : "no") << '\n';
      }
      return kOk;
    }
    if (*fit) {
      for (const auto& [rho, f] : fit_csv(fit_path, fit_beta)) {
        std::cout << "rho=" << rho << " alpha=" << f.alpha << " beta=" << f.beta << (f.beta_fixed ? " (fixed)" : "")
                  << " logC=" << f.logC << " r2=" << f.r_squared << '\n';
      }
      return kOk;
    }
    if (*report) {
      AcceptanceOptions opt;
      if (rep_seed) opt.seed = *rep_seed;
      opt.out_dir = rep_out;
      opt.threads = rep_threads;
      opt.fixture_dir = rep_fixtures;
      if (rep_ids.empty())
        for (int id = 1; id <= kAcceptanceCriteria; ++id) rep_ids.push_back(id);
      bool all = true;
      for (int id : rep_ids) {
        const auto r = run_criterion(id, opt);
        std::cout << format_result(r) << std::endl;
        all = all && r.pass;
      }
      return all ? kOk : kAcceptanceFailure;
    }
  } catch (const ContractViolation& e) {
    std::cerr << "exp_lab: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "exp_lab: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
