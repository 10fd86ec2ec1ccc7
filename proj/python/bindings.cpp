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
#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "weyl/complete_sums.hpp"
#include "weyl/error.hpp"
#include "weyl/exp_lab.hpp"
#include "weyl/level_structure.hpp"
#include "weyl/maximal_operators.hpp"
#include "weyl/weyl_core.hpp"

namespace py = pybind11;
using namespace weyl;

namespace {

MonteCarloOptions mc(const std::string& sampler, int threads) {
  if (sampler == "importance") return {Sampler::importance, threads};
  if (sampler == "uniform") return {Sampler::uniform, threads};
  throw ContractViolation("sampler must be 'importance' or 'uniform'");
}

}  // namespace

PYBIND11_MODULE(_weylsum, m) {
  m.doc() = "Weyl sums, complete sums, maximal operators and level sets";
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);

  py::class_<SplitFamily>(m, "SplitFamily")
      .def(py::init(&SplitFamily::make), py::arg("x_degrees"), py::arg("y_degrees"))
      .def_static("standard", &SplitFamily::standard, py::arg("d"), py::arg("k"))
      .def_static("gauss_linear_x", &SplitFamily::gauss_linear_x)
      .def_static("gauss_quadratic_x", &SplitFamily::gauss_quadratic_x)
      .def_property_readonly("d", &SplitFamily::d)
      .def_property_readonly("k", &SplitFamily::k)
      .def_property_readonly("x_degrees", &SplitFamily::x_degrees)
      .def_property_readonly("y_degrees", &SplitFamily::y_degrees)
      .def_property_readonly("tau", &SplitFamily::tau)
      .def_property_readonly("sigma", &SplitFamily::sigma)
      .def("__eq__", [](const SplitFamily& a, const SplitFamily& b) { return a == b; })
      .def("__repr__", [](const SplitFamily& f) {
        return "SplitFamily(" + py::repr(py::cast(f.x_degrees())).cast<std::string>() + ", " +
               py::repr(py::cast(f.y_degrees())).cast<std::string>() + ")";
      });

  m.def("gauss_sum", [](double x, double y, std::int64_t N) { return eval_gauss_sum(x, y, N).value; },
        py::arg("x"), py::arg("y"), py::arg("N"));
  m.def("weyl_sum",
        [](const SplitFamily& f, std::vector<double> x, std::vector<double> y, std::int64_t N) {
          return eval_weyl_sum(f, TorusPoint(std::move(x)), TorusPoint(std::move(y)), N).value;
        },
        py::arg("family"), py::arg("x"), py::arg("y"), py::arg("N"));
  m.def("polynomial_sum",
        [](std::vector<double> c, std::int64_t N) { return eval_polynomial_sum(c, N).value; },
        py::arg("coeffs_by_degree"), py::arg("N"));

  m.def("complete_sum",
        [](std::uint64_t q, const std::vector<std::int64_t>& b, bool crt) {
          const auto rv = ResidueVector::make(q, b);
          return crt ? complete_sum_crt(rv.d(), rv) : complete_sum_direct(rv.d(), rv);
        },
        py::arg("q"), py::arg("b"), py::arg("crt") = true);

  py::class_<NormEstimate>(m, "NormEstimate")
      .def_readonly("rho", &NormEstimate::rho)
      .def_readonly("N", &NormEstimate::N)
      .def_readonly("estimate", &NormEstimate::estimate)
      .def_readonly("std_error", &NormEstimate::std_error)
      .def_readonly("samples", &NormEstimate::samples)
      .def_readonly("seed", &NormEstimate::seed);

  m.def("sup_over_y",
        [](const SplitFamily& f, std::vector<double> x, std::int64_t N, std::int64_t budget) {
          const auto r = sup_over_y(f, TorusPoint(std::move(x)), N, budget);
          return py::make_tuple(r.value, std::vector<double>(r.argmax.coords().begin(), r.argmax.coords().end()));
        },
        py::arg("family"), py::arg("x"), py::arg("N"), py::arg("budget") = kAutoBudget);
  m.def("sup_over_fiber",
        [](double t, double z, std::int64_t N, std::int64_t budget) {
          const auto r = sup_over_fiber(t, z, N, budget);
          return py::make_tuple(r.value, std::vector<double>(r.argmax.coords().begin(), r.argmax.coords().end()),
                                r.empty_fiber);
        },
        py::arg("t"), py::arg("z"), py::arg("N"), py::arg("budget") = kAutoBudget);

  m.def("gauss_K_norm",
        [](double rho, std::int64_t N, std::int64_t samples, std::uint64_t seed, const std::string& sampler,
           int threads) { return gauss_K_norm(rho, N, samples, seed, kAutoBudget, mc(sampler, threads)); },
        py::arg("rho"), py::arg("N"), py::arg("samples"), py::arg("seed"), py::arg("sampler") = "importance",
        py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());
  m.def("gauss_L_norm",
        [](double rho, std::int64_t N, std::int64_t samples, std::uint64_t seed, const std::string& sampler,
           int threads) { return gauss_L_norm(rho, N, samples, seed, kAutoBudget, mc(sampler, threads)); },
        py::arg("rho"), py::arg("N"), py::arg("samples"), py::arg("seed"), py::arg("sampler") = "importance",
        py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());
  m.def("max_operator_norm",
        [](const SplitFamily& f, double rho, std::int64_t N, std::int64_t samples, std::uint64_t seed,
           int threads) {
          return max_operator_norm(f, rho, N, samples, seed, kAutoBudget, mc("importance", threads));
        },
        py::arg("family"), py::arg("rho"), py::arg("N"), py::arg("samples"), py::arg("seed"),
        py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());
  m.def("projection_P_norm",
        [](double t, double rho, std::int64_t N, std::int64_t samples, std::uint64_t seed, int threads) {
          return projection_P_norm(t, rho, N, samples, seed, kAutoBudget, mc("importance", threads));
        },
        py::arg("t"), py::arg("rho"), py::arg("N"), py::arg("samples"), py::arg("seed"), py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());

  py::class_<LevelSetEstimate>(m, "LevelSetEstimate")
      .def_readonly("A", &LevelSetEstimate::A)
      .def_readonly("N", &LevelSetEstimate::N)
      .def_readonly("measure", &LevelSetEstimate::measure)
      .def_readonly("std_error", &LevelSetEstimate::std_error)
      .def_readonly("samples", &LevelSetEstimate::samples)
      .def_readonly("upper95", &LevelSetEstimate::upper95);
  m.def("gauss_levelset_y",
        [](double A, std::int64_t N, std::int64_t samples, std::uint64_t seed, int threads) {
          return gauss_levelset_y(A, N, samples, seed, kAutoBudget, mc("importance", threads));
        },
        py::arg("A"), py::arg("N"), py::arg("samples"), py::arg("seed"), py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());
  m.def("sumset_cardinality", &sumset_cardinality, py::arg("n"), py::arg("a"), py::arg("b"));

  py::class_<RationalApprox>(m, "RationalApprox")
      .def_readonly("q", &RationalApprox::q)
      .def_readonly("r", &RationalApprox::r)
      .def_readonly("errors", &RationalApprox::errors);
  m.def("find_rational_structure", &find_rational_structure, py::arg("u"), py::arg("N"), py::arg("A"),
        py::arg("eps") = 0.05);
  m.def("vaughan_decompose",
        [](const std::vector<double>& u, std::int64_t q, const std::vector<std::int64_t>& r, std::int64_t N) {
          const auto v = vaughan_decompose(u, q, r, N);
          return py::make_tuple(v.main, v.delta, v.bound);
        },
        py::arg("u"), py::arg("q"), py::arg("r"), py::arg("N"));

  py::class_<PredictedExponents>(m, "PredictedExponents")
      .def_readonly("rho", &PredictedExponents::rho)
      .def_readonly("mu", &PredictedExponents::mu)
      .def_readonly("large_rho", &PredictedExponents::large_rho)
      .def_readonly("small_rho_floor", &PredictedExponents::small_rho_floor)
      .def_readonly("a_rho", &PredictedExponents::a_rho)
      .def_readonly("b_rho", &PredictedExponents::b_rho)
      .def_readonly("tau_k", &PredictedExponents::tau_k)
      .def_readonly("sigma_k", &PredictedExponents::sigma_k)
      .def_readonly("s_d", &PredictedExponents::s_d)
      .def_readonly("D", &PredictedExponents::D)
      .def_readonly("thm12_improves", &PredictedExponents::thm12_improves);
  m.def("predicted_exponents", &predicted_exponents, py::arg("family"), py::arg("rho"));
  m.def("improvement_table", &format_improvement_table, py::arg("d_min") = 3, py::arg("d_max") = 7);

  py::class_<ExponentFit>(m, "ExponentFit")
      .def_readonly("alpha", &ExponentFit::alpha)
      .def_readonly("beta", &ExponentFit::beta)
      .def_readonly("logC", &ExponentFit::logC)
      .def_readonly("r_squared", &ExponentFit::r_squared)
      .def_readonly("residuals", &ExponentFit::residuals)
      .def_readonly("beta_fixed", &ExponentFit::beta_fixed);
  m.def("fit_exponent", &fit_exponent, py::arg("points"), py::arg("fix_beta") = py::none());

  m.def("run_experiment",
        [](const std::string& config_text) {
          const ExperimentConfig cfg = ExperimentConfig::parse(config_text);
          ExperimentReport r;
          {
            py::gil_scoped_release release;
            r = run_experiment(cfg);
          }
          return py::make_tuple(r.csv_path, r.json_path, r.pass);
        },
        py::arg("config_text"));
}
