#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chebcon/cheb.hpp"
#include "chebcon/netsim.hpp"
#include "chebcon/noise.hpp"
#include "chebcon/polyopt.hpp"
#include "chebcon/privacy.hpp"
#include "chebcon/runner.hpp"
#include "chebcon/selftest.hpp"

namespace py = pybind11;
using namespace chebcon;

PYBIND11_MODULE(_chebcon, m) {
  m.doc() = "Chebyshev-proxy consensus optimisation with private push-sum dissemination";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Interval>(m, "Interval")
      .def(py::init<double, double>(), py::arg("lo"), py::arg("hi"))
      .def_property_readonly("lo", &Interval::lo)
      .def_property_readonly("hi", &Interval::hi)
      .def("__eq__", [](const Interval& a, const Interval& b) { return a == b; })
      .def("__repr__", [](const Interval& iv) {
        return "Interval(" + std::to_string(iv.lo()) + ", " + std::to_string(iv.hi()) + ")";
      });

  py::class_<ChebProxy>(m, "ChebProxy")
      .def(py::init<Interval, std::vector<double>>(), py::arg("interval"), py::arg("coeffs"))
      .def_property_readonly("interval", &ChebProxy::interval)
      .def_property_readonly("coeffs", &ChebProxy::coeffs)
      .def_property_readonly("degree", &ChebProxy::degree)
      .def("__call__", &ChebProxy::operator(), py::arg("x"));

  m.def("cheb_nodes", &cheb_nodes, py::arg("m"), py::arg("interval"));
  m.def("cheb_coeffs", [](const std::vector<double>& v) { return cheb_coeffs(v); }, py::arg("values"));
  m.def(
      "adaptive_interpolate",
      [](const std::function<double(double)>& fn, const Interval& iv, double eps1) {
        ObjectiveFn f(fn, iv);
        auto p = adaptive_interpolate(f, iv, eps1);
        return py::make_tuple(p, f.evaluations());
      },
      py::arg("f"), py::arg("interval"), py::arg("eps1"),
      "Returns (proxy, number of evaluations of f).");
  m.def("proxy_average", [](const std::vector<ChebProxy>& ps) { return proxy_average(ps); }, py::arg("proxies"));

  m.def("cheb_derivative", &cheb_derivative, py::arg("proxy"));
  m.def("cheb_roots", &cheb_roots, py::arg("proxy"));
  py::class_<OptResult>(m, "OptResult")
      .def_readonly("f_e_star", &OptResult::f_e_star)
      .def_readonly("x_p_star", &OptResult::x_p_star)
      .def_readonly("certified_gap", &OptResult::certified_gap)
      .def_readonly("grid_fallback", &OptResult::grid_fallback);
  m.def("minimize_proxy", &minimize_proxy, py::arg("proxy"), py::arg("eps3"));

  py::enum_<NoiseFamily>(m, "NoiseFamily")
      .value("Uniform", NoiseFamily::Uniform)
      .value("Normal", NoiseFamily::Normal)
      .value("Laplace", NoiseFamily::Laplace);
  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def_readonly("family", &NoiseSpec::family)
      .def_readonly("location", &NoiseSpec::location)
      .def_readonly("scale", &NoiseSpec::scale)
      .def_static("uniform", &NoiseSpec::uniform, py::arg("half_width"), py::arg("location") = 0.0)
      .def_static("normal", &NoiseSpec::normal, py::arg("sigma"), py::arg("location") = 0.0)
      .def_static("laplace", &NoiseSpec::laplace, py::arg("b"), py::arg("location") = 0.0)
      .def_static("unit_variance", &NoiseSpec::unit_variance, py::arg("family"))
      .def("variance", &NoiseSpec::variance);

  py::class_<AdversaryModel>(m, "AdversaryModel")
      .def(py::init([](double p, double gamma, std::size_t prior_degree) {
             AdversaryModel a{p, gamma, DegreePrior::point_mass(prior_degree)};
             a.validate();
             return a;
           }),
           py::arg("p") = 0.8, py::arg("gamma") = 1e-5, py::arg("prior_degree") = 20)
      .def_readonly("p", &AdversaryModel::p)
      .def_readonly("gamma", &AdversaryModel::gamma);
  m.def("h_i", &h_i, py::arg("alpha_k"), py::arg("noise"), py::arg("adversary"));
  m.def("beta_k", &beta_k, py::arg("alpha_k"), py::arg("noise"), py::arg("adversary"), py::arg("K1"), py::arg("K2"));

  py::class_<RoundGraph>(m, "RoundGraph")
      .def_property_readonly("size", &RoundGraph::size)
      .def_property_readonly("edges", [](const RoundGraph& g) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const Edge& e : g.edges()) out.emplace_back(e.from, e.to);
        return out;
      });
  py::class_<GraphSequence>(m, "GraphSequence")
      .def_static("ring_plus_random", &GraphSequence::ring_plus_random, py::arg("n"), py::arg("seed"),
                  py::arg("failure_rate") = 0.0)
      .def_static("static_ring", &GraphSequence::static_ring, py::arg("n"))
      .def_static("complete", &GraphSequence::complete, py::arg("n"));
  m.def("next_graph", &next_graph, py::arg("seq"), py::arg("t"));

  py::class_<Objective>(m, "Objective")
      .def(py::init<double, double>(), py::arg("a") = 10.0, py::arg("b") = 5.0)
      .def_readwrite("a", &Objective::a)
      .def_readwrite("b", &Objective::b)
      .def("__call__", &Objective::operator(), py::arg("x"));
  m.def("draw_objectives", &draw_objectives, py::arg("n"), py::arg("seed"));

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init(&default_scenario))
      .def_readwrite("N", &ScenarioConfig::N)
      .def_readwrite("failure_rate", &ScenarioConfig::failure_rate)
      .def_readwrite("connectivity_window", &ScenarioConfig::connectivity_window)
      .def_readwrite("objectives", &ScenarioConfig::objectives)
      .def_readwrite("epsilon", &ScenarioConfig::epsilon)
      .def_readwrite("K1", &ScenarioConfig::K1)
      .def_readwrite("K2", &ScenarioConfig::K2)
      .def_readwrite("noise", &ScenarioConfig::noise)
      .def_readwrite("alpha", &ScenarioConfig::alpha)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("oracle_grid", &ScenarioConfig::oracle_grid)
      .def_readwrite("max_rounds", &ScenarioConfig::max_rounds)
      .def("validate", &ScenarioConfig::validate);

  py::class_<AgentReport>(m, "AgentReport")
      .def_readonly("f_e_star", &AgentReport::f_e_star)
      .def_readonly("x_p_star", &AgentReport::x_p_star)
      .def_readonly("degree", &AgentReport::degree)
      .def_readonly("evaluations", &AgentReport::evaluations)
      .def_readonly("stop_round", &AgentReport::stop_round)
      .def_readonly("error", &AgentReport::error)
      .def_readonly("estimate", &AgentReport::estimate);
  py::class_<RunReport>(m, "RunReport")
      .def_readonly("seed", &RunReport::seed)
      .def_readonly("epsilon", &RunReport::epsilon)
      .def_readonly("agents", &RunReport::agents)
      .def_readonly("global_degree", &RunReport::global_degree)
      .def_readonly("stop_window", &RunReport::stop_window)
      .def_readonly("rounds", &RunReport::rounds)
      .def_readonly("communication_rounds", &RunReport::communication_rounds)
      .def_readonly("delta", &RunReport::delta)
      .def_readonly("max_deviation", &RunReport::max_deviation)
      .def_readonly("f_star", &RunReport::f_star)
      .def_readonly("x_f_star", &RunReport::x_f_star)
      .def_readonly("max_error", &RunReport::max_error);
  m.def("run_prcpoa", &run_prcpoa, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "brute_force_optimum",
      [](const std::function<double(double)>& f, const Interval& iv, std::size_t grid) {
        const auto o = brute_force_optimum(f, iv, grid);
        return py::make_tuple(o.value, o.x);
      },
      py::arg("f"), py::arg("interval"), py::arg("grid") = 1'000'000, "Returns (f_star, x_f_star).");

  m.def("selftest", [] {
    py::dict out;
    for (const auto& r : run_selftest()) out[py::str(r.module)] = r.failures.empty();
    return out;
  });
}
