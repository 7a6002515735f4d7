#include "chebcon/selftest.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "chebcon/cheb.hpp"
#include "chebcon/cli.hpp"
#include "chebcon/consensus.hpp"
#include "chebcon/netsim.hpp"
#include "chebcon/polyopt.hpp"
#include "chebcon/privacy.hpp"
#include "chebcon/runner.hpp"

namespace chebcon {

namespace {

class Group {
 public:
  explicit Group(std::string name) { m_.module = std::move(name); }

  void check(const std::string& what, const std::function<bool()>& fn) {
    ++m_.checks;
    try {
      if (!fn()) m_.failures.push_back(what);
    } catch (const std::exception& e) {
      m_.failures.push_back(what + ": " + e.what());
    }
  }

  template <class E>
  void throws(const std::string& what, const std::function<void()>& fn) {
    check(what, [&] {
      try {
        fn();
      } catch (const E&) {
        return true;
      }
      return false;
    });
  }

  SelftestModule done() { return std::move(m_); }

 private:
  SelftestModule m_;
};

bool near(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

bool near_all(const std::vector<double>& a, const std::vector<double>& b, double tol = 1e-12) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!near(a[k], b[k], tol)) return false;
  return true;
}

SelftestModule cheb_group() {
  Group g("cheb");
  const double r = std::sqrt(2.0) / 2.0;
  g.check("nodes m=2 on [-1,1]", [] { return near_all(cheb_nodes(2, Interval(-1, 1)), {1, 0, -1}); });
  g.check("nodes m=2 on [0,2]", [] { return near_all(cheb_nodes(2, Interval(0, 2)), {2, 1, 0}); });
  g.check("nodes m=4 on [-1,1]", [&] { return near_all(cheb_nodes(4, Interval(-1, 1)), {1, r, 0, -r, -1}); });
  g.check("coefficients of a constant", [] {
    const std::vector<double> v{1, 1, 1};
    return near_all(cheb_coeffs(v), {1, 0, 0});
  });
  g.check("identity proxy at 0.5", [] { return near(ChebProxy(Interval(), {0, 1, 0})(0.5), 0.5); });
  g.check("midpoint alternation", [] {
    const ChebProxy p(Interval(2, 6), {0.3, 1.7, -2.0, 0.4, 0.25});
    return near(p(4.0), 0.3 + 2.0 + 0.25);
  });
  g.check("average of identical proxies", [] {
    const std::vector<ChebProxy> ps{ChebProxy(Interval(), {1, 2}), ChebProxy(Interval(), {1, 2})};
    return near_all(proxy_average(ps).coeffs(), {1, 2});
  });
  g.check("average with zero padding", [] {
    const std::vector<ChebProxy> ps{ChebProxy(Interval(), {1, 0}), ChebProxy(Interval(), {0, 0, 3})};
    return near_all(proxy_average(ps).coeffs(), {0.5, 0, 1.5});
  });
  g.throws<InvalidInterval>("degenerate interval", [] { Interval(1, 1); });
  return g.done();
}

SelftestModule netsim_group() {
  Group g("netsim");
  g.check("static ring n=3", [] {
    const auto graph = next_graph(GraphSequence::static_ring(3), 7);
    const std::vector<Edge> want{{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 0}, {2, 2}};
    return graph.edges() == want;
  });
  g.check("ring-plus-random out-degrees", [] {
    const auto seq = GraphSequence::ring_plus_random(20, 3);
    for (std::size_t t = 0; t < 50; ++t) {
      const auto graph = next_graph(seq, t);
      for (std::size_t i = 0; i < 20; ++i) {
        const auto d = graph.out_degree(i);
        if (d != 3 && !(d == 2 && graph.has_edge(i, (i + 1) % 20))) return false;
      }
    }
    return true;
  });
  g.check("determinism in (seed, t)", [] {
    const auto seq = GraphSequence::ring_plus_random(20, 11, 0.3);
    return next_graph(seq, 42) == next_graph(seq, 42);
  });
  g.check("complete graph is strongly connected", [] {
    const std::vector<RoundGraph> gs{next_graph(GraphSequence::complete(4), 0)};
    return union_strongly_connected(gs);
  });
  g.check("self-loop-only graphs are not", [] {
    const std::vector<RoundGraph> gs{RoundGraph(2, {}), RoundGraph(2, {})};
    return !union_strongly_connected(gs);
  });
  g.check("ring-plus-random window of one", [] {
    const auto seq = GraphSequence::ring_plus_random(20, 5);
    const std::vector<RoundGraph> gs{next_graph(seq, 9)};
    return union_strongly_connected(gs);
  });
  g.check("weights on complete n=2", [] {
    const auto a = push_weights(next_graph(GraphSequence::complete(2), 0));
    return a(0, 0) == 0.5 && a(0, 1) == 0.5 && a(1, 0) == 0.5 && a(1, 1) == 0.5;
  });
  g.check("weights on self-loops only", [] {
    const auto a = push_weights(RoundGraph(3, {}));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        if (a(i, j) != (i == j ? 1.0 : 0.0)) return false;
    return true;
  });
  return g.done();
}

std::vector<AgentState> scalar_states(const std::vector<double>& xs) {
  std::vector<AgentState> s(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) s[i].x = {xs[i]};
  return s;
}

SelftestModule consensus_group() {
  Group g("consensus");
  g.check("complete mixing hits the mean", [] {
    auto s = scalar_states({1, 2, 3});
    push_sum_round(s, next_graph(GraphSequence::complete(3), 0));
    for (const auto& a : s)
      if (!near(a.x[0] / a.y, 2.0)) return false;
    return true;
  });
  g.check("self-loops leave states unchanged", [] {
    auto s = scalar_states({1, 2, 3});
    push_sum_round(s, RoundGraph(3, {}));
    return s[0].x[0] == 1 && s[1].x[0] == 2 && s[2].x[0] == 3 && s[0].y == 1;
  });
  g.check("interval max/min consensus", [] {
    const std::vector<Interval> local{Interval(-2, 1), Interval(-1, 2)};
    const auto out = max_consensus_interval(local, GraphSequence::static_ring(2), 1);
    return out[0] == Interval(-1, 1) && out[1] == Interval(-1, 1);
  });
  g.throws<InfeasibleConstraints>("empty intersection", [] {
    const std::vector<Interval> local{Interval(0, 1), Interval(2, 3)};
    max_consensus_interval(local, GraphSequence::static_ring(2), 1);
  });
  g.check("full insertion in round one", [] {
    AgentState a;
    a.perturbed = {1, 2, 3};
    a.noise = {0, 0, 0};
    a.schedule.insert_counts = {3, 0};
    insert_block(a, 1);
    const auto before = a.x;
    insert_block(a, 2);
    return a.x == std::vector<double>({1, 2, 3}) && a.x == before;
  });
  g.check("three subtractions of 0.2", [] {
    AgentState a;
    a.x = {1.0};
    a.noise = {0.6};
    a.schedule.subtraction_count = 3;
    a.schedule.subtraction_rounds = {11, 12, 13};
    for (std::size_t t : {11, 12, 13}) {
      if (!near(a.subtraction_amount(0), 0.2)) return false;
      subtract_noise(a, t);
    }
    return near(a.x[0], 0.4);
  });
  g.throws<ProtocolOrder>("insertion after K1", [] {
    AgentState a;
    a.perturbed = {1};
    a.schedule.insert_counts = {1};
    insert_block(a, 2);
  });
  g.check("identical ratios stop at the first check", [] {
    auto s = scalar_states({0.5, 0.5, 0.5});
    begin_stopping(s);
    std::size_t elapsed = 0;
    const auto c = stopping_round(s, next_graph(GraphSequence::static_ring(3), 0), {1, 1e-9}, elapsed);
    return c[0] && c[1] && c[2];
  });
  g.check("gap of two delta does not stop", [] {
    const double delta = 1e-3;
    auto s = scalar_states({0.0, 2 * delta});
    begin_stopping(s);
    std::size_t elapsed = 0;
    const auto c = stopping_round(s, next_graph(GraphSequence::complete(2), 0), {1, delta}, elapsed);
    return !c[0] && !c[1];
  });
  return g.done();
}

SelftestModule privacy_group() {
  Group g("privacy");
  const AdversaryModel adv{0.8, 1e-5, DegreePrior::point_mass(2)};
  const NoiseSpec u = NoiseSpec::uniform(1.0);
  g.check("zero-width window", [&] { return near(h_i(0.0, u, adv), 1e-5); });
  g.check("full support", [&] { return near(h_i(1e6, u, adv), 0.8 + 1e-5); });
  g.check("unit h gives unit beta", [&] {
    const AdversaryModel sure{0.5, 0.5, DegreePrior::point_mass(2)};
    return near(beta_k(1e6, u, sure, 10, 20), 1.0);
  });
  g.check("no null slots gives the plain product", [&] {
    const std::vector<double> split{0.1, 0.2, 0.3};
    double prod = 1.0;
    for (double a : split) prod *= beta_k(a, u, adv, 10, 20);
    return near(beta_total(0.6, split, 2, 2, u, adv, 10, 20), prod, 1e-15);
  });
  g.throws<InvalidSplit>("split not summing to alpha", [&] {
    const std::vector<double> split{0.1, 0.1, 0.1};
    beta_total(0.6, split, 2, 2, u, adv, 10, 20);
  });
  g.throws<UnsupportedFamily>("unknown family", [] { parse_noise_family("cauchy"); });
  return g.done();
}

SelftestModule polyopt_group() {
  Group g("polyopt");
  g.check("derivative of a constant", [] {
    const auto d = cheb_derivative(ChebProxy(Interval(), {4.0}));
    return d.coeffs() == std::vector<double>{0.0};
  });
  g.check("derivative of identity on [0,2]", [] {
    return near_all(cheb_derivative(ChebProxy(Interval(0, 2), {0, 1})).coeffs(), {1});
  });
  g.check("roots of T2", [] {
    const auto r = cheb_roots(ChebProxy(Interval(), {0, 0, 1}));
    const double h = std::sqrt(2.0) / 2.0;
    return r && near_all(*r, {-h, h}, 1e-12);
  });
  g.check("root of x", [] {
    const auto r = cheb_roots(ChebProxy(Interval(), {0, 1}));
    return r && near_all(*r, {0.0});
  });
  g.check("minimum of x^2", [] {
    const auto o = minimize_proxy(ChebProxy(Interval(), {0.5, 0, 0.5}), 1e-10);
    return near(o.f_e_star, 0.0) && near(o.x_p_star, 0.0);
  });
  g.check("boundary minimum of x", [] {
    const auto o = minimize_proxy(ChebProxy(Interval(), {0, 1}), 1e-10);
    return near(o.f_e_star, -1.0) && near(o.x_p_star, -1.0);
  });
  return g.done();
}

SelftestModule runner_group() {
  Group g("runner");
  g.check("oracle on x^2", [] {
    const auto o = brute_force_optimum([](double x) { return x * x; }, Interval(), 10001);
    return near(o.value, 0.0, 1e-9) && near(o.x, 0.0, 1e-6);
  });
  g.check("oracle on -cos", [] {
    const auto o = brute_force_optimum([](double x) { return -std::cos(x); }, Interval(), 10001);
    return near(o.value, -1.0, 1e-9) && near(o.x, 0.0, 1e-6);
  });
  g.throws<Error>("complexity from one point", [] {
    const std::vector<RunReport> one(1);
    complexity_report(one);
  });
  g.check("single agent", [] {
    ScenarioConfig cfg = default_scenario();
    cfg.N = 1;
    cfg.epsilon = 1e-6;
    cfg.oracle_grid = 100000;
    const auto rep = run_prcpoa(cfg);
    return rep.max_error <= cfg.epsilon;
  });
  return g.done();
}

SelftestModule cli_group() {
  Group g("cli");
  const auto dir = std::filesystem::temp_directory_path() / "chebcon_selftest";
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "s.toml";
  std::ofstream(cfg) << "paper_defaults = true\n";
  const std::string cfg_s = cfg.string();
  g.check("run with config and output", [&] {
    const char* argv[] = {"chebcon", "run", "--config", cfg_s.c_str(), "--out", "results/"};
    const auto c = parse_args(6, argv);
    return c.sub == Subcommand::Run && c.config && *c.config == cfg && c.out == "results/";
  });
  g.check("privacy families", [] {
    const char* argv[] = {"chebcon", "privacy", "--families", "uniform,normal,laplace"};
    const auto c = parse_args(4, argv);
    return c.families ==
           std::vector<NoiseFamily>{NoiseFamily::Uniform, NoiseFamily::Normal, NoiseFamily::Laplace};
  });
  g.check("missing config exits with 2 naming the path", [] {
    const char* argv[] = {"chebcon", "run", "--config", "missing.toml"};
    std::ostringstream out, err;
    return run_cli(4, argv, out, err) == kExitConfigError && err.str().find("missing.toml") != std::string::npos;
  });
  std::filesystem::remove_all(dir);
  return g.done();
}

}  // namespace

std::vector<SelftestModule> run_selftest() {
  return {cheb_group(), netsim_group(), consensus_group(), privacy_group(), polyopt_group(), runner_group(),
          cli_group()};
}

}  // namespace chebcon
