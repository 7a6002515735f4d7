#include "chebcon/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "chebcon/polyopt.hpp"
#include "chebcon/random.hpp"

namespace chebcon {

double Objective::operator()(double x) const { return a / (1.0 + std::exp(-x)) + b * std::log1p(x * x); }

std::vector<Objective> draw_objectives(std::size_t n, std::uint64_t seed) {
  auto rng = make_engine({seed, tag(Stream::Objective)});
  std::normal_distribution<double> a(10.0, std::sqrt(2.0));
  std::normal_distribution<double> b(5.0, 1.0);
  std::vector<Objective> out(n);
  for (auto& o : out) {
    o.a = a(rng);
    o.b = b(rng);
  }
  return out;
}

void ScenarioConfig::validate() const {
  if (N < 1) throw ConfigError("N must be at least 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
  if (K1 < 1 || K2 <= K1) throw ConfigError("need 1 <= K1 < K2");
  if (!(failure_rate >= 0.0 && failure_rate < 1.0)) throw ConfigError("failure_rate must lie in [0, 1)");
  if (connectivity_window < 1) throw ConfigError("connectivity_window must be at least 1");
  if (!objectives.empty() && objectives.size() != N) throw ConfigError("objective list must have N entries");
  if (!constraints.empty() && constraints.size() != N) throw ConfigError("constraint list must have N entries");
  if (oracle_grid < 10000) throw ConfigError("oracle_grid must be at least 10^4");
  if (alpha < 0.0) throw ConfigError("alpha must be nonnegative");
  if (graph == GraphKind::Custom) throw ConfigError("custom graph schedules are not configurable for scenarios");
  noise.validate();
  adversary.validate();
}

std::size_t ScenarioConfig::stop_window() const {
  if (U > 0) return U;
  return std::max<std::size_t>(1, (N - 1) * connectivity_window);
}

GraphSequence ScenarioConfig::graph_sequence() const {
  GraphSequence s;
  switch (graph) {
    case GraphKind::RingPlusRandom: s = GraphSequence::ring_plus_random(N, graph_seed.value_or(seed), failure_rate); break;
    case GraphKind::StaticRing: s = GraphSequence::static_ring(N); break;
    case GraphKind::Complete: s = GraphSequence::complete(N); break;
    case GraphKind::Custom: throw ConfigError("custom graph schedules are not configurable for scenarios");
  }
  s.seed = graph_seed.value_or(seed);
  s.failure_rate = failure_rate;
  s.window = connectivity_window;
  return s;
}

std::vector<Objective> ScenarioConfig::resolved_objectives() const {
  return objectives.empty() ? draw_objectives(N, seed) : objectives;
}

std::vector<Interval> ScenarioConfig::resolved_constraints() const {
  return constraints.empty() ? std::vector<Interval>(N, Interval(-1.0, 1.0)) : constraints;
}

ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  cfg.N = 20;
  cfg.K1 = 10;
  cfg.K2 = 20;
  cfg.noise = NoiseSpec::uniform(1.0);
  cfg.adversary = AdversaryModel{0.8, 1e-5, DegreePrior::point_mass(20)};
  return cfg;
}

Optimum brute_force_optimum(const std::function<double(double)>& f, const Interval& interval, std::size_t grid) {
  if (grid < 2) throw ConfigError("oracle grid needs at least two points");
  const double lo = interval.lo();
  const double step = interval.width() / static_cast<double>(grid - 1);
  auto point = [&](std::size_t k) { return k + 1 == grid ? interval.hi() : lo + step * static_cast<double>(k); };

  Optimum best{f(lo), lo};
  std::size_t best_k = 0;
  for (std::size_t k = 1; k < grid; ++k) {
    const double x = point(k);
    const double v = f(x);
    if (v < best.value) {
      best = {v, x};
      best_k = k;
    }
  }

  double a = point(best_k == 0 ? 0 : best_k - 1);
  double b = point(std::min(best_k + 1, grid - 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > 1e-12) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    if (!(c < d)) break;
  }
  const double x = 0.5 * (a + b);
  const double v = f(x);
  if (v < best.value) best = {v, x};
  return best;
}

namespace {

struct LocalProxies {
  std::vector<Interval> intervals;
  std::vector<ChebProxy> proxies;
  std::vector<std::size_t> evaluations;
};

LocalProxies build_proxies(const ScenarioConfig& cfg, const std::vector<Objective>& objs, const GraphSequence& seq,
                           std::size_t U) {
  const auto cons = cfg.resolved_constraints();
  LocalProxies out;
  out.intervals = max_consensus_interval(cons, seq, U, 0);
  for (std::size_t i = 0; i < cfg.N; ++i) {
    ObjectiveFn fn(objs[i], cons[i]);
    out.proxies.push_back(adaptive_interpolate(fn, out.intervals[i], cfg.eps1()));
    out.evaluations.push_back(fn.evaluations());
  }
  return out;
}

DisseminationConfig dissemination_config(const ScenarioConfig& cfg, std::size_t U) {
  DisseminationConfig dc;
  dc.privacy.K1 = cfg.K1;
  dc.privacy.K2 = cfg.K2;
  dc.privacy.noise = cfg.noise;
  dc.privacy.alpha = cfg.alpha;
  dc.stop.window = U;
  dc.stop.epsilon2 = cfg.eps2();
  dc.seed = cfg.seed;
  dc.max_rounds = cfg.max_rounds;
  dc.first_round = U;
  return dc;
}

std::size_t global_degree(const std::vector<ChebProxy>& proxies) {
  std::size_t m = 0;
  for (const auto& p : proxies) m = std::max(m, p.degree());
  return m;
}

}  // namespace

RunReport run_prcpoa(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto objs = cfg.resolved_objectives();
  const auto seq = cfg.graph_sequence();
  const std::size_t U = cfg.stop_window();
  const auto local = build_proxies(cfg, objs, seq, U);

  const auto res = run_dissemination(local.proxies, seq, dissemination_config(cfg, U));

  RunReport rep;
  rep.seed = cfg.seed;
  rep.epsilon = cfg.epsilon;
  rep.interval = local.intervals.front();
  rep.global_degree = global_degree(local.proxies);
  rep.stop_window = U;
  rep.rounds = res.rounds;
  rep.communication_rounds = U + res.rounds;
  rep.delta = cfg.eps2() / static_cast<double>(rep.global_degree + 1);
  rep.max_deviation = res.max_deviation();
  rep.trace = res.trace;
  rep.noise_resamples = res.noise_resamples;

  const double n = static_cast<double>(cfg.N);
  const auto mean = [&](double x) {
    double s = 0.0;
    for (const auto& o : objs) s += o(x);
    return s / n;
  };
  const Optimum opt = brute_force_optimum(mean, rep.interval, cfg.oracle_grid);
  rep.f_star = opt.value;
  rep.x_f_star = opt.x;

  for (std::size_t i = 0; i < cfg.N; ++i) {
    AgentReport a;
    a.interval = local.intervals[i];
    a.degree = local.proxies[i].degree();
    a.evaluations = local.evaluations[i];
    a.stop_round = res.stop_rounds[i];
    a.estimate = res.estimates[i];
    const OptResult r = minimize_proxy(ChebProxy(a.interval, a.estimate), cfg.eps3());
    a.f_e_star = r.f_e_star;
    a.x_p_star = r.x_p_star;
    a.certified_gap = r.certified_gap;
    a.grid_fallback = r.grid_fallback;
    a.error = std::abs(a.f_e_star - rep.f_star);
    rep.max_error = std::max(rep.max_error, a.error);
    rep.agents.push_back(std::move(a));
  }
  return rep;
}

std::vector<ConvergenceRow> scenario_convergence(const ScenarioConfig& cfg, std::span<const double> epsilons,
                                                 std::vector<RunReport>* reports) {
  if (epsilons.empty()) throw ConfigError("epsilon list is empty");
  for (std::size_t k = 1; k < epsilons.size(); ++k) {
    if (!(epsilons[k] < epsilons[k - 1])) throw ConfigError("epsilon list must be strictly decreasing");
  }
  std::vector<RunReport> runs(epsilons.size());
  parallel_for(epsilons.size(), [&](std::size_t k) {
    ScenarioConfig c = cfg;
    c.epsilon = epsilons[k];
    runs[k] = run_prcpoa(c);
  });
  std::vector<ConvergenceRow> rows;
  for (const auto& r : runs) {
    ConvergenceRow row;
    row.epsilon = r.epsilon;
    row.K = r.rounds;
    row.error = r.max_error;
    row.global_degree = r.global_degree;
    row.communication_rounds = r.communication_rounds;
    for (const auto& a : r.agents) row.max_evaluations = std::max(row.max_evaluations, a.evaluations);
    rows.push_back(row);
  }
  if (reports) *reports = std::move(runs);
  return rows;
}

std::vector<PrivacyRow> scenario_privacy(const ScenarioConfig& cfg, std::span<const double> alphas,
                                         std::span<const NoiseFamily> families, std::size_t trials) {
  if (families.empty()) throw ConfigError("privacy scenario needs at least one noise family");
  if (alphas.empty()) throw ConfigError("privacy scenario needs at least one alpha_k");
  std::vector<PrivacyRow> rows;
  for (NoiseFamily fam : families) {
    const NoiseSpec noise = NoiseSpec::unit_variance(fam);
    std::vector<DisclosureCell> cells;
    if (trials > 0) {
      DisclosureOptions opts;
      opts.agents = std::max<std::size_t>(cfg.N, 2);
      opts.trials = trials;
      opts.K1 = cfg.K1;
      opts.K2 = cfg.K2;
      opts.noise = noise;
      opts.privacy_alpha = cfg.alpha;
      opts.gamma = cfg.adversary.gamma;
      opts.seed = cfg.seed;
      const double p = cfg.adversary.p;
      cells = monte_carlo_disclosure(opts, std::span<const double>(&p, 1), alphas);
    }
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      PrivacyRow row;
      row.family = fam;
      row.alpha_k = alphas[k];
      row.analytic = beta_k(alphas[k], noise, cfg.adversary, cfg.K1, cfg.K2);
      row.empirical = -1.0;
      if (!cells.empty()) {
        row.empirical = *std::max_element(cells[k].empirical.begin(), cells[k].empirical.end());
        row.trials = cells[k].trials;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<RobustnessRow> scenario_robustness(const ScenarioConfig& cfg, std::span<const double> rates,
                                               std::size_t seeds) {
  if (rates.empty() || seeds == 0) throw ConfigError("robustness scenario needs rates and seeds");
  for (double r : rates) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("failure rates must lie in [0, 1)");
  }
  constexpr std::size_t kHorizon = 5000;
  constexpr std::size_t kMaxWindow = 500;

  std::vector<RobustnessRow> rows(rates.size());
  std::vector<std::vector<std::optional<std::size_t>>> rounds(rates.size(),
                                                              std::vector<std::optional<std::size_t>>(seeds));
  std::vector<std::vector<std::size_t>> windows(rates.size(), std::vector<std::size_t>(seeds, 0));
  parallel_for(rates.size() * seeds, [&](std::size_t job) {
    const std::size_t ri = job / seeds;
    const std::size_t si = job % seeds;
    ScenarioConfig c = cfg;
    c.failure_rate = rates[ri];
    c.seed = cfg.seed + si;
    if (cfg.graph_seed) c.graph_seed = *cfg.graph_seed + si;
    GraphSequence seq = c.graph_sequence();
    const std::size_t B = measure_connectivity_window(seq, 0, kHorizon, kMaxWindow);
    if (B == 0) return;
    c.connectivity_window = B;
    seq.window = B;
    c.U = 0;
    const std::size_t U = c.stop_window();
    windows[ri][si] = B;

    const auto objs = c.resolved_objectives();
    const auto local = build_proxies(c, objs, seq, U);
    const double delta = c.eps2() / static_cast<double>(global_degree(local.proxies) + 1);
    try {
      const auto res = run_dissemination(local.proxies, seq, dissemination_config(c, U));
      for (const auto& row : res.trace) {
        if (row.round > c.K2 && row.max_ratio_error <= delta) {
          rounds[ri][si] = row.round - c.K2;
          break;
        }
      }
    } catch (const DisseminationNotConverged&) {
    }
  });

  for (std::size_t ri = 0; ri < rates.size(); ++ri) {
    auto& row = rows[ri];
    row.rate = rates[ri];
    row.runs = seeds;
    row.window = *std::max_element(windows[ri].begin(), windows[ri].end());
    row.stop_window = std::max<std::size_t>(1, (cfg.N - 1) * row.window);
    double total = 0.0;
    for (const auto& r : rounds[ri]) {
      if (r) {
        row.rounds.push_back(*r);
        total += static_cast<double>(*r);
      } else {
        ++row.failures;
      }
    }
    row.mean_rounds = row.rounds.empty() ? 0.0 : total / static_cast<double>(row.rounds.size());
  }
  return rows;
}

LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error("linear_fit needs equally long inputs");
  if (xs.size() < 2) throw Error("linear_fit needs at least 2 points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  if (sxx == 0.0) throw Error("linear_fit needs at least two distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

ComplexitySummary complexity_report(std::span<const RunReport> reports) {
  if (reports.size() < 2) throw Error("complexity_report: need >= 2 points");
  ComplexitySummary s;
  std::vector<double> inv, mover, rounds;
  for (const auto& r : reports) {
    std::size_t worst = 0;
    for (const auto& a : r.agents) {
      worst = std::max(worst, a.evaluations);
      if (a.evaluations > 2 * (2 * a.degree) + 1) s.evaluation_bound_holds = false;
      if (a.degree > 0) {
        s.evaluation_constant =
            std::max(s.evaluation_constant, static_cast<double>(a.evaluations) / static_cast<double>(a.degree));
      }
    }
    s.epsilons.push_back(r.epsilon);
    s.degrees.push_back(r.global_degree);
    s.evaluations.push_back(worst);
    s.rounds.push_back(r.communication_rounds);
    inv.push_back(std::log10(1.0 / r.epsilon));
    mover.push_back(std::log10(static_cast<double>(std::max<std::size_t>(r.global_degree, 1)) / r.epsilon));
    rounds.push_back(static_cast<double>(r.communication_rounds));
  }
  s.rounds_vs_log_inv_eps = linear_fit(inv, rounds);
  s.rounds_vs_log_m_over_eps = linear_fit(mover, rounds);
  return s;
}

DecayFit consensus_decay(const ScenarioConfig& cfg, double failure_rate, std::size_t seeds, std::size_t rounds,
                         double floor) {
  if (seeds == 0 || rounds <= cfg.K2 + 2) throw ConfigError("consensus_decay needs seeds and rounds beyond K2");
  std::vector<std::vector<double>> logs(seeds);
  parallel_for(seeds, [&](std::size_t si) {
    ScenarioConfig c = cfg;
    c.failure_rate = failure_rate;
    c.seed = cfg.seed + si;
    if (cfg.graph_seed) c.graph_seed = *cfg.graph_seed + si;
    const auto seq = c.graph_sequence();
    const std::size_t U = c.stop_window();
    const auto local = build_proxies(c, c.resolved_objectives(), seq, U);
    DisseminationConfig dc = dissemination_config(c, U);
    dc.stopping = false;
    dc.fixed_rounds = rounds;
    const auto res = run_dissemination(local.proxies, seq, dc);
    for (const auto& row : res.trace) logs[si].push_back(std::log10(std::max(row.max_ratio_error, 1e-300)));
  });

  std::vector<double> xs, ys;
  for (std::size_t t = cfg.K2 + 1; t <= rounds; ++t) {
    double mean = 0.0;
    for (const auto& l : logs) mean += l[t - 1];
    mean /= static_cast<double>(seeds);
    if (mean <= std::log10(floor)) break;
    xs.push_back(static_cast<double>(t));
    ys.push_back(mean);
  }
  DecayFit out;
  out.points = xs.size();
  if (xs.size() >= 2) {
    out.fit = linear_fit(xs, ys);
    out.rate = std::pow(10.0, out.fit.slope);
  }
  return out;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CHEBCON_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) threads = static_cast<std::size_t>(v);
  }
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard lock(guard);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace chebcon
