#include <algorithm>
#include <cmath>
#include <numeric>

#include "chebcon/consensus.hpp"
#include "chebcon/random.hpp"
#include "chebcon/runner.hpp"
#include "doctest.h"
#include "gen.hpp"

using namespace chebcon;

namespace {

std::vector<AgentState> scalar_states(const std::vector<double>& xs) {
  std::vector<AgentState> s(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) s[i].x = {xs[i]};
  return s;
}

std::vector<std::vector<double>> random_vectors(std::mt19937_64& rng, std::size_t n, std::size_t max_len) {
  std::vector<std::vector<double>> out(n);
  for (auto& v : out) {
    v.resize(gen::index(rng, 1, max_len));
    for (auto& c : v) c = gen::uniform(rng, -3, 3);
  }
  return out;
}

std::vector<double> average(const std::vector<std::vector<double>>& vs) {
  std::size_t len = 0;
  for (const auto& v : vs) len = std::max(len, v.size());
  std::vector<double> out(len, 0.0);
  for (const auto& v : vs)
    for (std::size_t k = 0; k < v.size(); ++k) out[k] += v[k];
  for (auto& c : out) c /= static_cast<double>(vs.size());
  return out;
}

DisseminationConfig experiment_config(std::uint64_t seed) {
  DisseminationConfig cfg;
  cfg.privacy.K1 = 10;
  cfg.privacy.K2 = 20;
  cfg.privacy.noise = NoiseSpec::uniform(1.0);
  cfg.stop.window = 19;
  cfg.stop.epsilon2 = 1e-10 / 3;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("push-sum mixing") {
  SUBCASE("complete graph averages in one round") {
    auto s = scalar_states({1, 2, 3});
    push_sum_round(s, next_graph(GraphSequence::complete(3), 0));
    for (const auto& a : s) {
      CHECK(a.x[0] == doctest::Approx(2.0).epsilon(1e-15));
      CHECK(a.y == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
  SUBCASE("self-loops only leave the state alone") {
    auto s = scalar_states({1, 2, 3});
    push_sum_round(s, RoundGraph(3, {}));
    CHECK(s[0].x[0] == 1.0);
    CHECK(s[2].x[0] == 3.0);
    CHECK(s[1].y == 1.0);
  }
  SUBCASE("3-ring converges to the mean") {
    auto s = scalar_states({1, 0, 0});
    const auto g = next_graph(GraphSequence::static_ring(3), 0);
    for (int t = 0; t < 200; ++t) push_sum_round(s, g);
    for (const auto& a : s) CHECK(std::abs(a.x[0] / a.y - 1.0 / 3.0) <= 1e-10);
  }
  SUBCASE("unequal lengths are zero padded") {
    std::vector<AgentState> s(2);
    s[0].x = {1.0};
    s[1].x = {1.0, 4.0};
    push_sum_round(s, next_graph(GraphSequence::complete(2), 0));
    CHECK(s[0].x == std::vector<double>{1.0, 2.0});
    CHECK(s[1].x == std::vector<double>{1.0, 2.0});
  }
  CHECK_THROWS_AS(
      [] {
        auto s = scalar_states({1, 2});
        push_sum_round(s, RoundGraph(3, {}));
      }(),
      Error);
}

TEST_CASE("interval max/min consensus") {
  const std::vector<Interval> same(5, Interval(-1, 1));
  for (const auto& iv : max_consensus_interval(same, GraphSequence::ring_plus_random(5, 1), 4)) {
    CHECK(iv == Interval(-1, 1));
  }
  const std::vector<Interval> two{Interval(-2, 1), Interval(-1, 2)};
  for (const auto& iv : max_consensus_interval(two, GraphSequence::static_ring(2), 1)) CHECK(iv == Interval(-1, 1));
  const std::vector<Interval> apart{Interval(0, 1), Interval(2, 3)};
  CHECK_THROWS_AS(max_consensus_interval(apart, GraphSequence::static_ring(2), 1), InfeasibleConstraints);

  SUBCASE("(N-1)B rounds reach the intersection on a ring") {
    auto rng = gen::engine(31);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = gen::index(rng, 2, 12);
      std::vector<Interval> local;
      double lo = -1e9, hi = 1e9;
      for (std::size_t i = 0; i < n; ++i) {
        const double a = gen::uniform(rng, -3, -0.5);
        const double b = gen::uniform(rng, 0.5, 3);
        local.emplace_back(a, b);
        lo = std::max(lo, a);
        hi = std::min(hi, b);
      }
      for (const auto& iv : max_consensus_interval(local, GraphSequence::static_ring(n), n - 1)) {
        CHECK(iv == Interval(lo, hi));
      }
    }
  }
}

TEST_CASE("agent construction") {
  PrivacyParams pp;
  auto rng = gen::engine(41);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t dim = gen::index(rng, 1, 40);
    std::vector<double> c(dim);
    for (auto& v : c) v = gen::uniform(rng, -2, 2);
    pp.alpha = gen::uniform(rng, 0.0, 0.05);
    const auto a = make_agent(c, pp, rng);
    const auto& sch = a.schedule;
    CHECK(sch.insert_counts.size() == pp.K1);
    CHECK(std::accumulate(sch.insert_counts.begin(), sch.insert_counts.end(), std::size_t{0}) == dim);
    CHECK(sch.subtraction_count >= 1);
    CHECK(sch.subtraction_count <= pp.K2 - pp.K1);
    CHECK(sch.subtraction_rounds.size() == sch.subtraction_count);
    CHECK(std::is_sorted(sch.subtraction_rounds.begin(), sch.subtraction_rounds.end()));
    CHECK(std::adjacent_find(sch.subtraction_rounds.begin(), sch.subtraction_rounds.end()) ==
          sch.subtraction_rounds.end());
    for (std::size_t r : sch.subtraction_rounds) CHECK((r > pp.K1 && r <= pp.K2));
    for (std::size_t k = 0; k < dim; ++k) {
      CHECK(std::abs(a.subtraction_amount(k)) > pp.alpha);
      CHECK(a.perturbed[k] == c[k] + a.noise[k]);
    }
    CHECK(a.x.empty());
    CHECK(a.y == 1.0);
  }

  SUBCASE("noise that can never exceed alpha is rejected") {
    PrivacyParams tight;
    tight.noise = NoiseSpec::uniform(1e-3);
    tight.alpha = 1.0;
    tight.max_resamples = 100;
    CHECK_THROWS_AS(make_agent(std::vector<double>{1.0}, tight, rng), ConfigError);
  }
  SUBCASE("parameter validation") {
    PrivacyParams bad;
    bad.K2 = bad.K1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = PrivacyParams{};
    bad.K1 = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }
}

TEST_CASE("block insertion") {
  AgentState a;
  a.perturbed = {1, 2, 3, 4};
  a.noise = {0, 0, 0, 0};
  a.schedule.insert_counts = {0, 2, 0, 2};

  insert_block(a, 1);
  CHECK(a.x.empty());
  insert_block(a, 2);
  CHECK(a.x == std::vector<double>{1, 2});
  a.x[0] = 10;  // mixing may have changed existing slots
  insert_block(a, 3);
  CHECK(a.x == std::vector<double>{10, 2});
  insert_block(a, 4);
  CHECK(a.x == std::vector<double>{10, 2, 3, 4});
  CHECK(a.inserted_upto == 4);

  CHECK_THROWS_AS(insert_block(a, 4), ProtocolOrder);
  CHECK_THROWS_AS(insert_block(a, 5), ProtocolOrder);
  CHECK_THROWS_AS(insert_block(a, 0), ProtocolOrder);

  AgentState all;
  all.perturbed = {5, 6};
  all.schedule.insert_counts = {2, 0, 0};
  insert_block(all, 1);
  CHECK(all.x == std::vector<double>{5, 6});
}

TEST_CASE("noise subtraction") {
  AgentState a;
  a.x = {1.0, 1.0};
  a.noise = {0.6, -0.3};
  a.schedule.subtraction_count = 3;
  a.schedule.subtraction_rounds = {12, 15, 19};
  CHECK_THROWS_AS(subtract_noise(a, 13), ProtocolOrder);
  for (std::size_t t : {12, 15, 19}) subtract_noise(a, t);
  CHECK(a.x[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(a.x[1] == doctest::Approx(1.3).epsilon(1e-15));
  CHECK_THROWS_AS(subtract_noise(a, 19), ProtocolOrder);

  AgentState once;
  once.x = {2.0};
  once.noise = {0.75};
  once.schedule.subtraction_rounds = {11};
  subtract_noise(once, 11);
  CHECK(once.x[0] == 1.25);

  AgentState short_x;
  short_x.x = {1.0};
  short_x.noise = {0.5, 0.5};
  short_x.schedule.subtraction_rounds = {11};
  subtract_noise(short_x, 11);
  CHECK(short_x.x == std::vector<double>{0.5, -0.5});
}

TEST_CASE("stopping rounds") {
  SUBCASE("identical ratios stop at the first check") {
    auto s = scalar_states({0.25, 0.25, 0.25, 0.25});
    begin_stopping(s);
    std::size_t elapsed = 0;
    const StopParams sp{3, 1e-12};
    const auto g = next_graph(GraphSequence::static_ring(4), 0);
    const auto first = stopping_round(s, g, sp, elapsed);
    CHECK(std::none_of(first.begin(), first.end(), [](bool b) { return b; }));
    stopping_round(s, g, sp, elapsed);
    const auto fired = stopping_round(s, g, sp, elapsed);
    CHECK(std::all_of(fired.begin(), fired.end(), [](bool b) { return b; }));
    CHECK(elapsed == 0);
  }
  SUBCASE("a gap of two delta does not stop") {
    const double delta = 1e-4;
    auto s = scalar_states({0.0, 2 * delta});
    begin_stopping(s);
    std::size_t elapsed = 0;
    const auto fired = stopping_round(s, next_graph(GraphSequence::complete(2), 0), {1, delta}, elapsed);
    CHECK_FALSE(fired[0]);
    CHECK_FALSE(fired[1]);
    CHECK(s[0].r == s[0].ratio());
    CHECK(s[0].s == s[0].ratio());
  }
  SUBCASE("envelopes are reset to the current ratios") {
    auto s = scalar_states({0.0, 1.0});
    begin_stopping(s);
    std::size_t elapsed = 0;
    stopping_round(s, next_graph(GraphSequence::complete(2), 0), {1, 1e-9}, elapsed);
    CHECK(s[0].r == s[0].ratio());
    CHECK(s[1].s == s[1].ratio());
  }
  SUBCASE("zero window is rejected") {
    auto s = scalar_states({1.0});
    std::size_t elapsed = 0;
    CHECK_THROWS_AS(stopping_round(s, RoundGraph(1, {}), {0, 1e-9}, elapsed), ConfigError);
  }
}

TEST_CASE("dissemination without noise reduces to push-sum") {
  const std::vector<std::vector<double>> init{{1.0, 2.0}, {3.0}, {-1.0, 0.0, 4.0}};
  DisseminationConfig cfg;
  cfg.privacy.K1 = 1;
  cfg.privacy.K2 = 2;
  cfg.privacy.noise = NoiseSpec::uniform(1e-300);
  cfg.privacy.alpha = 0.0;
  cfg.stop.window = 2;
  cfg.stop.epsilon2 = 1e-9;
  const auto res = run_dissemination(init, GraphSequence::ring_plus_random(3, 4), cfg);
  CHECK(res.max_deviation() <= cfg.stop.delta(3));
  CHECK(res.average == std::vector<double>{1.0, 2.0 / 3.0, 4.0 / 3.0});
}

TEST_CASE("dissemination on the experiment setup") {
  const auto objs = draw_objectives(20, 3);
  std::vector<ChebProxy> proxies;
  for (const auto& o : objs) {
    ObjectiveFn f(o, Interval());
    proxies.push_back(adaptive_interpolate(f, Interval(), 1e-10 / 3));
  }
  const auto seq = GraphSequence::ring_plus_random(20, 3);
  auto cfg = experiment_config(3);

  const auto res = run_dissemination(proxies, seq, cfg);
  std::size_t m1 = 0;
  for (const auto& p : proxies) m1 = std::max(m1, p.coeffs().size());
  const double delta = cfg.stop.delta(m1);
  CHECK(res.max_deviation() <= delta);
  for (std::size_t K : res.stop_rounds) {
    CHECK(K > cfg.privacy.K2);
    CHECK((K - cfg.privacy.K2) % cfg.stop.window == 0);
  }
  CHECK(res.trace.back().stopped);
  CHECK(res.rounds == *std::max_element(res.stop_rounds.begin(), res.stop_rounds.end()));

  // Geometric decay after K2.
  std::vector<double> xs, ys;
  for (const auto& row : res.trace) {
    if (row.round > cfg.privacy.K2 && row.max_ratio_error > 1e-11) {
      xs.push_back(static_cast<double>(row.round));
      ys.push_back(std::log10(row.max_ratio_error));
    }
  }
  const auto fit = linear_fit(xs, ys);
  CHECK(fit.slope < 0.0);
  CHECK(fit.r2 >= 0.95);

  SUBCASE("same seed gives identical traces") {
    const auto again = run_dissemination(proxies, seq, cfg);
    REQUIRE(again.trace.size() == res.trace.size());
    for (std::size_t k = 0; k < res.trace.size(); ++k) {
      CHECK(again.trace[k].max_ratio_error == res.trace[k].max_ratio_error);
      CHECK(again.trace[k].mass_residual == res.trace[k].mass_residual);
    }
    CHECK(again.estimates == res.estimates);
  }
}

TEST_CASE("mass ledger, weight conservation and positivity every round") {
  auto rng = gen::engine(51);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = gen::index(rng, 2, 15);
    const auto init = random_vectors(rng, n, 12);
    DisseminationConfig cfg;
    cfg.privacy.K1 = gen::index(rng, 1, 8);
    cfg.privacy.K2 = cfg.privacy.K1 + gen::index(rng, 1, 8);
    cfg.privacy.noise = NoiseSpec::uniform(gen::uniform(rng, 0.5, 5.0));
    cfg.stopping = false;
    cfg.fixed_rounds = cfg.privacy.K2 + 40;
    cfg.seed = trial;
    const double rate = gen::uniform(rng, 0.0, 0.6);

    std::vector<std::size_t> dims;
    std::size_t violations = 0;
    cfg.observer = [&](std::size_t t, std::span<const AgentState> states) {
      // Recompute the ledger from the agents' own schedules.
      std::size_t len = 0;
      for (const auto& a : states) len = std::max({len, a.x.size(), a.perturbed.size()});
      std::vector<double> want(len, 0.0), have(len, 0.0);
      double ysum = 0.0;
      for (const auto& a : states) {
        const std::size_t upto = std::accumulate(a.schedule.insert_counts.begin(),
                                                 a.schedule.insert_counts.begin() +
                                                     static_cast<std::ptrdiff_t>(std::min(t, a.schedule.insert_counts.size())),
                                                 std::size_t{0});
        for (std::size_t k = 0; k < upto; ++k) want[k] += a.perturbed[k];
        std::size_t done = 0;
        for (std::size_t r : a.schedule.subtraction_rounds) done += r <= t ? 1 : 0;
        for (std::size_t k = 0; k < a.noise.size(); ++k) want[k] -= done * a.subtraction_amount(k);
        for (std::size_t k = 0; k < a.x.size(); ++k) have[k] += a.x[k];
        ysum += a.y;
        if (!(a.y > 0.0)) ++violations;
      }
      for (std::size_t k = 0; k < len; ++k) {
        if (std::abs(have[k] - want[k]) > 1e-11 * (1 + std::abs(want[k]))) ++violations;
      }
      if (std::abs(ysum - static_cast<double>(n)) > 1e-12) ++violations;
      // Dimension of x never shrinks.
      if (dims.empty()) dims.assign(states.size(), 0);
      for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i].x.size() < dims[i]) ++violations;
        dims[i] = states[i].x.size();
      }
    };
    const auto res = run_dissemination(init, GraphSequence::ring_plus_random(n, trial, rate), cfg);
    CHECK(violations == 0);
    for (const auto& row : res.trace) {
      if (row.round >= cfg.privacy.K2) CHECK(row.mass_residual <= 1e-9);
      CHECK(row.weight_residual <= 1e-12);
    }
  }
}

TEST_CASE("max and min ratios are monotone after K2") {
  auto rng = gen::engine(61);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = gen::index(rng, 3, 20);
    const auto init = random_vectors(rng, n, 6);
    DisseminationConfig cfg;
    cfg.stopping = false;
    cfg.fixed_rounds = 80;
    cfg.seed = trial;
    std::vector<double> hi, lo;
    std::size_t violations = 0;
    cfg.observer = [&](std::size_t t, std::span<const AgentState> states) {
      if (t < cfg.privacy.K2) return;
      std::size_t len = 0;
      for (const auto& a : states) len = std::max(len, a.x.size());
      std::vector<double> mx(len, -INFINITY), mn(len, INFINITY);
      for (const auto& a : states) {
        const auto p = pad_to(a.ratio(), len);
        for (std::size_t k = 0; k < len; ++k) {
          mx[k] = std::max(mx[k], p[k]);
          mn[k] = std::min(mn[k], p[k]);
        }
      }
      // Slots some agent has not received yet read as zero, so the envelope
      // is only monotone once every agent carries the full vector.
      bool full = true;
      for (const auto& a : states) full = full && a.x.size() == len;
      if (full && hi.size() == len) {
        for (std::size_t k = 0; k < len; ++k) {
          if (mx[k] > hi[k] + 1e-12) ++violations;
          if (mn[k] < lo[k] - 1e-12) ++violations;
        }
      }
      if (full) {
        hi = mx;
        lo = mn;
      }
    };
    run_dissemination(init, GraphSequence::ring_plus_random(n, 100 + trial, 0.2), cfg);
    CHECK(violations == 0);
  }
}

TEST_CASE("stopping is sufficient whenever it fires") {
  auto rng = gen::engine(71);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = gen::index(rng, 2, 20);
    const auto init = random_vectors(rng, n, 10);
    const double rate = trial % 3 == 0 ? 0.0 : gen::uniform(rng, 0.0, 0.5);
    const auto seq = GraphSequence::ring_plus_random(n, 200 + trial, rate);
    const std::size_t B = measure_connectivity_window(seq, 0, 3000, 200);
    REQUIRE(B >= 1);
    DisseminationConfig cfg;
    cfg.stop.window = std::max<std::size_t>(1, (n - 1) * B);
    cfg.stop.epsilon2 = std::pow(10.0, -gen::uniform(rng, 3, 10));
    cfg.seed = trial;
    cfg.first_round = 0;
    const auto res = run_dissemination(init, seq, cfg);
    const auto avg = average(init);
    std::size_t dim = avg.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<std::vector<double>> one{res.estimates[i]};
      CHECK(max_inf_distance(one, avg) <= cfg.stop.delta(dim));
    }
  }
}

TEST_CASE("round cap raises with the trace attached") {
  const std::vector<std::vector<double>> init{{0.0}, {1.0}, {5.0}};
  DisseminationConfig cfg;
  cfg.max_rounds = 25;
  cfg.stop.window = 2;
  cfg.stop.epsilon2 = 1e-300;
  try {
    run_dissemination(init, GraphSequence::ring_plus_random(3, 1), cfg);
    FAIL("expected DisseminationNotConverged");
  } catch (const DisseminationNotConverged& e) {
    CHECK(e.trace().size() == 25);
  }
}

TEST_CASE("transmission log layout") {
  const std::vector<std::vector<double>> init{{1.0, 2.0}, {3.0, 4.0}};
  DisseminationConfig cfg;
  cfg.stopping = false;
  cfg.fixed_rounds = cfg.privacy.K2 + 1;
  cfg.record_transmissions = true;
  const auto res = run_dissemination(init, GraphSequence::ring_plus_random(2, 9), cfg);
  REQUIRE(res.transmissions);
  const auto& log = *res.transmissions;
  CHECK(log.sent.size() == cfg.fixed_rounds + 1);
  CHECK(log.graphs.size() == cfg.fixed_rounds + 1);
  CHECK(log.sent[0][0].empty());
  CHECK(log.graphs[5] == next_graph(GraphSequence::ring_plus_random(2, 9), 5));
}
