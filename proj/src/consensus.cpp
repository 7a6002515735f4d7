#include "chebcon/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "chebcon/random.hpp"

namespace chebcon {

std::vector<double> AgentState::ratio() const {
  std::vector<double> p(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) p[k] = x[k] / y;
  return p;
}

void PrivacyParams::validate() const {
  if (K1 < 1) throw ConfigError("K1 must be at least 1");
  if (K2 <= K1) throw ConfigError("K2 must exceed K1");
  if (alpha < 0.0) throw ConfigError("alpha must be nonnegative");
  noise.validate();
}

AgentState make_agent(std::span<const double> coeffs, const PrivacyParams& params, std::mt19937_64& rng) {
  params.validate();
  if (coeffs.empty()) throw Error("an agent needs a nonempty coefficient vector");
  const std::size_t dim = coeffs.size();
  AgentState st;

  // A component with |theta| <= alpha cannot satisfy |theta / L| > alpha
  // for any L >= 1, so it is redrawn.
  st.noise.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    std::size_t tries = 0;
    double v = params.noise.sample(rng);
    while (!(std::abs(v) > params.alpha)) {
      if (++tries > params.max_resamples) {
        throw ConfigError("noise draws never exceed alpha = " + std::to_string(params.alpha) +
                          "; increase the noise scale or lower alpha");
      }
      v = params.noise.sample(rng);
    }
    st.noise[k] = v;
    st.noise_resamples += tries;
  }

  const std::size_t span = params.K2 - params.K1;
  std::uniform_int_distribution<std::size_t> pick_l(1, span);
  double min_abs = std::abs(st.noise[0]);
  for (double v : st.noise) min_abs = std::min(min_abs, std::abs(v));
  std::size_t L = pick_l(rng);
  while (!(min_abs / static_cast<double>(L) > params.alpha)) L = pick_l(rng);
  st.schedule.subtraction_count = L;

  st.schedule.insert_counts.assign(params.K1, 0);
  std::uniform_int_distribution<std::size_t> pick_round(0, params.K1 - 1);
  for (std::size_t k = 0; k < dim; ++k) ++st.schedule.insert_counts[pick_round(rng)];

  std::vector<std::size_t> rounds(span);
  std::iota(rounds.begin(), rounds.end(), params.K1 + 1);
  std::shuffle(rounds.begin(), rounds.end(), rng);
  rounds.resize(L);
  std::sort(rounds.begin(), rounds.end());
  st.schedule.subtraction_rounds = std::move(rounds);

  st.perturbed.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) st.perturbed[k] = coeffs[k] + st.noise[k];
  return st;
}

std::vector<Interval> max_consensus_interval(std::span<const Interval> local, const GraphSequence& seq,
                                             std::size_t rounds, std::size_t first_round) {
  const std::size_t n = local.size();
  if (n != seq.n) throw Error("interval count does not match the number of agents");
  std::vector<double> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = local[i].lo();
    hi[i] = local[i].hi();
  }
  for (std::size_t t = 0; t < rounds; ++t) {
    const RoundGraph g = next_graph(seq, first_round + t);
    std::vector<double> nlo(n), nhi(n);
    for (std::size_t i = 0; i < n; ++i) {
      nlo[i] = lo[i];
      nhi[i] = hi[i];
      for (std::size_t j : g.in_neighbors(i)) {
        nlo[i] = std::max(nlo[i], lo[j]);
        nhi[i] = std::min(nhi[i], hi[j]);
      }
    }
    lo = std::move(nlo);
    hi = std::move(nhi);
  }
  std::vector<Interval> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lo[i] < hi[i])) {
      throw InfeasibleConstraints("local constraint sets have an empty intersection [" + std::to_string(lo[i]) +
                                  ", " + std::to_string(hi[i]) + "]");
    }
    out.emplace_back(lo[i], hi[i]);
  }
  return out;
}

void push_sum_round(std::span<AgentState> states, const RoundGraph& g) {
  const std::size_t n = states.size();
  if (g.size() != n) throw Error("graph size does not match the number of agents");
  std::vector<std::vector<double>> nx(n);
  std::vector<double> ny(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t len = 0;
    for (std::size_t j : g.in_neighbors(i)) len = std::max(len, states[j].x.size());
    nx[i].assign(len, 0.0);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double w = 1.0 / static_cast<double>(g.out_degree(j));
    const auto& xj = states[j].x;
    for (std::size_t i : g.out_neighbors(j)) {
      for (std::size_t k = 0; k < xj.size(); ++k) nx[i][k] += w * xj[k];
      ny[i] += w * states[j].y;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    states[i].x = std::move(nx[i]);
    states[i].y = ny[i];
  }
}

void insert_block(AgentState& state, std::size_t t) {
  const auto& counts = state.schedule.insert_counts;
  if (t < 1 || t > counts.size()) {
    throw ProtocolOrder("insertion at round " + std::to_string(t) + " is outside the insertion phase [1, " +
                        std::to_string(counts.size()) + "]");
  }
  if (t <= state.insert_round) throw ProtocolOrder("insertion round " + std::to_string(t) + " already applied");
  const std::size_t upto = std::accumulate(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(t),
                                           std::size_t{0});
  if (state.x.size() < upto) state.x.resize(upto, 0.0);
  for (std::size_t k = state.inserted_upto; k < upto; ++k) state.x[k] += state.perturbed[k];
  state.inserted_upto = upto;
  state.insert_round = t;
}

void subtract_noise(AgentState& state, std::size_t t) {
  const auto& rounds = state.schedule.subtraction_rounds;
  if (state.subtractions_done >= state.schedule.subtraction_count) {
    throw ProtocolOrder("noise already subtracted " + std::to_string(state.subtractions_done) + " times");
  }
  if (!std::binary_search(rounds.begin(), rounds.end(), t)) {
    throw ProtocolOrder("round " + std::to_string(t) + " is not a scheduled subtraction round");
  }
  if (state.x.size() < state.noise.size()) state.x.resize(state.noise.size(), 0.0);
  for (std::size_t k = 0; k < state.noise.size(); ++k) state.x[k] -= state.subtraction_amount(k);
  ++state.subtractions_done;
}

void begin_stopping(std::span<AgentState> states) {
  for (auto& st : states) {
    st.r = st.ratio();
    st.s = st.r;
  }
}

std::vector<bool> stopping_round(std::span<AgentState> states, const RoundGraph& g, const StopParams& params,
                                 std::size_t& elapsed) {
  if (params.window < 1) throw ConfigError("stopping window U must be at least 1");
  const std::size_t n = states.size();

  // Missing slots are zero: a null component of x means a zero ratio.
  std::vector<std::vector<double>> nr(n), ns(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t len = 0;
    for (std::size_t j : g.in_neighbors(i)) len = std::max({len, states[j].r.size(), states[j].s.size()});
    std::vector<double> r(len), s(len);
    bool first = true;
    for (std::size_t j : g.in_neighbors(i)) {
      const auto rj = pad_to(states[j].r, len);
      const auto sj = pad_to(states[j].s, len);
      for (std::size_t k = 0; k < len; ++k) {
        r[k] = first ? rj[k] : std::max(r[k], rj[k]);
        s[k] = first ? sj[k] : std::min(s[k], sj[k]);
      }
      first = false;
    }
    nr[i] = std::move(r);
    ns[i] = std::move(s);
  }
  push_sum_round(states, g);
  for (std::size_t i = 0; i < n; ++i) {
    states[i].r = std::move(nr[i]);
    states[i].s = std::move(ns[i]);
  }

  std::vector<bool> converged(n, false);
  if (++elapsed < params.window) return converged;
  elapsed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& st = states[i];
    const std::size_t len = std::max(st.r.size(), st.s.size());
    double gap = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const double rk = k < st.r.size() ? st.r[k] : 0.0;
      const double sk = k < st.s.size() ? st.s[k] : 0.0;
      gap = std::max(gap, rk - sk);
    }
    converged[i] = gap <= params.delta(std::max<std::size_t>(st.x.size(), 1));
  }
  begin_stopping(states);
  return converged;
}

double max_inf_distance(std::span<const std::vector<double>> a, std::span<const double> b) {
  double worst = 0.0;
  for (const auto& v : a) {
    const std::size_t len = std::max(v.size(), b.size());
    for (std::size_t k = 0; k < len; ++k) {
      const double vk = k < v.size() ? v[k] : 0.0;
      const double bk = k < b.size() ? b[k] : 0.0;
      worst = std::max(worst, std::abs(vk - bk));
    }
  }
  return worst;
}

double DisseminationResult::max_deviation() const { return max_inf_distance(estimates, average); }

namespace {

double relative_mass_residual(std::span<const AgentState> states, std::span<const double> expected) {
  std::size_t len = expected.size();
  for (const auto& st : states) len = std::max(len, st.x.size());
  std::vector<double> total(len, 0.0);
  for (const auto& st : states)
    for (std::size_t k = 0; k < st.x.size(); ++k) total[k] += st.x[k];
  double worst = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    const double e = k < expected.size() ? expected[k] : 0.0;
    worst = std::max(worst, std::abs(total[k] - e) / (1.0 + std::abs(e)));
  }
  return worst;
}

}  // namespace

DisseminationResult run_dissemination(std::span<const std::vector<double>> initial, const GraphSequence& seq,
                                      const DisseminationConfig& config) {
  const auto& pp = config.privacy;
  pp.validate();
  const std::size_t n = initial.size();
  if (n == 0) throw Error("dissemination needs at least one agent");
  if (seq.n != n) throw Error("graph sequence size does not match the number of agents");
  if (config.stopping && config.stop.window < 1) throw ConfigError("stopping window U must be at least 1");
  if (!config.stopping && config.fixed_rounds == 0) throw ConfigError("fixed_rounds must be positive without stopping");

  DisseminationResult result;
  std::size_t dim = 0;
  for (const auto& v : initial) dim = std::max(dim, v.size());
  result.average.assign(dim, 0.0);
  std::vector<double> target(dim, 0.0);
  for (const auto& v : initial) {
    for (std::size_t k = 0; k < v.size(); ++k) target[k] += v[k];
    result.dimensions.push_back(v.size());
  }
  for (std::size_t k = 0; k < dim; ++k) result.average[k] = target[k] / static_cast<double>(n);

  std::vector<AgentState> states;
  states.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = make_engine({config.seed, i, tag(Stream::Agent)});
    states.push_back(make_agent(initial[i], pp, rng));
    result.noise_resamples.push_back(states.back().noise_resamples);
  }

  if (config.record_transmissions) {
    TransmissionLog log;
    log.K1 = pp.K1;
    log.K2 = pp.K2;
    log.graphs.push_back(next_graph(seq, config.first_round));
    log.sent.emplace_back(n);
    result.transmissions = std::move(log);
  }

  // Expected column sums of x: inserted perturbed mass minus subtracted noise.
  std::vector<double> ledger(dim, 0.0);
  std::vector<bool> stopped(n, false);
  result.stop_rounds.assign(n, 0);
  result.estimates.assign(n, {});
  std::size_t elapsed = 0;
  const double nd = static_cast<double>(n);

  for (std::size_t t = 1;; ++t) {
    const RoundGraph g = next_graph(seq, config.first_round + t);

    if (t <= pp.K1) {
      for (auto& st : states) {
        const std::size_t before = st.inserted_upto;
        insert_block(st, t);
        for (std::size_t k = before; k < st.inserted_upto; ++k) ledger[k] += st.perturbed[k];
      }
    }
    if (result.transmissions) {
      result.transmissions->graphs.push_back(g);
      auto& row = result.transmissions->sent.emplace_back();
      for (const auto& st : states) row.push_back(st.x);
    }

    std::vector<bool> fired;
    if (t > pp.K2 && config.stopping) {
      fired = stopping_round(states, g, config.stop, elapsed);
    } else {
      push_sum_round(states, g);
    }

    if (t > pp.K1 && t <= pp.K2) {
      for (auto& st : states) {
        const auto& rounds = st.schedule.subtraction_rounds;
        if (std::binary_search(rounds.begin(), rounds.end(), t)) {
          subtract_noise(st, t);
          for (std::size_t k = 0; k < st.noise.size(); ++k) ledger[k] -= st.subtraction_amount(k);
        }
      }
    }
    if (t == pp.K2) {
      ledger = target;
      if (config.stopping) begin_stopping(states);
    }

    for (std::size_t i = 0; i < fired.size(); ++i) {
      if (fired[i] && !stopped[i]) {
        stopped[i] = true;
        result.stop_rounds[i] = t;
        result.estimates[i] = states[i].ratio();
      }
    }

    TraceRow row;
    row.round = t;
    std::vector<std::vector<double>> ratios;
    ratios.reserve(n);
    for (const auto& st : states) ratios.push_back(st.ratio());
    row.max_ratio_error = max_inf_distance(ratios, result.average);
    row.mass_residual = relative_mass_residual(states, ledger);
    double ysum = 0.0;
    for (const auto& st : states) ysum += st.y;
    row.weight_residual = std::abs(ysum - nd);
    row.stopped = std::all_of(stopped.begin(), stopped.end(), [](bool b) { return b; });
    result.trace.push_back(row);
    result.rounds = t;

    if (config.observer) config.observer(t, states);

    if (config.stopping) {
      if (row.stopped) break;
      if (t >= config.max_rounds) {
        throw DisseminationNotConverged(
            "dissemination did not stop within " + std::to_string(config.max_rounds) + " rounds",
            std::move(result.trace));
      }
    } else if (t >= config.fixed_rounds) {
      for (std::size_t i = 0; i < n; ++i) result.estimates[i] = states[i].ratio();
      break;
    }
  }
  return result;
}

DisseminationResult run_dissemination(std::span<const ChebProxy> proxies, const GraphSequence& seq,
                                      const DisseminationConfig& config) {
  std::vector<std::vector<double>> initial;
  initial.reserve(proxies.size());
  for (const auto& p : proxies) initial.push_back(p.coeffs());
  return run_dissemination(initial, seq, config);
}

}  // namespace chebcon
