#include "chebcon/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "chebcon/random.hpp"

namespace chebcon {

DegreePrior DegreePrior::point_mass(std::size_t m) { return {{m}, {1.0}}; }

DegreePrior DegreePrior::doubling_uniform(std::size_t m) {
  DegreePrior prior;
  for (std::size_t d = 2; d <= m; d *= 2) prior.support.push_back(d);
  if (prior.support.empty() || prior.support.back() != m) prior.support.push_back(m);
  prior.weights.assign(prior.support.size(), 1.0 / static_cast<double>(prior.support.size()));
  return prior;
}

void DegreePrior::validate() const {
  if (support.empty() || support.size() != weights.size()) throw ConfigError("degree prior is empty or ragged");
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] < 0.0) throw ConfigError("degree prior has a negative weight");
    if (k > 0 && support[k] <= support[k - 1]) throw ConfigError("degree prior support must be increasing");
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("degree prior weights must sum to 1");
}

double DegreePrior::cdf(long long k) const {
  if (k < 0) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (static_cast<long long>(support[j]) <= k) total += weights[j];
  }
  return std::min(total, 1.0);
}

void AdversaryModel::validate() const {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("adversary p must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("adversary gamma must lie in (0, 1)");
  prior.validate();
}

double h_i(double alpha_k, const NoiseSpec& noise, const AdversaryModel& adv) {
  if (alpha_k < 0.0) throw Error("accuracy alpha_k must be nonnegative");
  noise.validate();
  return std::min(1.0, adv.p * noise.max_window_mass(alpha_k) + adv.gamma);
}

double beta_k(double alpha_k, const NoiseSpec& noise, const AdversaryModel& adv, std::size_t K1, std::size_t K2) {
  if (K2 <= K1) throw ConfigError("K2 must exceed K1");
  const double extreme = std::pow(adv.p, static_cast<double>(K2 - K1 + 1));
  return (1.0 - extreme) * h_i(alpha_k, noise, adv) + extreme;
}

double beta_total(double alpha, std::span<const double> alpha_split, std::size_t m_i, std::size_t m,
                  const NoiseSpec& noise, const AdversaryModel& adv, std::size_t K1, std::size_t K2) {
  if (m_i > m) throw InvalidSplit("agent degree exceeds the global degree");
  if (alpha_split.size() != m_i + 1) {
    throw InvalidSplit("accuracy split has " + std::to_string(alpha_split.size()) + " entries, expected " +
                       std::to_string(m_i + 1));
  }
  double total = 0.0;
  for (double a : alpha_split) {
    if (!(a >= 0.0 && a <= alpha)) throw InvalidSplit("every alpha_k must lie in [0, alpha]");
    total += a;
  }
  if (std::abs(total - alpha) > 1e-9 * std::max(1.0, std::abs(alpha))) {
    throw InvalidSplit("accuracy split sums to " + std::to_string(total) + ", not alpha = " + std::to_string(alpha));
  }
  double beta = 1.0;
  for (double a : alpha_split) beta *= beta_k(a, noise, adv, K1, K2);
  for (std::size_t k = m_i + 2; k <= m + 1; ++k) beta *= adv.prior.cdf(static_cast<long long>(k) - 2);
  return beta;
}

std::string gamma_warning(double alpha_k, const NoiseSpec& noise, const AdversaryModel& adv) {
  const double scale = adv.p * noise.max_window_mass(alpha_k);
  if (adv.gamma > 0.01 * scale) {
    return "gamma = " + std::to_string(adv.gamma) + " is not small next to p * window mass = " +
           std::to_string(scale) + " at alpha_k = " + std::to_string(alpha_k);
  }
  return {};
}

PrivacyReport privacy_report(double alpha, std::size_t m_i, std::size_t m, const NoiseSpec& noise,
                             const AdversaryModel& adv, std::size_t K1, std::size_t K2) {
  PrivacyReport rep;
  rep.family = noise.family;
  rep.alpha = alpha;
  rep.alpha_k.assign(m_i + 1, alpha / static_cast<double>(m_i + 1));
  for (double a : rep.alpha_k) rep.beta_k.push_back(beta_k(a, noise, adv, K1, K2));
  rep.beta = beta_total(alpha, rep.alpha_k, m_i, m, noise, adv, K1, K2);
  if (auto w = gamma_warning(rep.alpha_k.front(), noise, adv); !w.empty()) rep.warnings.push_back(std::move(w));
  return rep;
}

namespace {

double at(const std::vector<double>& v, std::size_t k) { return k < v.size() ? v[k] : 0.0; }

// sum_j a_ij x_j over the round's graph, per slot.
std::vector<double> mixed(const RoundGraph& g, const std::vector<std::vector<double>>& sent, std::size_t i,
                          std::size_t len) {
  std::vector<double> out(len, 0.0);
  for (std::size_t j : g.in_neighbors(i)) {
    const double w = 1.0 / static_cast<double>(g.out_degree(j));
    for (std::size_t k = 0; k < len; ++k) out[k] += w * at(sent[j], k);
  }
  return out;
}

}  // namespace

AdversaryOutcome empirical_adversary(const TransmissionLog& log, std::size_t target, std::span<const double> truth,
                                     std::span<const double> alpha_k, const NoiseSpec& noise,
                                     const AdversaryModel& adv, std::mt19937_64& rng) {
  const std::size_t K1 = log.K1;
  const std::size_t K2 = log.K2;
  if (log.sent.size() < K2 + 2 || log.graphs.size() < K2 + 2) {
    throw Error("transmission log must cover rounds 0.." + std::to_string(K2 + 1));
  }
  if (target >= log.graphs.front().size()) throw Error("target agent out of range");

  std::size_t len = truth.size();
  for (const auto& row : log.sent)
    for (const auto& v : row) len = std::max(len, v.size());
  if (alpha_k.size() < len) throw Error("need one accuracy per observed slot");

  std::bernoulli_distribution knows(adv.p);
  std::vector<char> known(K2 + 1);
  for (auto& k : known) k = knows(rng) ? 1 : 0;

  // Insertion differences: nonzero exactly at the round the slot entered.
  std::vector<double> perturbed(len, 0.0);
  std::vector<std::size_t> inserted_at(len, 0);
  std::vector<std::size_t> empty_rounds(len, 0);
  for (std::size_t t = 1; t <= K1; ++t) {
    if (!known[t - 1]) continue;
    const auto base = mixed(log.graphs[t - 1], log.sent[t - 1], target, len);
    for (std::size_t k = 0; k < len; ++k) {
      const double own = at(log.sent[t][target], k);
      const double diff = own - base[k];
      if (std::abs(diff) > 1e-9 * (1.0 + std::abs(own))) {
        perturbed[k] = diff;
        inserted_at[k] = t;
      } else {
        ++empty_rounds[k];
      }
    }
  }

  bool all_subtractions = true;
  std::vector<double> removed(len, 0.0);
  for (std::size_t t = K1 + 1; t <= K2; ++t) {
    if (!known[t]) {
      all_subtractions = false;
      continue;
    }
    const auto before = mixed(log.graphs[t], log.sent[t], target, len);
    for (std::size_t k = 0; k < len; ++k) removed[k] += before[k] - at(log.sent[t + 1][target], k);
  }

  AdversaryOutcome out;
  out.estimate.assign(len, 0.0);
  out.cases.assign(len, AdversaryCase::Guess);
  out.hits.assign(len, false);
  double l1 = 0.0;
  double alpha = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    if (inserted_at[k] != 0 && all_subtractions) {
      out.cases[k] = AdversaryCase::Exact;
      out.estimate[k] = perturbed[k] - removed[k];
    } else if (inserted_at[k] != 0) {
      out.cases[k] = AdversaryCase::Perturbed;
      out.estimate[k] = perturbed[k] - noise.location;
    } else if (empty_rounds[k] == K1) {
      out.cases[k] = AdversaryCase::Null;
      out.estimate[k] = 0.0;
    } else {
      // A window of width 2 alpha_k / gamma around zero.
      const double half = alpha_k[k] / adv.gamma;
      if (half > 0.0) {
        std::uniform_real_distribution<double> guess(-half, half);
        out.estimate[k] = guess(rng);
      }
    }
    const double err = std::abs(out.estimate[k] - (k < truth.size() ? truth[k] : 0.0));
    out.hits[k] = err <= alpha_k[k];
    l1 += err;
    alpha += alpha_k[k];
  }
  out.l1_hit = l1 <= alpha;
  return out;
}

double DisclosureCell::sigma(std::size_t) const {
  return std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(trials));
}

double DisclosureCell::worst_excess() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < empirical.size(); ++k) {
    const double s = std::max(sigma(k), 1e-300);
    worst = std::max(worst, (empirical[k] - analytic) / s);
  }
  return worst;
}

std::vector<DisclosureCell> monte_carlo_disclosure(const DisclosureOptions& opts, std::span<const double> ps,
                                                   std::span<const double> alphas) {
  if (ps.empty() || alphas.empty()) throw ConfigError("disclosure grid is empty");
  if (opts.trials == 0 || opts.agents < 2 || opts.dimension < 1) throw ConfigError("invalid disclosure options");

  std::vector<DisclosureCell> cells;
  for (double p : ps) {
    for (double a : alphas) {
      AdversaryModel adv{p, opts.gamma, DegreePrior::point_mass(opts.dimension - 1)};
      adv.validate();
      DisclosureCell c;
      c.p = p;
      c.alpha_k = a;
      c.analytic = beta_k(a, opts.noise, adv, opts.K1, opts.K2);
      c.empirical.assign(opts.dimension, 0.0);
      c.trials = opts.trials;
      cells.push_back(std::move(c));
    }
  }

  DisseminationConfig cfg;
  cfg.privacy.K1 = opts.K1;
  cfg.privacy.K2 = opts.K2;
  cfg.privacy.noise = opts.noise;
  cfg.privacy.alpha = opts.privacy_alpha;
  cfg.stopping = false;
  cfg.fixed_rounds = opts.K2 + 1;
  cfg.record_transmissions = true;

  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    auto secrets_rng = make_engine({opts.seed, trial, tag(Stream::Trial)});
    std::uniform_real_distribution<double> magnitude(1.5, 4.0);
    std::bernoulli_distribution sign(0.5);
    std::vector<std::vector<double>> secrets(opts.agents, std::vector<double>(opts.dimension));
    for (auto& v : secrets)
      for (auto& c : v) c = (sign(secrets_rng) ? 1.0 : -1.0) * magnitude(secrets_rng);

    const auto seq = GraphSequence::ring_plus_random(opts.agents, opts.seed ^ (trial * 0x9E3779B97F4A7C15ULL));
    cfg.seed = opts.seed + trial;
    const auto res = run_dissemination(secrets, seq, cfg);

    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
      AdversaryModel adv{ps[pi], opts.gamma, DegreePrior::point_mass(opts.dimension - 1)};
      auto rng = make_engine({opts.seed, trial, tag(Stream::Knowledge), pi});
      // One knowledge draw per (trial, p): replay it for every alpha_k.
      const auto state = rng;
      for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        auto replay = state;
        std::vector<double> acc(opts.dimension, alphas[ai]);
        const auto out = empirical_adversary(*res.transmissions, 0, secrets[0], acc, opts.noise, adv, replay);
        auto& cell = cells[pi * alphas.size() + ai];
        for (std::size_t k = 0; k < opts.dimension; ++k) cell.empirical[k] += out.hits[k] ? 1.0 : 0.0;
      }
    }
  }
  for (auto& c : cells)
    for (auto& e : c.empirical) e /= static_cast<double>(c.trials);
  return cells;
}

}  // namespace chebcon
