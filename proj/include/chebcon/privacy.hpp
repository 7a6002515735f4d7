// Analytical disclosure bounds for the dissemination protocol and an
// honest-but-curious adversary replayed against recorded transmissions.
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "chebcon/consensus.hpp"
#include "chebcon/noise.hpp"

namespace chebcon {

// Adversary's belief about a target's degree m_i.
struct DegreePrior {
  std::vector<std::size_t> support;  // increasing
  std::vector<double> weights;

  static DegreePrior point_mass(std::size_t m);
  // Uniform over {2, 4, 8, ...} <= m, with m itself included.
  static DegreePrior doubling_uniform(std::size_t m);

  void validate() const;
  // Pr{m_i <= k}; zero for negative k.
  double cdf(long long k) const;
};

struct AdversaryModel {
  double p = 0.8;       // per-round probability of full in-neighbor knowledge
  double gamma = 1e-5;  // success bound of an uninformed guess
  DegreePrior prior = DegreePrior::point_mass(20);

  void validate() const;
};

double h_i(double alpha_k, const NoiseSpec& noise, const AdversaryModel& adv);

double beta_k(double alpha_k, const NoiseSpec& noise, const AdversaryModel& adv, std::size_t K1, std::size_t K2);

// Product of the m_i+1 component bounds times the probabilities of
// identifying each of the m - m_i null slots. alpha_split must have length
// m_i+1, entries in [0, alpha] and sum alpha (relative tolerance 1e-9).
double beta_total(double alpha, std::span<const double> alpha_split, std::size_t m_i, std::size_t m,
                  const NoiseSpec& noise, const AdversaryModel& adv, std::size_t K1, std::size_t K2);

struct PrivacyReport {
  NoiseFamily family = NoiseFamily::Uniform;
  std::vector<double> alpha_k;
  std::vector<double> beta_k;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::string> warnings;
};

// Equal split of alpha over the m_i+1 components.
PrivacyReport privacy_report(double alpha, std::size_t m_i, std::size_t m, const NoiseSpec& noise,
                             const AdversaryModel& adv, std::size_t K1, std::size_t K2);

// Empty when gamma is small next to p times the noise window mass.
std::string gamma_warning(double alpha_k, const NoiseSpec& noise, const AdversaryModel& adv);

enum class AdversaryCase {
  Exact,      // perturbed value and every subtraction observed
  Perturbed,  // perturbed value observed, noise guessed at its mode
  Null,       // every insertion round observed empty for this slot
  Guess,      // nothing observed; uniform guess over a wide window
};

struct AdversaryOutcome {
  std::vector<double> estimate;
  std::vector<AdversaryCase> cases;
  std::vector<bool> hits;  // |estimate(k) - truth(k)| <= alpha_k(k)
  bool l1_hit = false;     // ||estimate - truth||_1 <= sum alpha_k
};

// Replays the adversary against `target`. Round t's in-neighbor knowledge
// is available independently with probability adv.p, t = 0..K2. truth is
// the target's unperturbed vector; alpha_k gives one accuracy per slot of
// the estimate, which covers every slot seen in the log.
AdversaryOutcome empirical_adversary(const TransmissionLog& log, std::size_t target, std::span<const double> truth,
                                     std::span<const double> alpha_k, const NoiseSpec& noise,
                                     const AdversaryModel& adv, std::mt19937_64& rng);

struct DisclosureCell {
  double p = 0.0;
  double alpha_k = 0.0;
  double analytic = 0.0;
  std::vector<double> empirical;  // hit rate per component
  std::size_t trials = 0;

  double sigma(std::size_t k) const;
  double worst_excess() const;  // max_k (empirical - analytic) / sigma
};

struct DisclosureOptions {
  std::size_t agents = 20;
  std::size_t dimension = 4;
  std::size_t trials = 10000;
  std::size_t K1 = 10;
  std::size_t K2 = 20;
  NoiseSpec noise = NoiseSpec::uniform(1.0);
  double privacy_alpha = 0.01;
  double gamma = 1e-5;
  std::uint64_t seed = 0;
};

// One cell per (p, alpha_k) pair. Every trial is one dissemination run whose
// log is attacked once per p value.
std::vector<DisclosureCell> monte_carlo_disclosure(const DisclosureOptions& opts, std::span<const double> ps,
                                                   std::span<const double> alphas);

}  // namespace chebcon
