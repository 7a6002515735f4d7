// End-to-end runs, the brute-force oracle and the experiment scenarios.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chebcon/cheb.hpp"
#include "chebcon/consensus.hpp"
#include "chebcon/netsim.hpp"
#include "chebcon/noise.hpp"
#include "chebcon/privacy.hpp"

namespace chebcon {

// f(x) = a / (1 + e^-x) + b log(1 + x^2)
struct Objective {
  double a = 10.0;
  double b = 5.0;

  double operator()(double x) const;
};

// a ~ N(10, variance 2), b ~ N(5, 1).
std::vector<Objective> draw_objectives(std::size_t n, std::uint64_t seed);

struct ScenarioConfig {
  std::size_t N = 20;
  GraphKind graph = GraphKind::RingPlusRandom;
  std::optional<std::uint64_t> graph_seed;  // defaults to seed
  double failure_rate = 0.0;
  std::size_t connectivity_window = 1;  // B
  std::size_t U = 0;                    // 0: (N-1) B
  std::vector<Objective> objectives;    // empty: drawn from seed
  std::vector<Interval> constraints;    // empty: [-1, 1] for every agent
  double epsilon = 1e-6;
  std::size_t K1 = 10;
  std::size_t K2 = 20;
  NoiseSpec noise = NoiseSpec::uniform(1.0);
  double alpha = 0.01;
  AdversaryModel adversary;
  std::uint64_t seed = 0;
  std::size_t oracle_grid = 1'000'000;
  std::size_t max_rounds = 100000;

  void validate() const;
  double eps1() const { return epsilon / 3.0; }
  double eps2() const { return epsilon / 3.0; }
  double eps3() const { return epsilon / 3.0; }
  std::size_t stop_window() const;
  GraphSequence graph_sequence() const;
  std::vector<Objective> resolved_objectives() const;
  std::vector<Interval> resolved_constraints() const;
};

ScenarioConfig default_scenario();

struct Optimum {
  double value = 0.0;
  double x = 0.0;
};

// Uniform grid of `grid` points, then golden-section search to a 1e-12
// bracket around the best grid cell.
Optimum brute_force_optimum(const std::function<double(double)>& f, const Interval& interval,
                            std::size_t grid = 1'000'000);

struct AgentReport {
  double f_e_star = 0.0;
  double x_p_star = 0.0;
  double certified_gap = 0.0;
  bool grid_fallback = false;
  std::size_t degree = 0;       // m_i
  std::size_t evaluations = 0;  // local objective evaluations
  std::size_t stop_round = 0;   // K_i
  double error = 0.0;           // |f_e* - f*|
  Interval interval;
  std::vector<double> estimate;  // p_i^K
};

struct RunReport {
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  Interval interval;
  std::vector<AgentReport> agents;
  std::size_t global_degree = 0;  // m
  std::size_t stop_window = 0;    // U
  std::size_t rounds = 0;         // dissemination rounds until every agent stopped
  std::size_t communication_rounds = 0;  // interval consensus plus dissemination
  double delta = 0.0;
  double max_deviation = 0.0;  // max_i ||p_i^K - p_bar||_inf
  std::vector<TraceRow> trace;
  double f_star = 0.0;
  double x_f_star = 0.0;
  double max_error = 0.0;
  std::vector<std::size_t> noise_resamples;
};

RunReport run_prcpoa(const ScenarioConfig& cfg);

struct ConvergenceRow {
  double epsilon = 0.0;
  std::size_t K = 0;
  double error = 0.0;
  std::size_t global_degree = 0;
  std::size_t communication_rounds = 0;
  std::size_t max_evaluations = 0;
};

// epsilon values must be strictly decreasing.
std::vector<ConvergenceRow> scenario_convergence(const ScenarioConfig& cfg, std::span<const double> epsilons,
                                                 std::vector<RunReport>* reports = nullptr);

struct PrivacyRow {
  NoiseFamily family = NoiseFamily::Uniform;
  double alpha_k = 0.0;
  double analytic = 0.0;
  double empirical = 0.0;  // worst component; negative when no trials were run
  std::size_t trials = 0;
};

// Unit-variance member of each family; empirical rates when trials > 0.
std::vector<PrivacyRow> scenario_privacy(const ScenarioConfig& cfg, std::span<const double> alphas,
                                         std::span<const NoiseFamily> families, std::size_t trials);

struct RobustnessRow {
  double rate = 0.0;
  std::size_t window = 0;  // measured B
  std::size_t stop_window = 0;
  double mean_rounds = 0.0;  // rounds after K2 until max error <= delta
  std::size_t runs = 0;
  std::size_t failures = 0;  // runs that did not stop within the round cap
  std::vector<std::size_t> rounds;
};

std::vector<RobustnessRow> scenario_robustness(const ScenarioConfig& cfg, std::span<const double> rates,
                                               std::size_t seeds = 10);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys);

struct ComplexitySummary {
  std::vector<double> epsilons;
  std::vector<std::size_t> degrees;
  std::vector<std::size_t> evaluations;  // worst agent per run
  std::vector<std::size_t> rounds;
  double evaluation_constant = 0.0;  // max over runs of evaluations / m
  bool evaluation_bound_holds = true;  // evaluations <= 2 (2 m_i) + 1 for every agent
  LinearFit rounds_vs_log_inv_eps;
  LinearFit rounds_vs_log_m_over_eps;
};

ComplexitySummary complexity_report(std::span<const RunReport> reports);

// Geometric decay check with stopping disabled: log10 of the seed-averaged
// max ratio error over rounds K2+1.. while it stays above `floor`.
struct DecayFit {
  double rate = 0.0;
  LinearFit fit;
  std::size_t points = 0;
};

DecayFit consensus_decay(const ScenarioConfig& cfg, double failure_rate, std::size_t seeds, std::size_t rounds,
                         double floor = 1e-11);

// Runs fn(0..n-1), at most CHEBCON_THREADS at a time. Rethrows the first
// exception.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace chebcon
