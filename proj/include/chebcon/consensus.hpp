// Privacy-preserving push-sum dissemination of coefficient vectors.
//
// Round t (t = 1, 2, ...) of run_dissemination does, for every agent:
//   t <= K1       insert the t-th block of the perturbed vector, transmit, mix
//   K1 < t <= K2  transmit, mix, subtract theta/L if t is a scheduled round
//   t > K2        transmit, mix, update max/min envelopes; every U rounds
//                 test ||r - s||_inf <= delta and reinitialise r = s = x/y
// Vectors of unequal length are mixed with missing slots read as zero.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "chebcon/cheb.hpp"
#include "chebcon/errors.hpp"
#include "chebcon/netsim.hpp"
#include "chebcon/noise.hpp"

namespace chebcon {

struct AgentSchedule {
  std::vector<std::size_t> insert_counts;       // d_i^1 .. d_i^K1
  std::size_t subtraction_count = 1;            // L_i
  std::vector<std::size_t> subtraction_rounds;  // sorted, L_i distinct rounds in (K1, K2]
};

struct AgentState {
  std::vector<double> x;  // push-sum numerator, grows during insertion
  double y = 1.0;
  std::vector<double> r;  // max envelope
  std::vector<double> s;  // min envelope
  std::vector<double> perturbed;  // p_i^0 + theta_i
  std::vector<double> noise;      // theta_i
  AgentSchedule schedule;
  std::size_t inserted_upto = 0;  // l_i^t
  std::size_t insert_round = 0;   // last insertion round applied
  std::size_t subtractions_done = 0;
  std::size_t noise_resamples = 0;

  std::vector<double> ratio() const;
  double subtraction_amount(std::size_t k) const {
    return noise[k] / static_cast<double>(schedule.subtraction_count);
  }
};

struct PrivacyParams {
  std::size_t K1 = 10;
  std::size_t K2 = 20;
  NoiseSpec noise = NoiseSpec::uniform(1.0);
  double alpha = 0.01;  // every |theta_i(k) / L_i| must exceed this
  std::size_t max_resamples = 10000;

  void validate() const;
};

// Draws theta_i, the insertion counts, L_i and the subtraction rounds.
AgentState make_agent(std::span<const double> coeffs, const PrivacyParams& params, std::mt19937_64& rng);

struct StopParams {
  std::size_t window = 1;  // U >= (N-1)B
  double epsilon2 = 1e-6;

  double delta(std::size_t dimension) const { return epsilon2 / static_cast<double>(dimension); }
};

// Max/min consensus on the local constraint intervals over `rounds` rounds.
// Throws InfeasibleConstraints when an agent ends with an empty intersection.
std::vector<Interval> max_consensus_interval(std::span<const Interval> local, const GraphSequence& seq,
                                             std::size_t rounds, std::size_t first_round = 0);

// x_i <- sum_j a_ij x_j, y_i <- sum_j a_ij y_j.
void push_sum_round(std::span<AgentState> states, const RoundGraph& g);

// Adds components l^{t-1}+1 .. l^t of the perturbed vector to x.
void insert_block(AgentState& state, std::size_t t);

// x(k) -= theta(k) / L for every component; t must be a scheduled round.
void subtract_noise(AgentState& state, std::size_t t);

// r = s = x / y for every agent.
void begin_stopping(std::span<AgentState> states);

// One post-K2 round: push-sum mixing plus max/min envelope updates.
// `elapsed` counts rounds since the last reinitialisation; when it reaches
// params.window the criterion is tested, envelopes are reset and the
// returned flags mark agents whose criterion held. Otherwise all false.
std::vector<bool> stopping_round(std::span<AgentState> states, const RoundGraph& g, const StopParams& params,
                                 std::size_t& elapsed);

struct TraceRow {
  std::size_t round = 0;
  double max_ratio_error = 0.0;  // max_i ||x_i / y_i - p_bar||_inf
  double mass_residual = 0.0;    // max_k |sum_i x_i(k) - expected(k)| / (1 + |expected(k)|)
  double weight_residual = 0.0;  // |sum_i y_i - N|
  bool stopped = false;
};

// Everything an eavesdropper could see: for each round t the graph and the
// vector x_i^{t+} every agent transmitted. Round 0 carries empty vectors.
struct TransmissionLog {
  std::size_t K1 = 0;
  std::size_t K2 = 0;
  std::vector<RoundGraph> graphs;
  std::vector<std::vector<std::vector<double>>> sent;
};

struct DisseminationConfig {
  PrivacyParams privacy;
  StopParams stop;
  std::uint64_t seed = 0;
  std::size_t max_rounds = 100000;
  bool stopping = true;
  std::size_t fixed_rounds = 0;  // total rounds when stopping is disabled
  std::size_t first_round = 0;   // round t uses next_graph(seq, first_round + t)
  bool record_transmissions = false;
  std::function<void(std::size_t, std::span<const AgentState>)> observer;
};

struct DisseminationResult {
  std::vector<std::vector<double>> estimates;  // p_i^K
  std::vector<std::size_t> stop_rounds;        // K per agent, 0 when stopping was off
  std::size_t rounds = 0;
  std::vector<double> average;                 // centralised reference p_bar
  std::vector<std::size_t> dimensions;         // m_i + 1
  std::vector<std::size_t> noise_resamples;
  std::vector<TraceRow> trace;
  std::optional<TransmissionLog> transmissions;

  // max_i ||p_i^K - p_bar||_inf
  double max_deviation() const;
};

class DisseminationNotConverged : public Error {
 public:
  DisseminationNotConverged(const std::string& what, std::vector<TraceRow> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<TraceRow>& trace() const noexcept { return trace_; }

 private:
  std::vector<TraceRow> trace_;
};

DisseminationResult run_dissemination(std::span<const std::vector<double>> initial, const GraphSequence& seq,
                                      const DisseminationConfig& config);

DisseminationResult run_dissemination(std::span<const ChebProxy> proxies, const GraphSequence& seq,
                                      const DisseminationConfig& config);

// max_i ||a_i - b||_inf with zero padding.
double max_inf_distance(std::span<const std::vector<double>> a, std::span<const double> b);

}  // namespace chebcon
