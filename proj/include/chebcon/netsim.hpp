// Seeded time-varying directed graphs for the dissemination simulator.
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace chebcon {

// (from, to): `to` receives what `from` transmits in this round.
struct Edge {
  std::size_t from;
  std::size_t to;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// One round's communication graph. Self-loops are always present.
class RoundGraph {
 public:
  RoundGraph(std::size_t n, std::vector<Edge> edges);

  std::size_t size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  bool has_edge(std::size_t from, std::size_t to) const;

  std::size_t out_degree(std::size_t i) const { return out_[i].size(); }
  const std::vector<std::size_t>& out_neighbors(std::size_t i) const { return out_[i]; }
  const std::vector<std::size_t>& in_neighbors(std::size_t i) const { return in_[i]; }

  friend bool operator==(const RoundGraph& a, const RoundGraph& b) { return a.n_ == b.n_ && a.edges_ == b.edges_; }

 private:
  std::size_t n_;
  std::vector<Edge> edges_;  // sorted, unique
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

enum class GraphKind {
  RingPlusRandom,  // self + cycle successor + one uniform random out-neighbor
  StaticRing,
  Complete,
  Custom,  // explicit schedule, repeated periodically
};

GraphKind parse_graph_kind(const std::string& name);
std::string to_string(GraphKind kind);

struct GraphSequence {
  GraphKind kind = GraphKind::RingPlusRandom;
  std::size_t n = 20;
  std::uint64_t seed = 0;
  double failure_rate = 0.0;      // per non-self edge, per round
  std::size_t window = 1;         // B in B-strong-connectivity
  std::vector<RoundGraph> schedule;  // used by GraphKind::Custom

  static GraphSequence ring_plus_random(std::size_t n, std::uint64_t seed, double failure_rate = 0.0);
  static GraphSequence static_ring(std::size_t n);
  static GraphSequence complete(std::size_t n);
  static GraphSequence custom(std::vector<RoundGraph> schedule, std::size_t window);
};

// Deterministic in (seq, t).
RoundGraph next_graph(const GraphSequence& seq, std::size_t t);

bool union_strongly_connected(std::span<const RoundGraph> graphs);

// Column-stochastic push-sum weights a_ij = 1/d_j^out for (j, i) in E.
class WeightTable {
 public:
  explicit WeightTable(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }

 private:
  std::size_t n_;
  std::vector<double> a_;
};

WeightTable push_weights(const RoundGraph& g);

// Smallest B <= max_window such that every B consecutive rounds in
// [first, first + horizon) have a strongly connected union; 0 if none.
std::size_t measure_connectivity_window(const GraphSequence& seq, std::size_t first, std::size_t horizon,
                                        std::size_t max_window);

// One line per round: "t: i->j, ...".
void write_schedule(std::ostream& os, const GraphSequence& seq, std::size_t first, std::size_t count);

}  // namespace chebcon
