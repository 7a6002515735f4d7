#include "chebcon/netsim.hpp"

#include <algorithm>
#include <ostream>

#include "chebcon/errors.hpp"
#include "chebcon/random.hpp"

namespace chebcon {

RoundGraph::RoundGraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  if (n == 0) throw Error("a round graph needs at least one agent");
  for (const Edge& e : edges_) {
    if (e.from >= n || e.to >= n) throw Error("edge endpoint out of range");
  }
  for (std::size_t i = 0; i < n; ++i) edges_.push_back({i, i});
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  out_.assign(n, {});
  in_.assign(n, {});
  for (const Edge& e : edges_) {
    out_[e.from].push_back(e.to);
    in_[e.to].push_back(e.from);
  }
  for (auto& v : in_) std::sort(v.begin(), v.end());
}

bool RoundGraph::has_edge(std::size_t from, std::size_t to) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
}

GraphKind parse_graph_kind(const std::string& name) {
  if (name == "ring_plus_random") return GraphKind::RingPlusRandom;
  if (name == "static_ring" || name == "static") return GraphKind::StaticRing;
  if (name == "complete") return GraphKind::Complete;
  if (name == "custom") return GraphKind::Custom;
  throw ConfigError("unknown graph kind '" + name + "'");
}

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::RingPlusRandom: return "ring_plus_random";
    case GraphKind::StaticRing: return "static_ring";
    case GraphKind::Complete: return "complete";
    case GraphKind::Custom: return "custom";
  }
  return "unknown";
}

GraphSequence GraphSequence::ring_plus_random(std::size_t n, std::uint64_t seed, double failure_rate) {
  GraphSequence s;
  s.kind = GraphKind::RingPlusRandom;
  s.n = n;
  s.seed = seed;
  s.failure_rate = failure_rate;
  s.window = 1;
  return s;
}

GraphSequence GraphSequence::static_ring(std::size_t n) {
  GraphSequence s;
  s.kind = GraphKind::StaticRing;
  s.n = n;
  return s;
}

GraphSequence GraphSequence::complete(std::size_t n) {
  GraphSequence s;
  s.kind = GraphKind::Complete;
  s.n = n;
  return s;
}

GraphSequence GraphSequence::custom(std::vector<RoundGraph> schedule, std::size_t window) {
  if (schedule.empty()) throw Error("custom graph schedule is empty");
  GraphSequence s;
  s.kind = GraphKind::Custom;
  s.n = schedule.front().size();
  for (const auto& g : schedule) {
    if (g.size() != s.n) throw Error("custom schedule mixes agent counts");
  }
  s.window = window;
  s.schedule = std::move(schedule);
  return s;
}

RoundGraph next_graph(const GraphSequence& seq, std::size_t t) {
  if (!(seq.failure_rate >= 0.0 && seq.failure_rate < 1.0)) throw Error("failure rate must lie in [0, 1)");
  const std::size_t n = seq.n;
  std::vector<Edge> edges;

  switch (seq.kind) {
    case GraphKind::Custom:
      edges = seq.schedule[t % seq.schedule.size()].edges();
      break;
    case GraphKind::Complete:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) edges.push_back({i, j});
      break;
    case GraphKind::StaticRing:
      for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
      break;
    case GraphKind::RingPlusRandom: {
      auto rng = make_engine({seq.seed, t, tag(Stream::Graph)});
      for (std::size_t i = 0; i < n; ++i) {
        edges.push_back({i, (i + 1) % n});
        if (n > 1) {
          // Uniform over V \ {i}; may coincide with the cycle successor.
          std::uniform_int_distribution<std::size_t> pick(0, n - 2);
          std::size_t j = pick(rng);
          if (j >= i) ++j;
          edges.push_back({i, j});
        }
      }
      break;
    }
  }

  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  if (seq.failure_rate > 0.0) {
    auto rng = make_engine({seq.seed, t, tag(Stream::Graph), 1});
    std::bernoulli_distribution fails(seq.failure_rate);
    std::vector<Edge> kept;
    kept.reserve(edges.size());
    for (const Edge& e : edges) {
      if (e.from == e.to || !fails(rng)) kept.push_back(e);
    }
    edges = std::move(kept);
  }
  return RoundGraph(n, std::move(edges));
}

namespace {

std::size_t reach_count(std::size_t n, const std::vector<std::vector<std::size_t>>& adj) {
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count;
}

}  // namespace

bool union_strongly_connected(std::span<const RoundGraph> graphs) {
  if (graphs.empty()) throw Error("union_strongly_connected needs at least one graph");
  const std::size_t n = graphs.front().size();
  std::vector<std::vector<std::size_t>> fwd(n), rev(n);
  for (const auto& g : graphs) {
    if (g.size() != n) throw Error("graphs in a window must have the same agent count");
    for (const Edge& e : g.edges()) {
      if (e.from == e.to) continue;
      fwd[e.from].push_back(e.to);
      rev[e.to].push_back(e.from);
    }
  }
  return reach_count(n, fwd) == n && reach_count(n, rev) == n;
}

WeightTable push_weights(const RoundGraph& g) {
  WeightTable a(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double w = 1.0 / static_cast<double>(g.out_degree(j));
    for (std::size_t i : g.out_neighbors(j)) a(i, j) = w;
  }
  return a;
}

std::size_t measure_connectivity_window(const GraphSequence& seq, std::size_t first, std::size_t horizon,
                                        std::size_t max_window) {
  std::vector<RoundGraph> graphs;
  graphs.reserve(horizon);
  for (std::size_t t = first; t < first + horizon; ++t) graphs.push_back(next_graph(seq, t));
  const std::span<const RoundGraph> all(graphs);

  // A window containing a strongly connected window is strongly connected,
  // so B is the largest over starts s of the shortest connected window at s.
  std::size_t worst = 0;
  for (std::size_t s = 0; s + std::max<std::size_t>(worst, 1) <= horizon; ++s) {
    std::size_t b = 1;
    while (b <= max_window && s + b <= horizon && !union_strongly_connected(all.subspan(s, b))) ++b;
    if (b > max_window) return 0;
    if (s + b > horizon) break;
    worst = std::max(worst, b);
  }
  return worst;
}

void write_schedule(std::ostream& os, const GraphSequence& seq, std::size_t first, std::size_t count) {
  for (std::size_t t = first; t < first + count; ++t) {
    const RoundGraph g = next_graph(seq, t);
    os << t << ':';
    bool lead = true;
    for (const Edge& e : g.edges()) {
      os << (lead ? " " : ", ") << e.from << "->" << e.to;
      lead = false;
    }
    os << '\n';
  }
}

}  // namespace chebcon
