#pragma once

// Directed communication network, neighbour-selection matrix and the Markov
// chain structure of the backward random walk it induces.
//
// Index convention: agents are 0-based everywhere in this library. Anything
// user facing (config files, CSV, console) is 1-based and converts at the
// boundary.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace gossip {

using Agent = std::size_t;

// An edge (source, target) means "target observes source": source is an
// in-neighbour of target.
struct Edge {
  Agent source;
  Agent target;

  friend bool operator==(const Edge&, const Edge&) = default;
};

class DirectedNetwork {
 public:
  // Throws ValidationError on an out-of-range endpoint or a duplicate edge.
  DirectedNetwork(std::size_t agent_count, std::span<const Edge> edges);

  std::size_t size() const { return in_neighbors_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  // N(i), ascending.
  const std::vector<Agent>& in_neighbors(Agent i) const { return in_neighbors_.at(i); }
  const std::vector<Agent>& out_neighbors(Agent i) const { return out_neighbors_.at(i); }
  std::size_t degree(Agent i) const { return in_neighbors(i).size(); }
  bool has_edge(Agent source, Agent target) const;

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<Agent>> in_neighbors_;
  std::vector<std::vector<Agent>> out_neighbors_;
};

// Builds a network from 1-based (source, target) pairs, as written in
// configs. Errors name the offending pair in 1-based form.
DirectedNetwork from_edge_list(std::size_t agent_count,
                               std::span<const std::pair<long long, long long>> one_based_edges);

// Row-stochastic P = [p_ij]; row i is the distribution of the neighbour that
// agent i listens to each round. Stored sparsely, entries ascending by column.
class SelectionMatrix {
 public:
  struct Entry {
    Agent column;
    double probability;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  std::size_t size() const { return rows_.size(); }
  const std::vector<Entry>& row(Agent i) const { return rows_.at(i); }
  double at(Agent i, Agent j) const;
  std::vector<double> dense() const;  // row-major n*n

  friend SelectionMatrix uniform_selection_matrix(const DirectedNetwork& net);
  friend SelectionMatrix custom_selection_matrix(const DirectedNetwork& net,
                                                 std::span<const std::vector<double>> rows);

 private:
  explicit SelectionMatrix(std::vector<std::vector<Entry>> rows) : rows_(std::move(rows)) {}

  std::vector<std::vector<Entry>> rows_;
};

inline constexpr double kRowSumTolerance = 1e-12;

// p_ij = 1/deg(i) on N(i); isolated agents select themselves.
SelectionMatrix uniform_selection_matrix(const DirectedNetwork& net);

// Validates dense rows against net: each row sums to 1 (within 1e-12) and
// puts mass only on N(i) and i itself; an isolated agent must have p_ii = 1.
SelectionMatrix custom_selection_matrix(const DirectedNetwork& net,
                                        std::span<const std::vector<double>> rows);

// Strongly connected components of a graph given as successor lists, via
// Tarjan's algorithm. Components come out in reverse topological order of the
// condensation (sink components first), members ascending.
std::vector<std::vector<Agent>> strongly_connected_components(
    const std::vector<std::vector<Agent>>& successors);

bool is_strongly_connected(const DirectedNetwork& net);

struct RecurrentStructure {
  // Closed communicating classes, ordered by smallest member.
  std::vector<std::vector<Agent>> classes;
  // For each node, indices into `classes` reachable from it under P.
  std::vector<std::vector<std::size_t>> reachable_classes;

  bool is_recurrent(Agent i) const;
};

RecurrentStructure recurrent_classes(const SelectionMatrix& p);

struct StationaryDistribution {
  std::vector<double> pi;

  std::size_t size() const { return pi.size(); }
  double operator[](Agent i) const { return pi.at(i); }
};

enum class StationaryMethod { kAuto, kDirect, kPowerIteration };

inline constexpr std::size_t kDirectSolveLimit = 2000;

// Solves pi P = pi, sum(pi) = 1 for a chain with exactly one recurrent class;
// transient states get exactly zero. kAuto uses the direct solve up to
// kDirectSolveLimit states and Cesaro-averaged power iteration above it.
// Throws NonUniqueStationaryError when there are several recurrent classes.
StationaryDistribution stationary_distribution(const SelectionMatrix& p,
                                               StationaryMethod method = StationaryMethod::kAuto);

// max_j |(pi P)_j - pi_j|
double stationary_residual(const SelectionMatrix& p, std::span<const double> pi);

}  // namespace gossip
