#pragma once

// Shared test scenarios built straight from the core API.

#include <vector>

#include "gossip/graph.hpp"
#include "gossip/world.hpp"

namespace gossip::testing {

// 1-based (source, target) pairs; target observes source.
inline std::vector<std::pair<long long, long long>> example1_edges() {
  return {{1, 2}, {2, 5}, {2, 3}, {3, 4}, {3, 1}, {3, 6}, {4, 2}, {1, 7}, {5, 4}, {7, 8}};
}

inline DirectedNetwork example1_network() {
  const auto edges = example1_edges();
  return from_edge_list(8, edges);
}

// Binary signals; column 0 is s = 0. Rows are states 1, 2, 3.
inline LikelihoodTable table_l1() {
  const std::vector<std::vector<double>> rows{{1.0 / 3, 2.0 / 3}, {1.0 / 3, 2.0 / 3}, {0.2, 0.8}};
  return LikelihoodTable::from_rows(rows);
}
inline LikelihoodTable table_l2() {
  const std::vector<std::vector<double>> rows{{0.5, 0.5}, {2.0 / 3, 1.0 / 3}, {0.5, 0.5}};
  return LikelihoodTable::from_rows(rows);
}
inline LikelihoodTable table_l3() {
  const std::vector<std::vector<double>> rows{{0.25, 0.75}, {0.25, 0.75}, {0.25, 0.75}};
  return LikelihoodTable::from_rows(rows);
}

inline WorldModel example1_world(StateIndex truth = 0) {
  std::vector<LikelihoodTable> tables{table_l1(), table_l2()};
  for (int k = 0; k < 6; ++k) tables.push_back(table_l3());
  return WorldModel(StateSpace({"1", "2", "3"}, truth), Prior::uniform(3), std::move(tables));
}

// Every agent uses the uninformative table.
inline WorldModel uninformative_world(std::size_t agents) {
  std::vector<LikelihoodTable> tables(agents, table_l3());
  return WorldModel(StateSpace({"1", "2", "3"}, 0), Prior::uniform(3), std::move(tables));
}

// Single isolated agent.
inline DirectedNetwork singleton() { return DirectedNetwork(1, std::vector<Edge>{}); }

}  // namespace gossip::testing
