#include "gossip/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "gossip/error.hpp"

namespace gossip {

DirectedNetwork::DirectedNetwork(std::size_t agent_count, std::span<const Edge> edges)
    : in_neighbors_(agent_count), out_neighbors_(agent_count) {
  if (agent_count == 0) {
    throw ValidationError("network must have at least one agent");
  }
  std::set<std::pair<Agent, Agent>> seen;
  for (const Edge& e : edges) {
    if (e.source >= agent_count || e.target >= agent_count) {
      std::ostringstream msg;
      msg << "edge (" << e.source + 1 << ", " << e.target + 1 << ") has an endpoint outside [1, "
          << agent_count << "]";
      throw ValidationError(msg.str());
    }
    if (!seen.emplace(e.source, e.target).second) {
      std::ostringstream msg;
      msg << "duplicate edge (" << e.source + 1 << ", " << e.target + 1 << ")";
      throw ValidationError(msg.str());
    }
    edges_.push_back(e);
    in_neighbors_[e.target].push_back(e.source);
    out_neighbors_[e.source].push_back(e.target);
  }
  for (auto& v : in_neighbors_) std::sort(v.begin(), v.end());
  for (auto& v : out_neighbors_) std::sort(v.begin(), v.end());
}

bool DirectedNetwork::has_edge(Agent source, Agent target) const {
  const auto& n = in_neighbors(target);
  return std::binary_search(n.begin(), n.end(), source);
}

DirectedNetwork from_edge_list(std::size_t agent_count,
                               std::span<const std::pair<long long, long long>> one_based_edges) {
  if (agent_count == 0) {
    throw ValidationError("network must have at least one agent");
  }
  std::vector<Edge> edges;
  edges.reserve(one_based_edges.size());
  const auto n = static_cast<long long>(agent_count);
  for (const auto& [source, target] : one_based_edges) {
    if (source < 1 || source > n || target < 1 || target > n) {
      std::ostringstream msg;
      msg << "edge (" << source << ", " << target << ") has an endpoint outside [1, " << n << "]";
      throw ValidationError(msg.str());
    }
    edges.push_back({static_cast<Agent>(source - 1), static_cast<Agent>(target - 1)});
  }
  return DirectedNetwork(agent_count, edges);
}

double SelectionMatrix::at(Agent i, Agent j) const {
  for (const Entry& e : row(i)) {
    if (e.column == j) return e.probability;
  }
  return 0.0;
}

std::vector<double> SelectionMatrix::dense() const {
  const std::size_t n = size();
  std::vector<double> out(n * n, 0.0);
  for (Agent i = 0; i < n; ++i) {
    for (const Entry& e : rows_[i]) out[i * n + e.column] = e.probability;
  }
  return out;
}

SelectionMatrix uniform_selection_matrix(const DirectedNetwork& net) {
  std::vector<std::vector<SelectionMatrix::Entry>> rows(net.size());
  for (Agent i = 0; i < net.size(); ++i) {
    const auto& nbrs = net.in_neighbors(i);
    if (nbrs.empty()) {
      rows[i].push_back({i, 1.0});
      continue;
    }
    const double p = 1.0 / static_cast<double>(nbrs.size());
    for (Agent j : nbrs) rows[i].push_back({j, p});
  }
  return SelectionMatrix(std::move(rows));
}

SelectionMatrix custom_selection_matrix(const DirectedNetwork& net,
                                        std::span<const std::vector<double>> rows) {
  const std::size_t n = net.size();
  if (rows.size() != n) {
    throw ValidationError("selection matrix has " + std::to_string(rows.size()) +
                          " rows, network has " + std::to_string(n) + " agents");
  }
  std::vector<std::vector<SelectionMatrix::Entry>> sparse(n);
  for (Agent i = 0; i < n; ++i) {
    const auto& row = rows[i];
    const std::string where = "selection row " + std::to_string(i + 1);
    if (row.size() != n) {
      throw ValidationError(where + " has " + std::to_string(row.size()) + " entries, expected " +
                            std::to_string(n));
    }
    double sum = 0.0;
    bool any_mass = false;
    for (Agent j = 0; j < n; ++j) {
      const double p = row[j];
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw ValidationError(where + ": entry " + std::to_string(j + 1) +
                              " is not a probability");
      }
      if (p == 0.0) continue;
      if (j != i && !net.has_edge(j, i)) {
        throw ValidationError(where + ": positive mass on agent " + std::to_string(j + 1) +
                              ", which is neither agent " + std::to_string(i + 1) +
                              " nor one of its in-neighbours");
      }
      any_mass = true;
      sum += p;
      sparse[i].push_back({j, p});
    }
    if (!any_mass) {
      throw ValidationError(where + " has zero mass on every entry");
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << where << " sums to " << sum << ", not 1";
      throw ValidationError(msg.str());
    }
  }
  return SelectionMatrix(std::move(sparse));
}

std::vector<std::vector<Agent>> strongly_connected_components(
    const std::vector<std::vector<Agent>>& successors) {
  // Iterative Tarjan; explicit call stack of (vertex, next successor slot).
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  const std::size_t n = successors.size();
  std::vector<std::size_t> index(n, kUnvisited);
  std::vector<std::size_t> lowlink(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<Agent> stack;
  std::vector<std::pair<Agent, std::size_t>> call;
  std::vector<std::vector<Agent>> components;
  std::size_t counter = 0;

  for (Agent root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.emplace_back(root, 0);
    index[root] = lowlink[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!call.empty()) {
      auto& [v, slot] = call.back();
      if (slot < successors[v].size()) {
        const Agent w = successors[v][slot++];
        if (index[w] == kUnvisited) {
          index[w] = lowlink[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          lowlink[v] = std::min(lowlink[v], index[w]);
        }
        continue;
      }
      const Agent done = v;
      call.pop_back();
      if (!call.empty()) {
        const Agent parent = call.back().first;
        lowlink[parent] = std::min(lowlink[parent], lowlink[done]);
      }
      if (lowlink[done] == index[done]) {
        std::vector<Agent> component;
        Agent w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          component.push_back(w);
        } while (w != done);
        std::sort(component.begin(), component.end());
        components.push_back(std::move(component));
      }
    }
  }
  return components;
}

bool is_strongly_connected(const DirectedNetwork& net) {
  std::vector<std::vector<Agent>> succ(net.size());
  for (Agent i = 0; i < net.size(); ++i) succ[i] = net.out_neighbors(i);
  return strongly_connected_components(succ).size() == 1;
}

bool RecurrentStructure::is_recurrent(Agent i) const {
  for (const auto& c : classes) {
    if (std::binary_search(c.begin(), c.end(), i)) return true;
  }
  return false;
}

RecurrentStructure recurrent_classes(const SelectionMatrix& p) {
  const std::size_t n = p.size();
  std::vector<std::vector<Agent>> succ(n);
  for (Agent i = 0; i < n; ++i) {
    for (const auto& e : p.row(i)) {
      if (e.probability > 0.0) succ[i].push_back(e.column);
    }
  }
  const auto sccs = strongly_connected_components(succ);

  std::vector<std::size_t> component_of(n);
  for (std::size_t c = 0; c < sccs.size(); ++c) {
    for (Agent v : sccs[c]) component_of[v] = c;
  }

  // Sinks first, so every successor component is resolved before its
  // predecessors.
  std::vector<std::set<std::size_t>> reach_by_component(sccs.size());
  std::vector<bool> closed(sccs.size(), true);
  std::vector<std::size_t> recurrent_ids;
  for (std::size_t c = 0; c < sccs.size(); ++c) {
    for (Agent v : sccs[c]) {
      for (Agent w : succ[v]) {
        const std::size_t d = component_of[w];
        if (d == c) continue;
        closed[c] = false;
        reach_by_component[c].insert(reach_by_component[d].begin(), reach_by_component[d].end());
      }
    }
    if (closed[c]) {
      reach_by_component[c].insert(c);
      recurrent_ids.push_back(c);
    }
  }

  std::sort(recurrent_ids.begin(), recurrent_ids.end(),
            [&](std::size_t a, std::size_t b) { return sccs[a].front() < sccs[b].front(); });
  std::vector<std::size_t> position(sccs.size(), 0);
  RecurrentStructure out;
  for (std::size_t k = 0; k < recurrent_ids.size(); ++k) {
    position[recurrent_ids[k]] = k;
    out.classes.push_back(sccs[recurrent_ids[k]]);
  }
  out.reachable_classes.resize(n);
  for (Agent v = 0; v < n; ++v) {
    for (std::size_t c : reach_by_component[component_of[v]]) {
      out.reachable_classes[v].push_back(position[c]);
    }
    std::sort(out.reachable_classes[v].begin(), out.reachable_classes[v].end());
  }
  return out;
}

namespace {

std::string describe_classes(const std::vector<std::vector<Agent>>& classes) {
  std::ostringstream msg;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    msg << (c ? ", " : "") << "{";
    for (std::size_t k = 0; k < classes[c].size(); ++k) {
      msg << (k ? "," : "") << classes[c][k] + 1;
    }
    msg << "}";
  }
  return msg.str();
}

std::vector<double> solve_direct(const SelectionMatrix& p, const std::vector<Agent>& cls) {
  const auto k = static_cast<Eigen::Index>(cls.size());
  std::vector<Eigen::Index> local(p.size(), -1);
  for (Eigen::Index a = 0; a < k; ++a) local[cls[a]] = a;

  // Rows of A are the balance equations sum_i pi_i p_ij - pi_j = 0; the last
  // one is redundant and is replaced by the normalisation.
  Eigen::MatrixXd a = -Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (const auto& e : p.row(cls[r])) {
      a(local[e.column], r) += e.probability;
    }
  }
  a.row(k - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  b(k - 1) = 1.0;
  const Eigen::VectorXd x = a.fullPivLu().solve(b);
  return {x.data(), x.data() + k};
}

std::vector<double> solve_power(const SelectionMatrix& p, const std::vector<Agent>& cls) {
  // The class is closed, so P restricted to it is stochastic. Iterating the
  // lazy chain (I + P)/2 averages consecutive iterates, which removes any
  // periodicity without changing the fixed point.
  const std::size_t k = cls.size();
  std::vector<std::size_t> local(p.size(), 0);
  for (std::size_t a = 0; a < k; ++a) local[cls[a]] = a;

  std::vector<double> x(k, 1.0 / static_cast<double>(k));
  std::vector<double> next(k);
  constexpr std::size_t kMaxIterations = 1'000'000;
  constexpr double kTolerance = 1e-14;
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < k; ++r) {
      for (const auto& e : p.row(cls[r])) next[local[e.column]] += x[r] * e.probability;
    }
    double delta = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      delta = std::max(delta, std::abs(next[a] - x[a]));
      next[a] = 0.5 * (next[a] + x[a]);
    }
    x.swap(next);
    if (delta <= kTolerance) break;
  }
  return x;
}

}  // namespace

StationaryDistribution stationary_distribution(const SelectionMatrix& p, StationaryMethod method) {
  const RecurrentStructure rec = recurrent_classes(p);
  if (rec.classes.size() != 1) {
    throw NonUniqueStationaryError("stationary distribution is not unique: the chain has " +
                                   std::to_string(rec.classes.size()) +
                                   " recurrent classes " + describe_classes(rec.classes));
  }
  const auto& cls = rec.classes.front();
  if (method == StationaryMethod::kAuto) {
    method = cls.size() <= kDirectSolveLimit ? StationaryMethod::kDirect
                                             : StationaryMethod::kPowerIteration;
  }
  std::vector<double> local =
      method == StationaryMethod::kDirect ? solve_direct(p, cls) : solve_power(p, cls);

  for (double& v : local) v = std::max(v, 0.0);
  const double total = std::accumulate(local.begin(), local.end(), 0.0);
  StationaryDistribution out;
  out.pi.assign(p.size(), 0.0);
  for (std::size_t a = 0; a < cls.size(); ++a) out.pi[cls[a]] = local[a] / total;
  return out;
}

double stationary_residual(const SelectionMatrix& p, std::span<const double> pi) {
  if (pi.size() != p.size()) {
    throw ValidationError("distribution length does not match the selection matrix");
  }
  std::vector<double> product(p.size(), 0.0);
  for (Agent i = 0; i < p.size(); ++i) {
    for (const auto& e : p.row(i)) product[e.column] += pi[i] * e.probability;
  }
  double worst = 0.0;
  for (Agent j = 0; j < p.size(); ++j) worst = std::max(worst, std::abs(product[j] - pi[j]));
  return worst;
}

}  // namespace gossip
