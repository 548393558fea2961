#include "circflow/baselines.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

namespace circflow {

namespace {

constexpr Cost kInfinity = std::numeric_limits<Cost>::max() / 4;

using HeapEntry = std::pair<Cost, NodeId>;
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>>;

bool residual(const std::vector<std::uint8_t>& flow, ArcId r) {
  const auto f = flow[static_cast<std::size_t>(r >> 1)];
  return (r & 1) ? f != 0 : f == 0;
}

// Exact shortest distances from the source over forward arcs (DAG).
std::vector<Cost> initial_potentials(const FlowNetwork& net) {
  std::vector<Cost> dist(static_cast<std::size_t>(net.node_count()), kInfinity);
  dist[static_cast<std::size_t>(net.source())] = 0;
  for (NodeId v : net.topological_order()) {
    const Cost dv = dist[static_cast<std::size_t>(v)];
    if (dv == kInfinity) continue;
    for (ArcId r : net.residual_out(v)) {
      if (r & 1) continue;
      const auto w = static_cast<std::size_t>(net.residual_head(r));
      dist[w] = std::min(dist[w], dv + net.residual_cost(r));
    }
  }
  // Unreachable nodes never carry flow; any finite potential works for them.
  for (auto& d : dist) {
    if (d == kInfinity) d = 0;
  }
  return dist;
}

Cost reduced(const FlowNetwork& net, const std::vector<Cost>& potential, ArcId r) {
  return net.residual_cost(r) + potential[static_cast<std::size_t>(net.residual_tail(r))] -
         potential[static_cast<std::size_t>(net.residual_head(r))];
}

void augment(const FlowNetwork& net, std::vector<std::uint8_t>& flow, const std::vector<ArcId>& parent,
             std::vector<NodeId>* path_nodes) {
  NodeId v = net.sink();
  while (v != net.source()) {
    const ArcId r = parent[static_cast<std::size_t>(v)];
    if (r == kNoArc) throw InvariantViolation("augmenting path is broken");
    flow[static_cast<std::size_t>(r >> 1)] = (r & 1) ? 0 : 1;
    if (path_nodes) path_nodes->push_back(v);
    v = net.residual_tail(r);
  }
}

}  // namespace

FlowNetwork::FlowNetwork(const CirculationNetwork& circulation) {
  const NodeId hub = circulation.dummy();
  node_count_ = circulation.node_count() + 1;
  const NodeId sink_node = node_count_ - 1;
  const auto m = static_cast<std::size_t>(circulation.arc_count());
  tail_.resize(m);
  head_.resize(m);
  cost_.resize(m);
  for (std::size_t a = 0; a < m; ++a) {
    const Arc& arc = circulation.arc(static_cast<ArcId>(a));
    if (arc.tail == hub && arc.head == hub) throw std::invalid_argument("self-loop on the hub");
    tail_[a] = arc.tail;  // hub tails become the source (node 0)
    head_[a] = arc.head == hub ? sink_node : arc.head;
    cost_[a] = arc.cost;
  }
  offsets_.assign(static_cast<std::size_t>(node_count_) + 1, 0);
  for (std::size_t r = 0; r < 2 * m; ++r) {
    ++offsets_[static_cast<std::size_t>(residual_tail(static_cast<ArcId>(r))) + 1];
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  residual_list_.resize(2 * m);
  std::vector<std::int64_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t r = 0; r < 2 * m; ++r) {
    const auto t = static_cast<std::size_t>(residual_tail(static_cast<ArcId>(r)));
    residual_list_[static_cast<std::size_t>(cursor[t]++)] = static_cast<ArcId>(r);
  }
}

std::vector<NodeId> FlowNetwork::topological_order() const {
  std::vector<std::int32_t> indegree(static_cast<std::size_t>(node_count_), 0);
  for (NodeId h : head_) ++indegree[static_cast<std::size_t>(h)];
  std::vector<NodeId> order;
  order.reserve(static_cast<std::size_t>(node_count_));
  for (NodeId v = 0; v < node_count_; ++v) {
    if (indegree[static_cast<std::size_t>(v)] == 0) order.push_back(v);
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (ArcId r : residual_out(order[i])) {
      if (r & 1) continue;
      const auto w = static_cast<std::size_t>(residual_head(r));
      if (--indegree[w] == 0) order.push_back(static_cast<NodeId>(w));
    }
  }
  if (order.size() != static_cast<std::size_t>(node_count_)) {
    throw std::invalid_argument("flow network contains a cycle");
  }
  return order;
}

SspResult ssp_solve(const FlowNetwork& net, std::optional<std::int64_t> flow_amount) {
  const auto n = static_cast<std::size_t>(net.node_count());
  const NodeId s = net.source();
  const NodeId t = net.sink();
  SspResult result;
  result.flow.assign(static_cast<std::size_t>(net.arc_count()), 0);
  result.cost_curve.push_back(0);

  std::vector<Cost> potential = initial_potentials(net);
  std::vector<Cost> dist(n);
  std::vector<ArcId> parent(n);
  std::vector<std::uint8_t> settled(n);
  std::vector<NodeId> touched;

  while (!flow_amount || result.augmentations < *flow_amount) {
    std::fill(dist.begin(), dist.end(), kInfinity);
    std::fill(parent.begin(), parent.end(), kNoArc);
    std::fill(settled.begin(), settled.end(), 0);
    touched.clear();
    MinHeap heap;
    dist[static_cast<std::size_t>(s)] = 0;
    heap.emplace(0, s);
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      if (settled[static_cast<std::size_t>(v)]) continue;
      settled[static_cast<std::size_t>(v)] = 1;
      touched.push_back(v);
      if (v == t) break;
      for (ArcId r : net.residual_out(v)) {
        if (!residual(result.flow, r)) continue;
        const auto w = static_cast<std::size_t>(net.residual_head(r));
        if (settled[w]) continue;
        const Cost candidate = d + reduced(net, potential, r);
        if (candidate < dist[w]) {
          dist[w] = candidate;
          parent[w] = r;
          heap.emplace(candidate, static_cast<NodeId>(w));
        }
      }
    }
    if (!settled[static_cast<std::size_t>(t)]) break;

    const Cost dt = dist[static_cast<std::size_t>(t)];
    const Cost path_cost = dt + potential[static_cast<std::size_t>(t)] - potential[static_cast<std::size_t>(s)];
    if (!flow_amount && path_cost >= 0) break;

    for (std::size_t v = 0; v < n; ++v) {
      potential[v] += settled[v] ? dist[v] : dt;
    }
    augment(net, result.flow, parent, nullptr);
    result.cost += path_cost;
    result.cost_curve.push_back(result.cost);
    ++result.augmentations;
  }
  return result;
}

SspResult dssp_solve(const FlowNetwork& net) {
  const auto n = static_cast<std::size_t>(net.node_count());
  const NodeId s = net.source();
  const NodeId t = net.sink();
  SspResult result;
  result.flow.assign(static_cast<std::size_t>(net.arc_count()), 0);
  result.cost_curve.push_back(0);

  std::vector<Cost> potential = initial_potentials(net);
  std::vector<Cost> dist(n, kInfinity);
  std::vector<ArcId> parent(n, kNoArc);

  // Full tree once; afterwards only the invalidated part is recomputed.
  {
    MinHeap heap;
    std::vector<std::uint8_t> settled(n, 0);
    dist[static_cast<std::size_t>(s)] = 0;
    heap.emplace(0, s);
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      if (settled[static_cast<std::size_t>(v)]) continue;
      settled[static_cast<std::size_t>(v)] = 1;
      for (ArcId r : net.residual_out(v)) {
        if (!residual(result.flow, r)) continue;
        const auto w = static_cast<std::size_t>(net.residual_head(r));
        const Cost candidate = d + reduced(net, potential, r);
        if (candidate < dist[w]) {
          dist[w] = candidate;
          parent[w] = r;
          heap.emplace(candidate, static_cast<NodeId>(w));
        }
      }
    }
  }

  enum : std::uint8_t { kUnknown = 0, kValid = 1, kInvalid = 2 };
  std::vector<std::uint8_t> status(n);
  std::vector<NodeId> path_nodes;
  std::vector<NodeId> invalid;
  std::vector<NodeId> chain;

  while (dist[static_cast<std::size_t>(t)] < kInfinity) {
    const Cost path_cost = dist[static_cast<std::size_t>(t)] + potential[static_cast<std::size_t>(t)] -
                           potential[static_cast<std::size_t>(s)];
    if (path_cost >= 0) break;

    // New potentials make every tree arc tight; unreachable nodes stay
    // unreachable (new residual arcs only join path nodes).
    for (std::size_t v = 0; v < n; ++v) {
      if (dist[v] < kInfinity) potential[v] += dist[v];
    }
    path_nodes.clear();
    augment(net, result.flow, parent, &path_nodes);
    result.cost += path_cost;
    result.cost_curve.push_back(result.cost);
    ++result.augmentations;

    // Nodes whose tree path crosses the augmented path lose their labels.
    std::fill(status.begin(), status.end(), kUnknown);
    status[static_cast<std::size_t>(s)] = kValid;
    for (NodeId v : path_nodes) status[static_cast<std::size_t>(v)] = kInvalid;
    invalid.clear();
    for (std::size_t v = 0; v < n; ++v) {
      if (dist[v] == kInfinity || status[v] != kUnknown) continue;
      chain.clear();
      auto u = static_cast<NodeId>(v);
      while (status[static_cast<std::size_t>(u)] == kUnknown) {
        chain.push_back(u);
        const ArcId r = parent[static_cast<std::size_t>(u)];
        if (r == kNoArc) throw InvariantViolation("reachable node without a tree parent");
        u = net.residual_tail(r);
      }
      const auto verdict = status[static_cast<std::size_t>(u)];
      for (NodeId x : chain) status[static_cast<std::size_t>(x)] = verdict;
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (dist[v] == kInfinity) continue;
      if (status[v] == kValid) {
        dist[v] = 0;
      } else {
        invalid.push_back(static_cast<NodeId>(v));
      }
    }
    for (NodeId v : invalid) {
      dist[static_cast<std::size_t>(v)] = kInfinity;
      parent[static_cast<std::size_t>(v)] = kNoArc;
    }

    MinHeap heap;
    for (NodeId v : invalid) {
      for (ArcId out : net.residual_out(v)) {
        const ArcId into = out ^ 1;
        const auto u = static_cast<std::size_t>(net.residual_tail(into));
        if (status[u] != kValid || dist[u] == kInfinity || !residual(result.flow, into)) continue;
        const Cost candidate = reduced(net, potential, into);
        if (candidate < dist[static_cast<std::size_t>(v)]) {
          dist[static_cast<std::size_t>(v)] = candidate;
          parent[static_cast<std::size_t>(v)] = into;
        }
      }
      if (dist[static_cast<std::size_t>(v)] < kInfinity) heap.emplace(dist[static_cast<std::size_t>(v)], v);
    }
    std::vector<std::uint8_t> done(invalid.empty() ? 0 : n, 0);
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      if (done[static_cast<std::size_t>(v)] || d > dist[static_cast<std::size_t>(v)]) continue;
      done[static_cast<std::size_t>(v)] = 1;
      for (ArcId r : net.residual_out(v)) {
        if (!residual(result.flow, r)) continue;
        const auto w = static_cast<std::size_t>(net.residual_head(r));
        if (status[w] != kInvalid) continue;
        const Cost candidate = d + reduced(net, potential, r);
        if (candidate < dist[w]) {
          dist[w] = candidate;
          parent[w] = r;
          heap.emplace(candidate, static_cast<NodeId>(w));
        }
      }
    }
  }
  return result;
}

OracleResult brute_force_oracle(const CirculationNetwork& net) {
  const std::size_t count = net.detection_count();
  if (count > kOracleDetectionLimit) {
    throw std::length_error(fmt::format("oracle supports at most {} detections, got {}", kOracleDetectionLimit, count));
  }

  std::vector<Cost> enter(count, kInfinity), exit(count, kInfinity), observe(count, kInfinity);
  std::vector<std::vector<std::pair<std::size_t, Cost>>> preds(count);
  std::vector<std::int32_t> indegree(count, 0);
  for (const Arc& arc : net.arcs()) {
    const auto tail = net.detection_of(arc.tail);
    const auto head = net.detection_of(arc.head);
    switch (arc.kind) {
      case ArcKind::Enter: enter[*head] = std::min(enter[*head], arc.cost); break;
      case ArcKind::Exit: exit[*tail] = std::min(exit[*tail], arc.cost); break;
      case ArcKind::Observation: observe[*tail] = std::min(observe[*tail], arc.cost); break;
      case ArcKind::Transition:
        preds[*head].emplace_back(*tail, arc.cost);
        ++indegree[*head];
        break;
    }
  }

  // Detections in an order where every predecessor comes first.
  std::vector<std::size_t> order;
  std::vector<std::vector<std::size_t>> succs(count);
  for (std::size_t j = 0; j < count; ++j) {
    for (auto [i, c] : preds[j]) succs[i].push_back(j);
  }
  for (std::size_t j = 0; j < count; ++j) {
    if (indegree[j] == 0) order.push_back(j);
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (std::size_t j : succs[order[k]]) {
      if (--indegree[j] == 0) order.push_back(j);
    }
  }
  if (order.size() != count) throw std::invalid_argument("transition arcs form a cycle");

  // Optimistic bound for the detections not yet decided.
  std::vector<Cost> best_case(count, 0);
  for (std::size_t j = 0; j < count; ++j) {
    Cost entry = enter[j];
    for (auto [i, c] : preds[j]) entry = std::min(entry, c);
    if (entry == kInfinity || observe[j] == kInfinity || exit[j] == kInfinity) continue;
    best_case[j] = std::min<Cost>(0, observe[j] + entry + std::min<Cost>(0, exit[j]));
  }
  std::vector<Cost> suffix_bound(count + 1, 0);
  for (std::size_t k = count; k-- > 0;) suffix_bound[k] = suffix_bound[k + 1] + best_case[order[k]];

  constexpr std::ptrdiff_t kHub = -1;
  constexpr std::ptrdiff_t kUnselected = -2;
  std::vector<std::ptrdiff_t> pred(count, kUnselected), best_pred(count, kUnselected);
  std::vector<std::uint8_t> has_succ(count, 0);
  Cost best = 0;  // the empty circulation
  Cost open_tail_bound = 0;

  std::function<void(std::size_t, Cost)> search = [&](std::size_t k, Cost partial) {
    if (partial + open_tail_bound + suffix_bound[k] >= best) return;
    if (k == count) {
      Cost total = partial;
      for (std::size_t i = 0; i < count; ++i) {
        if (pred[i] != kUnselected && !has_succ[i]) total += exit[i];
      }
      if (total < best) {
        best = total;
        best_pred = pred;
      }
      return;
    }
    const std::size_t j = order[k];
    const bool can_select = observe[j] != kInfinity && exit[j] != kInfinity;
    if (can_select) {
      const Cost tail_bound = std::min<Cost>(0, exit[j]);
      open_tail_bound += tail_bound;
      if (enter[j] != kInfinity) {
        pred[j] = kHub;
        search(k + 1, partial + enter[j] + observe[j]);
      }
      for (auto [i, c] : preds[j]) {
        if (pred[i] == kUnselected || has_succ[i]) continue;
        pred[j] = static_cast<std::ptrdiff_t>(i);
        has_succ[i] = 1;
        const Cost released = std::min<Cost>(0, exit[i]);
        open_tail_bound -= released;
        search(k + 1, partial + c + observe[j]);
        open_tail_bound += released;
        has_succ[i] = 0;
      }
      open_tail_bound -= tail_bound;
      pred[j] = kUnselected;
    }
    search(k + 1, partial);
  };
  search(0, 0);

  OracleResult result;
  result.cost = best;
  std::vector<std::ptrdiff_t> next(count, -1);
  for (std::size_t j = 0; j < count; ++j) {
    if (best_pred[j] >= 0) next[static_cast<std::size_t>(best_pred[j])] = static_cast<std::ptrdiff_t>(j);
  }
  for (std::size_t j = 0; j < count; ++j) {
    if (best_pred[j] != kHub) continue;
    std::vector<std::size_t> cycle;
    for (std::ptrdiff_t v = static_cast<std::ptrdiff_t>(j); v >= 0; v = next[static_cast<std::size_t>(v)]) {
      cycle.push_back(static_cast<std::size_t>(v));
    }
    result.cycles.push_back(std::move(cycle));
  }
  return result;
}

}  // namespace circflow
