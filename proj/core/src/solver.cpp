#include "circflow/solver.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <utility>

namespace circflow {

namespace {

constexpr std::int64_t kUnreached = std::numeric_limits<std::int64_t>::max();

Cost ceil_half(Cost eps) { return eps / 2 + (eps % 2); }

}  // namespace

CostScalingSolver::CostScalingSolver(const CirculationNetwork& net, SolveOptions options)
    : net_(&net), options_(options) {
  const auto n = static_cast<std::size_t>(net.node_count());
  const auto m = static_cast<std::size_t>(net.arc_count());
  multiplier_ = static_cast<Cost>(net.node_count()) + 1;

  // Prices stay within a small multiple of n * C * (n+1); keep 8n+8 of headroom.
  const auto headroom = static_cast<long double>(8 * n + 8);
  const long double largest = static_cast<long double>(net.max_abs_cost()) *
                              static_cast<long double>(multiplier_) * headroom;
  if (largest > static_cast<long double>(std::numeric_limits<Cost>::max())) {
    throw std::overflow_error("arc costs too large for this network size");
  }

  epsilon_ = net.max_abs_cost() * multiplier_;
  flow_.assign(m, 0);
  fixed_.assign(m, 0);
  price_.assign(n, 0);
  excess_.assign(n, 0);
  current_arc_.assign(n, 0);
  stats_.cost_multiplier = multiplier_;
  stats_.initial_epsilon = epsilon_;
  stats_.final_epsilon = epsilon_;
}

bool CostScalingSolver::terminal() const {
  return epsilon_ * static_cast<Cost>(net_->node_count()) < multiplier_;
}

std::int64_t CostScalingSolver::default_push_budget() const {
  return std::max<std::int64_t>(1, options_.push_budget_factor * net_->arc_count());
}

std::int64_t CostScalingSolver::price_refinement_budget() const {
  return 4 * (2 * static_cast<std::int64_t>(net_->arc_count()) + net_->node_count());
}

void CostScalingSolver::set_flow(ArcId a, int value) {
  auto& f = flow_[static_cast<std::size_t>(a)];
  const int delta = value - static_cast<int>(f);
  if (delta == 0) return;
  const Arc& arc = net_->arc(a);
  f = static_cast<std::uint8_t>(value);
  excess_[static_cast<std::size_t>(arc.tail)] -= delta;
  excess_[static_cast<std::size_t>(arc.head)] += delta;
}

std::int64_t CostScalingSolver::total_excess() const {
  std::int64_t total = 0;
  for (auto e : excess_) total += std::max<std::int64_t>(e, 0);
  return total;
}

std::int64_t CostScalingSolver::fixed_arc_count() const {
  return static_cast<std::int64_t>(std::count(fixed_.begin(), fixed_.end(), std::uint8_t{1}));
}

Cost CostScalingSolver::total_cost() const {
  Cost total = 0;
  for (ArcId a = 0; a < net_->arc_count(); ++a) {
    if (flow_[static_cast<std::size_t>(a)]) total += net_->arc(a).cost;
  }
  return total;
}

void CostScalingSolver::push(ArcId r) {
  const ArcId a = r >> 1;
  flow_[static_cast<std::size_t>(a)] = (r & 1) ? 0 : 1;
  --excess_[static_cast<std::size_t>(net_->residual_tail(r))];
  ++excess_[static_cast<std::size_t>(net_->residual_head(r))];
  ++stats_.pushes;
}

void CostScalingSolver::release_fixed_arcs() {
  std::fill(fixed_.begin(), fixed_.end(), std::uint8_t{0});
  ++stats_.fixing_fallbacks;
}

void CostScalingSolver::update_arc_fixing() {
  if (!options_.arc_fixing) return;
  const Cost n = net_->node_count();
  Cost threshold = options_.fixing_threshold.value_or(
      epsilon_ > std::numeric_limits<Cost>::max() / (2 * n) ? std::numeric_limits<Cost>::max() : 2 * n * epsilon_);
  std::int64_t count = 0;
  for (ArcId a = 0; a < net_->arc_count(); ++a) {
    const Cost rc = reduced_cost(2 * a);
    // Only the residual orientation matters: an arc is fixed when the
    // direction it could still move in is far too expensive.
    const bool fix = flow_[static_cast<std::size_t>(a)] ? (rc < 0 && -rc > threshold) : (rc > threshold);
    fixed_[static_cast<std::size_t>(a)] = fix ? 1 : 0;
    count += fix ? 1 : 0;
  }
  stats_.arcs_scanned += net_->arc_count();
  stats_.fixed_arcs_max = std::max(stats_.fixed_arcs_max, count);
}

void CostScalingSolver::saturate_admissible_arcs() {
  for (ArcId a = 0; a < net_->arc_count(); ++a) {
    if (fixed_[static_cast<std::size_t>(a)]) continue;
    const Cost rc = reduced_cost(2 * a);
    const auto f = flow_[static_cast<std::size_t>(a)];
    if (f == 0 && rc < 0) set_flow(a, 1);
    else if (f == 1 && rc > 0) set_flow(a, 0);
  }
  stats_.arcs_scanned += net_->arc_count();
}

BlockingStructure CostScalingSolver::set_relabel() {
  const auto n = static_cast<std::size_t>(net_->node_count());
  BlockingStructure blocking;
  for (NodeId v = 0; v < net_->node_count(); ++v) {
    if (excess_[static_cast<std::size_t>(v)] > 0) blocking.excess_nodes.push_back(v);
  }
  blocking.preferred.assign(n, kNoArc);
  blocking.join_round.assign(n, -1);
  if (blocking.excess_nodes.empty()) return blocking;
  ++stats_.set_relabel_calls;

  // Round in which each node would join S if rounds were run one at a time:
  // a node joins one round after c_p / eps rounds of its successor's raises
  // make the connecting arc admissible. That is a shortest-path problem
  // from the deficit nodes over reversed residual arcs.
  for (int attempt = 0;; ++attempt) {
    std::vector<std::int64_t> dist(n, kUnreached);
    std::vector<NodeId> settled;
    using Entry = std::pair<std::int64_t, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    for (NodeId v = 0; v < net_->node_count(); ++v) {
      if (excess_[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = 0;
        heap.emplace(0, v);
      }
    }
    std::fill(blocking.preferred.begin(), blocking.preferred.end(), kNoArc);
    auto remaining = static_cast<std::int64_t>(blocking.excess_nodes.size());
    std::int64_t rounds = 0;
    std::vector<std::uint8_t> done(n, 0);
    while (!heap.empty() && remaining > 0) {
      const auto [d, w] = heap.top();
      heap.pop();
      if (done[static_cast<std::size_t>(w)]) continue;
      done[static_cast<std::size_t>(w)] = 1;
      settled.push_back(w);
      if (excess_[static_cast<std::size_t>(w)] > 0) {
        rounds = d;
        if (--remaining == 0) break;
      }
      for (ArcId r : net_->residual_out(w)) {
        const ArcId into = r ^ 1;
        if (!usable(into)) continue;
        ++stats_.arcs_scanned;
        const NodeId v = net_->residual_head(r);
        if (done[static_cast<std::size_t>(v)]) continue;
        const Cost rc = reduced_cost(into);
        const std::int64_t len = rc < 0 ? 0 : rc / epsilon_ + 1;
        const std::int64_t candidate = d + len;
        if (candidate < dist[static_cast<std::size_t>(v)]) {
          dist[static_cast<std::size_t>(v)] = candidate;
          blocking.preferred[static_cast<std::size_t>(v)] = into;
          heap.emplace(candidate, v);
        }
      }
    }

    if (remaining > 0) {
      // Every excess node has a residual path to a deficit node; if none is
      // visible, the path runs through fixed arcs.
      if (attempt == 0 && fixed_arc_count() > 0) {
        release_fixed_arcs();
        continue;
      }
      throw InvariantViolation("set-relabel: an excess node cannot reach any deficit node");
    }

    for (NodeId v : settled) {
      const std::int64_t d = dist[static_cast<std::size_t>(v)];
      blocking.join_round[static_cast<std::size_t>(v)] = d;
      if (d < rounds) price_[static_cast<std::size_t>(v)] += (rounds - d) * epsilon_;
    }
    blocking.rounds = rounds;
    stats_.set_relabel_rounds += rounds;
    return blocking;
  }
}

ArcId CostScalingSolver::find_admissible(NodeId v, const BlockingStructure& blocking) {
  const ArcId preferred = blocking.preferred.empty() ? kNoArc : blocking.preferred[static_cast<std::size_t>(v)];
  if (preferred != kNoArc && usable(preferred) && reduced_cost(preferred) < 0) {
    ++stats_.arcs_scanned;
    return preferred;
  }
  const auto arcs = net_->residual_out(v);
  auto& cursor = current_arc_[static_cast<std::size_t>(v)];
  for (; cursor < arcs.size(); ++cursor) {
    const ArcId r = arcs[cursor];
    ++stats_.arcs_scanned;
    if (usable(r) && reduced_cost(r) < 0) return r;
  }
  return kNoArc;
}

void CostScalingSolver::relabel(NodeId v) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    Cost best = std::numeric_limits<Cost>::max();
    for (ArcId r : net_->residual_out(v)) {
      ++stats_.arcs_scanned;
      if (usable(r)) best = std::min(best, reduced_cost(r));
    }
    if (best != std::numeric_limits<Cost>::max()) {
      // No admissible arc leaves v, so best >= 0; lower p(v) by whole eps
      // steps until the cheapest residual arc turns admissible.
      const Cost steps = best < 0 ? 0 : best / epsilon_ + 1;
      price_[static_cast<std::size_t>(v)] -= steps * epsilon_;
      current_arc_[static_cast<std::size_t>(v)] = 0;
      ++stats_.relabels;
      return;
    }
    // Only fixed arcs leave v; give them back to the search.
    for (ArcId r : net_->residual_out(v)) fixed_[static_cast<std::size_t>(r >> 1)] = 0;
    ++stats_.fixing_fallbacks;
  }
  throw InvariantViolation("relabel: node with excess has no residual outgoing arc");
}

void CostScalingSolver::push_relabel_along_blocking(const BlockingStructure& blocking, std::int64_t push_budget) {
  if (blocking.empty()) return;
  const std::int64_t before = total_excess();
  std::fill(current_arc_.begin(), current_arc_.end(), 0u);
  std::int64_t pushes = 0;
  for (NodeId start : blocking.excess_nodes) {
    while (excess_[static_cast<std::size_t>(start)] > 0 && pushes < push_budget) {
      // Carry one unit depth-first until a deficit absorbs it.
      NodeId u = start;
      while (pushes < push_budget) {
        const ArcId r = find_admissible(u, blocking);
        if (r == kNoArc) {
          relabel(u);
          continue;
        }
        push(r);
        ++pushes;
        const NodeId w = net_->residual_head(r);
        if (excess_[static_cast<std::size_t>(w)] <= 0) break;
        u = w;
      }
    }
    if (pushes >= push_budget) break;
  }
  if (before > 0 && total_excess() >= before) ++stats_.step2_without_progress;
}

void CostScalingSolver::restore() {
  while (total_excess() > 0) {
    ++stats_.restore_iterations;
    const BlockingStructure blocking = set_relabel();
    push_relabel_along_blocking(blocking, default_push_budget());
  }
}

bool CostScalingSolver::admissible_graph_acyclic() const {
  const auto n = static_cast<std::size_t>(net_->node_count());
  std::vector<std::int32_t> indegree(n, 0);
  for (ArcId r = 0; r < 2 * net_->arc_count(); ++r) {
    if (usable(r) && reduced_cost(r) < 0) ++indegree[static_cast<std::size_t>(net_->residual_head(r))];
  }
  std::vector<NodeId> stack;
  for (NodeId v = 0; v < net_->node_count(); ++v) {
    if (indegree[static_cast<std::size_t>(v)] == 0) stack.push_back(v);
  }
  std::size_t visited = 0;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    ++visited;
    for (ArcId r : net_->residual_out(v)) {
      if (usable(r) && reduced_cost(r) < 0) {
        const auto w = static_cast<std::size_t>(net_->residual_head(r));
        if (--indegree[w] == 0) stack.push_back(static_cast<NodeId>(w));
      }
    }
  }
  return visited == n;
}

bool CostScalingSolver::price_refinement(std::int64_t scan_budget) {
  ++stats_.price_refinement_attempts;
  const auto n = static_cast<std::size_t>(net_->node_count());

  // Topological order of the admissible network; a cycle means the flow
  // cannot be (eps/2)-optimal under any prices.
  std::vector<std::int32_t> indegree(n, 0);
  for (ArcId r = 0; r < 2 * net_->arc_count(); ++r) {
    if (usable(r) && reduced_cost(r) < 0) ++indegree[static_cast<std::size_t>(net_->residual_head(r))];
  }
  stats_.arcs_scanned += 2 * net_->arc_count();
  std::vector<NodeId> order;
  order.reserve(n);
  for (NodeId v = 0; v < net_->node_count(); ++v) {
    if (indegree[static_cast<std::size_t>(v)] == 0) order.push_back(v);
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (ArcId r : net_->residual_out(order[head])) {
      if (usable(r) && reduced_cost(r) < 0) {
        const auto w = static_cast<std::size_t>(net_->residual_head(r));
        if (--indegree[w] == 0) order.push_back(static_cast<NodeId>(w));
      }
    }
  }
  if (order.size() != n) return false;

  // Shortest distances under lengths c_p + target from a virtual root
  // joined to every node by a zero-length arc; shifting prices by them makes
  // every residual arc >= -target. Only admissible arcs can be negative and
  // they form a DAG, so a label-correcting search in distance order settles
  // quickly; the scan budget bounds the work when it does not.
  const Cost target = ceil_half(epsilon_);
  const Cost floor_bound = -static_cast<Cost>(n) * epsilon_;
  std::vector<Cost> shift(n, 0);
  using Entry = std::pair<Cost, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  std::int64_t scans = 0;
  auto relax_from = [&](NodeId v) {
    const Cost base = shift[static_cast<std::size_t>(v)];
    for (ArcId r : net_->residual_out(v)) {
      if (!usable(r)) continue;
      ++scans;
      const auto w = static_cast<std::size_t>(net_->residual_head(r));
      const Cost candidate = base + reduced_cost(r) + target;
      if (candidate < shift[w]) {
        shift[w] = candidate;
        heap.emplace(candidate, static_cast<NodeId>(w));
      }
    }
  };
  for (NodeId v : order) relax_from(v);
  bool converged = true;
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d != shift[static_cast<std::size_t>(v)]) continue;
    // Only a negative cycle drives a distance this deep.
    if (d < floor_bound || scans > scan_budget) {
      converged = false;
      break;
    }
    relax_from(v);
  }
  stats_.arcs_scanned += scans;
  if (!converged) return false;

  for (std::size_t v = 0; v < n; ++v) price_[v] += shift[v];
  epsilon_ = target;
  ++stats_.price_refinement_successes;
  return true;
}

void CostScalingSolver::refine_once() {
  epsilon_ = ceil_half(epsilon_);
  update_arc_fixing();
  saturate_admissible_arcs();
  restore();
  if (options_.price_refinement) {
    while (!terminal() && price_refinement(price_refinement_budget())) {
    }
  }
  ++stats_.refine_iterations;
  stats_.final_epsilon = epsilon_;
  if (options_.record_trace) {
    stats_.epsilon_trace.push_back(epsilon_);
    if (!is_epsilon_optimal()) stats_.epsilon_optimal_each_refine = false;
  }
}

SolveResult CostScalingSolver::solve() {
  if (epsilon_ > 0) {
    while (!terminal()) refine_once();
    // Fixed arcs are skipped during refines; if prices drifted far enough to
    // make one of them violate eps-optimality, release them and repair.
    for (int repair = 0; !is_epsilon_optimal(); ++repair) {
      if (repair > 2 || !options_.arc_fixing) throw InvariantViolation("solver finished without eps-optimality");
      release_fixed_arcs();
      saturate_admissible_arcs();
      restore();
    }
  }
  for (std::int64_t e : excess_) {
    if (e != 0) throw InvariantViolation("solver finished with an unbalanced node");
  }
  stats_.final_epsilon = epsilon_;
  return SolveResult{flow_, total_cost(), stats_};
}

std::vector<NodeId> CostScalingSolver::deficit_reachable_set() const {
  const auto n = static_cast<std::size_t>(net_->node_count());
  std::vector<std::uint8_t> in_set(n, 0);
  std::vector<NodeId> queue;
  for (NodeId v = 0; v < net_->node_count(); ++v) {
    if (excess_[static_cast<std::size_t>(v)] < 0) {
      in_set[static_cast<std::size_t>(v)] = 1;
      queue.push_back(v);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (ArcId r : net_->residual_out(queue[head])) {
      const ArcId into = r ^ 1;
      const auto v = static_cast<std::size_t>(net_->residual_head(r));
      if (!in_set[v] && residual(into) && reduced_cost(into) < 0) {
        in_set[v] = 1;
        queue.push_back(static_cast<NodeId>(v));
      }
    }
  }
  std::sort(queue.begin(), queue.end());
  return queue;
}

bool CostScalingSolver::is_epsilon_optimal() const {
  return check_epsilon_optimality(*net_, flow_, price_, epsilon_, multiplier_);
}

SolveResult solve(const CirculationNetwork& net, const SolveOptions& options) {
  CostScalingSolver solver(net, options);
  return solver.solve();
}

bool check_epsilon_optimality(const CirculationNetwork& net, std::span<const std::uint8_t> flow,
                              std::span<const Cost> prices, Cost epsilon, Cost cost_multiplier) {
  for (ArcId a = 0; a < net.arc_count(); ++a) {
    const Arc& arc = net.arc(a);
    const Cost rc = arc.cost * cost_multiplier + prices[static_cast<std::size_t>(arc.tail)] -
                    prices[static_cast<std::size_t>(arc.head)];
    const bool forward_residual = flow[static_cast<std::size_t>(a)] == 0;
    if (forward_residual ? rc < -epsilon : -rc < -epsilon) return false;
  }
  return true;
}

}  // namespace circflow
