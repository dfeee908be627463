#include "semnav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace semnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double min_finite_cost(const CostField& cost) {
  double m = kInf;
  for (double v : cost.v)
    if (v < m) m = v;
  return m == kInf ? 0.0 : m;
}

}  // namespace

PlanResult plan(AgentState current, AgentState goal, const CostField& cost,
                const PlanOptions& options) {
  const int W = cost.width, H = cost.height;
  if (!cost.in_bounds(current.row, current.col) || !cost.in_bounds(goal.row, goal.col))
    throw Error("plan: current or goal outside the cost field");
  for (double v : cost.v)
    if (!(v >= 0.0)) throw Error("plan: cost field must be non-negative");

  PlanResult res;
  res.width = W;
  res.height = H;
  res.current = current;
  res.goal = goal;
  res.g.assign(static_cast<std::size_t>(W) * H, kInf);
  res.child.assign(static_cast<std::size_t>(W) * H, -1);
  res.closed.assign(static_cast<std::size_t>(W) * H, 0);

  const double h_scale =
      options.heuristic == HeuristicKind::ManhattanMinCost ? min_finite_cost(cost) : 0.0;
  auto heuristic = [&](int idx) {
    if (h_scale == 0.0) return 0.0;
    const int r = idx / W, c = idx % W;
    return h_scale * (std::abs(r - current.row) + std::abs(c - current.col));
  };

  // Successors of the current state; the search may stop once these are
  // closed. Controls whose successor cell cannot be entered keep Q infinite
  // and never participate.
  std::array<int, 4> succ{};
  std::array<bool, 4> needed{};
  int pending = 0;
  for (int ui = 0; ui < kNumControls; ++ui) {
    const Control u = static_cast<Control>(ui);
    const int r = current.row + row_delta(u), c = current.col + col_delta(u);
    res.q[static_cast<std::size_t>(ui)] = kInf;
    if (!cost.in_bounds(r, c) || cost.at(r, c) == kInf) {
      succ[static_cast<std::size_t>(ui)] = -1;
      needed[static_cast<std::size_t>(ui)] = false;
      continue;
    }
    succ[static_cast<std::size_t>(ui)] = r * W + c;
    needed[static_cast<std::size_t>(ui)] = true;
    ++pending;
  }

  // (f, g, index) ordering keeps pops deterministic under ties.
  using Item = std::tuple<double, double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> open;
  const int goal_idx = res.index(goal);
  res.g[static_cast<std::size_t>(goal_idx)] = 0.0;
  open.push({options.eps_weight * heuristic(goal_idx), 0.0, goal_idx});

  while (pending > 0 && !open.empty()) {
    const auto [f, gpop, idx] = open.top();
    open.pop();
    if (res.closed[static_cast<std::size_t>(idx)]) continue;
    res.closed[static_cast<std::size_t>(idx)] = 1;
    if (options.record_expansions) res.expansions.push_back(idx);
    for (int ui = 0; ui < kNumControls; ++ui) {
      if (needed[static_cast<std::size_t>(ui)] && succ[static_cast<std::size_t>(ui)] == idx) {
        needed[static_cast<std::size_t>(ui)] = false;
        --pending;
      }
    }

    const int xr = idx / W, xc = idx % W;
    const double gx = res.g[static_cast<std::size_t>(idx)];
    const double arrival = cost.v[static_cast<std::size_t>(idx)];
    // Predecessors x' with f(x', u') == x, enumerated in control order.
    for (int ui = 0; ui < kNumControls; ++ui) {
      const Control u = static_cast<Control>(ui);
      const int pr = xr - row_delta(u), pc = xc - col_delta(u);
      if (!cost.in_bounds(pr, pc)) continue;
      const int pidx = pr * W + pc;
      if (res.closed[static_cast<std::size_t>(pidx)]) continue;
      const double ng = gx + arrival;
      if (res.g[static_cast<std::size_t>(pidx)] > ng) {
        res.g[static_cast<std::size_t>(pidx)] = ng;
        res.child[static_cast<std::size_t>(pidx)] = idx;
        open.push({ng + options.eps_weight * heuristic(pidx), ng, pidx});
      }
    }
  }

  for (int ui = 0; ui < kNumControls; ++ui) {
    const int s = succ[static_cast<std::size_t>(ui)];
    if (s < 0) continue;
    const double gs = res.g[static_cast<std::size_t>(s)];
    if (gs < kInf)
      res.q[static_cast<std::size_t>(ui)] = cost.v[static_cast<std::size_t>(s)] + gs;
  }
  return res;
}

std::array<double, 4> boltzmann(const std::array<double, 4>& q, double alpha) {
  if (!(alpha > 0.0)) throw Error("boltzmann: alpha must be positive");
  double qmin = kInf;
  for (double v : q) qmin = std::min(qmin, v);
  if (qmin == kInf) throw Error("boltzmann: all Q values are infinite");
  std::array<double, 4> pi{};
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (q[static_cast<std::size_t>(i)] == kInf) {
      pi[static_cast<std::size_t>(i)] = 0.0;
    } else {
      pi[static_cast<std::size_t>(i)] = std::exp(-(q[static_cast<std::size_t>(i)] - qmin) / alpha);
    }
    sum += pi[static_cast<std::size_t>(i)];
  }
  for (double& v : pi) v /= sum;
  return pi;
}

double Visitation::inner_product(const CostField& cost) const {
  double total = 0.0;
  for (const VisitationEntry& e : entries) {
    const int r = e.state.row + row_delta(e.control);
    const int c = e.state.col + col_delta(e.control);
    total += cost.at(r, c) * e.count;
  }
  return total;
}

Visitation subgradient(const PlanResult& result, Control u, const CostField& cost) {
  (void)cost;
  if (result.q[static_cast<std::size_t>(u)] == kInf)
    throw Error("subgradient: control has infinite Q");

  Visitation mu;
  auto bump = [&](AgentState x, Control c) {
    for (VisitationEntry& e : mu.entries) {
      if (e.state == x && e.control == c) {
        ++e.count;
        return;
      }
    }
    mu.entries.push_back({x, c, 1});
  };

  bump(result.current, u);
  AgentState y{result.current.row + row_delta(u), result.current.col + col_delta(u)};
  while (!(y == result.goal)) {
    const std::int32_t next = result.child[static_cast<std::size_t>(result.index(y))];
    if (next < 0) throw Error("subgradient: broken child chain");
    const AgentState z{next / result.width, next % result.width};
    Control c = Control::Up;
    bool found = false;
    for (int ui = 0; ui < kNumControls; ++ui) {
      const Control cand = static_cast<Control>(ui);
      if (y.row + row_delta(cand) == z.row && y.col + col_delta(cand) == z.col) {
        c = cand;
        found = true;
        break;
      }
    }
    if (!found) throw Error("subgradient: child pointer is not a neighbor");
    bump(y, c);
    y = z;
  }
  return mu;
}

std::string trace_to_json(const PlanResult& result) {
  std::ostringstream out;
  out << "{\"expansions\":[";
  for (std::size_t i = 0; i < result.expansions.size(); ++i) {
    if (i) out << ",";
    out << result.expansions[i];
  }
  out << "],\"g\":[";
  bool first = true;
  for (std::size_t i = 0; i < result.g.size(); ++i) {
    if (result.g[i] == kInf) continue;
    if (!first) out << ",";
    first = false;
    out << "[" << i << "," << result.g[i] << "]";
  }
  out << "]}";
  return out.str();
}

}  // namespace semnav
