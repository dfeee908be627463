#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "semnav/cost_field.hpp"
#include "semnav/grid.hpp"

namespace semnav {

enum class HeuristicKind { Zero, ManhattanMinCost };

struct PlanOptions {
  HeuristicKind heuristic = HeuristicKind::Zero;
  double eps_weight = 1.0;
  bool record_expansions = false;
};

/// Result of one backward search from the goal. g holds cost-to-go
/// estimates (exact for closed states), child the successor toward the goal
/// on the optimal path, and q the exact Q(x_t, u) for the four controls at
/// the current state (+infinity for controls whose successor cannot reach
/// the goal or cannot be entered).
struct PlanResult {
  int width = 0;
  int height = 0;
  AgentState current;
  AgentState goal;
  std::vector<double> g;
  std::vector<std::int32_t> child;  // -1 where unset
  std::vector<std::uint8_t> closed;
  std::array<double, 4> q{};
  std::vector<std::int32_t> expansions;  // pop order, when recorded

  int index(AgentState x) const { return x.row * width + x.col; }
  bool goal_reachable() const {
    for (double v : q)
      if (v < std::numeric_limits<double>::infinity()) return true;
    return false;
  }
};

/// A* over the 4-connected grid, searching backward from the goal until all
/// successors of `current` are closed. Edge cost is the arrival cost of the
/// successor cell; cells with infinite cost cannot be entered. Self-loop
/// transitions are not part of the search graph. With a zero heuristic and
/// eps_weight = 1 the g-values of all closed states are the exact optimal
/// cost-to-go.
PlanResult plan(AgentState current, AgentState goal, const CostField& cost,
                const PlanOptions& options = {});

/// Boltzmann policy over the four Q values: pi(u) proportional to
/// exp(-Q(u)/alpha), computed with max subtraction; infinite-Q controls get
/// probability zero. Throws when every Q is infinite.
std::array<double, 4> boltzmann(const std::array<double, 4>& q, double alpha);

struct VisitationEntry {
  AgentState state;
  Control control;
  int count = 0;
};

/// State-control visitation counts of one optimal trajectory.
struct Visitation {
  std::vector<VisitationEntry> entries;

  double inner_product(const CostField& cost) const;
};

/// Visitation function of the optimal trajectory for control u at the plan's
/// current state, traced through the child pointers. The subgradient of
/// Q(x_t, u) with respect to the arrival cost c(x, u') is the visitation
/// count of (x, u').
Visitation subgradient(const PlanResult& result, Control u, const CostField& cost);

/// Search trace (expansion order and g-values) as a JSON string.
std::string trace_to_json(const PlanResult& result);

}  // namespace semnav
