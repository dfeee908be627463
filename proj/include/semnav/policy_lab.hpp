#pragma once

#include <array>
#include <string>
#include <vector>

#include "semnav/cost_field.hpp"
#include "semnav/grid.hpp"

namespace semnav {

/// Dense Q(x, u) table for the discounted infinite-horizon comparison. The
/// goal is absorbing with zero-cost self transitions; cells with infinite
/// arrival cost act as obstacles.
struct QTable {
  int width = 0;
  int height = 0;
  double gamma = 0.95;
  double alpha = 1.0;
  std::vector<double> q;  // [cell][control]
  bool converged = false;
  int iterations = 0;

  QTable() = default;
  QTable(int w, int h, double gamma_, double alpha_, double fill = 0.0)
      : width(w), height(h), gamma(gamma_), alpha(alpha_),
        q(static_cast<std::size_t>(w) * h * 4, fill) {}

  double at(AgentState x, Control u) const {
    return q[(static_cast<std::size_t>(x.row) * width + x.col) * 4 + static_cast<int>(u)];
  }
  double& at(AgentState x, Control u) {
    return q[(static_cast<std::size_t>(x.row) * width + x.col) * 4 + static_cast<int>(u)];
  }
};

enum class Backup { HardMin, SoftMin };

/// One Jacobi sweep of the chosen Bellman operator:
///   hard: Q'(x,u) = c(x,u) + gamma * min_u' Q(x',u')
///   soft: Q'(x,u) = c(x,u) - gamma * alpha * log sum_u' exp(-Q(x',u')/alpha)
/// both with x' = f(x,u) and max-subtraction in the soft case.
QTable bellman_hard(const QTable& q, const CostField& cost, AgentState goal);
QTable bellman_soft(const QTable& q, const CostField& cost, AgentState goal);

/// Iterate the operator from Q = 0 until the sup-norm change over finite
/// entries drops below tol; flags non-convergence at max_iters.
QTable value_iteration(Backup backup, const CostField& cost, AgentState goal, double gamma,
                       double alpha, double tol, int max_iters);

/// Per-state Boltzmann distribution over the four controls.
std::vector<std::array<double, 4>> extract_policy(const QTable& q);

/// Bordered empty grid: infinite cost on the border, unit cost inside, zero
/// cost to arrive at the goal.
CostField bordered_cost_grid(int width, int height, AgentState goal);

/// Greedy (argmax-probability) rollout under the table's policy; true when
/// the goal is reached within step_cap steps.
bool greedy_reaches_goal(const QTable& q, AgentState start, AgentState goal, int step_cap);

void export_qtable_csv(const QTable& q, const std::string& path);
void export_value_ppm(const QTable& q, const std::string& path);
void export_policy_ppm(const QTable& q, const std::string& path);

}  // namespace semnav
