#pragma once

#include <array>
#include <vector>

#include "semnav/grid.hpp"

namespace semnav {

using Policy = std::array<double, 4>;
using Trajectory = std::vector<AgentState>;

/// Argmax control with ties broken by the fixed control order.
Control argmax_control(const Policy& pi);

/// Mean of -log pi(u*) over aligned steps.
double nll(const std::vector<Policy>& policies, const std::vector<Control>& demonstrated);

/// Fraction of steps whose argmax control matches the demonstration.
double accuracy(const std::vector<Policy>& policies, const std::vector<Control>& demonstrated);

struct RolloutOutcome {
  bool reached_goal = false;
  int agent_steps = 0;
  int expert_steps = 0;
};

/// Fraction of rollouts reaching the goal within twice the expert's step
/// count (inclusive bound).
double tsr(const std::vector<RolloutOutcome>& outcomes);

/// Modified Hausdorff distance between one trajectory pair: the larger of
/// the two directed mean minimum distances between cell centers.
double mhd_pair(const Trajectory& agent, const Trajectory& expert);

/// Mean of mhd_pair over aligned trajectory pairs.
double mhd(const std::vector<Trajectory>& agent, const std::vector<Trajectory>& expert);

}  // namespace semnav
