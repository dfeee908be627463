#include "semnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semnav {

Control argmax_control(const Policy& pi) {
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (pi[static_cast<std::size_t>(i)] > pi[static_cast<std::size_t>(best)]) best = i;
  return static_cast<Control>(best);
}

double nll(const std::vector<Policy>& policies, const std::vector<Control>& demonstrated) {
  if (policies.size() != demonstrated.size()) throw Error("nll: sequence length mismatch");
  if (policies.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < policies.size(); ++i)
    total += -std::log(policies[i][static_cast<std::size_t>(demonstrated[i])]);
  return total / static_cast<double>(policies.size());
}

double accuracy(const std::vector<Policy>& policies, const std::vector<Control>& demonstrated) {
  if (policies.size() != demonstrated.size()) throw Error("accuracy: sequence length mismatch");
  if (policies.empty()) return 0.0;
  int hits = 0;
  for (std::size_t i = 0; i < policies.size(); ++i)
    if (argmax_control(policies[i]) == demonstrated[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(policies.size());
}

double tsr(const std::vector<RolloutOutcome>& outcomes) {
  if (outcomes.empty()) return 0.0;
  int ok = 0;
  for (const RolloutOutcome& o : outcomes)
    if (o.reached_goal && o.agent_steps <= 2 * o.expert_steps) ++ok;
  return static_cast<double>(ok) / static_cast<double>(outcomes.size());
}

namespace {

double directed_mean_min(const Trajectory& a, const Trajectory& b) {
  double total = 0.0;
  for (const AgentState& x : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const AgentState& y : b) {
      const double d = std::hypot(static_cast<double>(x.row - y.row),
                                  static_cast<double>(x.col - y.col));
      best = std::min(best, d);
    }
    total += best;
  }
  return total / static_cast<double>(a.size());
}

}  // namespace

double mhd_pair(const Trajectory& agent, const Trajectory& expert) {
  if (agent.empty() || expert.empty()) throw Error("mhd: empty trajectory");
  return std::max(directed_mean_min(agent, expert), directed_mean_min(expert, agent));
}

double mhd(const std::vector<Trajectory>& agent, const std::vector<Trajectory>& expert) {
  if (agent.size() != expert.size()) throw Error("mhd: trajectory count mismatch");
  if (agent.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < agent.size(); ++i) total += mhd_pair(agent[i], expert[i]);
  return total / static_cast<double>(agent.size());
}

}  // namespace semnav
