#include "semnav/policy_lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "semnav/image.hpp"
#include "semnav/metrics.hpp"
#include "semnav/planner.hpp"

namespace semnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

AgentState successor(const QTable& q, AgentState x, Control u) {
  AgentState y{x.row + row_delta(u), x.col + col_delta(u)};
  if (y.row < 0 || y.row >= q.height || y.col < 0 || y.col >= q.width) return x;
  return y;
}

double hard_min(const QTable& q, AgentState x) {
  double m = kInf;
  for (int ui = 0; ui < 4; ++ui) m = std::min(m, q.at(x, static_cast<Control>(ui)));
  return m;
}

double soft_min(const QTable& q, AgentState x, double alpha) {
  double m = hard_min(q, x);
  if (m == kInf) return kInf;
  double sum = 0.0;
  for (int ui = 0; ui < 4; ++ui) {
    const double v = q.at(x, static_cast<Control>(ui));
    if (v < kInf) sum += std::exp(-(v - m) / alpha);
  }
  return m - alpha * std::log(sum);
}

template <typename Bootstrap>
QTable sweep(const QTable& q, const CostField& cost, AgentState goal, Bootstrap bootstrap) {
  QTable out = q;
  for (int r = 0; r < q.height; ++r) {
    for (int c = 0; c < q.width; ++c) {
      const AgentState x{r, c};
      for (int ui = 0; ui < 4; ++ui) {
        const Control u = static_cast<Control>(ui);
        if (x == goal) {
          // Zero-cost absorbing self transition. The hard operator keeps
          // Q(goal) = 0; the soft operator converges to its own fixed point
          // -gamma*alpha*log(4)/(1-gamma), which is what makes the MaxEnt
          // values negative everywhere.
          out.at(x, u) = q.gamma * bootstrap(goal);
          continue;
        }
        const AgentState y = successor(q, x, u);
        const double arrive = cost.at(y.row, y.col);
        if (arrive == kInf) {
          out.at(x, u) = kInf;
          continue;
        }
        out.at(x, u) = arrive + q.gamma * bootstrap(y);
      }
    }
  }
  return out;
}

}  // namespace

QTable bellman_hard(const QTable& q, const CostField& cost, AgentState goal) {
  return sweep(q, cost, goal, [&](AgentState y) { return hard_min(q, y); });
}

QTable bellman_soft(const QTable& q, const CostField& cost, AgentState goal) {
  return sweep(q, cost, goal, [&](AgentState y) { return soft_min(q, y, q.alpha); });
}

QTable value_iteration(Backup backup, const CostField& cost, AgentState goal, double gamma,
                       double alpha, double tol, int max_iters) {
  if (!(tol > 0.0)) throw Error("value_iteration: tol must be positive");
  QTable q(cost.width, cost.height, gamma, alpha);
  // Seed the infinite entries so the sparsity pattern is fixed across sweeps.
  for (int r = 0; r < q.height; ++r)
    for (int c = 0; c < q.width; ++c)
      for (int ui = 0; ui < 4; ++ui) {
        const AgentState x{r, c};
        const Control u = static_cast<Control>(ui);
        if (x == goal) continue;
        const AgentState y = successor(q, x, u);
        if (cost.at(y.row, y.col) == kInf) q.at(x, u) = kInf;
      }

  for (int it = 1; it <= max_iters; ++it) {
    QTable next = backup == Backup::HardMin ? bellman_hard(q, cost, goal)
                                            : bellman_soft(q, cost, goal);
    double delta = 0.0;
    for (std::size_t i = 0; i < q.q.size(); ++i) {
      const double a = q.q[i], b = next.q[i];
      if (a == kInf && b == kInf) continue;
      delta = std::max(delta, std::abs(a - b));
    }
    q.q = std::move(next.q);
    q.iterations = it;
    if (delta < tol) {
      q.converged = true;
      return q;
    }
  }
  q.converged = false;
  return q;
}

std::vector<std::array<double, 4>> extract_policy(const QTable& q) {
  std::vector<std::array<double, 4>> pi(static_cast<std::size_t>(q.width) * q.height,
                                        {0.25, 0.25, 0.25, 0.25});
  for (int r = 0; r < q.height; ++r) {
    for (int c = 0; c < q.width; ++c) {
      const AgentState x{r, c};
      std::array<double, 4> row{};
      bool any_finite = false;
      for (int ui = 0; ui < 4; ++ui) {
        row[static_cast<std::size_t>(ui)] = q.at(x, static_cast<Control>(ui));
        any_finite = any_finite || row[static_cast<std::size_t>(ui)] < kInf;
      }
      if (any_finite)
        pi[static_cast<std::size_t>(r) * q.width + c] = boltzmann(row, q.alpha);
    }
  }
  return pi;
}

CostField bordered_cost_grid(int width, int height, AgentState goal) {
  CostField cost(width, height, 1.0);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      if (r == 0 || c == 0 || r == height - 1 || c == width - 1) cost.at(r, c) = kInf;
  cost.at(goal.row, goal.col) = 0.0;
  return cost;
}

bool greedy_reaches_goal(const QTable& q, AgentState start, AgentState goal, int step_cap) {
  const auto pi = extract_policy(q);
  AgentState x = start;
  for (int step = 0; step <= step_cap; ++step) {
    if (x == goal) return true;
    const auto& row = pi[static_cast<std::size_t>(x.row) * q.width + x.col];
    x = successor(q, x, argmax_control(row));
  }
  return x == goal;
}

void export_qtable_csv(const QTable& q, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("export_qtable_csv: cannot open " + path);
  out << "row,col,q_up,q_down,q_left,q_right\n";
  for (int r = 0; r < q.height; ++r)
    for (int c = 0; c < q.width; ++c) {
      out << r << "," << c;
      for (int ui = 0; ui < 4; ++ui) out << "," << q.at({r, c}, static_cast<Control>(ui));
      out << "\n";
    }
}

void export_value_ppm(const QTable& q, const std::string& path) {
  double lo = kInf, hi = -kInf;
  for (int r = 0; r < q.height; ++r)
    for (int c = 0; c < q.width; ++c) {
      const double v = hard_min(q, {r, c});
      if (v < kInf) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  const double span = hi > lo ? hi - lo : 1.0;
  Image img(q.width, q.height);
  for (int r = 0; r < q.height; ++r)
    for (int c = 0; c < q.width; ++c) {
      const double v = hard_min(q, {r, c});
      // darker = higher cost-to-go; infinite renders black
      img.at(r, c) = v == kInf ? Rgb{0, 0, 0} : gray_color(1.0 - (v - lo) / span);
    }
  write_ppm(img, path);
}

void export_policy_ppm(const QTable& q, const std::string& path) {
  static const Rgb dirs[4] = {{230, 60, 60}, {60, 230, 60}, {60, 60, 230}, {230, 230, 60}};
  const auto pi = extract_policy(q);
  Image img(q.width, q.height);
  for (int r = 0; r < q.height; ++r)
    for (int c = 0; c < q.width; ++c) {
      const auto& row = pi[static_cast<std::size_t>(r) * q.width + c];
      img.at(r, c) = dirs[static_cast<int>(argmax_control(row))];
    }
  write_ppm(img, path);
}

}  // namespace semnav
