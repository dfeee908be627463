#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "semnav/planner.hpp"
#include "semnav/rng.hpp"

using namespace semnav;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CostField uniform_cost(int w, int h, double v = 1.0) { return CostField(w, h, v); }

CostField random_cost(int w, int h, Rng& rng) {
  CostField c(w, h);
  for (double& v : c.v) v = rng.uniform(0.05, 4.0);
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("planner");

TEST_CASE("one step to an adjacent goal costs the arrival cost") {
  const CostField cost = uniform_cost(6, 6);
  const PlanResult pr = plan({2, 2}, {2, 3}, cost);
  CHECK(pr.q[static_cast<int>(Control::Right)] == doctest::Approx(1.0));
  CHECK(pr.q[static_cast<int>(Control::Left)] == doctest::Approx(3.0));
  CHECK(pr.q[static_cast<int>(Control::Up)] == doctest::Approx(3.0));
  CHECK(pr.q[static_cast<int>(Control::Down)] == doctest::Approx(3.0));
}

TEST_CASE("unit-cost grids give Manhattan cost-to-go") {
  const CostField cost = uniform_cost(4, 4);
  const AgentState goal{3, 3};
  const auto oracle_vals = oracle::first_exit_values(cost, goal);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const AgentState x{r, c};
      if (x == goal) continue;
      const PlanResult pr = plan(x, goal, cost);
      for (int ui = 0; ui < 4; ++ui) {
        const Control u = static_cast<Control>(ui);
        const int nr = r + row_delta(u), nc = c + col_delta(u);
        const double expect =
            (nr < 0 || nr >= 4 || nc < 0 || nc >= 4)
                ? kInf
                : 1.0 + std::abs(nr - goal.row) + std::abs(nc - goal.col);
        if (expect == kInf) {
          CHECK(pr.q[ui] == kInf);
        } else {
          CHECK(pr.q[ui] == doctest::Approx(expect).epsilon(1e-12));
          CHECK(pr.q[ui] == doctest::Approx(oracle_vals.q(x, u, cost)).epsilon(1e-12));
        }
      }
    }
}

TEST_CASE("a goal walled off by infinite costs is unreachable") {
  CostField cost = uniform_cost(8, 8);
  for (int r = 2; r <= 4; ++r)
    for (int c = 2; c <= 4; ++c)
      if (r == 2 || c == 2 || r == 4 || c == 4) cost.at(r, c) = kInf;
  const PlanResult pr = plan({6, 6}, {3, 3}, cost);
  for (double q : pr.q) CHECK(q == kInf);
  CHECK(!pr.goal_reachable());
}

TEST_CASE("A* matches exhaustive first-exit value iteration on random fields") {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = static_cast<int>(rng.uniform_int(3, 8));
    const int h = static_cast<int>(rng.uniform_int(3, 8));
    CostField cost = random_cost(w, h, rng);
    if (trial % 3 == 0) cost.v[static_cast<std::size_t>(rng.uniform_int(0, w * h - 1))] = kInf;
    const AgentState x{static_cast<int>(rng.uniform_int(0, h - 1)),
                       static_cast<int>(rng.uniform_int(0, w - 1))};
    const AgentState goal{static_cast<int>(rng.uniform_int(0, h - 1)),
                          static_cast<int>(rng.uniform_int(0, w - 1))};
    if (x == goal) continue;
    const PlanResult pr = plan(x, goal, cost);
    const auto vi = oracle::first_exit_values(cost, goal);
    for (int ui = 0; ui < 4; ++ui) {
      const double expect = vi.q(x, static_cast<Control>(ui), cost);
      if (expect == kInf)
        CHECK(pr.q[ui] == kInf);
      else
        CHECK(pr.q[ui] == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("closed states satisfy the Bellman relation") {
  Rng rng(5);
  const CostField cost = random_cost(8, 8, rng);
  const PlanResult pr = plan({1, 1}, {6, 6}, cost);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c)
      for (int ui = 0; ui < 4; ++ui) {
        const Control u = static_cast<Control>(ui);
        const int nr = r + row_delta(u), nc = c + col_delta(u);
        if (nr < 0 || nr >= 8 || nc < 0 || nc >= 8) continue;
        if (!pr.closed[static_cast<std::size_t>(pr.index({nr, nc}))]) continue;
        const double q = cost.at(nr, nc) + pr.g[static_cast<std::size_t>(pr.index({nr, nc}))];
        // Q(x,u) = c(x,u) + g(f(x,u)) for closed successors.
        CHECK(q >= pr.g[static_cast<std::size_t>(pr.index({r, c}))] - 1e-9);
      }
  CHECK(pr.g[static_cast<std::size_t>(pr.index({6, 6}))] == 0.0);
}

TEST_CASE("expansions are bounded by the state count") {
  Rng rng(6);
  const CostField cost = random_cost(8, 8, rng);
  PlanOptions opt;
  opt.record_expansions = true;
  const PlanResult pr = plan({1, 1}, {6, 6}, cost, opt);
  CHECK(pr.expansions.size() <= 64);
  CHECK(!trace_to_json(pr).empty());
}

TEST_CASE("a consistent heuristic changes nothing about Q") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const CostField cost = random_cost(8, 8, rng);
    const AgentState x{static_cast<int>(rng.uniform_int(0, 7)),
                       static_cast<int>(rng.uniform_int(0, 7))};
    const AgentState goal{static_cast<int>(rng.uniform_int(0, 7)),
                          static_cast<int>(rng.uniform_int(0, 7))};
    if (x == goal) continue;
    const PlanResult plain = plan(x, goal, cost);
    PlanOptions opt;
    opt.heuristic = HeuristicKind::ManhattanMinCost;
    const PlanResult guided = plan(x, goal, cost, opt);
    for (int ui = 0; ui < 4; ++ui) {
      if (plain.q[ui] == kInf)
        CHECK(guided.q[ui] == kInf);
      else
        CHECK(guided.q[ui] == doctest::Approx(plain.q[ui]).epsilon(1e-12));
    }
  }
}

TEST_CASE("planning is deterministic") {
  Rng rng(8);
  const CostField cost = random_cost(10, 10, rng);
  const PlanResult a = plan({1, 1}, {8, 8}, cost);
  const PlanResult b = plan({1, 1}, {8, 8}, cost);
  CHECK(a.g == b.g);
  CHECK(a.child == b.child);
  CHECK(a.q == b.q);
}

TEST_CASE("boltzmann policies") {
  SUBCASE("equal finite Q values give the uniform policy") {
    const auto pi = boltzmann({2.0, 2.0, 2.0, 2.0}, 0.7);
    for (double v : pi) CHECK(v == doctest::Approx(0.25));
  }
  SUBCASE("infinite Q values get zero probability") {
    const auto pi = boltzmann({0.0, kInf, kInf, kInf}, 1.0);
    CHECK(pi[0] == doctest::Approx(1.0));
    CHECK(pi[1] == 0.0);
    CHECK(pi[2] == 0.0);
    CHECK(pi[3] == 0.0);
  }
  SUBCASE("softmax of -Q at unit temperature") {
    const auto pi = boltzmann({1.0, 2.0, 3.0, 4.0}, 1.0);
    CHECK(pi[0] == doctest::Approx(0.6439).epsilon(1e-4));
    CHECK(pi[1] == doctest::Approx(0.2369).epsilon(1e-4));
    CHECK(pi[2] == doctest::Approx(0.0871).epsilon(1e-3));
    CHECK(pi[3] == doctest::Approx(0.0321).epsilon(1e-3));
  }
  SUBCASE("alpha scaling flattens but keeps the argmax") {
    const auto sharp = boltzmann({1.0, 2.0, 3.0, 4.0}, 0.5);
    const auto flat = boltzmann({1.0, 2.0, 3.0, 4.0}, 8.0);
    CHECK(sharp[0] > flat[0]);
    for (int i = 1; i < 4; ++i) {
      CHECK(flat[0] > flat[i]);
      CHECK(sharp[0] > sharp[i]);
    }
  }
  SUBCASE("degenerate inputs are rejected") {
    CHECK_THROWS_AS(boltzmann({kInf, kInf, kInf, kInf}, 1.0), Error);
    CHECK_THROWS_AS(boltzmann({1.0, 1.0, 1.0, 1.0}, 0.0), Error);
  }
}

TEST_CASE("subgradient of a one-step plan is a single visitation") {
  const CostField cost = uniform_cost(6, 6);
  const PlanResult pr = plan({2, 2}, {2, 3}, cost);
  const Visitation mu = subgradient(pr, Control::Right, cost);
  REQUIRE(mu.entries.size() == 1);
  CHECK(mu.entries[0].state == AgentState{2, 2});
  CHECK(mu.entries[0].control == Control::Right);
  CHECK(mu.entries[0].count == 1);
  CHECK(mu.inner_product(cost) == doctest::Approx(pr.q[static_cast<int>(Control::Right)]));
}

TEST_CASE("a straight corridor traces one visitation per step") {
  // 3x7 field with infinite walls except the middle row.
  CostField cost(7, 3, kInf);
  for (int c = 0; c < 7; ++c) cost.at(1, c) = 1.0;
  const PlanResult pr = plan({1, 1}, {1, 6}, cost);
  const Visitation mu = subgradient(pr, Control::Right, cost);
  CHECK(mu.entries.size() == 5);
  for (const VisitationEntry& e : mu.entries) {
    CHECK(e.control == Control::Right);
    CHECK(e.count == 1);
  }
  CHECK(mu.inner_product(cost) == doctest::Approx(pr.q[static_cast<int>(Control::Right)]));
  CHECK_THROWS_AS(subgradient(pr, Control::Up, cost), Error);  // infinite-Q control
}

TEST_CASE("inner product identity holds on random instances") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const CostField cost = random_cost(8, 8, rng);
    const AgentState x{static_cast<int>(rng.uniform_int(0, 7)),
                       static_cast<int>(rng.uniform_int(0, 7))};
    const AgentState goal{static_cast<int>(rng.uniform_int(0, 7)),
                          static_cast<int>(rng.uniform_int(0, 7))};
    if (x == goal) continue;
    const PlanResult pr = plan(x, goal, cost);
    for (int ui = 0; ui < 4; ++ui) {
      if (pr.q[ui] == kInf) continue;
      const Visitation mu = subgradient(pr, static_cast<Control>(ui), cost);
      CHECK(mu.inner_product(cost) == doctest::Approx(pr.q[ui]).epsilon(1e-12));
    }
  }
}

TEST_CASE("on-path cost bumps move Q by exactly the visitation weight") {
  Rng rng(13);
  const CostField cost = random_cost(8, 8, rng);
  const AgentState x{1, 1}, goal{6, 5};
  const PlanResult pr = plan(x, goal, cost);
  const Visitation mu = subgradient(pr, Control::Down, cost);
  REQUIRE(!mu.entries.empty());
  const VisitationEntry& e = mu.entries[mu.entries.size() / 2];
  const int cell_r = e.state.row + row_delta(e.control);
  const int cell_c = e.state.col + col_delta(e.control);
  CostField bumped = cost;
  const double delta = 1e-6;
  bumped.at(cell_r, cell_c) += delta;
  const PlanResult pr2 = plan(x, goal, bumped);
  const double expect = pr.q[static_cast<int>(Control::Down)] + delta * e.count;
  CHECK(pr2.q[static_cast<int>(Control::Down)] == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("subgradient inequalities hold under re-planning") {
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const CostField cost = random_cost(7, 7, rng);
    const AgentState x{1, 1}, goal{5, 5};
    const PlanResult base = plan(x, goal, cost);
    for (int rep = 0; rep < 5; ++rep) {
      CostField perturbed = cost;
      for (double& v : perturbed.v) v = std::max(0.0, v + rng.uniform(-0.05, 0.05));
      const PlanResult moved = plan(x, goal, perturbed);
      for (int ui = 0; ui < 4; ++ui) {
        if (base.q[ui] == kInf) continue;
        const Control u = static_cast<Control>(ui);
        const Visitation mu_base = subgradient(base, u, cost);
        const Visitation mu_moved = subgradient(moved, u, perturbed);
        double inner_base = 0.0, inner_moved = 0.0;
        for (const VisitationEntry& e : mu_base.entries) {
          const int r = e.state.row + row_delta(e.control), c = e.state.col + col_delta(e.control);
          inner_base += (perturbed.at(r, c) - cost.at(r, c)) * e.count;
        }
        for (const VisitationEntry& e : mu_moved.entries) {
          const int r = e.state.row + row_delta(e.control), c = e.state.col + col_delta(e.control);
          inner_moved += (perturbed.at(r, c) - cost.at(r, c)) * e.count;
        }
        // Minimum over trajectories: the unperturbed trace upper-bounds the
        // new optimum, the re-planned trace lower-bounds it.
        CHECK(moved.q[ui] <= base.q[ui] + inner_base + 1e-9);
        CHECK(moved.q[ui] >= base.q[ui] + inner_moved - 1e-9);
      }
    }
  }
}

TEST_SUITE_END();
