#include <doctest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "semnav/sensor.hpp"

using namespace semnav;

namespace {

SemanticGrid free_grid(int w, int h) {
  GenParams p;
  p.rect_count_min = 0;
  p.rect_count_max = 0;
  return generate_environment(0, w, h, p, default_class_set());
}

}  // namespace

TEST_SUITE_BEGIN("sensor");

TEST_CASE("axis-aligned rays walk straight") {
  const auto cells = ray_cells({5, 5}, 0.0, 3.0);
  REQUIRE(cells.size() == 3);
  CHECK(cells[0] == AgentState{5, 6});
  CHECK(cells[1] == AgentState{5, 7});
  CHECK(cells[2] == AgentState{5, 8});

  const auto up = ray_cells({5, 5}, 90.0, 3.0);
  REQUIRE(up.size() == 3);
  CHECK(up[0] == AgentState{4, 5});
  CHECK(up[2] == AgentState{2, 5});
}

TEST_CASE("opposite angles mirror each other") {
  // Compare as sets: within a corner-crossing tie group the emission order
  // follows (row, col), which does not commute with the reflection.
  for (double angle : {0.0, 30.0, 45.0, 60.0, 90.0, 10.0, 75.0}) {
    auto fwd = ray_cells({8, 8}, angle, 3.0);
    auto bwd = ray_cells({8, 8}, angle + 180.0, 3.0);
    REQUIRE(fwd.size() == bwd.size());
    for (AgentState& c : fwd) c = {16 - c.row, 16 - c.col};
    std::sort(fwd.begin(), fwd.end());
    std::sort(bwd.begin(), bwd.end());
    CHECK(fwd == bwd);
  }
}

TEST_CASE("ray cells match the segment-clipping oracle") {
  const AgentState x{10, 10};
  for (int k = 0; k < 72; ++k) {
    const double angle = 5.0 * k;
    const auto walked = ray_cells(x, angle, 3.0);
    const auto clipped = oracle::supercover_cells(x, angle, 3.0);
    REQUIRE_MESSAGE(walked.size() == clipped.size(), "angle ", angle);
    for (std::size_t i = 0; i < walked.size(); ++i)
      CHECK_MESSAGE(walked[i] == clipped[i], "angle ", angle, " index ", i);
  }
}

TEST_CASE("45-degree rays include side cells at each corner crossing") {
  const auto cells = ray_cells({5, 5}, 315.0, 3.0);  // toward +row, +col
  REQUIRE(cells.size() == 6);
  CHECK(cells[0] == AgentState{5, 6});
  CHECK(cells[1] == AgentState{6, 5});
  CHECK(cells[2] == AgentState{6, 6});
  CHECK(cells[3] == AgentState{6, 7});
  CHECK(cells[4] == AgentState{7, 6});
  CHECK(cells[5] == AgentState{7, 7});
}

TEST_CASE("union of rays covers the Chebyshev-1 neighborhood") {
  const AgentState x{7, 7};
  std::set<std::pair<int, int>> seen;
  for (int k = 0; k < 72; ++k)
    for (const AgentState& c : ray_cells(x, 5.0 * k, 3.0)) seen.insert({c.row, c.col});
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      CHECK(seen.count({x.row + dr, x.col + dc}) == 1);
    }
}

TEST_CASE("an enclosed agent sees walls at distance one in every ray") {
  SemanticGrid g = free_grid(16, 16);
  const AgentState x{8, 8};
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc)
      if (dr != 0 || dc != 0)
        g.cells[static_cast<std::size_t>(g.index(x.row + dr, x.col + dc))] = kWallClass;
  const PointCloud cloud = scan(g, default_class_set(), x);
  REQUIRE(cloud.points.size() == 72);
  for (const LabeledPoint& p : cloud.points) {
    CHECK(p.is_hit());
    CHECK(p.weights[0] == 1.0);  // wall
    CHECK(std::max(std::abs(p.cell.row - x.row), std::abs(p.cell.col - x.col)) == 1);
  }
}

TEST_CASE("free space scans return zero-weight endpoints at the range limit") {
  const SemanticGrid g = free_grid(16, 16);
  const PointCloud cloud = scan(g, default_class_set(), {8, 8});
  REQUIRE(cloud.points.size() == 72);
  for (const LabeledPoint& p : cloud.points) {
    CHECK(!p.is_hit());
    const double d = std::hypot(static_cast<double>(p.cell.row - 8),
                                static_cast<double>(p.cell.col - 8));
    CHECK(d > 2.0);  // endpoint sits at the range limit, not near the agent
    CHECK(d <= 3.0 + 1.0);
    const auto bar = p.augmented();
    for (double v : bar) CHECK(v == 0.0);
  }
}

TEST_CASE("hits carry the true class of the hit cell") {
  SemanticGrid g = free_grid(12, 12);
  g.cells[static_cast<std::size_t>(g.index(5, 7))] = 3;  // lawn
  g.cells[static_cast<std::size_t>(g.index(7, 5))] = 2;  // lava
  g.cells[static_cast<std::size_t>(g.index(5, 3))] = 1;  // wall
  const ClassSet cs = default_class_set();
  const PointCloud cloud = scan(g, cs, {5, 5});
  bool saw_lawn = false, saw_lava = false, saw_wall = false;
  for (const LabeledPoint& p : cloud.points) {
    if (!p.is_hit()) continue;
    const int cls = g.at(p.cell);
    CHECK(cls != kFreeClass);
    CHECK(p.weights[static_cast<std::size_t>(cls - 1)] == 1.0);
    double sum = 0.0;
    for (double v : p.weights) sum += v;
    CHECK(sum == 1.0);  // one-hot
    saw_lawn |= cls == 3;
    saw_lava |= cls == 2;
    saw_wall |= cls == 1;
  }
  CHECK(saw_lawn);
  CHECK(saw_lava);
  CHECK(saw_wall);
}

TEST_CASE("rays pass through free cells only") {
  SemanticGrid g = free_grid(12, 12);
  g.cells[static_cast<std::size_t>(g.index(5, 7))] = 2;   // lava stops the ray
  g.cells[static_cast<std::size_t>(g.index(5, 8))] = 1;   // hidden wall behind it
  const PointCloud cloud = scan(g, default_class_set(), {5, 5});
  for (const LabeledPoint& p : cloud.points) {
    CHECK(!(p.cell == AgentState{5, 8}));
    if (p.cell == AgentState{5, 7}) CHECK(p.weights[1] == 1.0);
  }
}

TEST_CASE("scanning from a wall cell is rejected, from lawn it is fine") {
  SemanticGrid g = free_grid(12, 12);
  g.cells[static_cast<std::size_t>(g.index(5, 5))] = 3;  // lawn underfoot
  CHECK_NOTHROW(scan(g, default_class_set(), {5, 5}));
  CHECK_THROWS_AS(scan(g, default_class_set(), {0, 0}), Error);  // border wall
}

TEST_CASE("scan output is deterministic") {
  const SemanticGrid g = generate_environment(9, 16, 16, GenParams{}, default_class_set());
  AgentState x{0, 0};
  for (int r = 1; r < 15 && x == AgentState{0, 0}; ++r)
    for (int c = 1; c < 15; ++c)
      if (g.at(r, c) != kWallClass) {
        x = {r, c};
        break;
      }
  const PointCloud a = scan(g, default_class_set(), x);
  const PointCloud b = scan(g, default_class_set(), x);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].cell == b.points[i].cell);
    CHECK(a.points[i].weights == b.points[i].weights);
  }
}

TEST_SUITE_END();
