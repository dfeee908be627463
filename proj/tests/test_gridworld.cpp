#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "oracles.hpp"
#include "semnav/dataset.hpp"
#include "semnav/grid.hpp"
#include "semnav/rng.hpp"

using namespace semnav;

namespace {

GenParams no_rects() {
  GenParams p;
  p.rect_count_min = 0;
  p.rect_count_max = 0;
  return p;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE_BEGIN("gridworld");

TEST_CASE("default class set matches the expert costs") {
  const ClassSet cs = default_class_set();
  CHECK(cs.count() == 4);
  CHECK(cs.labels[0] == "empty");
  CHECK(expert_cost_of_arrival(cs, 0) == 1.0);
  CHECK(expert_cost_of_arrival(cs, 1) == 100.0);
  CHECK(expert_cost_of_arrival(cs, 2) == 10.0);
  CHECK(expert_cost_of_arrival(cs, 3) == 0.5);
  CHECK_THROWS_AS(expert_cost_of_arrival(cs, 4), Error);
  CHECK_THROWS_AS(expert_cost_of_arrival(cs, -1), Error);
}

TEST_CASE("zero rectangles give an all-free interior with a wall border") {
  const SemanticGrid g = generate_environment(0, 16, 16, no_rects(), default_class_set());
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      const bool border = r == 0 || c == 0 || r == 15 || c == 15;
      CHECK(g.at(r, c) == (border ? kWallClass : kFreeClass));
    }
  }
}

TEST_CASE("generation is deterministic in the seed") {
  GenParams p;
  const SemanticGrid a = generate_environment(7, 16, 16, p, default_class_set());
  const SemanticGrid b = generate_environment(7, 16, 16, p, default_class_set());
  CHECK(a.cells == b.cells);
  const SemanticGrid c = generate_environment(8, 16, 16, p, default_class_set());
  CHECK(a.cells != c.cells);
}

TEST_CASE("every generated cell is a known class") {
  const SemanticGrid g = generate_environment(1, 16, 16, GenParams{}, default_class_set());
  for (std::uint8_t c : g.cells) CHECK(c < 4);
}

TEST_CASE("degenerate dimensions are rejected") {
  CHECK_THROWS_AS(generate_environment(0, 3, 16, GenParams{}, default_class_set()), Error);
  GenParams bad;
  bad.rect_count_min = 3;
  bad.rect_count_max = 2;
  CHECK_THROWS_AS(generate_environment(0, 16, 16, bad, default_class_set()), Error);
}

TEST_CASE("step moves to free neighbors and bumps off walls") {
  const SemanticGrid g = generate_environment(0, 16, 16, no_rects(), default_class_set());
  CHECK(step(g, {1, 1}, Control::Right) == AgentState{1, 2});
  CHECK(step(g, {1, 1}, Control::Up) == AgentState{1, 1});    // border wall above
  CHECK(step(g, {1, 1}, Control::Left) == AgentState{1, 1});  // border wall left
  CHECK(step(g, {1, 1}, Control::Down) == AgentState{2, 1});

  AgentState x{5, 5};
  for (int i = 0; i < 4; ++i) x = step(g, x, Control::Right);
  for (int i = 0; i < 4; ++i) x = step(g, x, Control::Left);
  CHECK(x == AgentState{5, 5});
}

TEST_CASE("dynamics never leave the grid") {
  const SemanticGrid g = generate_environment(21, 16, 16, GenParams{}, default_class_set());
  Rng rng(3);
  AgentState x{8, 8};
  for (int i = 0; i < 2000; ++i) {
    x = step(g, x, static_cast<Control>(rng.uniform_int(0, 3)));
    CHECK(g.in_bounds(x));
    CHECK(g.at(x) != kWallClass);
  }
}

TEST_CASE("start == goal yields a zero-length demonstration") {
  const SemanticGrid g = generate_environment(0, 16, 16, no_rects(), default_class_set());
  const auto demo = generate_demonstration(g, {3, 3}, {3, 3}, default_class_set(), SensorParams{});
  REQUIRE(demo.has_value());
  CHECK(demo->length() == 0);
}

TEST_CASE("free-row path length equals the Manhattan distance") {
  // 6x6 with all-free interior: brute-force enumeration confirms the expert
  // cost, and a same-row pair moves straight.
  const SemanticGrid g = generate_environment(0, 6, 6, no_rects(), default_class_set());
  const ClassSet cs = default_class_set();
  const AgentState start{2, 1}, goal{2, 4};
  const auto controls = expert_shortest_path(g, start, goal, cs);
  REQUIRE(controls.has_value());
  CHECK(controls->size() == 3);
  const double expect = oracle::min_path_cost_bruteforce(g, start, goal, cs);
  CHECK(path_arrival_cost(g, start, *controls, cs) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("expert prefers a lawn corridor over a lava corridor") {
  // Two parallel corridors between start and goal: row 1 lava, row 3 lawn.
  SemanticGrid g = generate_environment(0, 7, 5, no_rects(), default_class_set());
  for (int c = 2; c <= 4; ++c) {
    g.cells[static_cast<std::size_t>(g.index(1, c))] = 2;  // lava
    g.cells[static_cast<std::size_t>(g.index(2, c))] = 1;  // wall between corridors
    g.cells[static_cast<std::size_t>(g.index(3, c))] = 3;  // lawn
  }
  const ClassSet cs = default_class_set();
  const AgentState start{2, 1}, goal{2, 5};
  const auto controls = expert_shortest_path(g, start, goal, cs);
  REQUIRE(controls.has_value());
  AgentState x = start;
  bool touched_lawn = false, touched_lava = false;
  for (Control u : *controls) {
    x = step(g, x, u);
    touched_lawn |= g.at(x) == 3;
    touched_lava |= g.at(x) == 2;
  }
  CHECK(touched_lawn);
  CHECK(!touched_lava);
  CHECK(path_arrival_cost(g, start, *controls, cs) ==
        doctest::Approx(oracle::min_path_cost_bruteforce(g, start, goal, cs)).epsilon(1e-12));
}

TEST_CASE("unreachable goals are reported, not fatal") {
  SemanticGrid g = generate_environment(0, 8, 8, no_rects(), default_class_set());
  // Wall off the goal completely.
  for (int r = 4; r <= 6; ++r)
    for (int c = 4; c <= 6; ++c)
      if (r == 4 || c == 4 || r == 6 || c == 6)
        g.cells[static_cast<std::size_t>(g.index(r, c))] = kWallClass;
  const auto demo = generate_demonstration(g, {1, 1}, {5, 5}, default_class_set(), SensorParams{});
  CHECK(!demo.has_value());
}

TEST_CASE("expert matches the brute-force oracle on small random grids") {
  const ClassSet cs = default_class_set();
  GenParams p;
  p.rect_count_min = 1;
  p.rect_count_max = 3;
  p.rect_size_min = 1;
  p.rect_size_max = 3;
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const SemanticGrid g = generate_environment(seed, 6, 6, p, cs);
    std::vector<AgentState> free_cells;
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c)
        if (g.at(r, c) != kWallClass) free_cells.push_back({r, c});
    if (free_cells.size() < 2) continue;
    const AgentState start = free_cells.front(), goal = free_cells.back();
    const auto controls = expert_shortest_path(g, start, goal, cs);
    const double expect = oracle::min_path_cost_bruteforce(g, start, goal, cs);
    if (!controls) {
      CHECK(expect == oracle::kInf);
      continue;
    }
    CHECK(path_arrival_cost(g, start, *controls, cs) == doctest::Approx(expect).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("demonstration replay reproduces the recorded states") {
  DataGenConfig cfg;
  cfg.episodes = 5;
  cfg.seed_base = 100;
  const Dataset ds = generate_dataset(cfg, default_class_set());
  REQUIRE(ds.demos.size() == 5);
  for (const Demonstration& d : ds.demos) {
    AgentState x = d.start;
    for (const DemoStep& s : d.steps) {
      CHECK(s.state == x);
      CHECK(s.scan.origin == x);
      x = step(d.grid, x, s.control);
    }
    CHECK(x == d.goal);
    const int sep = std::abs(d.start.row - d.goal.row) + std::abs(d.start.col - d.goal.col);
    CHECK(sep >= 8);
  }
}

TEST_CASE("dataset round-trips through JSON") {
  DataGenConfig cfg;
  cfg.episodes = 3;
  cfg.seed_base = 42;
  const Dataset ds = generate_dataset(cfg, default_class_set());
  const std::string path = temp_path("semnav_ds_roundtrip.json");
  save_dataset(ds, path);
  const Dataset back = load_dataset(path);
  REQUIRE(back.demos.size() == ds.demos.size());
  for (std::size_t i = 0; i < ds.demos.size(); ++i) {
    CHECK(back.demos[i].grid.cells == ds.demos[i].grid.cells);
    CHECK(back.demos[i].start == ds.demos[i].start);
    CHECK(back.demos[i].goal == ds.demos[i].goal);
    REQUIRE(back.demos[i].steps.size() == ds.demos[i].steps.size());
    for (std::size_t t = 0; t < ds.demos[i].steps.size(); ++t) {
      CHECK(back.demos[i].steps[t].control == ds.demos[i].steps[t].control);
      REQUIRE(back.demos[i].steps[t].scan.points.size() ==
              ds.demos[i].steps[t].scan.points.size());
      for (std::size_t l = 0; l < ds.demos[i].steps[t].scan.points.size(); ++l) {
        CHECK(back.demos[i].steps[t].scan.points[l].cell ==
              ds.demos[i].steps[t].scan.points[l].cell);
        CHECK(back.demos[i].steps[t].scan.points[l].weights ==
              ds.demos[i].steps[t].scan.points[l].weights);
      }
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("empty dataset round-trips") {
  DataGenConfig cfg;
  cfg.episodes = 0;
  const Dataset ds = generate_dataset(cfg, default_class_set());
  const std::string path = temp_path("semnav_ds_empty.json");
  save_dataset(ds, path);
  const Dataset back = load_dataset(path);
  CHECK(back.demos.empty());
  CHECK(back.classes.labels == ds.classes.labels);
  std::filesystem::remove(path);
}

TEST_CASE("truncated and malformed dataset files are schema errors") {
  DataGenConfig cfg;
  cfg.episodes = 2;
  cfg.seed_base = 9;
  const Dataset ds = generate_dataset(cfg, default_class_set());
  const std::string path = temp_path("semnav_ds_trunc.json");
  save_dataset(ds, path);
  std::string text;
  {
    std::ifstream in(path, std::ios::binary);
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  {
    std::ofstream out(path, std::ios::binary);
    out << text.substr(0, text.size() / 2);
  }
  CHECK_THROWS_AS(load_dataset(path), Error);
  {
    std::ofstream out(path, std::ios::binary);
    out << "{\"version\": 99}";
  }
  CHECK_THROWS_AS(load_dataset(path), Error);
  CHECK_THROWS_AS(load_dataset(temp_path("semnav_no_such_file.json")), Error);
  std::filesystem::remove(path);
}

TEST_CASE("dataset generation is deterministic") {
  DataGenConfig cfg;
  cfg.episodes = 4;
  cfg.seed_base = 77;
  const Dataset a = generate_dataset(cfg, default_class_set());
  const Dataset b = generate_dataset(cfg, default_class_set());
  REQUIRE(a.demos.size() == b.demos.size());
  for (std::size_t i = 0; i < a.demos.size(); ++i) {
    CHECK(a.demos[i].grid.cells == b.demos[i].grid.cells);
    CHECK(a.demos[i].start == b.demos[i].start);
    CHECK(a.demos[i].goal == b.demos[i].goal);
  }
}

TEST_SUITE_END();
