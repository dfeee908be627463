#include "semnav/grid.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "semnav/rng.hpp"

namespace semnav {

const char* control_name(Control u) {
  switch (u) {
    case Control::Up: return "up";
    case Control::Down: return "down";
    case Control::Left: return "left";
    case Control::Right: return "right";
  }
  return "?";
}

void ClassSet::validate() const {
  if (labels.empty() || labels.size() != expert_costs.size())
    throw Error("class set: labels and expert costs must be nonempty and aligned");
  for (double c : expert_costs)
    if (!(c > 0.0)) throw Error("class set: expert costs must be strictly positive");
  double max_traversable = 0.0;
  for (std::size_t i = 0; i < expert_costs.size(); ++i)
    if (i != kWallClass) max_traversable = std::max(max_traversable, expert_costs[i]);
  if (expert_costs.size() > kWallClass && expert_costs[kWallClass] < max_traversable)
    throw Error("class set: wall cost must dominate traversable costs");
}

ClassSet default_class_set() {
  ClassSet cs;
  cs.labels = {"empty", "wall", "lava", "lawn"};
  cs.expert_costs = {1.0, 100.0, 10.0, 0.5};
  return cs;
}

SemanticGrid generate_environment(std::uint64_t seed, int width, int height,
                                  const GenParams& params, const ClassSet& classes) {
  if (width < 4 || height < 4)
    throw Error("generate_environment: width and height must be at least 4");
  if (params.rect_count_min > params.rect_count_max || params.rect_count_min < 0)
    throw Error("generate_environment: empty rectangle count range");
  if (params.rect_size_min > params.rect_size_max || params.rect_size_min < 1)
    throw Error("generate_environment: empty rectangle size range");
  classes.validate();

  SemanticGrid g;
  g.width = width;
  g.height = height;
  g.seed = seed;
  g.cells.assign(static_cast<std::size_t>(width) * height, kFreeClass);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (r == 0 || c == 0 || r == height - 1 || c == width - 1)
        g.cells[static_cast<std::size_t>(g.index(r, c))] = kWallClass;
    }
  }

  const int num_nonfree = classes.count() - 1;
  std::vector<double> weights = params.class_weights;
  if (weights.empty()) weights.assign(static_cast<std::size_t>(num_nonfree), 1.0);
  if (static_cast<int>(weights.size()) != num_nonfree)
    throw Error("generate_environment: class weights must cover classes 1..K");

  Rng rng(seed);
  const int n_rects = static_cast<int>(rng.uniform_int(params.rect_count_min, params.rect_count_max));
  for (int i = 0; i < n_rects; ++i) {
    const int cls = 1 + rng.pick_weighted(weights);
    int rw = static_cast<int>(rng.uniform_int(params.rect_size_min, params.rect_size_max));
    int rh = static_cast<int>(rng.uniform_int(params.rect_size_min, params.rect_size_max));
    rw = std::min(rw, width - 2);
    rh = std::min(rh, height - 2);
    const int r0 = static_cast<int>(rng.uniform_int(1, height - 1 - rh));
    const int c0 = static_cast<int>(rng.uniform_int(1, width - 1 - rw));
    for (int r = r0; r < r0 + rh; ++r)
      for (int c = c0; c < c0 + rw; ++c)
        g.cells[static_cast<std::size_t>(g.index(r, c))] = static_cast<std::uint8_t>(cls);
  }
  return g;
}

AgentState step(const SemanticGrid& grid, AgentState x, Control u) {
  AgentState next{x.row + row_delta(u), x.col + col_delta(u)};
  if (grid.is_wall(next)) return x;
  return next;
}

double expert_cost_of_arrival(const ClassSet& classes, int class_index) {
  if (class_index < 0 || class_index >= classes.count())
    throw Error("expert_cost_of_arrival: class index out of range");
  return classes.expert_costs[static_cast<std::size_t>(class_index)];
}

std::optional<std::vector<Control>> expert_shortest_path(const SemanticGrid& grid,
                                                         AgentState start, AgentState goal,
                                                         const ClassSet& classes) {
  const int n = grid.width * grid.height;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(n), inf);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::vector<Control> via(static_cast<std::size_t>(n), Control::Up);
  std::vector<char> done(static_cast<std::size_t>(n), 0);

  const int s = grid.index(start.row, start.col);
  const int t = grid.index(goal.row, goal.col);
  dist[static_cast<std::size_t>(s)] = 0.0;

  // (dist, cell index) min-heap; index tie-break keeps expansion deterministic.
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> open;
  open.push({0.0, s});
  while (!open.empty()) {
    auto [d, idx] = open.top();
    open.pop();
    if (done[static_cast<std::size_t>(idx)]) continue;
    done[static_cast<std::size_t>(idx)] = 1;
    if (idx == t) break;
    const AgentState x{idx / grid.width, idx % grid.width};
    for (int ui = 0; ui < kNumControls; ++ui) {
      const Control u = static_cast<Control>(ui);
      const AgentState y{x.row + row_delta(u), x.col + col_delta(u)};
      if (!grid.in_bounds(y) || grid.at(y) == kWallClass) continue;
      const int yi = grid.index(y.row, y.col);
      const double nd = d + expert_cost_of_arrival(classes, grid.at(y));
      if (nd < dist[static_cast<std::size_t>(yi)]) {
        dist[static_cast<std::size_t>(yi)] = nd;
        parent[static_cast<std::size_t>(yi)] = idx;
        via[static_cast<std::size_t>(yi)] = u;
        open.push({nd, yi});
      }
    }
  }
  if (dist[static_cast<std::size_t>(t)] == inf) return std::nullopt;

  std::vector<Control> controls;
  for (int cur = t; cur != s; cur = parent[static_cast<std::size_t>(cur)])
    controls.push_back(via[static_cast<std::size_t>(cur)]);
  std::reverse(controls.begin(), controls.end());
  return controls;
}

double path_arrival_cost(const SemanticGrid& grid, AgentState start,
                         const std::vector<Control>& controls, const ClassSet& classes) {
  double total = 0.0;
  AgentState x = start;
  for (Control u : controls) {
    x = step(grid, x, u);
    total += expert_cost_of_arrival(classes, grid.at(x));
  }
  return total;
}

}  // namespace semnav
