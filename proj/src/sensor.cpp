#include "semnav/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semnav {

namespace {

constexpr double kSnap = 1e-12;
constexpr double kTieEps = 1e-9;

// Direction components snapped so that axis-aligned and 45-degree rays hit
// cell boundaries and corners exactly.
void snapped_direction(double angle_deg, double& dx, double& dy) {
  const double rad = angle_deg * M_PI / 180.0;
  dx = std::cos(rad);
  dy = -std::sin(rad);  // +angle turns toward decreasing row
  if (std::abs(dx) < kSnap) dx = 0.0;
  if (std::abs(dy) < kSnap) dy = 0.0;
  if (std::abs(std::abs(dx) - 1.0) < kSnap) dx = dx > 0 ? 1.0 : -1.0;
  if (std::abs(std::abs(dy) - 1.0) < kSnap) dy = dy > 0 ? 1.0 : -1.0;
  if (dx != 0.0 && dy != 0.0 && std::abs(std::abs(dx) - std::abs(dy)) < kSnap) {
    const double m = M_SQRT1_2;
    dx = dx > 0 ? m : -m;
    dy = dy > 0 ? m : -m;
  }
}

}  // namespace

std::vector<AgentState> ray_cells_toward(AgentState x, double dx, double dy, double max_range) {
  std::vector<AgentState> out;
  if (dx == 0.0 && dy == 0.0) return out;
  const double inf = std::numeric_limits<double>::infinity();

  int col = x.col, row = x.row;
  const int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  // Ray starts at the cell center; first boundary is half a cell away.
  double t_max_x = sx != 0 ? 0.5 / std::abs(dx) : inf;
  double t_max_y = sy != 0 ? 0.5 / std::abs(dy) : inf;
  const double t_delta_x = sx != 0 ? 1.0 / std::abs(dx) : inf;
  const double t_delta_y = sy != 0 ? 1.0 / std::abs(dy) : inf;

  while (true) {
    const double t = std::min(t_max_x, t_max_y);
    if (t > max_range + kTieEps) break;
    if (sx != 0 && sy != 0 && std::abs(t_max_x - t_max_y) < kTieEps) {
      // Corner crossing: both side cells touch the ray at this point.
      AgentState a{row, col + sx};
      AgentState b{row + sy, col};
      if (b < a) std::swap(a, b);
      out.push_back(a);
      out.push_back(b);
      col += sx;
      row += sy;
      t_max_x += t_delta_x;
      t_max_y += t_delta_y;
    } else if (t_max_x < t_max_y) {
      col += sx;
      t_max_x += t_delta_x;
    } else {
      row += sy;
      t_max_y += t_delta_y;
    }
    out.push_back({row, col});
  }
  return out;
}

std::vector<AgentState> ray_cells(AgentState x, double angle_deg, double max_range) {
  double dx = 0.0, dy = 0.0;
  snapped_direction(angle_deg, dx, dy);
  return ray_cells_toward(x, dx, dy, max_range);
}

PointCloud scan(const SemanticGrid& grid, const ClassSet& classes, AgentState x,
                const SensorParams& params) {
  if (!grid.in_bounds(x) || grid.at(x) == kWallClass)
    throw Error("scan: sensor origin must be a traversable cell");
  const int k = classes.count() - 1;

  PointCloud cloud;
  cloud.origin = x;
  cloud.points.reserve(static_cast<std::size_t>(params.ray_count));
  for (int i = 0; i < params.ray_count; ++i) {
    const double angle = params.angular_res_deg * i;
    const auto cells = ray_cells(x, angle, params.max_range);
    LabeledPoint pt;
    pt.weights.assign(static_cast<std::size_t>(k), 0.0);
    pt.cell = x;
    for (const AgentState& cell : cells) {
      if (!grid.in_bounds(cell)) break;
      pt.cell = cell;
      const int cls = grid.at(cell);
      if (cls != kFreeClass) {
        pt.weights[static_cast<std::size_t>(cls - 1)] = 1.0;
        break;
      }
    }
    cloud.points.push_back(std::move(pt));
  }
  return cloud;
}

}  // namespace semnav
