#pragma once

#include <vector>

#include "semnav/grid.hpp"

namespace semnav {

/// One sensor return: the hit cell and a length-K class weight vector
/// (one-hot for hits, all-zero for rays that exhaust their range in free
/// space). The augmented vector [0, weights] matches the map encoder's
/// log-odds layout.
struct LabeledPoint {
  AgentState cell;
  std::vector<double> weights;

  bool is_hit() const {
    for (double w : weights)
      if (w != 0.0) return true;
    return false;
  }
  std::vector<double> augmented() const {
    std::vector<double> y(weights.size() + 1, 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) y[i + 1] = weights[i];
    return y;
  }
};

struct PointCloud {
  AgentState origin;
  std::vector<LabeledPoint> points;
};

struct SensorParams {
  int ray_count = 72;
  double angular_res_deg = 5.0;
  double max_range = 3.0;  // cells
};

/// Cells crossed by a ray from the center of x, in traversal order, excluding
/// x's own cell. Angles are degrees from the +x (column) axis, counter
/// clockwise (90 degrees decreases the row). Supercover traversal: at an
/// exact corner crossing both side cells are emitted (sorted by row, then
/// column) before the diagonal cell. Cells entered within max_range are
/// included; the result is pure geometry and may extend outside any grid.
std::vector<AgentState> ray_cells(AgentState x, double angle_deg, double max_range);

/// Supercover walk toward an arbitrary direction (unit vectors not required).
std::vector<AgentState> ray_cells_toward(AgentState x, double dx, double dy, double max_range);

/// 360-degree semantic scan. Each ray stops at the first non-free cell and
/// returns it with a one-hot label; rays that exhaust max_range return the
/// last traversed cell with an all-zero weight vector.
PointCloud scan(const SemanticGrid& grid, const ClassSet& classes, AgentState x,
                const SensorParams& params = {});

}  // namespace semnav
