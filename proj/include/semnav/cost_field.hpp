#pragma once

#include <vector>

namespace semnav {

/// Per-cell arrival cost over the grid. Non-negative; +infinity marks cells
/// that cannot be entered at all.
struct CostField {
  int width = 0;
  int height = 0;
  std::vector<double> v;

  CostField() = default;
  CostField(int w, int h, double fill = 0.0)
      : width(w), height(h), v(static_cast<std::size_t>(w) * h, fill) {}

  double at(int row, int col) const { return v[static_cast<std::size_t>(row) * width + col]; }
  double& at(int row, int col) { return v[static_cast<std::size_t>(row) * width + col]; }
  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height && col >= 0 && col < width;
  }
};

}  // namespace semnav
