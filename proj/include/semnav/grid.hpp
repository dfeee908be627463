#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace semnav {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// 4-connected control set, in the fixed tie-break order used everywhere.
enum class Control : int { Up = 0, Down = 1, Left = 2, Right = 3 };

inline constexpr int kNumControls = 4;
inline constexpr int kFreeClass = 0;
inline constexpr int kWallClass = 1;

constexpr int row_delta(Control u) {
  return u == Control::Up ? -1 : (u == Control::Down ? 1 : 0);
}
constexpr int col_delta(Control u) {
  return u == Control::Left ? -1 : (u == Control::Right ? 1 : 0);
}

const char* control_name(Control u);

struct AgentState {
  int row = 0;
  int col = 0;

  friend bool operator==(const AgentState&, const AgentState&) = default;
  friend auto operator<=>(const AgentState&, const AgentState&) = default;
};

/// Semantic class catalog. Index 0 is always the free class; expert costs are
/// the per-class cost of arriving at a cell of that class.
struct ClassSet {
  std::vector<std::string> labels;
  std::vector<double> expert_costs;

  int count() const { return static_cast<int>(labels.size()); }  // K+1
  void validate() const;
};

/// empty/wall/lava/lawn with arrival costs 1/100/10/0.5.
ClassSet default_class_set();

/// Ground-truth class label per cell, row-major. Border cells are wall.
struct SemanticGrid {
  int width = 0;
  int height = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> cells;

  int index(int row, int col) const { return row * width + col; }
  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height && col >= 0 && col < width;
  }
  bool in_bounds(AgentState x) const { return in_bounds(x.row, x.col); }
  std::uint8_t at(int row, int col) const { return cells[static_cast<std::size_t>(index(row, col))]; }
  std::uint8_t at(AgentState x) const { return at(x.row, x.col); }
  bool is_wall(AgentState x) const { return !in_bounds(x) || at(x) == kWallClass; }
};

struct GenParams {
  int rect_count_min = 2;
  int rect_count_max = 6;
  int rect_size_min = 2;
  int rect_size_max = 6;
  std::vector<double> class_weights;  // over classes 1..K; empty = uniform
};

/// Procedural environment: free background, wall border, random rectangles of
/// non-free classes (later rectangles overwrite earlier ones). Deterministic
/// for a fixed seed.
SemanticGrid generate_environment(std::uint64_t seed, int width, int height,
                                  const GenParams& params, const ClassSet& classes);

/// Deterministic dynamics: the 4-neighbor in direction u, or x itself when
/// that neighbor is a wall.
AgentState step(const SemanticGrid& grid, AgentState x, Control u);

double expert_cost_of_arrival(const ClassSet& classes, int class_index);

/// Minimum-arrival-cost control sequence from start to goal, walls not
/// traversable. Ties broken by control order (up, down, left, right), then by
/// row-major cell order. nullopt when the goal is unreachable.
std::optional<std::vector<Control>> expert_shortest_path(const SemanticGrid& grid,
                                                         AgentState start, AgentState goal,
                                                         const ClassSet& classes);

/// Total arrival cost of replaying `controls` from `start` through true
/// dynamics (used by tests and evaluation).
double path_arrival_cost(const SemanticGrid& grid, AgentState start,
                         const std::vector<Control>& controls, const ClassSet& classes);

}  // namespace semnav
