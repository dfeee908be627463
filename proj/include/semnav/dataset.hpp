#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semnav/grid.hpp"
#include "semnav/sensor.hpp"

namespace semnav {

struct DemoStep {
  AgentState state;
  Control control;
  PointCloud scan;
};

/// One expert episode: the grid it was recorded on, start/goal, and the
/// per-step (state, control, scan) triples. Replaying the controls from start
/// through true dynamics reproduces the state sequence and ends at goal.
struct Demonstration {
  SemanticGrid grid;
  AgentState start;
  AgentState goal;
  std::vector<DemoStep> steps;

  int length() const { return static_cast<int>(steps.size()); }
};

struct Dataset {
  ClassSet classes;
  GenParams gen_params;
  int width = 0;
  int height = 0;
  SensorParams sensor;
  std::vector<Demonstration> demos;
};

/// Expert episode on a fixed grid, or nullopt when the goal is unreachable.
/// The scan at each visited state (excluding the goal) is recorded.
std::optional<Demonstration> generate_demonstration(const SemanticGrid& grid, AgentState start,
                                                    AgentState goal, const ClassSet& classes,
                                                    const SensorParams& sensor);

struct DataGenConfig {
  int episodes = 0;
  std::uint64_t seed_base = 0;
  int width = 16;
  int height = 16;
  GenParams gen_params;
  SensorParams sensor;
  int min_separation = -1;  // Manhattan; default = half the grid side
};

/// Procedurally generated episodes. Seeds are consumed sequentially starting
/// at seed_base; infeasible start/goal draws and unreachable pairs are
/// discarded, so the output is deterministic in (config).
Dataset generate_dataset(const DataGenConfig& config, const ClassSet& classes);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace semnav
