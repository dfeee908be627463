#include "semnav/dataset.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "semnav/rng.hpp"

namespace semnav {

using nlohmann::json;

std::optional<Demonstration> generate_demonstration(const SemanticGrid& grid, AgentState start,
                                                    AgentState goal, const ClassSet& classes,
                                                    const SensorParams& sensor) {
  if (grid.is_wall(start) || grid.is_wall(goal))
    throw Error("generate_demonstration: start and goal must be traversable");
  auto controls = expert_shortest_path(grid, start, goal, classes);
  if (!controls) return std::nullopt;

  Demonstration demo;
  demo.grid = grid;
  demo.start = start;
  demo.goal = goal;
  AgentState x = start;
  for (Control u : *controls) {
    DemoStep s;
    s.state = x;
    s.control = u;
    s.scan = scan(grid, classes, x, sensor);
    demo.steps.push_back(std::move(s));
    x = step(grid, x, u);
  }
  if (!(x == goal)) throw Error("generate_demonstration: replay did not reach the goal");
  return demo;
}

Dataset generate_dataset(const DataGenConfig& config, const ClassSet& classes) {
  Dataset ds;
  ds.classes = classes;
  ds.gen_params = config.gen_params;
  ds.width = config.width;
  ds.height = config.height;
  ds.sensor = config.sensor;

  const int min_sep =
      config.min_separation >= 0 ? config.min_separation : std::max(config.width, config.height) / 2;

  std::uint64_t seed = config.seed_base;
  while (static_cast<int>(ds.demos.size()) < config.episodes) {
    const std::uint64_t episode_seed = seed++;
    SemanticGrid grid =
        generate_environment(episode_seed, config.width, config.height, config.gen_params, classes);

    std::vector<AgentState> free_cells;
    for (int r = 0; r < grid.height; ++r)
      for (int c = 0; c < grid.width; ++c)
        if (grid.at(r, c) == kFreeClass) free_cells.push_back({r, c});
    if (free_cells.size() < 2) continue;

    Rng rng(episode_seed ^ 0x5eed5eedull);
    bool placed = false;
    AgentState start{}, goal{};
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
      start = free_cells[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(free_cells.size()) - 1))];
      goal = free_cells[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(free_cells.size()) - 1))];
      const int sep = std::abs(start.row - goal.row) + std::abs(start.col - goal.col);
      if (sep >= min_sep) placed = true;
    }
    if (!placed) continue;

    auto demo = generate_demonstration(grid, start, goal, classes, config.sensor);
    if (!demo) continue;  // no feasible path: discard the map
    ds.demos.push_back(std::move(*demo));
  }
  return ds;
}

namespace {

json cloud_to_json(const PointCloud& cloud) {
  json pts = json::array();
  for (const LabeledPoint& p : cloud.points) {
    json row = json::array();
    row.push_back(p.cell.row);
    row.push_back(p.cell.col);
    json w = json::array();
    for (double v : p.weights) w.push_back(v);
    row.push_back(std::move(w));
    pts.push_back(std::move(row));
  }
  return pts;
}

PointCloud cloud_from_json(const json& j, AgentState origin, int k) {
  PointCloud cloud;
  cloud.origin = origin;
  for (const json& row : j) {
    if (!row.is_array() || row.size() != 3) throw Error("dataset: malformed scan point");
    LabeledPoint p;
    p.cell.row = row[0].get<int>();
    p.cell.col = row[1].get<int>();
    p.weights = row[2].get<std::vector<double>>();
    if (static_cast<int>(p.weights.size()) != k) throw Error("dataset: scan weight length mismatch");
    cloud.points.push_back(std::move(p));
  }
  return cloud;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  json root;
  root["version"] = 1;
  root["classes"] = ds.classes.labels;
  root["expert_costs"] = ds.classes.expert_costs;
  root["grid_params"] = {
      {"width", ds.width},
      {"height", ds.height},
      {"rect_count", {ds.gen_params.rect_count_min, ds.gen_params.rect_count_max}},
      {"rect_size", {ds.gen_params.rect_size_min, ds.gen_params.rect_size_max}},
      {"class_weights", ds.gen_params.class_weights},
  };
  root["sensor"] = {{"ray_count", ds.sensor.ray_count},
                    {"angular_res_deg", ds.sensor.angular_res_deg},
                    {"max_range", ds.sensor.max_range}};

  json demos = json::array();
  for (const Demonstration& d : ds.demos) {
    json jd;
    jd["grid_seed"] = d.grid.seed;
    jd["width"] = d.grid.width;
    jd["height"] = d.grid.height;
    jd["cells"] = d.grid.cells;
    jd["start"] = {d.start.row, d.start.col};
    jd["goal"] = {d.goal.row, d.goal.col};
    json steps = json::array();
    for (const DemoStep& s : d.steps) {
      json js;
      js["u"] = static_cast<int>(s.control);
      js["scan"] = cloud_to_json(s.scan);
      steps.push_back(std::move(js));
    }
    jd["steps"] = std::move(steps);
    demos.push_back(std::move(jd));
  }
  root["demonstrations"] = std::move(demos);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_dataset: cannot open " + path);
  out << root.dump();
  out << "\n";
  if (!out) throw Error("save_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_dataset: cannot open " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(std::string("load_dataset: parse error: ") + e.what());
  }
  try {
    if (!root.contains("version") || root["version"].get<int>() != 1)
      throw Error("load_dataset: unsupported schema version");

    Dataset ds;
    ds.classes.labels = root.at("classes").get<std::vector<std::string>>();
    ds.classes.expert_costs = root.at("expert_costs").get<std::vector<double>>();
    ds.classes.validate();
    const json& gp = root.at("grid_params");
    ds.width = gp.at("width").get<int>();
    ds.height = gp.at("height").get<int>();
    ds.gen_params.rect_count_min = gp.at("rect_count")[0].get<int>();
    ds.gen_params.rect_count_max = gp.at("rect_count")[1].get<int>();
    ds.gen_params.rect_size_min = gp.at("rect_size")[0].get<int>();
    ds.gen_params.rect_size_max = gp.at("rect_size")[1].get<int>();
    ds.gen_params.class_weights = gp.at("class_weights").get<std::vector<double>>();
    const json& sj = root.at("sensor");
    ds.sensor.ray_count = sj.at("ray_count").get<int>();
    ds.sensor.angular_res_deg = sj.at("angular_res_deg").get<double>();
    ds.sensor.max_range = sj.at("max_range").get<double>();

    const int k = ds.classes.count() - 1;
    for (const json& jd : root.at("demonstrations")) {
      Demonstration d;
      d.grid.seed = jd.at("grid_seed").get<std::uint64_t>();
      d.grid.width = jd.at("width").get<int>();
      d.grid.height = jd.at("height").get<int>();
      d.grid.cells = jd.at("cells").get<std::vector<std::uint8_t>>();
      if (d.grid.cells.size() != static_cast<std::size_t>(d.grid.width) * d.grid.height)
        throw Error("load_dataset: cell array size mismatch");
      for (std::uint8_t c : d.grid.cells)
        if (c >= ds.classes.count()) throw Error("load_dataset: cell class out of range");

      // Stored grids must agree with regeneration from their seed.
      SemanticGrid regen =
          generate_environment(d.grid.seed, d.grid.width, d.grid.height, ds.gen_params, ds.classes);
      if (regen.cells != d.grid.cells)
        throw Error("load_dataset: stored grid disagrees with regeneration from seed");

      d.start = {jd.at("start")[0].get<int>(), jd.at("start")[1].get<int>()};
      d.goal = {jd.at("goal")[0].get<int>(), jd.at("goal")[1].get<int>()};
      AgentState x = d.start;
      for (const json& js : jd.at("steps")) {
        DemoStep s;
        s.state = x;
        const int u = js.at("u").get<int>();
        if (u < 0 || u >= kNumControls) throw Error("load_dataset: control index out of range");
        s.control = static_cast<Control>(u);
        s.scan = cloud_from_json(js.at("scan"), x, k);
        x = step(d.grid, x, s.control);
        d.steps.push_back(std::move(s));
      }
      if (!(x == d.goal)) throw Error("load_dataset: replayed controls do not reach the goal");
      ds.demos.push_back(std::move(d));
    }
    return ds;
  } catch (const json::exception& e) {
    throw Error(std::string("load_dataset: schema error: ") + e.what());
  }
}

}  // namespace semnav
