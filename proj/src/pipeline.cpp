#include "semnav/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "semnav/dataset.hpp"
#include "semnav/image.hpp"
#include "semnav/learner.hpp"
#include "semnav/metrics.hpp"
#include "semnav/planner.hpp"
#include "semnav/policy_lab.hpp"
#include "semnav/rng.hpp"
#include "semnav/semantic_map.hpp"

namespace semnav {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json parse_config(const std::string& config_json) {
  if (config_json.empty()) return json::object();
  json j = json::parse(config_json, nullptr, false);
  if (j.is_discarded()) throw Error("config: invalid JSON");
  if (!j.is_object()) throw Error("config: top level must be an object");
  return j;
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

json section(const json& j, const std::string& key) {
  return j.contains(key) ? j.at(key) : json::object();
}

struct CommonConfig {
  std::uint64_t seed = 1;
  std::string out = "out";
  int width = 16;
  int height = 16;
  GenParams gen;
  SensorParams sensor;
  double epsilon = 0.5;
  UpdateMode mode = UpdateMode::AlongRay;
  std::string data_dir;
};

CommonConfig common_config(const json& j) {
  CommonConfig c;
  c.seed = get_or<std::uint64_t>(j, "seed", 1);
  c.out = get_or<std::string>(j, "out", "out");
  const json g = section(j, "grid");
  c.width = get_or<int>(g, "width", 16);
  c.height = get_or<int>(g, "height", 16);
  if (g.contains("rect_count")) {
    c.gen.rect_count_min = g.at("rect_count")[0].get<int>();
    c.gen.rect_count_max = g.at("rect_count")[1].get<int>();
  }
  if (g.contains("rect_size")) {
    c.gen.rect_size_min = g.at("rect_size")[0].get<int>();
    c.gen.rect_size_max = g.at("rect_size")[1].get<int>();
  }
  if (g.contains("class_weights"))
    c.gen.class_weights = g.at("class_weights").get<std::vector<double>>();
  const json s = section(j, "sensor");
  c.sensor.ray_count = get_or<int>(s, "rays", 72);
  c.sensor.angular_res_deg = get_or<double>(s, "angular_res_deg", 5.0);
  c.sensor.max_range = get_or<double>(s, "max_range", 3.0);
  const json m = section(j, "map");
  c.epsilon = get_or<double>(m, "epsilon", 0.5);
  c.mode = get_or<std::string>(m, "mode", "along_ray") == "endpoint" ? UpdateMode::EndpointOnly
                                                                     : UpdateMode::AlongRay;
  c.data_dir = get_or<std::string>(j, "data_dir", c.out + "/data");
  return c;
}

json resolved_common(const CommonConfig& c) {
  return json{
      {"seed", c.seed},
      {"out", c.out},
      {"data_dir", c.data_dir},
      {"grid",
       {{"width", c.width},
        {"height", c.height},
        {"rect_count", {c.gen.rect_count_min, c.gen.rect_count_max}},
        {"rect_size", {c.gen.rect_size_min, c.gen.rect_size_max}},
        {"class_weights", c.gen.class_weights}}},
      {"sensor",
       {{"rays", c.sensor.ray_count},
        {"angular_res_deg", c.sensor.angular_res_deg},
        {"max_range", c.sensor.max_range}}},
      {"map",
       {{"epsilon", c.epsilon},
        {"mode", c.mode == UpdateMode::EndpointOnly ? "endpoint" : "along_ray"}}},
  };
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path);
  out << text;
  if (!out) throw Error("write failed for " + path);
}

void echo_config(const std::string& out_dir, const json& resolved) {
  fs::create_directories(out_dir);
  write_text(out_dir + "/resolved_config.json", resolved.dump(2) + "\n");
}

/// Arrival-cost field of the true environment: expert costs per class, with
/// walls impassable.
CostField oracle_cost_field(const SemanticGrid& grid, const ClassSet& classes) {
  CostField cost(grid.width, grid.height);
  for (int r = 0; r < grid.height; ++r)
    for (int c = 0; c < grid.width; ++c) {
      const int cls = grid.at(r, c);
      cost.at(r, c) = cls == kWallClass ? kInf : expert_cost_of_arrival(classes, cls);
    }
  return cost;
}

}  // namespace

std::string cmd_gen_data(const std::string& config_json) {
  const json j = parse_config(config_json);
  const CommonConfig c = common_config(j);
  const json d = section(j, "data");
  const int n_train = get_or<int>(d, "train", 500);
  const int n_val = get_or<int>(d, "val", 100);
  const int n_test = get_or<int>(d, "test", 100);
  const int min_sep = get_or<int>(d, "min_separation", -1);

  json resolved = resolved_common(c);
  resolved["data"] = {{"train", n_train}, {"val", n_val}, {"test", n_test},
                      {"min_separation", min_sep}};
  echo_config(c.out, resolved);
  fs::create_directories(c.data_dir);

  const ClassSet classes = default_class_set();
  const std::uint64_t base = c.seed * 100000000ull;
  auto make = [&](int episodes, std::uint64_t seed_base) {
    DataGenConfig cfg;
    cfg.episodes = episodes;
    cfg.seed_base = seed_base;
    cfg.width = c.width;
    cfg.height = c.height;
    cfg.gen_params = c.gen;
    cfg.sensor = c.sensor;
    cfg.min_separation = min_sep;
    return generate_dataset(cfg, classes);
  };
  const Dataset train = make(n_train, base);
  const Dataset val = make(n_val, base + 10000000ull);
  const Dataset test = make(n_test, base + 20000000ull);
  save_dataset(train, c.data_dir + "/train.json");
  save_dataset(val, c.data_dir + "/val.json");
  save_dataset(test, c.data_dir + "/test.json");

  auto steps_of = [](const Dataset& ds) {
    int s = 0;
    for (const auto& demo : ds.demos) s += demo.length();
    return s;
  };
  json summary = {
      {"train", {{"episodes", static_cast<int>(train.demos.size())}, {"steps", steps_of(train)}}},
      {"val", {{"episodes", static_cast<int>(val.demos.size())}, {"steps", steps_of(val)}}},
      {"test", {{"episodes", static_cast<int>(test.demos.size())}, {"steps", steps_of(test)}}},
      {"dir", c.data_dir},
  };
  return summary.dump();
}

std::string cmd_train(const std::string& config_json) {
  const json j = parse_config(config_json);
  const CommonConfig c = common_config(j);
  const json t = section(j, "train");

  TrainConfig cfg;
  cfg.alpha = get_or<double>(t, "alpha", 1.0);
  cfg.adam.lr = get_or<double>(t, "lr", 3e-3);
  cfg.adam.beta1 = get_or<double>(t, "beta1", 0.9);
  cfg.adam.beta2 = get_or<double>(t, "beta2", 0.999);
  cfg.adam.eps = get_or<double>(t, "eps_adam", 1e-8);
  cfg.epochs = get_or<int>(t, "epochs", 10);
  cfg.batch_size = get_or<int>(t, "batch", 8);
  cfg.seed = c.seed;
  cfg.jobs = get_or<int>(t, "jobs", 0);
  cfg.loss_clamp = get_or<double>(t, "loss_clamp", 50.0);
  cfg.checkpoint_every = get_or<int>(t, "checkpoint_every", 0);
  cfg.out_dir = c.out;
  cfg.verbose = get_or<bool>(t, "verbose", false);
  const std::string train_path = get_or<std::string>(t, "train_data", c.data_dir + "/train.json");
  const std::string val_path = get_or<std::string>(t, "val_data", c.data_dir + "/val.json");
  const std::string resume = get_or<std::string>(t, "resume", "");

  json resolved = resolved_common(c);
  resolved["train"] = {{"alpha", cfg.alpha},        {"lr", cfg.adam.lr},
                       {"beta1", cfg.adam.beta1},   {"beta2", cfg.adam.beta2},
                       {"eps_adam", cfg.adam.eps},  {"epochs", cfg.epochs},
                       {"batch", cfg.batch_size},   {"loss_clamp", cfg.loss_clamp},
                       {"train_data", train_path},  {"val_data", val_path},
                       {"checkpoint_every", cfg.checkpoint_every}, {"resume", resume}};
  echo_config(c.out, resolved);

  const Dataset train_ds = load_dataset(train_path);
  const Dataset val_ds = load_dataset(val_path);

  Model model;
  Adam adam(cfg.adam);
  if (resume.empty()) {
    model = make_model(train_ds.classes, train_ds.sensor, c.seed, c.mode, c.epsilon);
    save_checkpoint(c.out + "/checkpoint_init.json", model, nullptr, -1);
  } else {
    Checkpoint ck = load_checkpoint(resume);
    model = std::move(ck.model);
    if (ck.has_adam) {
      adam.config() = *ck.adam_config;
      adam.t_ = ck.adam_t;
      adam.m_ = std::move(ck.adam_m);
      adam.v_ = std::move(ck.adam_v);
    }
    cfg.start_epoch = ck.epoch + 1;
  }

  const TrainResult result = train(model, adam, train_ds, val_ds, cfg);

  json summary;
  summary["epochs_run"] = cfg.epochs - cfg.start_epoch;
  summary["best_epoch"] = result.best_epoch;
  summary["best_val_nll"] = result.best_val_nll;
  if (!result.history.empty()) {
    for (auto it = result.history.rbegin(); it != result.history.rend(); ++it) {
      if (it->split == "val") {
        summary["final_val_nll"] = it->nll;
        summary["final_val_acc"] = it->acc;
        break;
      }
    }
  }
  summary["checkpoint_best"] = c.out + "/checkpoint_best.json";
  summary["checkpoint_last"] = c.out + "/checkpoint_last.json";
  summary["metrics_csv"] = c.out + "/metrics.csv";
  return summary.dump();
}

std::string cmd_eval(const std::string& config_json) {
  const json j = parse_config(config_json);
  const CommonConfig c = common_config(j);
  const json e = section(j, "eval");
  const std::string checkpoint = get_or<std::string>(e, "checkpoint", c.out + "/checkpoint_best.json");
  const std::string test_path = get_or<std::string>(e, "test_data", c.data_dir + "/test.json");
  const bool oracle = get_or<bool>(e, "oracle_cost", false);
  const int limit = get_or<int>(e, "episodes", -1);
  const double alpha = get_or<double>(e, "alpha", 1.0);

  json resolved = resolved_common(c);
  resolved["eval"] = {{"checkpoint", checkpoint},
                      {"test_data", test_path},
                      {"oracle_cost", oracle},
                      {"episodes", limit},
                      {"alpha", alpha}};
  echo_config(c.out, resolved);

  const Dataset test_ds = load_dataset(test_path);
  Model model;
  if (!oracle) model = load_checkpoint(checkpoint).model;

  const std::size_t n_eps =
      limit < 0 ? test_ds.demos.size() : std::min<std::size_t>(test_ds.demos.size(), limit);

  std::vector<Policy> policies;
  std::vector<Control> controls;
  std::vector<RolloutOutcome> outcomes;
  std::vector<Trajectory> agent_trajs, expert_trajs;
  json per_episode = json::array();

  for (std::size_t i = 0; i < n_eps; ++i) {
    const Demonstration& demo = test_ds.demos[i];
    const CostField oracle_cost = oracle_cost_field(demo.grid, test_ds.classes);

    // Validation-style metrics: policies at each demonstrated state.
    if (oracle) {
      for (const DemoStep& ds : demo.steps) {
        const PlanResult pr = plan(ds.state, demo.goal, oracle_cost);
        policies.push_back(boltzmann(pr.q, alpha));
        controls.push_back(ds.control);
      }
    } else {
      const EpisodeTape tape = episode_pass(model, demo, 50.0, nullptr);
      for (const StepRecord& rec : tape.steps) {
        policies.push_back(rec.pi);
        controls.push_back(rec.u_star);
      }
    }

    // Test-style metrics: closed-loop rollout.
    const int cap = std::max(1, 2 * demo.length());
    const RolloutResult rr = oracle ? rollout_with_cost(demo.grid, demo.start, demo.goal,
                                                        oracle_cost, cap)
                                    : rollout(demo.grid, demo.start, demo.goal, model, cap);
    RolloutOutcome oc;
    oc.reached_goal = rr.success();
    oc.agent_steps = static_cast<int>(rr.controls.size());
    oc.expert_steps = demo.length();
    outcomes.push_back(oc);

    Trajectory expert;
    for (const DemoStep& ds : demo.steps) expert.push_back(ds.state);
    expert.push_back(demo.goal);
    expert_trajs.push_back(expert);
    agent_trajs.push_back(rr.states);

    per_episode.push_back({{"episode", i},
                           {"expert_steps", demo.length()},
                           {"agent_steps", oc.agent_steps},
                           {"success", oc.reached_goal},
                           {"mhd", mhd_pair(rr.states, expert)}});
  }

  const double m_nll = nll(policies, controls);
  const double m_acc = accuracy(policies, controls);
  const double m_tsr = tsr(outcomes);
  const double m_mhd = mhd(agent_trajs, expert_trajs);

  std::ostringstream csv;
  csv << "nll,acc,tsr,mhd,episodes,steps\n"
      << m_nll << "," << m_acc << "," << m_tsr << "," << m_mhd << "," << n_eps << ","
      << policies.size() << "\n";
  write_text(c.out + "/results.csv", csv.str());
  write_text(c.out + "/episodes.json", per_episode.dump(2) + "\n");

  json summary = {{"nll", m_nll},       {"acc", m_acc},
                  {"tsr", m_tsr},       {"mhd", m_mhd},
                  {"episodes", n_eps},  {"steps", policies.size()},
                  {"results_csv", c.out + "/results.csv"}};
  return summary.dump();
}

std::string cmd_bench(const std::string& config_json) {
  const json j = parse_config(config_json);
  const CommonConfig c = common_config(j);
  const json b = section(j, "bench");
  const int min_steps = get_or<int>(b, "steps", 100);
  const std::vector<int> sizes = get_or<std::vector<int>>(b, "sizes", {16, 64});
  const double vi_tol = get_or<double>(b, "vi_tol", 1e-6);
  const double vi_gamma = get_or<double>(b, "vi_gamma", 0.95);
  const std::string checkpoint = get_or<std::string>(b, "checkpoint", c.out + "/checkpoint_best.json");

  json resolved = resolved_common(c);
  resolved["bench"] = {{"steps", min_steps},
                       {"sizes", sizes},
                       {"vi_tol", vi_tol},
                       {"vi_gamma", vi_gamma},
                       {"checkpoint", checkpoint}};
  echo_config(c.out, resolved);

  Model model = load_checkpoint(checkpoint).model;
  const ClassSet classes = default_class_set();

  using Clock = std::chrono::steady_clock;
  auto ms_since = [](Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  };

  std::ostringstream csv;
  csv << "grid_size,method,mean_ms,std_ms,steps\n";
  json summary = json::array();

  for (int size : sizes) {
    GenParams gen = c.gen;
    const int scale = std::max(1, size / 16);
    gen.rect_count_min *= scale;
    gen.rect_count_max *= scale;
    gen.rect_size_min *= scale;
    gen.rect_size_max *= scale;

    std::vector<double> t_map, t_forward, t_plan, t_full, t_vi;
    Rng rng(c.seed * 7777 + static_cast<std::uint64_t>(size));
    std::uint64_t env_seed = c.seed * 31337ull + static_cast<std::uint64_t>(size) * 1000ull;
    while (static_cast<int>(t_full.size()) < min_steps) {
      const SemanticGrid grid = generate_environment(env_seed++, size, size, gen, classes);
      std::vector<AgentState> free_cells;
      for (int r = 0; r < size; ++r)
        for (int col = 0; col < size; ++col)
          if (grid.at(r, col) == kFreeClass) free_cells.push_back({r, col});
      if (free_cells.size() < 2) continue;
      const AgentState start = free_cells[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(free_cells.size()) - 1))];
      const AgentState goal = free_cells[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(free_cells.size()) - 1))];
      if (start == goal) continue;
      if (!expert_shortest_path(grid, start, goal, classes)) continue;

      LogOddsMap map(size, size, model.classes.count());
      CostEncoder encoder(model.encoder);
      AgentState x = start;
      const int cap = 3 * size;
      for (int s = 0; s < cap && static_cast<int>(t_full.size()) < min_steps; ++s) {
        if (x == goal) break;
        const auto t_begin = Clock::now();
        const PointCloud cloud = scan(grid, model.classes, x, model.sensor);
        map.update(x, cloud, model.map_params);
        const double ms_map = ms_since(t_begin);

        const auto t_fwd = Clock::now();
        Tensor input(map.num_classes(), size, size);
        input.v = map.posterior_grid(model.map_params);
        const CostField cost = encoder.forward(input);
        const double ms_fwd = ms_since(t_fwd);

        const auto t_pl = Clock::now();
        const PlanResult pr = plan(x, goal, cost);
        const double ms_plan = ms_since(t_pl);

        t_map.push_back(ms_map);
        t_forward.push_back(ms_fwd);
        t_plan.push_back(ms_plan);
        t_full.push_back(ms_map + ms_fwd + ms_plan);

        const auto t_vi0 = Clock::now();
        const QTable q = value_iteration(Backup::HardMin, cost, goal, vi_gamma, 1.0, vi_tol,
                                         1000000);
        t_vi.push_back(ms_since(t_vi0));
        (void)q;

        if (!pr.goal_reachable()) break;
        x = step(grid, x, argmax_control(boltzmann(pr.q, model.alpha)));
      }
    }

    auto report = [&](const std::string& method, const std::vector<double>& ts) {
      double mean = 0.0;
      for (double v : ts) mean += v;
      mean /= ts.empty() ? 1.0 : static_cast<double>(ts.size());
      double var = 0.0;
      for (double v : ts) var += (v - mean) * (v - mean);
      const double sd = ts.size() > 1 ? std::sqrt(var / (static_cast<double>(ts.size()) - 1.0)) : 0.0;
      csv << size << "," << method << "," << mean << "," << sd << "," << ts.size() << "\n";
      summary.push_back(
          {{"grid_size", size}, {"method", method}, {"mean_ms", mean}, {"std_ms", sd},
           {"steps", ts.size()}});
    };
    report("map_update", t_map);
    report("cost_forward", t_forward);
    report("astar_plan", t_plan);
    report("full_step", t_full);
    report("value_iteration", t_vi);
  }

  write_text(c.out + "/bench.csv", csv.str());
  return json{{"rows", summary}, {"bench_csv", c.out + "/bench.csv"}}.dump();
}

std::string cmd_inspect(const std::string& config_json) {
  const json j = parse_config(config_json);
  const CommonConfig c = common_config(j);
  const json cfg = section(j, "inspect");
  const std::string checkpoint = get_or<std::string>(cfg, "checkpoint", c.out + "/checkpoint_best.json");
  const std::string data_path = get_or<std::string>(cfg, "dataset", c.data_dir + "/test.json");
  const std::size_t episode = get_or<std::size_t>(cfg, "episode", 0);
  int step_at = get_or<int>(cfg, "step", -1);

  json resolved = resolved_common(c);
  resolved["inspect"] = {{"checkpoint", checkpoint}, {"dataset", data_path},
                         {"episode", episode},       {"step", step_at}};
  echo_config(c.out, resolved);

  const Dataset ds = load_dataset(data_path);
  if (episode >= ds.demos.size()) throw Error("inspect: episode index out of range");
  const Demonstration& demo = ds.demos[episode];
  if (demo.length() == 0) throw Error("inspect: empty demonstration");
  if (step_at < 0 || step_at >= demo.length()) step_at = demo.length() - 1;

  Model model = load_checkpoint(checkpoint).model;
  const int W = demo.grid.width, H = demo.grid.height;
  const int n = model.classes.count();

  // True environment with start (red) and goal (green) markers.
  Image env(W, H);
  for (int r = 0; r < H; ++r)
    for (int col = 0; col < W; ++col) env.at(r, col) = class_color(demo.grid.at(r, col));
  env.at(demo.start.row, demo.start.col) = {255, 0, 0};
  env.at(demo.goal.row, demo.goal.col) = {0, 200, 0};
  write_ppm(env, c.out + "/env.ppm");

  LogOddsMap map(W, H, n);
  for (int t = 0; t <= step_at; ++t)
    map.update(demo.steps[static_cast<std::size_t>(t)].state,
               demo.steps[static_cast<std::size_t>(t)].scan, model.map_params);

  for (int cls = 0; cls < n; ++cls) {
    Image img(W, H);
    for (int r = 0; r < H; ++r)
      for (int col = 0; col < W; ++col)
        img.at(r, col) = gray_color(map.posterior({r, col}, model.map_params)[static_cast<std::size_t>(cls)]);
    write_ppm(img, c.out + "/posterior_class" + std::to_string(cls) + ".ppm");
  }
  export_argmax_ppm(map, model.map_params, c.out + "/posterior_argmax.ppm");

  CostEncoder encoder(model.encoder);
  Tensor input(n, H, W);
  input.v = map.posterior_grid(model.map_params);
  const CostField cost = encoder.forward(input);
  double chi = 0.0;
  for (double v : cost.v) chi = std::max(chi, v);
  Image cost_img(W, H);
  for (int r = 0; r < H; ++r)
    for (int col = 0; col < W; ++col)
      cost_img.at(r, col) = gray_color(chi > 0 ? cost.at(r, col) / chi : 0.0);
  write_ppm(cost_img, c.out + "/cost.ppm");

  const AgentState x = demo.steps[static_cast<std::size_t>(step_at)].state;
  const PlanResult pr = plan(x, demo.goal, cost);
  for (int ui = 0; ui < kNumControls; ++ui) {
    Image img(W, H);
    if (pr.q[static_cast<std::size_t>(ui)] < kInf) {
      const Visitation mu = subgradient(pr, static_cast<Control>(ui), cost);
      int peak = 1;
      for (const VisitationEntry& e : mu.entries) peak = std::max(peak, e.count);
      for (const VisitationEntry& e : mu.entries) {
        const int r = e.state.row + row_delta(e.control);
        const int col = e.state.col + col_delta(e.control);
        img.at(r, col) = gray_color(static_cast<double>(e.count) / peak);
      }
    }
    write_ppm(img, c.out + "/subgrad_" + control_name(static_cast<Control>(ui)) + ".ppm");
  }

  const RolloutResult rr = rollout(demo.grid, demo.start, demo.goal, model,
                                   std::max(1, 2 * demo.length()));
  Image overlay = env;
  for (std::size_t i = 0; i < rr.states.size(); ++i) {
    const double shade = rr.states.size() > 1
                             ? static_cast<double>(i) / (static_cast<double>(rr.states.size()) - 1)
                             : 1.0;
    overlay.at(rr.states[i].row, rr.states[i].col) = {
        static_cast<std::uint8_t>(120 + 135 * shade), 20, 60};
  }
  write_ppm(overlay, c.out + "/rollout.ppm");

  json summary = {{"episode", episode},
                  {"step", step_at},
                  {"rollout_success", rr.success()},
                  {"rollout_steps", rr.controls.size()},
                  {"images",
                   {c.out + "/env.ppm", c.out + "/posterior_argmax.ppm", c.out + "/cost.ppm",
                    c.out + "/rollout.ppm"}}};
  return summary.dump();
}

std::string cmd_policy_lab(const std::string& config_json) {
  const json j = parse_config(config_json);
  const CommonConfig c = common_config(j);
  const json cfg = section(j, "policy_lab");
  const int size = get_or<int>(cfg, "size", 16);
  const double gamma = get_or<double>(cfg, "gamma", 0.95);
  const double alpha = get_or<double>(cfg, "alpha", 1.0);
  const double tol = get_or<double>(cfg, "tol", 1e-8);
  const int max_iters = get_or<int>(cfg, "max_iters", 200000);

  json resolved = resolved_common(c);
  resolved["policy_lab"] = {{"size", size}, {"gamma", gamma}, {"alpha", alpha},
                            {"tol", tol},   {"max_iters", max_iters}};
  echo_config(c.out, resolved);

  const AgentState start{1, 1};
  const AgentState goal{size - 2, size - 2};
  const CostField cost = bordered_cost_grid(size, size, goal);

  const QTable hard = value_iteration(Backup::HardMin, cost, goal, gamma, alpha, tol, max_iters);
  const QTable soft = value_iteration(Backup::SoftMin, cost, goal, gamma, alpha, tol, max_iters);
  if (!hard.converged || !soft.converged) throw Error("policy_lab: value iteration did not converge");

  export_value_ppm(soft, c.out + "/maxent_q.ppm");
  export_value_ppm(hard, c.out + "/boltzmann_q.ppm");
  export_policy_ppm(soft, c.out + "/maxent_policy.ppm");
  export_policy_ppm(hard, c.out + "/boltzmann_policy.ppm");
  export_qtable_csv(soft, c.out + "/maxent_q.csv");
  export_qtable_csv(hard, c.out + "/boltzmann_q.csv");

  bool soft_le_hard = true;
  for (std::size_t i = 0; i < hard.q.size(); ++i) {
    if (soft.q[i] == kInf && hard.q[i] == kInf) continue;
    if (soft.q[i] > hard.q[i] + 1e-9) soft_le_hard = false;
  }

  const auto pi_soft = extract_policy(soft);
  const auto pi_hard = extract_policy(hard);
  int agree = 0, agree_ties = 0, states = 0;
  for (int r = 1; r < size - 1; ++r)
    for (int col = 1; col < size - 1; ++col) {
      const AgentState x{r, col};
      if (x == goal) continue;
      const std::size_t idx = static_cast<std::size_t>(r) * size + col;
      ++states;
      const Control as = argmax_control(pi_soft[idx]);
      if (as == argmax_control(pi_hard[idx])) ++agree;
      double qmin = kInf;
      for (int ui = 0; ui < 4; ++ui) qmin = std::min(qmin, hard.at(x, static_cast<Control>(ui)));
      if (hard.at(x, as) <= qmin + 1e-9) ++agree_ties;
    }
  const double agreement = states ? static_cast<double>(agree) / states : 0.0;
  const double agreement_ties = states ? static_cast<double>(agree_ties) / states : 0.0;

  const int cap = 4 * size * size;
  const bool soft_reaches = greedy_reaches_goal(soft, start, goal, cap);
  const bool hard_reaches = greedy_reaches_goal(hard, start, goal, cap);

  std::ostringstream csv;
  csv << "metric,value\n";
  csv << "agreement_rate," << agreement << "\n";
  csv << "agreement_rate_tie_aware," << agreement_ties << "\n";
  csv << "soft_le_hard," << (soft_le_hard ? 1 : 0) << "\n";
  csv << "soft_reaches_goal," << (soft_reaches ? 1 : 0) << "\n";
  csv << "hard_reaches_goal," << (hard_reaches ? 1 : 0) << "\n";
  csv << "soft_iterations," << soft.iterations << "\n";
  csv << "hard_iterations," << hard.iterations << "\n";
  write_text(c.out + "/policy_lab.csv", csv.str());

  json summary = {{"agreement_rate", agreement},
                  {"agreement_rate_tie_aware", agreement_ties},
                  {"soft_le_hard", soft_le_hard},
                  {"soft_reaches_goal", soft_reaches},
                  {"hard_reaches_goal", hard_reaches},
                  {"soft_iterations", soft.iterations},
                  {"hard_iterations", hard.iterations},
                  {"csv", c.out + "/policy_lab.csv"}};
  return summary.dump();
}

}  // namespace semnav
