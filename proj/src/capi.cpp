#include "semnav.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "semnav/dataset.hpp"
#include "semnav/grid.hpp"
#include "semnav/learner.hpp"
#include "semnav/pipeline.hpp"
#include "semnav/planner.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
semnav_status guarded(Fn&& fn) {
  try {
    fn();
    return SEMNAV_OK;
  } catch (const semnav::Error& e) {
    set_error(e.what());
    return SEMNAV_ERROR;
  } catch (const std::exception& e) {
    set_error(e.what());
    return SEMNAV_ERROR;
  } catch (...) {
    set_error("unknown error");
    return SEMNAV_ERROR;
  }
}

semnav_status run_command(std::string (*cmd)(const std::string&), const char* config_json,
                          char** summary_json) {
  return guarded([&]() {
    const std::string summary = cmd(config_json ? std::string(config_json) : std::string());
    if (summary_json) *summary_json = dup_string(summary);
  });
}

}  // namespace

struct semnav_grid {
  semnav::SemanticGrid grid;
};

struct semnav_dataset {
  semnav::Dataset ds;
};

struct semnav_model {
  semnav::Model model;
};

extern "C" {

const char* semnav_version(void) { return "1.0.0"; }

const char* semnav_last_error(void) { return g_last_error.c_str(); }

void semnav_string_free(char* s) { std::free(s); }

semnav_status semnav_run_gen_data(const char* config_json, char** summary_json) {
  return run_command(&semnav::cmd_gen_data, config_json, summary_json);
}
semnav_status semnav_run_train(const char* config_json, char** summary_json) {
  return run_command(&semnav::cmd_train, config_json, summary_json);
}
semnav_status semnav_run_eval(const char* config_json, char** summary_json) {
  return run_command(&semnav::cmd_eval, config_json, summary_json);
}
semnav_status semnav_run_bench(const char* config_json, char** summary_json) {
  return run_command(&semnav::cmd_bench, config_json, summary_json);
}
semnav_status semnav_run_inspect(const char* config_json, char** summary_json) {
  return run_command(&semnav::cmd_inspect, config_json, summary_json);
}
semnav_status semnav_run_policy_lab(const char* config_json, char** summary_json) {
  return run_command(&semnav::cmd_policy_lab, config_json, summary_json);
}

semnav_status semnav_grid_generate(uint64_t seed, int width, int height, int rect_count_min,
                                   int rect_count_max, int rect_size_min, int rect_size_max,
                                   semnav_grid** out) {
  if (!out) {
    set_error("grid_generate: out must not be NULL");
    return SEMNAV_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    semnav::GenParams params;
    params.rect_count_min = rect_count_min;
    params.rect_count_max = rect_count_max;
    params.rect_size_min = rect_size_min;
    params.rect_size_max = rect_size_max;
    auto grid = semnav::generate_environment(seed, width, height, params,
                                             semnav::default_class_set());
    *out = new semnav_grid{std::move(grid)};
  });
}

void semnav_grid_destroy(semnav_grid* grid) { delete grid; }

int semnav_grid_width(const semnav_grid* grid) { return grid ? grid->grid.width : 0; }

int semnav_grid_height(const semnav_grid* grid) { return grid ? grid->grid.height : 0; }

int semnav_grid_class_at(const semnav_grid* grid, int row, int col) {
  if (!grid || !grid->grid.in_bounds(row, col)) return -1;
  return grid->grid.at(row, col);
}

semnav_status semnav_dataset_load(const char* path, semnav_dataset** out) {
  if (!path || !out) {
    set_error("dataset_load: path and out must not be NULL");
    return SEMNAV_INVALID_ARGUMENT;
  }
  return guarded([&]() { *out = new semnav_dataset{semnav::load_dataset(path)}; });
}

void semnav_dataset_destroy(semnav_dataset* ds) { delete ds; }

int semnav_dataset_size(const semnav_dataset* ds) {
  return ds ? static_cast<int>(ds->ds.demos.size()) : 0;
}

int semnav_dataset_demo_length(const semnav_dataset* ds, int i) {
  if (!ds || i < 0 || i >= static_cast<int>(ds->ds.demos.size())) return -1;
  return ds->ds.demos[static_cast<std::size_t>(i)].length();
}

semnav_status semnav_model_load(const char* checkpoint_path, semnav_model** out) {
  if (!checkpoint_path || !out) {
    set_error("model_load: path and out must not be NULL");
    return SEMNAV_INVALID_ARGUMENT;
  }
  return guarded(
      [&]() { *out = new semnav_model{semnav::load_checkpoint(checkpoint_path).model}; });
}

void semnav_model_destroy(semnav_model* model) { delete model; }

semnav_status semnav_model_rollout(const semnav_model* model, const semnav_grid* grid,
                                   int start_row, int start_col, int goal_row, int goal_col,
                                   int step_cap, int* reached, int* steps_taken) {
  if (!model || !grid) {
    set_error("model_rollout: model and grid must not be NULL");
    return SEMNAV_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    const auto rr = semnav::rollout(grid->grid, {start_row, start_col}, {goal_row, goal_col},
                                    model->model, step_cap);
    if (reached) *reached = rr.success() ? 1 : 0;
    if (steps_taken) *steps_taken = static_cast<int>(rr.controls.size());
  });
}

semnav_status semnav_plan_q(const double* cost, int height, int width, int cur_row, int cur_col,
                            int goal_row, int goal_col, double q_out[4]) {
  if (!cost || !q_out || height <= 0 || width <= 0) {
    set_error("plan_q: bad arguments");
    return SEMNAV_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    semnav::CostField field(width, height);
    field.v.assign(cost, cost + static_cast<std::size_t>(width) * height);
    const auto res = semnav::plan({cur_row, cur_col}, {goal_row, goal_col}, field);
    for (int i = 0; i < 4; ++i) q_out[i] = res.q[static_cast<std::size_t>(i)];
  });
}

semnav_status semnav_boltzmann(const double q[4], double alpha, double pi_out[4]) {
  if (!q || !pi_out) {
    set_error("boltzmann: bad arguments");
    return SEMNAV_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    const auto pi = semnav::boltzmann({q[0], q[1], q[2], q[3]}, alpha);
    for (int i = 0; i < 4; ++i) pi_out[i] = pi[static_cast<std::size_t>(i)];
  });
}

}  // extern "C"
