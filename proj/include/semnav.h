/* C API for the semnav library: semantic-observation inverse reinforcement
 * learning for grid navigation. All functions return SEMNAV_OK (0) on
 * success; on failure they return a negative status and the message is
 * available from semnav_last_error() until the next call on the same thread.
 * Objects returned through out-parameters are owned by the caller and must
 * be released with the matching _destroy/_free function. */

#ifndef SEMNAV_H
#define SEMNAV_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum semnav_status {
  SEMNAV_OK = 0,
  SEMNAV_ERROR = -1,          /* generic failure, see semnav_last_error() */
  SEMNAV_INVALID_ARGUMENT = -2,
  SEMNAV_IO_ERROR = -3
} semnav_status;

const char* semnav_version(void);

/* Message for the most recent failure on this thread. */
const char* semnav_last_error(void);

void semnav_string_free(char* s);

/* ---- pipeline commands -------------------------------------------------
 * config_json: run configuration (NULL or "" for defaults). On success
 * *summary_json receives a malloc'd summary string (may be NULL if the
 * caller does not want it). */
semnav_status semnav_run_gen_data(const char* config_json, char** summary_json);
semnav_status semnav_run_train(const char* config_json, char** summary_json);
semnav_status semnav_run_eval(const char* config_json, char** summary_json);
semnav_status semnav_run_bench(const char* config_json, char** summary_json);
semnav_status semnav_run_inspect(const char* config_json, char** summary_json);
semnav_status semnav_run_policy_lab(const char* config_json, char** summary_json);

/* ---- semantic grids ---------------------------------------------------- */
typedef struct semnav_grid semnav_grid;

/* Procedural environment with the default class set (empty/wall/lava/lawn).
 * rect_count/rect_size are inclusive ranges. */
semnav_status semnav_grid_generate(uint64_t seed, int width, int height, int rect_count_min,
                                   int rect_count_max, int rect_size_min, int rect_size_max,
                                   semnav_grid** out);
void semnav_grid_destroy(semnav_grid* grid);
int semnav_grid_width(const semnav_grid* grid);
int semnav_grid_height(const semnav_grid* grid);
/* Class index at (row, col), or -1 when out of bounds. */
int semnav_grid_class_at(const semnav_grid* grid, int row, int col);

/* ---- datasets ----------------------------------------------------------- */
typedef struct semnav_dataset semnav_dataset;

semnav_status semnav_dataset_load(const char* path, semnav_dataset** out);
void semnav_dataset_destroy(semnav_dataset* ds);
int semnav_dataset_size(const semnav_dataset* ds);
/* Number of steps in demonstration i, or -1 when out of range. */
int semnav_dataset_demo_length(const semnav_dataset* ds, int i);

/* ---- models ------------------------------------------------------------- */
typedef struct semnav_model semnav_model;

semnav_status semnav_model_load(const char* checkpoint_path, semnav_model** out);
void semnav_model_destroy(semnav_model* model);

/* Closed-loop rollout of the model policy on a grid. On success *reached
 * is 1 when the goal was reached within step_cap steps and *steps_taken
 * holds the executed control count. */
semnav_status semnav_model_rollout(const semnav_model* model, const semnav_grid* grid,
                                   int start_row, int start_col, int goal_row, int goal_col,
                                   int step_cap, int* reached, int* steps_taken);

/* ---- planning ----------------------------------------------------------- */
/* Backward A* over a row-major arrival-cost field (entries >= 0, +inf
 * allowed for impassable cells). q_out receives Q(current, u) for the four
 * controls in order up, down, left, right; unreachable controls report
 * +inf. */
semnav_status semnav_plan_q(const double* cost, int height, int width, int cur_row, int cur_col,
                            int goal_row, int goal_col, double q_out[4]);

/* Boltzmann policy over four Q values (+inf allowed, at least one finite). */
semnav_status semnav_boltzmann(const double q[4], double alpha, double pi_out[4]);

#ifdef __cplusplus
}
#endif

#endif /* SEMNAV_H */
