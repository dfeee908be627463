#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semnav/costnet.hpp"
#include "semnav/dataset.hpp"
#include "semnav/metrics.hpp"
#include "semnav/planner.hpp"
#include "semnav/semantic_map.hpp"

namespace semnav {

/// Everything learnable plus the fixed structure around it: the shared
/// inverse observation matrix (map encoder) and the convolutional cost
/// encoder.
struct Model {
  ClassSet classes;
  SensorParams sensor;
  InverseModelParams map_params;
  CostEncoderParams encoder;
  double alpha = 1.0;
  std::uint64_t init_seed = 0;
};

Model make_model(const ClassSet& classes, const SensorParams& sensor, std::uint64_t init_seed,
                 UpdateMode mode = UpdateMode::AlongRay, double epsilon = 0.5,
                 Padding padding = Padding::Zero);

/// Gradient accumulators for one episode or one batch, mergeable in a fixed
/// order for deterministic parallel training.
struct GradientBuffer {
  std::vector<double> psi;
  std::vector<std::vector<double>> encoder;

  static GradientBuffer zeros_like(const Model& model);
  void add(const GradientBuffer& other);
};

struct StepRecord {
  AgentState state;
  Control u_star = Control::Up;
  std::array<double, 4> q{};
  std::array<double, 4> pi{};
  double loss = 0.0;
  bool clamped = false;
};

/// Replayable tape of one episode pass: per-step plans, policies, losses.
struct EpisodeTape {
  std::vector<StepRecord> steps;
  double loss_sum = 0.0;
  int clamp_incidents = 0;
};

/// -log pi(u*), clamped at `clamp` nats when the demonstrated control has
/// zero probability.
double nll_loss(const std::array<double, 4>& pi, Control demonstrated, double clamp,
                bool* clamped = nullptr);

/// Per-cell gradient of one step's NLL with respect to the arrival-cost
/// field: for every finite-Q control, the coefficient
/// (1/alpha)(1{u = u*} - pi(u)) spread over the arrival cells of its traced
/// optimal trajectory. Returned sorted by cell index.
std::vector<std::pair<int, double>> cell_gradient(const PlanResult& plan,
                                                  const std::array<double, 4>& pi, Control u_star,
                                                  double alpha, const CostField& cost);

/// Forward pass over one demonstration (map update, cost forward, plan,
/// policy per step); when grads is non-null, also backpropagates the
/// demonstration NLL through planner, cost encoder, softmax and map features
/// into psi and phi.
EpisodeTape episode_pass(const Model& model, const Demonstration& demo, double loss_clamp,
                         GradientBuffer* grads);

struct TrainConfig {
  double alpha = 1.0;
  AdamConfig adam{3e-3, 0.9, 0.999, 1e-8};
  int epochs = 10;
  int batch_size = 8;
  std::uint64_t seed = 1;
  int jobs = 0;  // <= 0: hardware concurrency
  double loss_clamp = 50.0;
  int checkpoint_every = 0;      // epochs; 0 disables periodic checkpoints
  std::string out_dir;           // empty: no checkpoint files
  int start_epoch = 0;           // resume support
  bool verbose = false;
};

struct MetricsRow {
  int epoch = 0;
  std::string split;
  double nll = 0.0;
  double acc = 0.0;
};

struct TrainResult {
  std::vector<MetricsRow> history;
  int best_epoch = -1;
  double best_val_nll = 0.0;
};

/// Mean NLL and accuracy of the model's policies against the demonstrated
/// controls over a dataset.
std::pair<double, double> evaluate_policies(const Model& model, const Dataset& ds, int jobs,
                                            double loss_clamp = 50.0);

/// Alg.-style training loop: per batch, sum episode gradients (merged in
/// episode order) and take one Adam step on {psi, phi}. Writes metrics and
/// checkpoints under cfg.out_dir when set.
TrainResult train(Model& model, Adam& adam, const Dataset& train_ds, const Dataset& val_ds,
                  const TrainConfig& cfg);

enum class RolloutStatus { Success, StepLimit, Unreachable };

struct RolloutResult {
  std::vector<AgentState> states;  // visited states, starting with `start`
  std::vector<Control> controls;
  RolloutStatus status = RolloutStatus::StepLimit;

  bool success() const { return status == RolloutStatus::Success; }
};

/// Closed-loop navigation with the learned model: scan, update map, encode
/// cost, plan, take the argmax control through true dynamics.
RolloutResult rollout(const SemanticGrid& grid, AgentState start, AgentState goal,
                      const Model& model, int step_cap);

/// Same loop with a fixed cost field instead of the learned pipeline.
RolloutResult rollout_with_cost(const SemanticGrid& grid, AgentState start, AgentState goal,
                                const CostField& cost, int step_cap);

/// Versioned JSON checkpoint of all parameters (bit-exact round trip),
/// optionally with optimizer state for resuming.
void save_checkpoint(const std::string& path, const Model& model, const Adam* adam, int epoch);
struct Checkpoint {
  Model model;
  std::optional<AdamConfig> adam_config;
  std::int64_t adam_t = 0;
  std::vector<std::vector<double>> adam_m, adam_v;
  bool has_adam = false;
  int epoch = 0;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace semnav
