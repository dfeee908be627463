#pragma once

#include <unordered_map>
#include <vector>

#include "semnav/grid.hpp"
#include "semnav/sensor.hpp"

namespace semnav {

enum class UpdateMode {
  AlongRay,      // every ray cell with delta_p <= epsilon gets y_bar * delta_p
  EndpointOnly,  // only the hit cell gets the raw y_bar feature
};

/// Learnable linear inverse observation model: one shared (K+1)x(K+1) matrix
/// applied to the augmented label vector, plus the distance gate epsilon.
struct InverseModelParams {
  int num_classes = 0;  // K+1
  std::vector<double> psi;
  double epsilon = 0.5;
  UpdateMode mode = UpdateMode::AlongRay;

  static InverseModelParams zeros(int num_classes);
  static InverseModelParams scaled_identity(int num_classes, double scale);

  double psi_at(int r, int c) const { return psi[static_cast<std::size_t>(r) * num_classes + c]; }
  double& psi_at(int r, int c) { return psi[static_cast<std::size_t>(r) * num_classes + c]; }
};

/// d(x, center of j) - ||p - x||, all distances between cell centers.
double delta_p(AgentState x, AgentState p, AgentState j);

/// Ray cells toward p (excluding x's own cell) paired with their delta_p,
/// gated by delta_p <= epsilon. The walk extends past the endpoint far enough
/// that the epsilon margin is fully covered.
std::vector<std::pair<AgentState, double>> active_ray_cells(AgentState x, AgentState p,
                                                            double epsilon);

/// Log-odds increment for cell j from a single labeled point (Psi y_bar
/// delta_p when active, prior otherwise).
std::vector<double> inverse_logodds(AgentState x, const LabeledPoint& point, AgentState j,
                                    const InverseModelParams& params);

/// Accumulated gradient of the loss w.r.t. Psi; row 0 stays masked because
/// the free-class log-odds component is pinned at zero.
struct MapGradients {
  int num_classes = 0;
  std::vector<double> d_psi;

  explicit MapGradients(int num_classes_ = 0)
      : num_classes(num_classes_),
        d_psi(static_cast<std::size_t>(num_classes_) * num_classes_, 0.0) {}
  void zero() { std::fill(d_psi.begin(), d_psi.end(), 0.0); }
};

/// Sparse multi-class log-odds map. Because the inverse model is linear in
/// Psi, each touched cell stores the accumulated feature vector
/// F_j = sum of y_bar * delta_p over active updates; the log-odds are
/// h_j = Psi F_j (free component re-pinned to zero). Untouched cells sit at
/// the prior and are absent from storage.
class LogOddsMap {
 public:
  struct Cell {
    std::vector<double> feat;  // length K+1, component 0 always 0
    int touches = 0;
  };

  LogOddsMap(int width, int height, int num_classes)
      : width_(width), height_(height), num_classes_(num_classes) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int num_classes() const { return num_classes_; }
  int index(AgentState x) const { return x.row * width_ + x.col; }

  const std::unordered_map<int, Cell>& cells() const { return cells_; }

  /// Bayesian update with one point cloud taken from x (== cloud.origin).
  void update(AgentState x, const PointCloud& cloud, const InverseModelParams& params);

  /// Class log-odds of cell j under the current parameters (h^0 == 0).
  std::vector<double> log_odds(AgentState j, const InverseModelParams& params) const;

  /// Softmax of the log-odds; untouched cells give the uniform prior.
  std::vector<double> posterior(AgentState j, const InverseModelParams& params) const;

  /// Dense (K+1) x H x W posterior stack (channel-major), the cost encoder
  /// input.
  std::vector<double> posterior_grid(const InverseModelParams& params) const;

 private:
  int width_;
  int height_;
  int num_classes_;
  std::unordered_map<int, Cell> cells_;
};

/// dPsi[a][b] += upstream[j][a] * F_j[b] for every touched cell in upstream,
/// with row 0 masked. Throws when upstream refers to a cell that was never
/// touched (sparsity mismatch).
void backprop_to_psi(const LogOddsMap& map,
                     const std::unordered_map<int, std::vector<double>>& upstream_grad_on_h,
                     MapGradients& grads);

/// Snapshot export: CSV rows (j, h^0..h^K) for touched cells.
void export_map_csv(const LogOddsMap& map, const InverseModelParams& params,
                    const std::string& path);

/// Argmax-posterior image in the fixed class palette.
void export_argmax_ppm(const LogOddsMap& map, const InverseModelParams& params,
                       const std::string& path);

}  // namespace semnav
