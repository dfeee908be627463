#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semnav/cost_field.hpp"
#include "semnav/grid.hpp"

namespace semnav {

/// Dense channel-major tensor (c, h, w).
struct Tensor {
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_, double fill = 0.0)
      : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, fill) {}

  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  double at(int ch, int y, int x) const { return v[(static_cast<std::size_t>(ch) * h + y) * w + x]; }
  double& at(int ch, int y, int x) { return v[(static_cast<std::size_t>(ch) * h + y) * w + x]; }
};

enum class Padding { Zero, Toroidal };

struct ConvLayer {
  int in_c = 0;
  int out_c = 0;
  int k = 1;
  std::vector<double> w;   // [out_c][in_c][k][k]
  std::vector<double> b;   // [out_c]
  std::vector<double> gw;  // gradients, same shapes
  std::vector<double> gb;
};

struct AffineLayer {
  int ch = 0;
  std::vector<double> scale;
  std::vector<double> shift;
  std::vector<double> gscale;
  std::vector<double> gshift;
};

/// Named view of one parameter array and its gradient accumulator.
struct ParamView {
  std::string name;
  std::vector<double>* value = nullptr;
  std::vector<double>* grad = nullptr;
};

/// Two-scale fully convolutional encoder-decoder:
/// conv3x3(in->32) + affine + relu -> maxpool2 (indices kept)
/// -> conv3x3(32->64) + affine + relu -> index unpool
/// -> conv3x3(64->32) + affine + relu -> conv1x1(32->1) -> relu.
struct CostEncoderParams {
  int in_channels = 0;
  Padding padding = Padding::Zero;
  ConvLayer c1, c2, c3, c4;
  AffineLayer a1, a2, a3;

  static CostEncoderParams create(int in_channels, std::uint64_t init_seed,
                                  Padding padding = Padding::Zero);
  std::vector<ParamView> param_arrays();
  void zero_grads();
};

/// Forward/backward engine. Holds the activation caches from the last
/// forward pass, so a single instance is not reentrant; clone the params per
/// worker for parallel use.
class CostEncoder {
 public:
  explicit CostEncoder(CostEncoderParams params) : p_(std::move(params)) {}

  CostEncoderParams& params() { return p_; }
  const CostEncoderParams& params() const { return p_; }

  /// Input: (K+1, H, W) class posteriors with H, W >= 4 and divisible by 2.
  CostField forward(const Tensor& posterior);

  /// Gradients of sum(upstream * C) for the cached forward pass. Accumulates
  /// into the layer gradient buffers and returns the input gradient.
  /// upstream_cells holds (flat cell index, dL/dC) pairs.
  Tensor backward(const std::vector<std::pair<int, double>>& upstream_cells);

 private:
  CostEncoderParams p_;
  bool has_forward_ = false;
  Tensor in_, z1_, az1_, p1_, z2_, az2_, u1_, z3_, az3_, z4_;
  std::vector<std::int32_t> pool_idx_;  // per (channel, window): flat spatial argmax
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction over a fixed list of parameter arrays.
class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  AdamConfig& config() { return cfg_; }
  const AdamConfig& config() const { return cfg_; }
  std::int64_t steps_taken() const { return t_; }

  /// One update from the gradients currently stored in the views. Throws on
  /// non-finite gradients.
  void step(const std::vector<ParamView>& params);

  // Optimizer state, exposed for checkpointing.
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;

 private:
  AdamConfig cfg_;
};

struct GradCheckReport {
  int trials = 0;
  double max_rel_err = 0.0;
  bool pass = false;
};

/// Central-difference check of the analytic parameter gradients on a random
/// linear functional of the output. `tol` bounds the relative error with a
/// 1e-6 absolute floor; `fd_step` scales the probe (larger steps suit
/// gate-free configurations where the loss is exactly linear per parameter).
GradCheckReport gradient_check(CostEncoder& encoder, const Tensor& input, int trials, double tol,
                               std::uint64_t seed, double fd_step = 1e-5);

}  // namespace semnav
