#include "semnav/costnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semnav/rng.hpp"

namespace semnav {

namespace {

ConvLayer make_conv(int in_c, int out_c, int k, Rng& rng) {
  ConvLayer L;
  L.in_c = in_c;
  L.out_c = out_c;
  L.k = k;
  const std::size_t nw = static_cast<std::size_t>(out_c) * in_c * k * k;
  L.w.resize(nw);
  L.b.resize(static_cast<std::size_t>(out_c));
  const double a = std::sqrt(1.0 / (in_c * k * k));
  for (double& v : L.w) v = rng.uniform(-a, a);
  for (double& v : L.b) v = rng.uniform(-a, a);
  L.gw.assign(nw, 0.0);
  L.gb.assign(L.b.size(), 0.0);
  return L;
}

AffineLayer make_affine(int ch) {
  AffineLayer A;
  A.ch = ch;
  A.scale.assign(static_cast<std::size_t>(ch), 1.0);
  // Positive shift keeps channels alive at initialization; with the nearly
  // uniform map posterior the conv stages collapse to per-channel constants,
  // and a zero shift leaves about half of them permanently dead.
  A.shift.assign(static_cast<std::size_t>(ch), 0.1);
  A.gscale.assign(static_cast<std::size_t>(ch), 0.0);
  A.gshift.assign(static_cast<std::size_t>(ch), 0.0);
  return A;
}

void conv_forward(const Tensor& in, const ConvLayer& L, Padding pad, Tensor& out) {
  const int H = in.h, W = in.w, K = L.k, off = K / 2;
  out = Tensor(L.out_c, H, W);
  const std::size_t plane = in.plane();
  for (int oc = 0; oc < L.out_c; ++oc) {
    double* op = &out.v[static_cast<std::size_t>(oc) * plane];
    const double bias = L.b[static_cast<std::size_t>(oc)];
    for (std::size_t i = 0; i < plane; ++i) op[i] = bias;
    for (int ic = 0; ic < L.in_c; ++ic) {
      const double* ip = &in.v[static_cast<std::size_t>(ic) * plane];
      for (int ky = 0; ky < K; ++ky) {
        for (int kx = 0; kx < K; ++kx) {
          const double wv = L.w[((static_cast<std::size_t>(oc) * L.in_c + ic) * K + ky) * K + kx];
          if (wv == 0.0) continue;
          const int dy = ky - off, dx = kx - off;
          if (pad == Padding::Zero) {
            const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
            const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
            for (int y = y0; y < y1; ++y) {
              double* orow = op + static_cast<std::size_t>(y) * W;
              const double* irow = ip + static_cast<std::size_t>(y + dy) * W + dx;
              for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
            }
          } else {
            for (int y = 0; y < H; ++y) {
              const int iy = (y + dy + H) % H;
              double* orow = op + static_cast<std::size_t>(y) * W;
              const double* irow = ip + static_cast<std::size_t>(iy) * W;
              for (int x = 0; x < W; ++x) orow[x] += wv * irow[(x + dx + W) % W];
            }
          }
        }
      }
    }
  }
}

void conv_backward(const Tensor& in, const Tensor& d_out, ConvLayer& L, Padding pad,
                   Tensor& d_in) {
  const int H = in.h, W = in.w, K = L.k, off = K / 2;
  d_in = Tensor(L.in_c, H, W);
  const std::size_t plane = in.plane();
  for (int oc = 0; oc < L.out_c; ++oc) {
    const double* dop = &d_out.v[static_cast<std::size_t>(oc) * plane];
    double gb_acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) gb_acc += dop[i];
    L.gb[static_cast<std::size_t>(oc)] += gb_acc;
    for (int ic = 0; ic < L.in_c; ++ic) {
      const double* ip = &in.v[static_cast<std::size_t>(ic) * plane];
      double* dip = &d_in.v[static_cast<std::size_t>(ic) * plane];
      for (int ky = 0; ky < K; ++ky) {
        for (int kx = 0; kx < K; ++kx) {
          const std::size_t wi = ((static_cast<std::size_t>(oc) * L.in_c + ic) * K + ky) * K + kx;
          const double wv = L.w[wi];
          const int dy = ky - off, dx = kx - off;
          double gw_acc = 0.0;
          if (pad == Padding::Zero) {
            const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
            const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
            for (int y = y0; y < y1; ++y) {
              const double* dorow = dop + static_cast<std::size_t>(y) * W;
              const double* irow = ip + static_cast<std::size_t>(y + dy) * W + dx;
              double* dirow = dip + static_cast<std::size_t>(y + dy) * W + dx;
              for (int x = x0; x < x1; ++x) {
                gw_acc += dorow[x] * irow[x];
                dirow[x] += wv * dorow[x];
              }
            }
          } else {
            for (int y = 0; y < H; ++y) {
              const int iy = (y + dy + H) % H;
              const double* dorow = dop + static_cast<std::size_t>(y) * W;
              const double* irow = ip + static_cast<std::size_t>(iy) * W;
              double* dirow = dip + static_cast<std::size_t>(iy) * W;
              for (int x = 0; x < W; ++x) {
                const int ix = (x + dx + W) % W;
                gw_acc += dorow[x] * irow[ix];
                dirow[ix] += wv * dorow[x];
              }
            }
          }
          L.gw[wi] += gw_acc;
        }
      }
    }
  }
}

void affine_forward(const Tensor& z, const AffineLayer& A, Tensor& out) {
  out = Tensor(z.c, z.h, z.w);
  const std::size_t plane = z.plane();
  for (int ch = 0; ch < z.c; ++ch) {
    const double s = A.scale[static_cast<std::size_t>(ch)];
    const double b = A.shift[static_cast<std::size_t>(ch)];
    const double* zp = &z.v[static_cast<std::size_t>(ch) * plane];
    double* op = &out.v[static_cast<std::size_t>(ch) * plane];
    for (std::size_t i = 0; i < plane; ++i) op[i] = s * zp[i] + b;
  }
}

void affine_backward(const Tensor& z, const Tensor& d_out, AffineLayer& A, Tensor& d_z) {
  d_z = Tensor(z.c, z.h, z.w);
  const std::size_t plane = z.plane();
  for (int ch = 0; ch < z.c; ++ch) {
    const double s = A.scale[static_cast<std::size_t>(ch)];
    const double* zp = &z.v[static_cast<std::size_t>(ch) * plane];
    const double* dop = &d_out.v[static_cast<std::size_t>(ch) * plane];
    double* dzp = &d_z.v[static_cast<std::size_t>(ch) * plane];
    double gs = 0.0, gb = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      gs += dop[i] * zp[i];
      gb += dop[i];
      dzp[i] = dop[i] * s;
    }
    A.gscale[static_cast<std::size_t>(ch)] += gs;
    A.gshift[static_cast<std::size_t>(ch)] += gb;
  }
}

Tensor relu(const Tensor& z) {
  Tensor out = z;
  for (double& v : out.v) v = v > 0.0 ? v : 0.0;
  return out;
}

// d_out gated by the pre-activation sign (subgradient 0 at exactly 0).
Tensor relu_backward(const Tensor& pre, const Tensor& d_out) {
  Tensor d = d_out;
  for (std::size_t i = 0; i < d.v.size(); ++i)
    if (!(pre.v[i] > 0.0)) d.v[i] = 0.0;
  return d;
}

void maxpool_forward(const Tensor& in, Tensor& out, std::vector<std::int32_t>& idx) {
  const int H = in.h, W = in.w, Ho = H / 2, Wo = W / 2;
  out = Tensor(in.c, Ho, Wo);
  idx.assign(static_cast<std::size_t>(in.c) * Ho * Wo, 0);
  for (int ch = 0; ch < in.c; ++ch) {
    const double* ip = &in.v[static_cast<std::size_t>(ch) * in.plane()];
    double* op = &out.v[static_cast<std::size_t>(ch) * out.plane()];
    std::int32_t* xp = &idx[static_cast<std::size_t>(ch) * out.plane()];
    for (int yo = 0; yo < Ho; ++yo) {
      for (int xo = 0; xo < Wo; ++xo) {
        // Scan order breaks ties toward the first position.
        double best = -std::numeric_limits<double>::infinity();
        std::int32_t best_at = 0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const std::int32_t at = (2 * yo + dy) * W + (2 * xo + dx);
            const double v = ip[at];
            if (v > best) {
              best = v;
              best_at = at;
            }
          }
        }
        op[static_cast<std::size_t>(yo) * Wo + xo] = best;
        xp[static_cast<std::size_t>(yo) * Wo + xo] = best_at;
      }
    }
  }
}

void maxpool_backward(const Tensor& d_out, const std::vector<std::int32_t>& idx, int H, int W,
                      Tensor& d_in) {
  d_in = Tensor(d_out.c, H, W);
  const std::size_t plane_o = d_out.plane();
  for (int ch = 0; ch < d_out.c; ++ch) {
    const double* dop = &d_out.v[static_cast<std::size_t>(ch) * plane_o];
    const std::int32_t* xp = &idx[static_cast<std::size_t>(ch) * plane_o];
    double* dip = &d_in.v[static_cast<std::size_t>(ch) * d_in.plane()];
    for (std::size_t i = 0; i < plane_o; ++i) dip[xp[i]] += dop[i];
  }
}

// Channel ch scatters through the encoder index map (ch % idx_channels);
// the decoder is wider than the encoder at this scale.
void unpool_forward(const Tensor& in, const std::vector<std::int32_t>& idx, int idx_channels,
                    int H, int W, Tensor& out) {
  out = Tensor(in.c, H, W);
  const std::size_t plane_i = in.plane();
  for (int ch = 0; ch < in.c; ++ch) {
    const double* ip = &in.v[static_cast<std::size_t>(ch) * plane_i];
    const std::int32_t* xp = &idx[static_cast<std::size_t>(ch % idx_channels) * plane_i];
    double* op = &out.v[static_cast<std::size_t>(ch) * out.plane()];
    for (std::size_t i = 0; i < plane_i; ++i) op[xp[i]] = ip[i];
  }
}

void unpool_backward(const Tensor& d_out, const std::vector<std::int32_t>& idx, int idx_channels,
                     int Ho, int Wo, Tensor& d_in) {
  d_in = Tensor(d_out.c, Ho, Wo);
  const std::size_t plane_i = d_in.plane();
  for (int ch = 0; ch < d_out.c; ++ch) {
    const double* dop = &d_out.v[static_cast<std::size_t>(ch) * d_out.plane()];
    const std::int32_t* xp = &idx[static_cast<std::size_t>(ch % idx_channels) * plane_i];
    double* dip = &d_in.v[static_cast<std::size_t>(ch) * plane_i];
    for (std::size_t i = 0; i < plane_i; ++i) dip[i] += dop[xp[i]];
  }
}

}  // namespace

CostEncoderParams CostEncoderParams::create(int in_channels, std::uint64_t init_seed,
                                            Padding padding) {
  Rng rng(init_seed);
  CostEncoderParams p;
  p.in_channels = in_channels;
  p.padding = padding;
  p.c1 = make_conv(in_channels, 32, 3, rng);
  p.c2 = make_conv(32, 64, 3, rng);
  p.c3 = make_conv(64, 32, 3, rng);
  p.c4 = make_conv(32, 1, 1, rng);
  // The output head has no affine stage after it; bias it positive so the
  // initial cost field is strictly positive and the final relu passes
  // gradients everywhere.
  for (double& b : p.c4.b) b = std::abs(b) + 0.1;
  p.a1 = make_affine(32);
  p.a2 = make_affine(64);
  p.a3 = make_affine(32);
  return p;
}

std::vector<ParamView> CostEncoderParams::param_arrays() {
  return {
      {"c1.w", &c1.w, &c1.gw}, {"c1.b", &c1.b, &c1.gb},
      {"a1.scale", &a1.scale, &a1.gscale}, {"a1.shift", &a1.shift, &a1.gshift},
      {"c2.w", &c2.w, &c2.gw}, {"c2.b", &c2.b, &c2.gb},
      {"a2.scale", &a2.scale, &a2.gscale}, {"a2.shift", &a2.shift, &a2.gshift},
      {"c3.w", &c3.w, &c3.gw}, {"c3.b", &c3.b, &c3.gb},
      {"a3.scale", &a3.scale, &a3.gscale}, {"a3.shift", &a3.shift, &a3.gshift},
      {"c4.w", &c4.w, &c4.gw}, {"c4.b", &c4.b, &c4.gb},
  };
}

void CostEncoderParams::zero_grads() {
  for (ParamView pv : param_arrays()) std::fill(pv.grad->begin(), pv.grad->end(), 0.0);
}

CostField CostEncoder::forward(const Tensor& posterior) {
  if (posterior.c != p_.in_channels) throw Error("cost encoder: channel mismatch");
  if (posterior.h < 4 || posterior.w < 4 || posterior.h % 2 != 0 || posterior.w % 2 != 0)
    throw Error("cost encoder: H and W must be >= 4 and divisible by 2");
  in_ = posterior;
  conv_forward(in_, p_.c1, p_.padding, z1_);
  affine_forward(z1_, p_.a1, az1_);
  Tensor r1 = relu(az1_);
  maxpool_forward(r1, p1_, pool_idx_);
  conv_forward(p1_, p_.c2, p_.padding, z2_);
  affine_forward(z2_, p_.a2, az2_);
  Tensor r2 = relu(az2_);
  unpool_forward(r2, pool_idx_, p_.c1.out_c, posterior.h, posterior.w, u1_);
  conv_forward(u1_, p_.c3, p_.padding, z3_);
  affine_forward(z3_, p_.a3, az3_);
  Tensor r3 = relu(az3_);
  conv_forward(r3, p_.c4, p_.padding, z4_);
  has_forward_ = true;

  CostField out(posterior.w, posterior.h);
  for (std::size_t i = 0; i < z4_.v.size(); ++i) out.v[i] = z4_.v[i] > 0.0 ? z4_.v[i] : 0.0;
  return out;
}

Tensor CostEncoder::backward(const std::vector<std::pair<int, double>>& upstream_cells) {
  if (!has_forward_) throw Error("cost encoder: backward called before forward");
  Tensor d_z4(1, in_.h, in_.w);
  for (const auto& [idx, g] : upstream_cells) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= d_z4.v.size())
      throw Error("cost encoder: upstream cell out of range");
    if (z4_.v[static_cast<std::size_t>(idx)] > 0.0) d_z4.v[static_cast<std::size_t>(idx)] += g;
  }

  Tensor r3 = relu(az3_);
  Tensor d_r3, d_z3, d_u1, d_r2, d_z2, d_p1, d_r1, d_z1, d_in;
  conv_backward(r3, d_z4, p_.c4, p_.padding, d_r3);
  Tensor d_az3 = relu_backward(az3_, d_r3);
  affine_backward(z3_, d_az3, p_.a3, d_z3);
  conv_backward(u1_, d_z3, p_.c3, p_.padding, d_u1);
  unpool_backward(d_u1, pool_idx_, p_.c1.out_c, p1_.h, p1_.w, d_r2);
  Tensor d_az2 = relu_backward(az2_, d_r2);
  affine_backward(z2_, d_az2, p_.a2, d_z2);
  conv_backward(p1_, d_z2, p_.c2, p_.padding, d_p1);
  maxpool_backward(d_p1, pool_idx_, in_.h, in_.w, d_r1);
  Tensor d_az1 = relu_backward(az1_, d_r1);
  affine_backward(z1_, d_az1, p_.a1, d_z1);
  conv_backward(in_, d_z1, p_.c1, p_.padding, d_in);
  return d_in;
}

void Adam::step(const std::vector<ParamView>& params) {
  if (m_.empty()) {
    for (const ParamView& pv : params) {
      m_.emplace_back(pv.value->size(), 0.0);
      v_.emplace_back(pv.value->size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw Error("adam: parameter list changed size");
  for (const ParamView& pv : params)
    for (double g : *pv.grad)
      if (!std::isfinite(g)) throw Error("adam: non-finite gradient in " + pv.name);

  t_ += 1;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t a = 0; a < params.size(); ++a) {
    std::vector<double>& value = *params[a].value;
    const std::vector<double>& grad = *params[a].grad;
    std::vector<double>& m = m_[a];
    std::vector<double>& v = v_[a];
    if (value.size() != m.size()) throw Error("adam: array size changed");
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

GradCheckReport gradient_check(CostEncoder& encoder, const Tensor& input, int trials, double tol,
                               std::uint64_t seed, double fd_step) {
  Rng rng(seed);
  std::vector<std::pair<int, double>> upstream;
  const int cells = input.h * input.w;
  upstream.reserve(static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) upstream.push_back({i, rng.uniform(-1.0, 1.0)});

  auto loss = [&]() {
    const CostField c = encoder.forward(input);
    double l = 0.0;
    for (const auto& [idx, u] : upstream) l += u * c.v[static_cast<std::size_t>(idx)];
    return l;
  };

  encoder.params().zero_grads();
  loss();
  encoder.backward(upstream);
  auto views = encoder.params().param_arrays();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(views.size());
  for (const ParamView& pv : views) analytic.push_back(*pv.grad);

  std::size_t total = 0;
  for (const ParamView& pv : views) total += pv.value->size();

  GradCheckReport report;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    std::size_t flat = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(total) - 1));
    std::size_t a = 0;
    while (flat >= views[a].value->size()) {
      flat -= views[a].value->size();
      ++a;
    }
    double& theta = (*views[a].value)[flat];
    const double saved = theta;
    const double h = fd_step * std::max(1.0, std::abs(saved));
    theta = saved + h;
    const double lp = loss();
    theta = saved - h;
    const double lm = loss();
    theta = saved;
    const double fd = (lp - lm) / (2.0 * h);
    const double an = analytic[a][flat];
    const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6});
    report.max_rel_err = std::max(report.max_rel_err, rel);
  }
  report.pass = report.max_rel_err < tol;
  return report;
}

}  // namespace semnav
