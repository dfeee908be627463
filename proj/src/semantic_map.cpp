#include "semnav/semantic_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "semnav/image.hpp"

namespace semnav {

InverseModelParams InverseModelParams::zeros(int num_classes) {
  InverseModelParams p;
  p.num_classes = num_classes;
  p.psi.assign(static_cast<std::size_t>(num_classes) * num_classes, 0.0);
  return p;
}

InverseModelParams InverseModelParams::scaled_identity(int num_classes, double scale) {
  InverseModelParams p = zeros(num_classes);
  for (int k = 1; k < num_classes; ++k) p.psi_at(k, k) = scale;
  return p;
}

double delta_p(AgentState x, AgentState p, AgentState j) {
  const double dj = std::hypot(static_cast<double>(j.row - x.row), static_cast<double>(j.col - x.col));
  const double dp = std::hypot(static_cast<double>(p.row - x.row), static_cast<double>(p.col - x.col));
  return dj - dp;
}

std::vector<std::pair<AgentState, double>> active_ray_cells(AgentState x, AgentState p,
                                                            double epsilon) {
  std::vector<std::pair<AgentState, double>> out;
  if (p == x) return out;
  const double dx = static_cast<double>(p.col - x.col);
  const double dy = static_cast<double>(p.row - x.row);
  const double dist = std::hypot(dx, dy);
  // Walk far enough that every cell with delta_p <= epsilon is visited.
  const auto cells = ray_cells_toward(x, dx / dist, dy / dist, dist + epsilon + 1.0);
  for (const AgentState& j : cells) {
    const double dp = delta_p(x, p, j);
    if (dp <= epsilon) out.push_back({j, dp});
  }
  return out;
}

std::vector<double> inverse_logodds(AgentState x, const LabeledPoint& point, AgentState j,
                                    const InverseModelParams& params) {
  const int n = params.num_classes;
  std::vector<double> g(static_cast<std::size_t>(n), 0.0);
  const auto active = active_ray_cells(x, point.cell, params.epsilon);
  const auto it = std::find_if(active.begin(), active.end(),
                               [&](const auto& e) { return e.first == j; });
  if (it == active.end()) return g;  // prior (all-zero by default)
  const auto y = point.augmented();
  for (int a = 0; a < n; ++a) {
    double v = 0.0;
    for (int b = 0; b < n; ++b) v += params.psi_at(a, b) * y[static_cast<std::size_t>(b)];
    g[static_cast<std::size_t>(a)] = v * it->second;
  }
  return g;
}

void LogOddsMap::update(AgentState x, const PointCloud& cloud, const InverseModelParams& params) {
  if (!(cloud.origin == x)) throw Error("map update: cloud origin mismatch");
  const int n = num_classes_;
  for (const LabeledPoint& pt : cloud.points) {
    if (!pt.is_hit()) continue;  // zero weight vector: zero increment
    if (params.mode == UpdateMode::EndpointOnly) {
      if (pt.cell.row < 0 || pt.cell.row >= height_ || pt.cell.col < 0 || pt.cell.col >= width_)
        continue;
      Cell& cell = cells_[index(pt.cell)];
      if (cell.feat.empty()) cell.feat.assign(static_cast<std::size_t>(n), 0.0);
      const auto y = pt.augmented();
      for (int b = 1; b < n; ++b) cell.feat[static_cast<std::size_t>(b)] += y[static_cast<std::size_t>(b)];
      cell.touches += 1;
      continue;
    }
    for (const auto& [j, dp] : active_ray_cells(x, pt.cell, params.epsilon)) {
      if (j.row < 0 || j.row >= height_ || j.col < 0 || j.col >= width_) continue;
      Cell& cell = cells_[index(j)];
      if (cell.feat.empty()) cell.feat.assign(static_cast<std::size_t>(n), 0.0);
      const auto y = pt.augmented();
      for (int b = 1; b < n; ++b)
        cell.feat[static_cast<std::size_t>(b)] += y[static_cast<std::size_t>(b)] * dp;
      cell.touches += 1;
    }
  }
}

std::vector<double> LogOddsMap::log_odds(AgentState j, const InverseModelParams& params) const {
  const int n = num_classes_;
  std::vector<double> h(static_cast<std::size_t>(n), 0.0);
  const auto it = cells_.find(index(j));
  if (it == cells_.end()) return h;
  const std::vector<double>& f = it->second.feat;
  for (int a = 1; a < n; ++a) {  // component 0 pinned at zero
    double v = 0.0;
    for (int b = 0; b < n; ++b) v += params.psi_at(a, b) * f[static_cast<std::size_t>(b)];
    h[static_cast<std::size_t>(a)] = v;
  }
  return h;
}

namespace {

void softmax_inplace(std::vector<double>& z) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

}  // namespace

std::vector<double> LogOddsMap::posterior(AgentState j, const InverseModelParams& params) const {
  std::vector<double> h = log_odds(j, params);
  softmax_inplace(h);
  return h;
}

std::vector<double> LogOddsMap::posterior_grid(const InverseModelParams& params) const {
  const int n = num_classes_;
  const std::size_t plane = static_cast<std::size_t>(width_) * height_;
  std::vector<double> out(plane * n, 1.0 / n);  // uniform prior everywhere
  for (const auto& [idx, cell] : cells_) {
    std::vector<double> h(static_cast<std::size_t>(n), 0.0);
    for (int a = 1; a < n; ++a) {
      double v = 0.0;
      for (int b = 0; b < n; ++b) v += params.psi_at(a, b) * cell.feat[static_cast<std::size_t>(b)];
      h[static_cast<std::size_t>(a)] = v;
    }
    softmax_inplace(h);
    for (int a = 0; a < n; ++a)
      out[static_cast<std::size_t>(a) * plane + idx] = h[static_cast<std::size_t>(a)];
  }
  return out;
}

void backprop_to_psi(const LogOddsMap& map,
                     const std::unordered_map<int, std::vector<double>>& upstream_grad_on_h,
                     MapGradients& grads) {
  const int n = map.num_classes();
  if (grads.num_classes != n) throw Error("backprop_to_psi: gradient shape mismatch");
  const auto& cells = map.cells();
  for (const auto& [idx, up] : upstream_grad_on_h) {
    const auto it = cells.find(idx);
    if (it == cells.end()) throw Error("backprop_to_psi: upstream gradient on untouched cell");
    if (static_cast<int>(up.size()) != n) throw Error("backprop_to_psi: upstream vector length");
    const std::vector<double>& f = it->second.feat;
    for (int a = 1; a < n; ++a) {  // row 0 masked: h^0 is pinned
      const double ua = up[static_cast<std::size_t>(a)];
      if (ua == 0.0) continue;
      for (int b = 0; b < n; ++b)
        grads.d_psi[static_cast<std::size_t>(a) * n + b] += ua * f[static_cast<std::size_t>(b)];
    }
  }
}

void export_map_csv(const LogOddsMap& map, const InverseModelParams& params,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("export_map_csv: cannot open " + path);
  out << "cell";
  for (int a = 0; a < map.num_classes(); ++a) out << ",h" << a;
  out << "\n";
  std::vector<int> keys;
  keys.reserve(map.cells().size());
  for (const auto& [idx, _] : map.cells()) keys.push_back(idx);
  std::sort(keys.begin(), keys.end());
  for (int idx : keys) {
    const AgentState j{idx / map.width(), idx % map.width()};
    const auto h = map.log_odds(j, params);
    out << idx;
    for (double v : h) out << "," << v;
    out << "\n";
  }
}

void export_argmax_ppm(const LogOddsMap& map, const InverseModelParams& params,
                       const std::string& path) {
  Image img(map.width(), map.height());
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      const auto post = map.posterior({r, c}, params);
      const int cls = static_cast<int>(std::max_element(post.begin(), post.end()) - post.begin());
      img.at(r, c) = class_color(cls);
    }
  }
  write_ppm(img, path);
}

}  // namespace semnav
