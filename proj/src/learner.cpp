#include "semnav/learner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "semnav/rng.hpp"

namespace semnav {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int effective_jobs(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

Tensor posterior_tensor(const LogOddsMap& map, const InverseModelParams& params) {
  Tensor t(map.num_classes(), map.height(), map.width());
  t.v = map.posterior_grid(params);
  return t;
}

}  // namespace

Model make_model(const ClassSet& classes, const SensorParams& sensor, std::uint64_t init_seed,
                 UpdateMode mode, double epsilon, Padding padding) {
  classes.validate();
  Model m;
  m.classes = classes;
  m.sensor = sensor;
  m.init_seed = init_seed;
  const int n = classes.count();
  m.map_params = InverseModelParams::zeros(n);
  m.map_params.epsilon = epsilon;
  m.map_params.mode = mode;
  Rng rng(init_seed ^ 0x9144bada5ull);
  const double a = std::sqrt(1.0 / n);
  for (double& v : m.map_params.psi) v = rng.uniform(-a, a);
  for (int b = 0; b < n; ++b) m.map_params.psi_at(0, b) = 0.0;  // masked row
  m.encoder = CostEncoderParams::create(n, init_seed, padding);
  return m;
}

GradientBuffer GradientBuffer::zeros_like(const Model& model) {
  GradientBuffer g;
  g.psi.assign(model.map_params.psi.size(), 0.0);
  Model& mutable_model = const_cast<Model&>(model);
  for (const ParamView& pv : mutable_model.encoder.param_arrays())
    g.encoder.emplace_back(pv.value->size(), 0.0);
  return g;
}

void GradientBuffer::add(const GradientBuffer& other) {
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += other.psi[i];
  for (std::size_t a = 0; a < encoder.size(); ++a)
    for (std::size_t i = 0; i < encoder[a].size(); ++i) encoder[a][i] += other.encoder[a][i];
}

double nll_loss(const std::array<double, 4>& pi, Control demonstrated, double clamp,
                bool* clamped) {
  const double p = pi[static_cast<std::size_t>(demonstrated)];
  double loss = p > 0.0 ? -std::log(p) : kInf;
  bool was_clamped = false;
  if (!(loss < clamp)) {
    loss = clamp;
    was_clamped = true;
  }
  if (clamped) *clamped = was_clamped;
  return loss;
}

std::vector<std::pair<int, double>> cell_gradient(const PlanResult& plan,
                                                  const std::array<double, 4>& pi, Control u_star,
                                                  double alpha, const CostField& cost) {
  // dL/dQ(u) = (1/alpha)(1{u = u*} - pi(u)); spread onto the arrival cells
  // of each control's optimal trajectory via its visitation counts.
  std::unordered_map<int, double> cell_grad;
  for (int ui = 0; ui < kNumControls; ++ui) {
    if (plan.q[static_cast<std::size_t>(ui)] == kInf) continue;
    const double coeff =
        ((ui == static_cast<int>(u_star) ? 1.0 : 0.0) - pi[static_cast<std::size_t>(ui)]) / alpha;
    if (coeff == 0.0) continue;
    const Visitation mu = subgradient(plan, static_cast<Control>(ui), cost);
    for (const VisitationEntry& e : mu.entries) {
      const int r = e.state.row + row_delta(e.control);
      const int c = e.state.col + col_delta(e.control);
      cell_grad[r * plan.width + c] += coeff * e.count;
    }
  }
  std::vector<std::pair<int, double>> upstream(cell_grad.begin(), cell_grad.end());
  std::sort(upstream.begin(), upstream.end());
  return upstream;
}

EpisodeTape episode_pass(const Model& model, const Demonstration& demo, double loss_clamp,
                         GradientBuffer* grads) {
  const int W = demo.grid.width, H = demo.grid.height;
  const int n = model.classes.count();
  LogOddsMap map(W, H, n);
  CostEncoder encoder(model.encoder);
  encoder.params().zero_grads();

  EpisodeTape tape;
  for (const DemoStep& ds : demo.steps) {
    map.update(ds.state, ds.scan, model.map_params);
    const Tensor input = posterior_tensor(map, model.map_params);
    const CostField cost = encoder.forward(input);
    const PlanResult pr = plan(ds.state, demo.goal, cost);

    StepRecord rec;
    rec.state = ds.state;
    rec.u_star = ds.control;
    rec.q = pr.q;
    if (pr.goal_reachable()) {
      rec.pi = boltzmann(pr.q, model.alpha);
      rec.loss = nll_loss(rec.pi, ds.control, loss_clamp, &rec.clamped);
    } else {
      rec.pi = {0.0, 0.0, 0.0, 0.0};
      rec.loss = loss_clamp;
      rec.clamped = true;
    }
    tape.loss_sum += rec.loss;
    if (rec.clamped) ++tape.clamp_incidents;

    if (grads && !rec.clamped) {
      const std::vector<std::pair<int, double>> upstream =
          cell_gradient(pr, rec.pi, ds.control, model.alpha, cost);
      const Tensor d_input = encoder.backward(upstream);

      // Posterior -> log-odds through the softmax Jacobian, then into psi.
      std::unordered_map<int, std::vector<double>> up_h;
      const std::size_t plane = static_cast<std::size_t>(W) * H;
      for (const auto& [idx, cell] : map.cells()) {
        const AgentState j{idx / W, idx % W};
        const auto sigma = map.posterior(j, model.map_params);
        double dot = 0.0;
        for (int a = 0; a < n; ++a)
          dot += d_input.v[static_cast<std::size_t>(a) * plane + idx] * sigma[static_cast<std::size_t>(a)];
        std::vector<double> dh(static_cast<std::size_t>(n), 0.0);
        for (int a = 1; a < n; ++a) {  // component 0 pinned
          dh[static_cast<std::size_t>(a)] =
              sigma[static_cast<std::size_t>(a)] *
              (d_input.v[static_cast<std::size_t>(a) * plane + idx] - dot);
        }
        up_h.emplace(idx, std::move(dh));
      }
      MapGradients mg(n);
      backprop_to_psi(map, up_h, mg);
      for (std::size_t i = 0; i < grads->psi.size(); ++i) grads->psi[i] += mg.d_psi[i];
    }
    tape.steps.push_back(std::move(rec));
  }

  if (grads) {
    auto views = encoder.params().param_arrays();
    for (std::size_t a = 0; a < views.size(); ++a)
      for (std::size_t i = 0; i < views[a].grad->size(); ++i)
        grads->encoder[a][i] += (*views[a].grad)[i];
  }
  return tape;
}

std::pair<double, double> evaluate_policies(const Model& model, const Dataset& ds, int jobs,
                                            double loss_clamp) {
  const int nj = effective_jobs(jobs);
  std::vector<EpisodeTape> tapes(ds.demos.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= ds.demos.size()) return;
      tapes[i] = episode_pass(model, ds.demos[i], loss_clamp, nullptr);
    }
  };
  std::vector<std::thread> threads;
  for (int t = 0; t < nj; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();

  double loss = 0.0;
  int steps = 0, hits = 0;
  for (const EpisodeTape& tape : tapes) {
    for (const StepRecord& rec : tape.steps) {
      loss += rec.loss;
      if (argmax_control(rec.pi) == rec.u_star) ++hits;
      ++steps;
    }
  }
  if (steps == 0) return {0.0, 0.0};
  return {loss / steps, static_cast<double>(hits) / steps};
}

TrainResult train(Model& model, Adam& adam, const Dataset& train_ds, const Dataset& val_ds,
                  const TrainConfig& cfg) {
  model.alpha = cfg.alpha;
  adam.config() = cfg.adam;
  const int nj = effective_jobs(cfg.jobs);
  TrainResult result;
  result.best_val_nll = kInf;

  std::vector<double> psi_grad(model.map_params.psi.size(), 0.0);
  auto all_views = [&]() {
    std::vector<ParamView> views;
    views.push_back({"psi", &model.map_params.psi, &psi_grad});
    for (ParamView pv : model.encoder.param_arrays()) views.push_back(pv);
    return views;
  };

  const std::string metrics_path =
      cfg.out_dir.empty() ? std::string() : cfg.out_dir + "/metrics.csv";
  if (!metrics_path.empty() && cfg.start_epoch == 0) {
    std::ofstream out(metrics_path);
    out << "epoch,split,nll,acc\n";
  }
  auto append_row = [&](const MetricsRow& row) {
    result.history.push_back(row);
    if (metrics_path.empty()) return;
    std::ofstream out(metrics_path, std::ios::app);
    out << row.epoch << "," << row.split << "," << row.nll << "," << row.acc << "\n";
  };

  for (int epoch = cfg.start_epoch; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(train_ds.demos.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(cfg.seed * 0x10001ull + static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    double train_loss = 0.0;
    int train_steps = 0, train_hits = 0;
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(cfg.batch_size));
      std::vector<GradientBuffer> buffers(end - at);
      std::vector<EpisodeTape> tapes(end - at);
      {
        std::atomic<std::size_t> cursor{0};
        auto worker = [&]() {
          while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= buffers.size()) return;
            buffers[i] = GradientBuffer::zeros_like(model);
            tapes[i] = episode_pass(model, train_ds.demos[order[at + i]], cfg.loss_clamp,
                                    &buffers[i]);
          }
        };
        std::vector<std::thread> threads;
        const int spawn = std::min<std::size_t>(nj, buffers.size());
        for (int t = 0; t < spawn; ++t) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
      }
      // Deterministic merge: batch order, then one optimizer step.
      GradientBuffer total = GradientBuffer::zeros_like(model);
      for (const GradientBuffer& b : buffers) total.add(b);
      std::fill(psi_grad.begin(), psi_grad.end(), 0.0);
      model.encoder.zero_grads();
      for (std::size_t i = 0; i < psi_grad.size(); ++i) psi_grad[i] = total.psi[i];
      auto enc_views = model.encoder.param_arrays();
      for (std::size_t a = 0; a < enc_views.size(); ++a)
        for (std::size_t i = 0; i < enc_views[a].grad->size(); ++i)
          (*enc_views[a].grad)[i] = total.encoder[a][i];
      adam.step(all_views());

      for (const EpisodeTape& tape : tapes) {
        for (const StepRecord& rec : tape.steps) {
          train_loss += rec.loss;
          if (argmax_control(rec.pi) == rec.u_star) ++train_hits;
          ++train_steps;
        }
      }
    }

    MetricsRow train_row{epoch, "train", train_steps ? train_loss / train_steps : 0.0,
                         train_steps ? static_cast<double>(train_hits) / train_steps : 0.0};
    append_row(train_row);

    const auto [val_nll, val_acc] = evaluate_policies(model, val_ds, cfg.jobs, cfg.loss_clamp);
    MetricsRow val_row{epoch, "val", val_nll, val_acc};
    append_row(val_row);
    if (cfg.verbose) {
      std::fprintf(stderr, "epoch %d train nll %.4f acc %.4f | val nll %.4f acc %.4f\n", epoch,
                   train_row.nll, train_row.acc, val_nll, val_acc);
    }

    if (!cfg.out_dir.empty()) {
      save_checkpoint(cfg.out_dir + "/checkpoint_last.json", model, &adam, epoch);
      if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0)
        save_checkpoint(cfg.out_dir + "/checkpoint_epoch" + std::to_string(epoch) + ".json", model,
                        &adam, epoch);
      if (val_nll < result.best_val_nll)
        save_checkpoint(cfg.out_dir + "/checkpoint_best.json", model, &adam, epoch);
    }
    if (val_nll < result.best_val_nll) {
      result.best_val_nll = val_nll;
      result.best_epoch = epoch;
    }
  }
  return result;
}

RolloutResult rollout(const SemanticGrid& grid, AgentState start, AgentState goal,
                      const Model& model, int step_cap) {
  if (grid.is_wall(start) || grid.is_wall(goal))
    throw Error("rollout: start and goal must be traversable");
  const int n = model.classes.count();
  LogOddsMap map(grid.width, grid.height, n);
  CostEncoder encoder(model.encoder);

  RolloutResult out;
  out.states.push_back(start);
  AgentState x = start;
  while (true) {
    if (x == goal) {
      out.status = RolloutStatus::Success;
      return out;
    }
    if (static_cast<int>(out.controls.size()) >= step_cap) {
      out.status = RolloutStatus::StepLimit;
      return out;
    }
    const PointCloud cloud = scan(grid, model.classes, x, model.sensor);
    map.update(x, cloud, model.map_params);
    const Tensor input = posterior_tensor(map, model.map_params);
    const CostField cost = encoder.forward(input);
    const PlanResult pr = plan(x, goal, cost);
    if (!pr.goal_reachable()) {
      out.status = RolloutStatus::Unreachable;
      return out;
    }
    const Control u = argmax_control(boltzmann(pr.q, model.alpha));
    x = step(grid, x, u);
    out.controls.push_back(u);
    out.states.push_back(x);
  }
}

RolloutResult rollout_with_cost(const SemanticGrid& grid, AgentState start, AgentState goal,
                                const CostField& cost, int step_cap) {
  if (grid.is_wall(start) || grid.is_wall(goal))
    throw Error("rollout: start and goal must be traversable");
  RolloutResult out;
  out.states.push_back(start);
  AgentState x = start;
  while (true) {
    if (x == goal) {
      out.status = RolloutStatus::Success;
      return out;
    }
    if (static_cast<int>(out.controls.size()) >= step_cap) {
      out.status = RolloutStatus::StepLimit;
      return out;
    }
    const PlanResult pr = plan(x, goal, cost);
    if (!pr.goal_reachable()) {
      out.status = RolloutStatus::Unreachable;
      return out;
    }
    const Control u = argmax_control(boltzmann(pr.q, 1.0));
    x = step(grid, x, u);
    out.controls.push_back(u);
    out.states.push_back(x);
  }
}

namespace {

json conv_to_json(const ConvLayer& L) {
  return json{{"in_c", L.in_c}, {"out_c", L.out_c}, {"k", L.k}, {"w", L.w}, {"b", L.b}};
}

ConvLayer conv_from_json(const json& j) {
  ConvLayer L;
  L.in_c = j.at("in_c").get<int>();
  L.out_c = j.at("out_c").get<int>();
  L.k = j.at("k").get<int>();
  L.w = j.at("w").get<std::vector<double>>();
  L.b = j.at("b").get<std::vector<double>>();
  if (L.w.size() != static_cast<std::size_t>(L.out_c) * L.in_c * L.k * L.k ||
      L.b.size() != static_cast<std::size_t>(L.out_c))
    throw Error("checkpoint: conv shape mismatch");
  L.gw.assign(L.w.size(), 0.0);
  L.gb.assign(L.b.size(), 0.0);
  return L;
}

json affine_to_json(const AffineLayer& A) {
  return json{{"ch", A.ch}, {"scale", A.scale}, {"shift", A.shift}};
}

AffineLayer affine_from_json(const json& j) {
  AffineLayer A;
  A.ch = j.at("ch").get<int>();
  A.scale = j.at("scale").get<std::vector<double>>();
  A.shift = j.at("shift").get<std::vector<double>>();
  if (A.scale.size() != static_cast<std::size_t>(A.ch) || A.shift.size() != A.scale.size())
    throw Error("checkpoint: affine shape mismatch");
  A.gscale.assign(A.scale.size(), 0.0);
  A.gshift.assign(A.shift.size(), 0.0);
  return A;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model, const Adam* adam, int epoch) {
  json root;
  root["version"] = 1;
  root["epoch"] = epoch;
  root["alpha"] = model.alpha;
  root["init_seed"] = model.init_seed;
  root["classes"] = {{"labels", model.classes.labels},
                     {"expert_costs", model.classes.expert_costs}};
  root["sensor"] = {{"ray_count", model.sensor.ray_count},
                    {"angular_res_deg", model.sensor.angular_res_deg},
                    {"max_range", model.sensor.max_range}};
  root["map"] = {{"num_classes", model.map_params.num_classes},
                 {"psi", model.map_params.psi},
                 {"epsilon", model.map_params.epsilon},
                 {"mode", model.map_params.mode == UpdateMode::AlongRay ? "along_ray" : "endpoint"}};
  json enc;
  enc["in_channels"] = model.encoder.in_channels;
  enc["padding"] = model.encoder.padding == Padding::Zero ? "zero" : "toroidal";
  enc["c1"] = conv_to_json(model.encoder.c1);
  enc["c2"] = conv_to_json(model.encoder.c2);
  enc["c3"] = conv_to_json(model.encoder.c3);
  enc["c4"] = conv_to_json(model.encoder.c4);
  enc["a1"] = affine_to_json(model.encoder.a1);
  enc["a2"] = affine_to_json(model.encoder.a2);
  enc["a3"] = affine_to_json(model.encoder.a3);
  root["encoder"] = std::move(enc);
  if (adam) {
    root["adam"] = {{"lr", adam->config().lr},
                    {"beta1", adam->config().beta1},
                    {"beta2", adam->config().beta2},
                    {"eps", adam->config().eps},
                    {"t", adam->t_},
                    {"m", adam->m_},
                    {"v", adam->v_}};
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_checkpoint: cannot open " + path);
  out << root.dump();
  if (!out) throw Error("save_checkpoint: write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_checkpoint: cannot open " + path);
  json root;
  try {
    root = json::parse(in);
    if (root.at("version").get<int>() != 1) throw Error("load_checkpoint: unsupported version");
    Checkpoint ck;
    ck.epoch = root.at("epoch").get<int>();
    ck.model.alpha = root.at("alpha").get<double>();
    ck.model.init_seed = root.at("init_seed").get<std::uint64_t>();
    ck.model.classes.labels = root.at("classes").at("labels").get<std::vector<std::string>>();
    ck.model.classes.expert_costs =
        root.at("classes").at("expert_costs").get<std::vector<double>>();
    const json& sj = root.at("sensor");
    ck.model.sensor.ray_count = sj.at("ray_count").get<int>();
    ck.model.sensor.angular_res_deg = sj.at("angular_res_deg").get<double>();
    ck.model.sensor.max_range = sj.at("max_range").get<double>();
    const json& mj = root.at("map");
    ck.model.map_params.num_classes = mj.at("num_classes").get<int>();
    ck.model.map_params.psi = mj.at("psi").get<std::vector<double>>();
    ck.model.map_params.epsilon = mj.at("epsilon").get<double>();
    ck.model.map_params.mode =
        mj.at("mode").get<std::string>() == "endpoint" ? UpdateMode::EndpointOnly : UpdateMode::AlongRay;
    const json& ej = root.at("encoder");
    ck.model.encoder.in_channels = ej.at("in_channels").get<int>();
    ck.model.encoder.padding =
        ej.at("padding").get<std::string>() == "toroidal" ? Padding::Toroidal : Padding::Zero;
    ck.model.encoder.c1 = conv_from_json(ej.at("c1"));
    ck.model.encoder.c2 = conv_from_json(ej.at("c2"));
    ck.model.encoder.c3 = conv_from_json(ej.at("c3"));
    ck.model.encoder.c4 = conv_from_json(ej.at("c4"));
    ck.model.encoder.a1 = affine_from_json(ej.at("a1"));
    ck.model.encoder.a2 = affine_from_json(ej.at("a2"));
    ck.model.encoder.a3 = affine_from_json(ej.at("a3"));
    if (root.contains("adam")) {
      const json& aj = root.at("adam");
      ck.has_adam = true;
      ck.adam_config = AdamConfig{aj.at("lr").get<double>(), aj.at("beta1").get<double>(),
                                  aj.at("beta2").get<double>(), aj.at("eps").get<double>()};
      ck.adam_t = aj.at("t").get<std::int64_t>();
      ck.adam_m = aj.at("m").get<std::vector<std::vector<double>>>();
      ck.adam_v = aj.at("v").get<std::vector<std::vector<double>>>();
    }
    return ck;
  } catch (const json::exception& e) {
    throw Error(std::string("load_checkpoint: schema error: ") + e.what());
  }
}

}  // namespace semnav
