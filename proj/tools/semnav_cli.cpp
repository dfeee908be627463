// Command-line front end. Talks to the core exclusively through the C API in
// semnav.h; flag overrides are merged into the JSON run configuration here.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "semnav.h"

namespace {

using nlohmann::json;

struct CommonFlags {
  std::string config_path;
  std::string out;
  long long seed = -1;
  int grid_size = 0;
  int episodes = -1;
  int epochs = -1;
  double alpha = -1.0;
  double lr = -1.0;
  std::string checkpoint;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--grid-size", f.grid_size, "square grid side length");
  cmd->add_option("--episodes", f.episodes, "training episode count");
  cmd->add_option("--epochs", f.epochs, "training epoch count");
  cmd->add_option("--alpha", f.alpha, "Boltzmann temperature");
  cmd->add_option("--lr", f.lr, "learning rate");
  cmd->add_option("--checkpoint", f.checkpoint, "checkpoint path");
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw CLI::ValidationError("--config", "invalid JSON in " + path);
  return j;
}

// Flags win over config file contents.
json merge_flags(const CommonFlags& f) {
  json j = load_config(f.config_path);
  if (!f.out.empty()) j["out"] = f.out;
  if (f.seed >= 0) j["seed"] = static_cast<std::uint64_t>(f.seed);
  if (f.grid_size > 0) {
    j["grid"]["width"] = f.grid_size;
    j["grid"]["height"] = f.grid_size;
  }
  if (f.episodes >= 0) j["data"]["train"] = f.episodes;
  if (f.epochs >= 0) j["train"]["epochs"] = f.epochs;
  if (f.alpha > 0) {
    j["train"]["alpha"] = f.alpha;
    j["eval"]["alpha"] = f.alpha;
  }
  if (f.lr > 0) j["train"]["lr"] = f.lr;
  if (!f.checkpoint.empty()) {
    j["eval"]["checkpoint"] = f.checkpoint;
    j["bench"]["checkpoint"] = f.checkpoint;
    j["inspect"]["checkpoint"] = f.checkpoint;
  }
  return j;
}

int run(semnav_status (*fn)(const char*, char**), const CommonFlags& flags) {
  const std::string config = merge_flags(flags).dump();
  char* summary = nullptr;
  const semnav_status rc = fn(config.c_str(), &summary);
  if (rc != SEMNAV_OK) {
    std::cerr << "error: " << semnav_last_error() << "\n";
    return 1;
  }
  if (summary) {
    std::cout << summary << "\n";
    semnav_string_free(summary);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semnav: inverse reinforcement learning for navigation from semantic observations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", semnav_version());

  CommonFlags flags;
  semnav_status (*selected)(const char*, char**) = nullptr;

  auto wire = [&](const char* name, const char* help, semnav_status (*fn)(const char*, char**)) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common_flags(cmd, flags);
    cmd->callback([&selected, fn]() { selected = fn; });
    return cmd;
  };

  wire("gen-data", "generate train/val/test demonstration datasets", &semnav_run_gen_data);
  wire("train", "train the map and cost encoders on demonstrations", &semnav_run_train);
  wire("eval", "evaluate a checkpoint: NLL, Acc, TSR, MHD", &semnav_run_eval);
  wire("bench", "per-step latency of planning vs. value iteration", &semnav_run_bench);
  wire("inspect", "export posterior/cost/subgradient/rollout images", &semnav_run_inspect);
  wire("policy-lab", "hard-min vs soft-min value iteration comparison", &semnav_run_policy_lab);

  CLI11_PARSE(app, argc, argv);
  return selected ? run(selected, flags) : 1;
}
