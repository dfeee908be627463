#pragma once

#include <string>

namespace semnav {

/// Pipeline entry points. Each takes a JSON run configuration (missing keys
/// fall back to defaults), writes its artifacts plus a resolved_config.json
/// into the configured output directory, and returns a JSON summary string.
/// Errors surface as semnav::Error.
std::string cmd_gen_data(const std::string& config_json);
std::string cmd_train(const std::string& config_json);
std::string cmd_eval(const std::string& config_json);
std::string cmd_bench(const std::string& config_json);
std::string cmd_inspect(const std::string& config_json);
std::string cmd_policy_lab(const std::string& config_json);

}  // namespace semnav
