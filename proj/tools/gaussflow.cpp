/*
 * Copyright 2026 The gaussflow Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line driver: gaussflow <experiment> --config FILE [overrides]

#include "gaussflow/errors.hpp"
#include "gaussflow/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kPass = 0;
constexpr int kCriterionFailed = 1;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gaussflow::ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic flows of affine diffusions: simulation and spectral experiments"};
  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  std::optional<double> dt;
  std::optional<std::string> out_dir;
  app.add_option("experiment", experiment,
                 "simulate | determinism | monotonicity | delta-norms | spde-residual | forward-compare")
      ->required();
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--seed", seed, "Override sim.seed");
  app.add_option("--paths", paths, "Override sim.paths");
  app.add_option("--dt", dt, "Override sim.dt");
  app.add_option("--out", out_dir, "Override output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  gaussflow::ExperimentConfig config;
  try {
    config = gaussflow::parse_config(read_file(config_path));
    if (gaussflow::parse_experiment(experiment) != config.experiment) {
      throw gaussflow::ConfigError("experiment '" + experiment + "' does not match config experiment '" +
                                   gaussflow::to_string(config.experiment) + "'");
    }
    if (seed) config.sim.seed = *seed;
    if (paths) config.sim.paths = *paths;
    if (dt) config.sim.dt = *dt;
    if (out_dir) config.output_dir = *out_dir;
    gaussflow::validate_config(config);
  } catch (const gaussflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    const auto report = gaussflow::run_experiment(config);
    for (const auto& c : report.criteria) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.value << ' ' << c.relation << ' '
                << c.threshold << '\n';
    }
    std::cout << "report: " << (std::filesystem::path(config.output_dir) / "report.json").string() << '\n';
    return report.pass() ? kPass : kCriterionFailed;
  } catch (const gaussflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
