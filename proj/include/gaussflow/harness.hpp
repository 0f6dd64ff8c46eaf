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

#pragma once

#include "gaussflow/flow.hpp"
#include "gaussflow/operators.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gaussflow {

enum class Experiment { kSimulate, kDeterminism, kMonotonicity, kDeltaNorms, kSpdeResidual, kForwardCompare };

/// affine: dX = sigma dB + (alpha + C X) dt.
/// sin-drift: dX = sigma dB + (alpha + sin X) dt, componentwise sine.
/// degenerate: dX = x dB + (alpha - X) dt, X_0 = x^2/2, one-dimensional.
enum class ModelKind { kAffine, kSinDrift, kDegenerate };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

struct SimSettings {
  double dt = 1e-3;
  double horizon = 1.0;
  int paths = 10000;
  std::uint64_t seed = 0;
  /// Initial points for determinism and delta-norms; empty selects defaults.
  std::vector<Point> xs;
  /// Initial point for `simulate`; empty selects the origin.
  std::optional<Point> x0;
  bool per_path_files = false;
};

struct PsiSettings {
  std::vector<GaussianComponent> mixture;
  std::string coeff_file;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::kSimulate;
  ModelKind kind = ModelKind::kAffine;
  AffineModel model = AffineModel::brownian(1);
  int dim = 1;
  int max_degree = 20;
  int quad_order = 0;
  double sobolev_p = 0.75;
  SimSettings sim;
  PsiSettings psi;
  std::string output_dir = "gaussflow_out";
  std::map<std::string, double> thresholds;
};

/// Parses and validates a JSON config document. Throws ConfigError naming the
/// offending key or the violated bound.
ExperimentConfig parse_config(const std::string& text);
/// Canonical JSON form; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& config);
nlohmann::ordered_json config_json(const ExperimentConfig& config);

/// Re-runs validation after flag overrides.
void validate_config(ExperimentConfig& config);

struct Criterion {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  /// "<", "<=", ">" or "==" relation that value must satisfy against threshold.
  std::string relation;
  bool pass = false;
};

struct RunReport {
  nlohmann::ordered_json config;
  nlohmann::ordered_json metrics;
  std::vector<Criterion> criteria;
  std::vector<std::string> artifacts;
  double wall_clock_s = 0.0;

  bool pass() const;
  /// Everything except the wall clock; byte-stable across identical runs.
  nlohmann::ordered_json metrics_json() const;
  nlohmann::ordered_json to_json() const;
};

/// Dispatches to the owning module, writes artifacts plus metrics.json and
/// report.json under config.output_dir.
RunReport run_experiment(const ExperimentConfig& config);

}  // namespace gaussflow
