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

#include "gaussflow/errors.hpp"
#include "gaussflow/harness.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gaussflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gaussflow_harness_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kOu = R"("model": {"sigma": [[1]], "alpha": [0], "C": [[-1]]})";

std::string config(const std::string& experiment, const std::string& extra, const fs::path& out) {
  return std::string("{\"experiment\": \"") + experiment + "\", " + kOu + ", \"output_dir\": \"" + out.string() + "\"" +
         (extra.empty() ? "" : ", " + extra) + "}";
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(GAUSSFLOW_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config defaults") {
  const ExperimentConfig c = parse_config(std::string("{\"experiment\": \"forward-compare\", ") + kOu + "}");
  CHECK(c.experiment == Experiment::kForwardCompare);
  CHECK(c.dim == 1);
  CHECK(c.sobolev_p == 0.75);
  CHECK(c.sim.dt == 1e-3);
  CHECK(c.sim.horizon == 1.0);
  CHECK(c.sim.paths == 10000);
  CHECK(c.quad_order == 2 * c.max_degree + 4);
  CHECK(c.model.drift()(0, 0) == -1.0);
  CHECK(c.thresholds.at("se_multiplier") == 3.0);
  CHECK(c.thresholds.at("truncation_slack") == 1e-4);

  const ExperimentConfig c2 = parse_config(R"({"experiment": "simulate", "model": {"alpha": [0, 0]}})");
  CHECK(c2.dim == 2);
  CHECK(c2.sobolev_p == 1.0);
  CHECK(c2.model.sigma().isIdentity(0.0));
}

TEST_CASE("config validation") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"experiment": "delta-norms", "sobolev_p": 0.1})"), doctest::Contains("p > d/4"),
                       ConfigError);
  CHECK_NOTHROW(parse_config(R"({"experiment": "monotonicity", "sobolev_p": -1})"));
  CHECK_THROWS_WITH_AS(parse_config(R"({"experiment": "simulate", "colour": 1})"), doctest::Contains("colour"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"experiment": "simulate", "sim": {"steps": 3}})"), doctest::Contains("sim.steps"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "dance"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "simulate", "trunc": {"N": 10, "quad_order": 20}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "simulate", "trunc": {"d": 2}, "model": {"alpha": [0]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "simulate", "model": {"sigma": [1, 2, 3]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "simulate", "thresholds": {"decay_ratio": 0.3}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);

  // Flat row-major matrices.
  const ExperimentConfig flat = parse_config(R"({"experiment": "simulate", "trunc": {"d": 2}, "model": {"C": [0, 1, -1, 0]}})");
  CHECK(flat.model.drift()(0, 1) == 1.0);
  CHECK(flat.model.drift()(1, 0) == -1.0);
}

TEST_CASE("config round trip") {
  const std::string text = R"({"experiment": "forward-compare", "model": {"sigma": [[1, 0], [0.3, 0.5]],
    "alpha": [0.1, 0], "C": [[-1, 0.2], [0, -0.5]]}, "trunc": {"d": 2, "N": 12}, "sobolev_p": 0.9,
    "sim": {"dt": 0.01, "T": 0.5, "paths": 500, "seed": 17},
    "psi": {"gaussian_mixture": [{"weight": 1, "mean": [0, 0.1], "cov": [[0.5, 0], [0, 0.4]]}]},
    "output_dir": "x", "thresholds": {"se_multiplier": 4}})";
  const ExperimentConfig a = parse_config(text);
  const std::string s1 = serialize_config(a);
  const ExperimentConfig b = parse_config(s1);
  CHECK(serialize_config(b) == s1);
  CHECK(b.thresholds == a.thresholds);
  CHECK(b.sim.seed == 17);
  CHECK(b.psi.mixture.size() == 1);
  CHECK(b.model.sigma() == a.model.sigma());
}

TEST_CASE("determinism experiment verdicts") {
  const fs::path out = scratch("det");
  const RunReport affine = run_experiment(parse_config(config("determinism", R"("sim": {"dt": 0.01, "paths": 50})", out)));
  CHECK(affine.pass());
  CHECK(affine.metrics["across_path_std"].get<double>() < 1e-6);

  const RunReport nonlinear = run_experiment(parse_config(std::string(R"({"experiment": "determinism",
    "model": {"kind": "sin-drift", "sigma": [[1]], "alpha": [0]}, "sim": {"paths": 200, "xs": [[0], [1]]},
    "output_dir": ")") + out.string() + "\"}"));
  CHECK(!nonlinear.pass());
  CHECK(nonlinear.criteria.front().name == "deterministic");
  CHECK(!nonlinear.criteria.front().pass);
  CHECK(nonlinear.criteria.front().value > 0.01);
  CHECK(fs::exists(out / "report.json"));
  CHECK(fs::exists(out / "determinism.csv"));
}

TEST_CASE("forward-compare experiment passes on the OU triple route") {
  const fs::path out = scratch("fwd");
  const RunReport r = run_experiment(parse_config(config("forward-compare", R"("trunc": {"N": 40}, "sim": {"T": 0.5})", out)));
  CHECK(r.pass());
  CHECK(r.criteria.size() == 2);
  const auto doc = nlohmann::json::parse(slurp(out / "forward_report.json"));
  CHECK(doc["pass"].get<bool>());
}

TEST_CASE("metrics files are reproducible") {
  for (const std::string& exp : {"simulate", "monotonicity", "delta-norms", "spde-residual"}) {
    const fs::path a = scratch(exp + "_a"), b = scratch(exp + "_b");
    const std::string extra = exp == "simulate"        ? R"("sim": {"dt": 0.01, "paths": 300})"
                              : exp == "spde-residual" ? R"("trunc": {"N": 12}, "sim": {"dt": 0.04, "T": 0.4})"
                                                       : R"("trunc": {"N": 12})";
    const ExperimentConfig ca = parse_config(config(exp, extra, a));
    ExperimentConfig cb = ca;
    cb.output_dir = b.string();
    const RunReport ra = run_experiment(ca);
    run_experiment(cb);
    CHECK(ra.metrics.is_object());
    for (const auto& name : ra.artifacts) {
      if (name == "metrics.json") continue;
      CHECK_MESSAGE(slurp(a / name) == slurp(b / name), std::string(exp + "/" + name));
    }
    // The config echo names the output directory; everything else must match.
    auto ma = nlohmann::json::parse(slurp(a / "metrics.json"));
    auto mb = nlohmann::json::parse(slurp(b / "metrics.json"));
    ma["config"].erase("output_dir");
    mb["config"].erase("output_dir");
    CHECK(ma.dump() == mb.dump());
    CHECK(nlohmann::json::parse(slurp(a / "report.json")).contains("wall_clock_s"));
  }
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  std::ofstream(dir / "det.json") << config("determinism", R"("sim": {"dt": 0.01, "paths": 20})", dir / "out");
  std::ofstream(dir / "sin.json") << std::string(R"({"experiment": "determinism", "model": {"kind": "sin-drift"},
    "sim": {"paths": 50, "xs": [[0], [1]]}, "output_dir": ")") + (dir / "out2").string() + "\"}";
  std::ofstream(dir / "bad.json") << R"({"experiment": "delta-norms", "sobolev_p": 0.1})";

  CHECK(run_cli("determinism --config " + (dir / "det.json").string()) == 0);
  CHECK(run_cli("determinism --config " + (dir / "sin.json").string()) == 1);
  CHECK(run_cli("delta-norms --config " + (dir / "bad.json").string()) == 2);
  CHECK(run_cli("simulate --config " + (dir / "det.json").string()) == 2);
  CHECK(run_cli("determinism --config " + (dir / "det.json").string() + " --paths 1") == 2);
  CHECK(run_cli("determinism --config " + (dir / "det.json").string() + " --dt 0.3") == 2);
  std::ofstream(dir / "missing.json") << config("forward-compare", R"("trunc": {"N": 10}, "psi": {"coeff_file": "/nonexistent.csv"})",
                                               dir / "out4");
  CHECK(run_cli("forward-compare --config " + (dir / "missing.json").string()) == 3);
  CHECK(run_cli("determinism --config " + (dir / "det.json").string() + " --seed 5 --out " + (dir / "o3").string()) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "o3" / "report.json"));
  CHECK(report["config"]["sim"]["seed"].get<int>() == 5);
}
