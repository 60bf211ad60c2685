// Copyright 2026 The GAS Curriculum Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings: thin wrappers over the C++ core for scripting and smoke
// tests. Heavy lifting (training, oracles) stays in C++.

#include <fstream>
#include <random>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gas/action_hierarchy.hpp"
#include "gas/config.hpp"
#include "gas/control_envs.hpp"
#include "gas/curriculum.hpp"
#include "gas/errors.hpp"
#include "gas/harness.hpp"
#include "gas/metrics.hpp"
#include "gas/oracle.hpp"

namespace py = pybind11;
using namespace gas;

namespace {

class PyControlEnv {
 public:
  PyControlEnv(const std::string& task, int time_limit, std::uint64_t seed)
      : env_(control::make_control_env(task, time_limit)), rng_(seed) {
    reset();
  }

  std::vector<float> reset() {
    state_ = env_->reset(rng_);
    return env_->features(state_);
  }

  py::tuple step(double force) {
    const auto out = env_->step(state_, force);
    state_ = out.next;
    return py::make_tuple(env_->features(state_), out.reward, out.done, out.reached_goal);
  }

  std::vector<double> physical() const { return state_.physical; }
  int steps() const { return state_.step; }

 private:
  std::unique_ptr<control::ControlEnv> env_;
  std::mt19937_64 rng_;
  control::ControlState state_;
};

py::dict row_dict(const MetricsRow& r) {
  py::dict d;
  d["episode"] = r.episode;
  d["env_steps"] = r.env_steps;
  d["model_updates"] = r.model_updates;
  d["alpha"] = r.alpha;
  d["level"] = r.level;
  d["episode_return"] = r.episode_return;
  d["success"] = r.success;
  d["epsilon"] = r.epsilon;
  d["mean_loss"] = r.mean_loss;
  d["wall_clock"] = r.wall_clock;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Growing action spaces: C++ core bindings";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_RuntimeError);
  py::register_exception<LookupError>(m, "LookupError", PyExc_KeyError);

  py::class_<ActionHierarchy>(m, "ActionHierarchy")
      .def_static("force_ladder", &ActionHierarchy::force_ladder, py::arg("max_level"))
      .def_property_readonly("num_levels", &ActionHierarchy::num_levels)
      .def("size", &ActionHierarchy::size, py::arg("level"))
      .def("payload", &ActionHierarchy::payload, py::arg("level"), py::arg("action"))
      .def("payloads", &ActionHierarchy::payloads, py::arg("level"))
      .def("parent_of", &ActionHierarchy::parent_of, py::arg("level"), py::arg("action"))
      .def("ancestor_chain", &ActionHierarchy::ancestor_chain, py::arg("level"),
           py::arg("action"))
      .def("dump", &ActionHierarchy::dump);

  m.def(
      "alpha_at",
      [](std::int64_t lead_in, std::int64_t growth, int max_level, std::int64_t step) {
        curriculum::CurriculumSchedule s{lead_in, growth, max_level};
        s.validate();
        return curriculum::alpha_at(s, step);
      },
      py::arg("lead_in"), py::arg("growth"), py::arg("max_level"), py::arg("step"));
  m.def(
      "sample_levels",
      [](double alpha, int n, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::vector<int> out(n);
        for (int& l : out) l = curriculum::sample_level(alpha, rng);
        return out;
      },
      py::arg("alpha"), py::arg("n"), py::arg("seed") = 0);

  py::class_<PyControlEnv>(m, "ControlEnv")
      .def(py::init<const std::string&, int, std::uint64_t>(), py::arg("task"),
           py::arg("time_limit") = control::kDefaultTimeLimit, py::arg("seed") = 0)
      .def("reset", &PyControlEnv::reset)
      .def("step", &PyControlEnv::step, py::arg("force"),
           "Returns (features, reward, done, reached_goal).")
      .def_property_readonly("physical", &PyControlEnv::physical)
      .def_property_readonly("steps", &PyControlEnv::steps);

  m.def(
      "oracle_suite",
      [](int mdps, std::uint64_t seed, int max_states) {
        const auto r = oracle::run_suite(mdps, seed, max_states);
        py::dict d;
        d["mdps"] = r.mdps;
        d["worst_monotonicity_gap"] = r.worst_monotonicity_gap;
        d["worst_fixed_point_error"] = r.worst_fixed_point_error;
        d["monotone"] = r.monotone();
        d["fixed_points_match"] = r.fixed_points_match();
        return d;
      },
      py::arg("mdps") = 100, py::arg("seed") = 0, py::arg("max_states") = 8);

  m.def("config_keys", &config_keys);
  m.def(
      "default_config",
      [](const std::string& task, const std::string& algorithm) {
        return serialise(default_config(task, algorithm));
      },
      py::arg("task"), py::arg("algorithm") = "gas",
      "Serialised default configuration for a task and algorithm.");
  m.def(
      "normalise_config",
      [](const std::string& text) {
        std::istringstream in(text);
        return serialise(parse_config(in, "<python>", environment_overrides()));
      },
      py::arg("text"), "Parse a configuration (with GAS_* overrides) and re-serialise it.");

  m.def(
      "train",
      [](const std::string& text) {
        std::istringstream in(text);
        const auto cfg = parse_config(in, "<python>", environment_overrides());
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
        }
        py::dict d;
        d["config"] = r.config_file;
        d["metrics"] = r.metrics_files;
        d["checkpoints"] = r.checkpoints;
        d["aggregate"] = r.aggregate_file;
        return d;
      },
      py::arg("config_text"), "Run every seed of a configuration; returns the file paths.");

  m.def(
      "read_metrics",
      [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open " + path);
        py::list rows;
        for (const auto& r : read_metrics(in)) rows.append(row_dict(r));
        return rows;
      },
      py::arg("path"));

  m.def(
      "evaluate",
      [](const std::string& checkpoint, int episodes, std::uint64_t seed) {
        const auto ck = load_checkpoint(checkpoint);
        const auto s = evaluate_checkpoint(ck, episodes, seed);
        py::dict d;
        d["episodes"] = s.episodes;
        d["mean_return"] = s.mean_return;
        d["success_rate"] = s.success_rate;
        return d;
      },
      py::arg("checkpoint"), py::arg("episodes") = 10, py::arg("seed") = 0);
}
