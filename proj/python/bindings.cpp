// Python module exposing the simulation, metrics and cost accounting.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "amelnav/harness/agent_stack.hpp"
#include "amelnav/harness/config.hpp"
#include "amelnav/harness/evaluator.hpp"
#include "amelnav/harness/trainer.hpp"
#include "amelnav/metrics/metrics.hpp"
#include "amelnav/sim/env.hpp"

namespace py = pybind11;
using namespace amelnav;

namespace {

py::dict reward_dict(const sim::RewardBreakdown& r) {
  py::dict d;
  d["dist"] = r.dist;
  d["ori"] = r.ori;
  d["elev"] = r.elev;
  d["pose"] = r.pose;
  d["vel"] = r.vel;
  d["penalty"] = r.penalty;
  d["success"] = r.success;
  d["total"] = r.total;
  return d;
}

py::dict step_dict(const sim::StepResult& res) {
  py::dict d;
  d["observation"] = res.observation.values;
  d["reward"] = reward_dict(res.reward);
  d["terminal"] = res.terminal;
  d["cause"] = sim::to_string(res.cause);
  d["sim_time"] = res.info.sim_time;
  d["distance"] = res.info.distance;
  d["path_length"] = res.info.path_length;
  return d;
}

sim::EnvConfig env_config_from_kwargs(const py::kwargs& kwargs) {
  sim::EnvConfig cfg;
  for (auto item : kwargs) {
    const std::string key = py::cast<std::string>(item.first);
    if (key == "area_half_x") cfg.area_half_x = py::cast<double>(item.second);
    else if (key == "area_half_y") cfg.area_half_y = py::cast<double>(item.second);
    else if (key == "z_min") cfg.z_min = py::cast<double>(item.second);
    else if (key == "z_max") cfg.z_max = py::cast<double>(item.second);
    else if (key == "d_risk") cfg.d_risk = py::cast<double>(item.second);
    else if (key == "d_thr") cfg.d_thr = py::cast<double>(item.second);
    else if (key == "warn_margin") cfg.warn_margin = py::cast<double>(item.second);
    else if (key == "dt") cfg.dt = py::cast<double>(item.second);
    else if (key == "repeat_min") cfg.repeat_min = py::cast<int>(item.second);
    else if (key == "repeat_max") cfg.repeat_max = py::cast<int>(item.second);
    else if (key == "stillness_timeout") cfg.stillness_timeout = py::cast<double>(item.second);
    else if (key == "stillness_epsilon") cfg.stillness_epsilon = py::cast<double>(item.second);
    else if (key == "time_limit") cfg.time_limit = py::cast<double>(item.second);
    else if (key == "target_offset") cfg.target_offset = py::cast<double>(item.second);
    else if (key == "velocity_lag_tau") cfg.velocity_lag_tau = py::cast<double>(item.second);
    else if (key == "attitude_gain") cfg.attitude_gain = py::cast<double>(item.second);
    else if (key == "attitude_clamp") cfg.attitude_clamp = py::cast<double>(item.second);
    else if (key == "random_yaw") cfg.random_yaw = py::cast<bool>(item.second);
    else if (key == "observation_mode")
      cfg.observation_mode =
          sim::observation_mode_from_string(py::cast<std::string>(item.second));
    else
      throw std::invalid_argument("unknown env config key: " + key);
  }
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(amelnav, m) {
  m.doc() = "Quadcopter object-goal navigation environment and metrics";

  py::class_<sim::Environment>(m, "Environment")
      .def(py::init([](std::uint64_t seed, const py::kwargs& kwargs) {
             return sim::Environment(env_config_from_kwargs(kwargs), seed);
           }),
           py::arg("seed") = 0)
      .def(
          "reset",
          [](sim::Environment& env, std::optional<std::uint64_t> seed,
             std::optional<int> target) {
            return env.reset(seed, target).values;
          },
          py::arg("seed") = std::nullopt, py::arg("target") = std::nullopt)
      .def("step",
           [](sim::Environment& env, const std::vector<double>& cmd) {
             if (cmd.size() != 4)
               throw std::invalid_argument("continuous action needs 4 values");
             return step_dict(env.step(sim::ActionCommand{cmd[0], cmd[1], cmd[2],
                                                          cmd[3]}));
           })
      .def("step_discrete",
           [](sim::Environment& env, int index) { return step_dict(env.step(index)); })
      .def_property_readonly("terminal", &sim::Environment::terminal)
      .def_property_readonly("sim_time", &sim::Environment::sim_time)
      .def_property_readonly("observation_dim",
                             [](const sim::Environment& env) {
                               return sim::observation_dim(
                                   env.config().observation_mode);
                             })
      .def_property_readonly("target",
                             [](const sim::Environment& env) {
                               py::dict d;
                               d["location"] = env.target().location;
                               d["quadrant"] = env.target().quadrant;
                               d["orientation"] = env.target().orientation;
                               return d;
                             })
      .def_property_readonly("state", [](const sim::Environment& env) {
        const auto& s = env.state();
        py::dict d;
        d["position"] = s.position;
        d["velocity"] = s.velocity;
        d["roll"] = s.roll;
        d["pitch"] = s.pitch;
        d["yaw"] = s.yaw;
        return d;
      });

  m.def("target_grid", [](const py::kwargs& kwargs) {
    const auto grid = sim::target_grid(env_config_from_kwargs(kwargs));
    py::list out;
    for (const auto& t : grid) {
      py::dict d;
      d["location"] = t.location;
      d["quadrant"] = t.quadrant;
      d["orientation"] = t.orientation;
      out.append(d);
    }
    return out;
  });

  m.def("discrete_action_decode", [](int index) {
    const auto cmd = sim::discrete_action_decode(index);
    return py::make_tuple(cmd.vx, cmd.vy, cmd.vz, cmd.yaw_rate);
  });

  m.def("iqm", [](std::vector<double> scores) { return metrics::iqm(scores); });
  m.def("performance_profile", &metrics::performance_profile);
  m.def("probability_of_improvement", &metrics::probability_of_improvement);
  m.def(
      "spl",
      [](const std::vector<std::tuple<bool, double, double>>& trials) {
        std::vector<metrics::SplTrial> v;
        for (const auto& [s, p, l] : trials) v.push_back({s, p, l});
        return metrics::spl(v);
      },
      "trials: list of (success, path_length, shortest_path)");
  m.def("normalize_scores", &metrics::normalize_scores);
  m.def(
      "stratified_bootstrap_iqm_ci",
      [](const std::vector<std::vector<double>>& strata, int resamples,
         double level, std::uint64_t seed) {
        const auto ci = metrics::stratified_bootstrap_ci(
            strata, [](const std::vector<double>& v) { return metrics::iqm(v); },
            resamples, level, seed);
        return py::make_tuple(ci.low, ci.high);
      },
      py::arg("strata"), py::arg("resamples") = 2000, py::arg("level") = 0.95,
      py::arg("seed") = 0);

  m.def(
      "cost_table",
      [](const std::string& algo, const std::string& srl_variant) {
        const auto cfg = harness::make_config("paper", algo, srl_variant);
        harness::AgentStack stack(cfg, 0);
        const auto learning = stack.cost(rl::CostPhase::Learning);
        const auto evaluation = stack.cost(rl::CostPhase::Evaluation);
        py::dict d;
        d["method"] = cfg.method_name();
        d["learning_flops"] = learning.flops;
        d["learning_params"] = learning.params;
        d["evaluation_flops"] = evaluation.flops;
        d["evaluation_params"] = evaluation.params;
        return d;
      },
      py::arg("algo"), py::arg("srl") = "none");

  m.def(
      "evaluate_oracle",
      [](int trials_per_target) {
        const auto cfg = harness::make_config("desk", "td3", "none");
        harness::OraclePolicy oracle;
        harness::EvalOptions opts;
        opts.trials_per_target = trials_per_target;
        opts.method = "oracle";
        const auto records = harness::evaluate_policy(oracle, cfg, opts);
        py::list out;
        for (const auto& r : records) {
          py::dict d;
          d["target_index"] = r.target_index;
          d["success"] = r.success;
          d["cumulative_reward"] = r.cumulative_reward;
          d["path_length"] = r.path_length;
          d["shortest_path"] = r.shortest_path;
          d["final_distance"] = r.final_distance;
          out.append(d);
        }
        return out;
      },
      py::arg("trials_per_target") = 1);
}
