#include "amelnav/harness/evaluator.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "amelnav/harness/trainer.hpp"

namespace amelnav::harness {

using nlohmann::json;

Eigen::VectorXd OraclePolicy::act(const Eigen::VectorXd&, const sim::Environment& env) {
  constexpr double kPosGain = 1.2;
  constexpr double kYawGain = 2.0;

  const sim::VehicleState& s = env.state();
  const sim::TargetSpec& t = env.target();
  const double goal_dist = env.config().goal_distance();

  const Eigen::Vector3d to_target = t.location - s.position;
  const double d_xy = std::hypot(to_target.x(), to_target.y());

  // Standoff point on the goal ring along the current line of sight.
  Eigen::Vector3d goal;
  if (d_xy > 1e-9) {
    goal.x() = t.location.x() - goal_dist * to_target.x() / d_xy;
    goal.y() = t.location.y() - goal_dist * to_target.y() / d_xy;
  } else {
    goal.x() = t.location.x() - goal_dist;
    goal.y() = t.location.y();
  }
  goal.z() = t.location.z();

  const Eigen::Vector3d v_world = kPosGain * (goal - s.position);
  const double c = std::cos(s.yaw), sn = std::sin(s.yaw);
  const double bx = c * v_world.x() + sn * v_world.y();
  const double by = -sn * v_world.x() + c * v_world.y();

  const double bearing = d_xy > 1e-9 ? std::atan2(to_target.y(), to_target.x())
                                     : s.yaw;
  const double yaw_rate = kYawGain * wrap_angle(bearing - s.yaw);

  Eigen::VectorXd action(4);
  action[0] = clamp(bx / sim::kMaxLinearVel, -1.0, 1.0);
  action[1] = clamp(by / sim::kMaxLinearVel, -1.0, 1.0);
  action[2] = clamp(v_world.z() / sim::kMaxLinearVel, -1.0, 1.0);
  action[3] = clamp(yaw_rate / sim::kMaxYawRate, -1.0, 1.0);
  return action;
}

Eigen::VectorXd RandomPolicy::act(const Eigen::VectorXd&, const sim::Environment&) {
  if (discrete_) {
    Eigen::VectorXd a(1);
    a[0] = static_cast<double>(rng_.uniform_int(sim::kNumDiscreteActions));
    return a;
  }
  Eigen::VectorXd a(4);
  for (int i = 0; i < 4; ++i) a[i] = rng_.uniform(-1.0, 1.0);
  return a;
}

double shortest_path_to_goal(const sim::TargetSpec& target, const sim::EnvConfig& env) {
  const Eigen::Vector3d start(0.0, 0.0, 1.0);
  const double d_xy = std::hypot(target.location.x() - start.x(),
                                 target.location.y() - start.y());
  const double dz = start.z() - target.location.z();
  return std::sqrt(sq(d_xy - env.goal_distance()) + sq(dz));
}

std::vector<metrics::TrialRecord> evaluate_policy(Policy& policy,
                                                  const ExperimentConfig& cfg,
                                                  const EvalOptions& opts) {
  if (opts.trials_per_target < 1)
    throw std::invalid_argument("evaluate_policy: trials_per_target >= 1");

  sim::Environment env(cfg.env, 0);
  const int num_targets = static_cast<int>(env.targets().size());

  std::ofstream traj;
  if (!opts.trajectory_path.empty()) {
    traj.open(opts.trajectory_path, std::ios::trunc);
    if (!traj) throw std::runtime_error("cannot write " + opts.trajectory_path);
  }

  std::vector<metrics::TrialRecord> records;
  records.reserve(static_cast<std::size_t>(num_targets) * opts.trials_per_target);

  for (int target = 0; target < num_targets; ++target) {
    for (int trial = 0; trial < opts.trials_per_target; ++trial) {
      const std::uint64_t trial_seed =
          opts.seed * 1000003ULL + static_cast<std::uint64_t>(target) * 101ULL +
          static_cast<std::uint64_t>(trial);
      Eigen::VectorXd obs = env.reset(trial_seed, target).values;
      policy.on_reset(trial_seed);

      metrics::TrialRecord rec;
      rec.method = opts.method;
      rec.seed = opts.seed;
      rec.checkpoint_episode = opts.checkpoint_episode;
      rec.trial = trial;
      rec.target_index = target;
      rec.trial_seed = trial_seed;

      sim::StepResult res;
      while (true) {
        const Eigen::VectorXd action = policy.act(obs, env);
        res = env.step(to_command(action, policy.discrete()));
        rec.cumulative_reward += res.reward.total;
        ++rec.steps;

        if (traj.is_open()) {
          json row;
          row["trial"] = target * opts.trials_per_target + trial;
          row["t"] = res.info.sim_time;
          const auto& st = env.state();
          row["x"] = st.position.x();
          row["y"] = st.position.y();
          row["z"] = st.position.z();
          row["roll"] = st.roll;
          row["pitch"] = st.pitch;
          row["yaw"] = st.yaw;
          if (policy.discrete())
            row["action"] = static_cast<int>(action[0]);
          else
            row["action"] = std::vector<double>(action.data(),
                                                action.data() + action.size());
          row["r_total"] = res.reward.total;
          row["terminal_cause"] = sim::to_string(res.cause);
          traj << row.dump() << "\n";
        }
        if (res.terminal) break;
        obs = res.observation.values;
      }

      rec.sim_time = res.info.sim_time;
      rec.success = res.cause == sim::TerminalCause::Success;
      rec.terminal_cause = sim::to_string(res.cause);
      rec.path_length = res.info.path_length;
      rec.shortest_path = shortest_path_to_goal(env.target(), cfg.env);
      rec.final_distance = res.info.distance;
      rec.final_r_dist = res.reward.dist;
      rec.final_r_ori = res.reward.ori;
      rec.final_r_elev = res.reward.elev;
      records.push_back(std::move(rec));
    }
  }

  if (!opts.trial_path.empty()) metrics::save_trial_file(opts.trial_path, records);
  return records;
}

}  // namespace amelnav::harness
