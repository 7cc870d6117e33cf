#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "amelnav/math_util.hpp"

namespace amelnav::sim {

// Command limits shared by the continuous and discrete action spaces.
inline constexpr double kMaxLinearVel = 0.5;                  // m/s
inline constexpr double kMaxYawRate = 72.0 * kPi / 180.0;     // rad/s

/// Full kinematic state: NEU position/velocity, Euler attitude and rates.
struct VehicleState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();   // x, y, z (m)
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();   // world frame (m/s)
  double roll = 0.0, pitch = 0.0, yaw = 0.0;            // rad
  double roll_rate = 0.0, pitch_rate = 0.0, yaw_rate = 0.0;  // rad/s

  bool all_finite() const {
    return position.allFinite() && velocity.allFinite() &&
           std::isfinite(roll) && std::isfinite(pitch) && std::isfinite(yaw) &&
           std::isfinite(roll_rate) && std::isfinite(pitch_rate) &&
           std::isfinite(yaw_rate);
  }
};

/// Body-frame velocity command.
struct ActionCommand {
  double vx = 0.0, vy = 0.0, vz = 0.0;  // m/s
  double yaw_rate = 0.0;                // rad/s

  ActionCommand clamped() const {
    return {clamp(vx, -kMaxLinearVel, kMaxLinearVel),
            clamp(vy, -kMaxLinearVel, kMaxLinearVel),
            clamp(vz, -kMaxLinearVel, kMaxLinearVel),
            clamp(yaw_rate, -kMaxYawRate, kMaxYawRate)};
  }
};

struct TargetSpec {
  Eigen::Vector3d location = Eigen::Vector3d::Zero();
  double orientation = 0.0;  // heading from the start position to the target
  int quadrant = 0;          // 0..23, level-major
};

enum class ObservationMode : std::uint8_t { Base = 0, TC = 1, TS = 2 };

inline int observation_dim(ObservationMode m) {
  switch (m) {
    case ObservationMode::Base: return 12;
    case ObservationMode::TC: return 16;
    case ObservationMode::TS: return 18;
  }
  return 0;
}

std::string to_string(ObservationMode m);
ObservationMode observation_mode_from_string(const std::string& s);

struct EnvConfig {
  double area_half_x = 1.15;        // m
  double area_half_y = 1.15;        // m
  double z_min = 0.0;               // m
  double z_max = 2.0;               // m
  double d_risk = 0.1;              // m
  double d_thr = 0.5;               // m
  double warn_margin = 0.05;        // m, width of the -1 penalty band
  double dt = 0.032;                // s, physics substep
  int repeat_min = 5;               // substeps per agent step
  int repeat_max = 7;
  double stillness_timeout = 5.0;   // s
  double stillness_epsilon = 1e-3;  // m of displacement per agent step
  double time_limit = 60.0;         // s of simulated time per run
  double target_offset = 0.95;      // m, horizontal grid offset
  std::array<double, 3> target_heights = {0.5, 1.025, 1.55};
  double velocity_lag_tau = 0.2;    // s, first-order lag; 0 disables
  double attitude_gain = 0.1;       // rad per m/s^2 of body acceleration
  double attitude_clamp = 20.0 * kPi / 180.0;  // rad
  bool random_yaw = false;          // randomize initial yaw on reset
  ObservationMode observation_mode = ObservationMode::TS;

  double goal_distance() const { return d_risk + 0.5 * d_thr; }
  /// Diagonal of the flight volume; proximity normalizer for the sensors.
  double area_diagonal() const {
    return std::sqrt(sq(2.0 * area_half_x) + sq(2.0 * area_half_y) +
                     sq(z_max - z_min));
  }
  void validate() const;
};

struct RewardBreakdown {
  double dist = 0.0;     // <= 0
  double ori = 0.0;      // in [-1, 0]
  double elev = 0.0;     // in [-1, 0]
  double pose = 0.0;     // dist + ori + elev
  double vel = 0.0;
  double penalty = 0.0;  // in {-2, -1, 0}
  double success = 0.0;  // in {0, 10}
  double total = 0.0;    // vel + 0.1*pose + penalty + success
};

struct Observation {
  ObservationMode mode = ObservationMode::Base;
  Eigen::VectorXd values;
};

enum class TerminalCause : std::uint8_t {
  None = 0,
  Success,
  OutOfArea,
  RiskBreach,
  Flipped,
  StillTimeout,
  TimeLimit,
};

std::string to_string(TerminalCause c);
TerminalCause terminal_cause_from_string(const std::string& s);

struct StepInfo {
  double sim_time = 0.0;        // s since reset
  double distance = 0.0;        // m, UAV to target
  double path_length = 0.0;     // m, arc length since reset
};

struct StepResult {
  Observation observation;
  RewardBreakdown reward;
  bool terminal = false;
  TerminalCause cause = TerminalCause::None;
  StepInfo info;
};

/// Flags feeding the penalty term of the reward.
struct PenaltyEvents {
  bool hard = false;  // out of area or inside the risk zone: -2
  bool band = false;  // inside the warn band: -1
};

}  // namespace amelnav::sim
