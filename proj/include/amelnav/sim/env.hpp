#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "amelnav/rng.hpp"
#include "amelnav/sim/types.hpp"

namespace amelnav::sim {

/// All 24 target locations: the eight edge cells of a 3x3 horizontal grid
/// (center excluded) on each of the three height levels, ordered by
/// (level, quadrant).
std::vector<TargetSpec> target_grid(const EnvConfig& config);

/// One physics substep: yaw-rotated body command, first-order velocity lag,
/// Euler position/yaw integration, and roll/pitch emulated from body-frame
/// acceleration.
VehicleState integrate_kinematics(const VehicleState& state,
                                  const ActionCommand& cmd,
                                  const EnvConfig& config, double dt);

/// Heading an observer at `position` must face to look at the target.
double target_heading(const Eigen::Vector3d& position, const TargetSpec& target);

/// Six target-perception activations in [0, 1]: triangular angular gates at
/// {0, +30, -30, +90, -90, 180} degrees relative to the vehicle heading,
/// scaled by proximity (1 - DT/diagonal) and by elevation alignment.
std::array<double, 6> compute_virtual_sensors(const VehicleState& state,
                                              const TargetSpec& target,
                                              const EnvConfig& config);

Observation build_observation(const VehicleState& state, const TargetSpec& target,
                              const EnvConfig& config);

RewardBreakdown compute_reward(const VehicleState& prev, const VehicleState& next,
                               const TargetSpec& target, double dt_elapsed,
                               const PenaltyEvents& events, const EnvConfig& config);

ActionCommand discrete_action_decode(int index);
inline constexpr int kNumDiscreteActions = 9;

class Environment {
 public:
  explicit Environment(EnvConfig config, std::uint64_t seed = 0);

  /// Start a new run at (0, 0, 1) with zero velocity. Reseeds the internal
  /// generator when `seed` is given; draws the target uniformly from the
  /// grid when `target_index` is not.
  Observation reset(std::optional<std::uint64_t> seed = std::nullopt,
                    std::optional<int> target_index = std::nullopt);

  /// Advance by a uniformly drawn number of substeps in [repeat_min,
  /// repeat_max]. Throws if the previous step ended the run.
  StepResult step(const ActionCommand& action);
  StepResult step(int discrete_action);

  const EnvConfig& config() const { return config_; }
  const VehicleState& state() const { return state_; }
  const TargetSpec& target() const { return target_; }
  const std::vector<TargetSpec>& targets() const { return grid_; }
  bool terminal() const { return terminal_; }
  double sim_time() const { return sim_time_; }
  double path_length() const { return path_length_; }
  Observation observation() const;

  RandomEngine& rng() { return rng_; }

  /// Serialize the mutable run state (not the config) for exact resume.
  void save_state(std::ostream& os) const;
  void load_state(std::istream& is);

 private:
  EnvConfig config_;
  std::vector<TargetSpec> grid_;
  RandomEngine rng_;
  VehicleState state_;
  TargetSpec target_;
  bool started_ = false;
  bool terminal_ = true;
  double sim_time_ = 0.0;
  double path_length_ = 0.0;
  double still_accum_ = 0.0;
};

}  // namespace amelnav::sim
