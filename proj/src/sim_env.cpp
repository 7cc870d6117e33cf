#include "amelnav/sim/env.hpp"

#include <cmath>
#include "amelnav/io.hpp"
#include <stdexcept>

namespace amelnav::sim {

std::string to_string(ObservationMode m) {
  switch (m) {
    case ObservationMode::Base: return "base";
    case ObservationMode::TC: return "tc";
    case ObservationMode::TS: return "ts";
  }
  return "base";
}

ObservationMode observation_mode_from_string(const std::string& s) {
  if (s == "base") return ObservationMode::Base;
  if (s == "tc") return ObservationMode::TC;
  if (s == "ts") return ObservationMode::TS;
  throw std::invalid_argument("unknown observation mode: " + s);
}

std::string to_string(TerminalCause c) {
  switch (c) {
    case TerminalCause::None: return "none";
    case TerminalCause::Success: return "success";
    case TerminalCause::OutOfArea: return "out_of_area";
    case TerminalCause::RiskBreach: return "risk_breach";
    case TerminalCause::Flipped: return "flipped";
    case TerminalCause::StillTimeout: return "still_timeout";
    case TerminalCause::TimeLimit: return "time_limit";
  }
  return "none";
}

TerminalCause terminal_cause_from_string(const std::string& s) {
  if (s == "none") return TerminalCause::None;
  if (s == "success") return TerminalCause::Success;
  if (s == "out_of_area") return TerminalCause::OutOfArea;
  if (s == "risk_breach") return TerminalCause::RiskBreach;
  if (s == "flipped") return TerminalCause::Flipped;
  if (s == "still_timeout") return TerminalCause::StillTimeout;
  if (s == "time_limit") return TerminalCause::TimeLimit;
  throw std::invalid_argument("unknown terminal cause: " + s);
}

void EnvConfig::validate() const {
  if (area_half_x <= 0 || area_half_y <= 0 || z_max <= z_min)
    throw std::invalid_argument("EnvConfig: bad flight area");
  if (d_risk <= 0 || d_thr <= 0) throw std::invalid_argument("EnvConfig: D_risk and D_thr must be > 0");
  if (goal_distance() <= d_risk) throw std::invalid_argument("EnvConfig: D_g must exceed D_risk");
  if (dt <= 0) throw std::invalid_argument("EnvConfig: dt must be > 0");
  if (repeat_min < 1 || repeat_max < repeat_min)
    throw std::invalid_argument("EnvConfig: bad action-repeat range");
  if (time_limit <= 0 || stillness_timeout <= 0)
    throw std::invalid_argument("EnvConfig: bad timeout");
}

std::vector<TargetSpec> target_grid(const EnvConfig& config) {
  config.validate();
  const Eigen::Vector3d start(0.0, 0.0, 1.0);
  // Row-major over (sign_x, sign_y), center cell excluded.
  static constexpr int kSigns[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                                       {0, 1},   {1, -1}, {1, 0},  {1, 1}};
  std::vector<TargetSpec> grid;
  grid.reserve(24);
  for (int level = 0; level < 3; ++level) {
    for (int q = 0; q < 8; ++q) {
      TargetSpec t;
      t.location = Eigen::Vector3d(kSigns[q][0] * config.target_offset,
                                   kSigns[q][1] * config.target_offset,
                                   config.target_heights[level]);
      t.quadrant = level * 8 + q;
      t.orientation = target_heading(start, t);
      grid.push_back(t);
    }
  }
  return grid;
}

double target_heading(const Eigen::Vector3d& position, const TargetSpec& target) {
  return std::atan2(target.location.y() - position.y(),
                    target.location.x() - position.x());
}

VehicleState integrate_kinematics(const VehicleState& state,
                                  const ActionCommand& raw_cmd,
                                  const EnvConfig& config, double dt) {
  if (dt <= 0) throw std::invalid_argument("integrate_kinematics: dt must be > 0");
  const ActionCommand cmd = raw_cmd.clamped();
  VehicleState next = state;

  // Body command rotated into the world frame by the current yaw.
  const double c = std::cos(state.yaw), s = std::sin(state.yaw);
  const Eigen::Vector3d v_cmd(c * cmd.vx - s * cmd.vy, s * cmd.vx + c * cmd.vy,
                              cmd.vz);

  const double alpha = config.velocity_lag_tau <= 0.0
                           ? 1.0
                           : std::min(1.0, dt / config.velocity_lag_tau);
  next.velocity = state.velocity + alpha * (v_cmd - state.velocity);
  next.position += next.velocity * dt;
  next.yaw = wrap_angle(state.yaw + cmd.yaw_rate * dt);
  next.yaw_rate = cmd.yaw_rate;

  // Roll/pitch emulation: proportional to the body-frame acceleration,
  // clamped. Forward acceleration pitches the nose down.
  const Eigen::Vector3d accel = (next.velocity - state.velocity) / dt;
  const double cn = std::cos(next.yaw), sn = std::sin(next.yaw);
  const double ax_body = cn * accel.x() + sn * accel.y();
  const double ay_body = -sn * accel.x() + cn * accel.y();
  next.roll = clamp(config.attitude_gain * ay_body, -config.attitude_clamp,
                    config.attitude_clamp);
  next.pitch = clamp(-config.attitude_gain * ax_body, -config.attitude_clamp,
                     config.attitude_clamp);
  next.roll_rate = (next.roll - state.roll) / dt;
  next.pitch_rate = (next.pitch - state.pitch) / dt;
  return next;
}

std::array<double, 6> compute_virtual_sensors(const VehicleState& state,
                                              const TargetSpec& target,
                                              const EnvConfig& config) {
  static constexpr double kDeg30 = 30.0 * kPi / 180.0;
  static constexpr double kCenters[6] = {0.0,      kDeg30,  -kDeg30,
                                         kPi / 2., -kPi / 2., kPi};
  const double half_width[6] = {kPi / 4, kPi / 4, kPi / 4,
                                kPi / 4, kPi / 4, kPi / 2};

  const Eigen::Vector3d delta = target.location - state.position;
  const double d_xy = std::hypot(delta.x(), delta.y());
  const double dist = delta.norm();
  const double beta = wrap_angle(std::atan2(delta.y(), delta.x()) - state.yaw);

  const double prox = std::max(0.0, 1.0 - dist / config.area_diagonal());
  const double elev =
      1.0 - std::abs(std::atan2(std::abs(delta.z()), d_xy)) / (kPi / 2.0);

  std::array<double, 6> values{};
  for (int i = 0; i < 6; ++i) {
    const double off = std::abs(wrap_angle(beta - kCenters[i]));
    const double gate = std::max(0.0, 1.0 - off / half_width[i]);
    values[i] = gate * prox * elev;
  }
  return values;
}

Observation build_observation(const VehicleState& state, const TargetSpec& target,
                              const EnvConfig& config) {
  const double z_mid = 0.5 * (config.z_min + config.z_max);
  const double z_half = 0.5 * (config.z_max - config.z_min);
  auto norm = [](double v, double scale) { return clamp(v / scale, -1.0, 1.0); };

  Observation obs;
  obs.mode = config.observation_mode;
  obs.values.resize(observation_dim(obs.mode));

  // Base layout: pitch, roll, yaw, pitch rate, roll rate, yaw rate,
  // x, y, z, vx, vy, vz.
  obs.values[0] = norm(state.pitch, kPi);
  obs.values[1] = norm(state.roll, kPi);
  obs.values[2] = norm(state.yaw, kPi);
  obs.values[3] = norm(state.pitch_rate, kMaxYawRate);
  obs.values[4] = norm(state.roll_rate, kMaxYawRate);
  obs.values[5] = norm(state.yaw_rate, kMaxYawRate);
  obs.values[6] = norm(state.position.x(), config.area_half_x);
  obs.values[7] = norm(state.position.y(), config.area_half_y);
  obs.values[8] = norm(state.position.z() - z_mid, z_half);
  obs.values[9] = norm(state.velocity.x(), kMaxLinearVel);
  obs.values[10] = norm(state.velocity.y(), kMaxLinearVel);
  obs.values[11] = norm(state.velocity.z(), kMaxLinearVel);

  if (obs.mode == ObservationMode::TC) {
    const double eta = target_heading(state.position, target);
    obs.values[12] = norm(eta, kPi);
    obs.values[13] = norm(target.location.x(), config.area_half_x);
    obs.values[14] = norm(target.location.y(), config.area_half_y);
    obs.values[15] = norm(target.location.z() - z_mid, z_half);
  } else if (obs.mode == ObservationMode::TS) {
    const auto sensors = compute_virtual_sensors(state, target, config);
    for (int i = 0; i < 6; ++i) obs.values[12 + i] = clamp(sensors[i], -1.0, 1.0);
  }
  return obs;
}

RewardBreakdown compute_reward(const VehicleState& prev, const VehicleState& next,
                               const TargetSpec& target, double dt_elapsed,
                               const PenaltyEvents& events, const EnvConfig& config) {
  if (dt_elapsed <= 0) throw std::invalid_argument("compute_reward: dt must be > 0");
  RewardBreakdown r;

  const Eigen::Vector3d delta = target.location - next.position;
  const double dist = delta.norm();
  const double d_xy = std::hypot(delta.x(), delta.y());

  r.dist = -std::abs(1.0 - dist / config.goal_distance());
  r.ori = -std::abs(wrap_angle(next.yaw - target_heading(next.position, target))) / kPi;
  r.elev = -std::abs(std::atan2(std::abs(delta.z()), d_xy)) / (kPi / 2.0);
  r.pose = r.dist + r.ori + r.elev;

  const double prev_dist = (target.location - prev.position).norm();
  r.vel = (prev_dist - dist) / dt_elapsed;

  r.penalty = events.hard ? -2.0 : (events.band ? -1.0 : 0.0);

  const double product =
      (1.0 + std::max(r.dist, -1.0)) * (1.0 + r.ori) * (1.0 + r.elev);
  r.success = product > 0.95 ? 10.0 : 0.0;

  r.total = r.vel + 0.1 * r.pose + r.penalty + r.success;
  return r;
}

ActionCommand discrete_action_decode(int index) {
  // 0 is the no-op; 1..8 drive one component to its limit in the order
  // vx+, vx-, vy+, vy-, vz+, vz-, yaw+, yaw-.
  switch (index) {
    case 0: return {0, 0, 0, 0};
    case 1: return {kMaxLinearVel, 0, 0, 0};
    case 2: return {-kMaxLinearVel, 0, 0, 0};
    case 3: return {0, kMaxLinearVel, 0, 0};
    case 4: return {0, -kMaxLinearVel, 0, 0};
    case 5: return {0, 0, kMaxLinearVel, 0};
    case 6: return {0, 0, -kMaxLinearVel, 0};
    case 7: return {0, 0, 0, kMaxYawRate};
    case 8: return {0, 0, 0, -kMaxYawRate};
    default:
      throw std::out_of_range("discrete action index must be in [0, 9)");
  }
}

Environment::Environment(EnvConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed) {
  config_.validate();
  grid_ = target_grid(config_);
}

Observation Environment::reset(std::optional<std::uint64_t> seed,
                               std::optional<int> target_index) {
  if (seed) rng_ = RandomEngine(*seed);
  if (target_index) {
    if (*target_index < 0 || *target_index >= static_cast<int>(grid_.size()))
      throw std::out_of_range("reset: target index must be in [0, 24)");
    target_ = grid_[static_cast<std::size_t>(*target_index)];
  } else {
    target_ = grid_[static_cast<std::size_t>(rng_.uniform_int(static_cast<int>(grid_.size())))];
  }

  state_ = VehicleState{};
  state_.position = Eigen::Vector3d(0.0, 0.0, 1.0);
  if (config_.random_yaw) state_.yaw = wrap_angle(rng_.uniform(-kPi, kPi));

  started_ = true;
  terminal_ = false;
  sim_time_ = 0.0;
  path_length_ = 0.0;
  still_accum_ = 0.0;
  return build_observation(state_, target_, config_);
}

Observation Environment::observation() const {
  if (!started_) throw std::logic_error("observation: reset() not called");
  return build_observation(state_, target_, config_);
}

StepResult Environment::step(int discrete_action) {
  return step(discrete_action_decode(discrete_action));
}

StepResult Environment::step(const ActionCommand& action) {
  if (!started_ || terminal_)
    throw std::logic_error("step: environment is terminal; call reset()");

  const int repeats = rng_.uniform_int_range(config_.repeat_min, config_.repeat_max);
  const VehicleState prev = state_;
  for (int k = 0; k < repeats; ++k) {
    const VehicleState advanced = integrate_kinematics(state_, action, config_, config_.dt);
    path_length_ += (advanced.position - state_.position).norm();
    state_ = advanced;
  }
  const double dt_elapsed = repeats * config_.dt;
  sim_time_ += dt_elapsed;

  const double dist = (target_.location - state_.position).norm();
  const bool out_of_area = std::abs(state_.position.x()) > config_.area_half_x ||
                           std::abs(state_.position.y()) > config_.area_half_y ||
                           state_.position.z() < config_.z_min ||
                           state_.position.z() > config_.z_max;
  const bool risk_breach = dist < config_.d_risk;
  const bool warn_band = !risk_breach && dist < config_.d_risk + config_.warn_margin;
  const bool flipped = std::abs(state_.roll) > kPi / 2.0 ||
                       std::abs(state_.pitch) > kPi / 2.0;

  const double displacement = (state_.position - prev.position).norm();
  if (displacement < config_.stillness_epsilon)
    still_accum_ += dt_elapsed;
  else
    still_accum_ = 0.0;
  const bool still = still_accum_ >= config_.stillness_timeout;
  const bool time_up = sim_time_ >= config_.time_limit;

  PenaltyEvents events;
  events.hard = out_of_area || risk_breach;
  events.band = warn_band && !events.hard;

  StepResult result;
  result.reward = compute_reward(prev, state_, target_, dt_elapsed, events, config_);

  if (result.reward.success > 0.0)
    result.cause = TerminalCause::Success;
  else if (out_of_area)
    result.cause = TerminalCause::OutOfArea;
  else if (risk_breach)
    result.cause = TerminalCause::RiskBreach;
  else if (flipped)
    result.cause = TerminalCause::Flipped;
  else if (still)
    result.cause = TerminalCause::StillTimeout;
  else if (time_up)
    result.cause = TerminalCause::TimeLimit;
  else
    result.cause = TerminalCause::None;

  result.terminal = result.cause != TerminalCause::None;
  terminal_ = result.terminal;

  result.observation = build_observation(state_, target_, config_);
  result.info.sim_time = sim_time_;
  result.info.distance = dist;
  result.info.path_length = path_length_;
  return result;
}

void Environment::save_state(std::ostream& os) const {
  io::write_u32(os, started_ ? 1 : 0);
  io::write_u32(os, terminal_ ? 1 : 0);
  io::write_f64(os, sim_time_);
  io::write_f64(os, path_length_);
  io::write_f64(os, still_accum_);
  io::write_i64(os, target_.quadrant);
  for (int i = 0; i < 3; ++i) io::write_f64(os, state_.position[i]);
  for (int i = 0; i < 3; ++i) io::write_f64(os, state_.velocity[i]);
  io::write_f64(os, state_.roll);
  io::write_f64(os, state_.pitch);
  io::write_f64(os, state_.yaw);
  io::write_f64(os, state_.roll_rate);
  io::write_f64(os, state_.pitch_rate);
  io::write_f64(os, state_.yaw_rate);
  io::write_string(os, rng_.state());
}

void Environment::load_state(std::istream& is) {
  started_ = io::read_u32(is) != 0;
  terminal_ = io::read_u32(is) != 0;
  sim_time_ = io::read_f64(is);
  path_length_ = io::read_f64(is);
  still_accum_ = io::read_f64(is);
  const int quadrant = static_cast<int>(io::read_i64(is));
  if (quadrant < 0 || quadrant >= static_cast<int>(grid_.size()))
    throw std::runtime_error("Environment::load_state: bad target index");
  target_ = grid_[static_cast<std::size_t>(quadrant)];
  for (int i = 0; i < 3; ++i) state_.position[i] = io::read_f64(is);
  for (int i = 0; i < 3; ++i) state_.velocity[i] = io::read_f64(is);
  state_.roll = io::read_f64(is);
  state_.pitch = io::read_f64(is);
  state_.yaw = io::read_f64(is);
  state_.roll_rate = io::read_f64(is);
  state_.pitch_rate = io::read_f64(is);
  state_.yaw_rate = io::read_f64(is);
  rng_.set_state(io::read_string(is));
}

}  // namespace amelnav::sim
