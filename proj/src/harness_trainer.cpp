#include "amelnav/harness/trainer.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "amelnav/io.hpp"

namespace amelnav::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr std::uint32_t kCheckpointMagic = 0x414D4E56;  // "AMNV"
constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace

RunPaths RunPaths::for_run(const ExperimentConfig& cfg, std::uint64_t seed) {
  RunPaths p;
  p.dir = cfg.output_dir + "/" + cfg.method_name() + "/seed" + std::to_string(seed);
  p.log = p.dir + "/train_log.jsonl";
  return p;
}

std::string RunPaths::checkpoint(int episode) const {
  return dir + "/checkpoint_ep" + std::to_string(episode) + ".bin";
}

sim::ActionCommand to_command(const Eigen::VectorXd& action, bool discrete) {
  if (discrete)
    return sim::discrete_action_decode(static_cast<int>(action[0]));
  if (action.size() != 4)
    throw std::invalid_argument("to_command: continuous action must have 4 dims");
  sim::ActionCommand cmd;
  cmd.vx = clamp(action[0], -1.0, 1.0) * sim::kMaxLinearVel;
  cmd.vy = clamp(action[1], -1.0, 1.0) * sim::kMaxLinearVel;
  cmd.vz = clamp(action[2], -1.0, 1.0) * sim::kMaxLinearVel;
  cmd.yaw_rate = clamp(action[3], -1.0, 1.0) * sim::kMaxYawRate;
  return cmd;
}

Trainer::Trainer(const ExperimentConfig& cfg, std::uint64_t seed)
    : Trainer(cfg, seed, /*fresh=*/true) {}

Trainer::Trainer(const ExperimentConfig& cfg, std::uint64_t seed, bool fresh)
    : cfg_(cfg), seed_(seed), env_(cfg.env, derive_seed(seed, 0)),
      buffer_(cfg.buffer_capacity, sim::observation_dim(cfg.env.observation_mode),
              cfg.algorithm == "dqn" ? 1 : 4),
      sample_rng_(derive_seed(seed, 3)) {
  cfg_.validate();
  stack_ = std::make_unique<AgentStack>(cfg_, seed);
  log_path_ = RunPaths::for_run(cfg_, seed).log;
  if (fresh) obs_ = env_.reset().values;
}

void Trainer::append_run_log(const sim::StepResult& last) {
  json j;
  j["run"] = run_index_;
  j["end_step"] = step_;
  j["steps"] = run_steps_;
  j["reward"] = run_reward_;
  j["cause"] = sim::to_string(last.cause);
  j["sim_time"] = last.info.sim_time;
  j["target"] = env_.target().quadrant;
  std::ofstream out(log_path_, std::ios::app);
  if (out) out << j.dump() << "\n";
}

void Trainer::advance_one() {
  ++step_;
  stack_->set_global_step(step_);

  const Eigen::VectorXd action = step_ <= cfg_.warmup_steps
                                     ? stack_->random_action()
                                     : stack_->act(obs_, rl::ActionMode::Explore);
  const sim::StepResult res = env_.step(to_command(action, stack_->discrete()));

  buffer_.push(obs_, action, res.reward.total, res.observation.values,
               res.terminal);
  run_reward_ += res.reward.total;
  ++run_steps_;

  if (step_ > cfg_.warmup_steps && step_ % cfg_.agent.train_freq == 0)
    stack_->update(buffer_.sample(cfg_.agent.batch_size, sample_rng_));

  if (res.terminal) {
    append_run_log(res);
    obs_ = env_.reset().values;
    ++run_index_;
    run_reward_ = 0.0;
    run_steps_ = 0;
  } else {
    obs_ = res.observation.values;
  }
}

void Trainer::train_steps(std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) advance_one();
}

TrainResult Trainer::run() {
  const RunPaths paths = RunPaths::for_run(cfg_, seed_);
  fs::create_directories(paths.dir);
  if (step_ == 0) std::ofstream(log_path_, std::ios::trunc);  // fresh log

  const auto checkpoints = cfg_.reachable_checkpoints();
  TrainResult result;
  result.log_path = paths.log;

  while (step_ < cfg_.total_steps) {
    advance_one();
    if (step_ % cfg_.steps_per_episode == 0) {
      const int episode = static_cast<int>(step_ / cfg_.steps_per_episode);
      if (std::find(checkpoints.begin(), checkpoints.end(), episode) !=
          checkpoints.end()) {
        const std::string path = paths.checkpoint(episode);
        save_checkpoint(path);
        result.checkpoints.push_back(path);
      }
    }
  }
  result.steps = step_;
  return result;
}

void Trainer::save_checkpoint(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write checkpoint: " + path);

  io::write_u32(os, kCheckpointMagic);
  io::write_u32(os, kCheckpointVersion);
  io::write_string(os, config_to_json_text(cfg_));
  io::write_i64(os, static_cast<std::int64_t>(seed_));
  io::write_i64(os, step_ / cfg_.steps_per_episode);
  io::write_i64(os, step_);
  io::write_i64(os, run_index_);
  io::write_f64(os, run_reward_);
  io::write_i64(os, run_steps_);
  io::write_vector(os, obs_);
  stack_->save(os);
  env_.save_state(os);
  io::write_string(os, sample_rng_.state());
  io::write_u32(os, cfg_.checkpoint_include_buffer ? 1 : 0);
  if (cfg_.checkpoint_include_buffer) buffer_.save(os);
}

namespace {

struct CheckpointHeader {
  ExperimentConfig config;
  std::uint64_t seed;
  std::int64_t episode, step, run_index, run_steps;
  double run_reward;
  Eigen::VectorXd obs;
};

CheckpointHeader read_header(std::istream& is) {
  if (io::read_u32(is) != kCheckpointMagic)
    throw std::runtime_error("not a checkpoint file");
  if (io::read_u32(is) != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version");
  CheckpointHeader h;
  h.config = config_from_json_text(io::read_string(is));
  h.seed = static_cast<std::uint64_t>(io::read_i64(is));
  h.episode = io::read_i64(is);
  h.step = io::read_i64(is);
  h.run_index = io::read_i64(is);
  h.run_reward = io::read_f64(is);
  h.run_steps = io::read_i64(is);
  h.obs = io::read_vector(is);
  return h;
}

}  // namespace

std::unique_ptr<Trainer> Trainer::resume(const std::string& checkpoint_path) {
  std::ifstream is(checkpoint_path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + checkpoint_path);
  CheckpointHeader h = read_header(is);

  auto trainer = std::unique_ptr<Trainer>(
      new Trainer(h.config, h.seed, /*fresh=*/false));
  trainer->step_ = h.step;
  trainer->run_index_ = h.run_index;
  trainer->run_reward_ = h.run_reward;
  trainer->run_steps_ = h.run_steps;
  trainer->obs_ = h.obs;
  trainer->stack_->load(is);
  trainer->env_.load_state(is);
  trainer->sample_rng_.set_state(io::read_string(is));
  const bool has_buffer = io::read_u32(is) != 0;
  if (!has_buffer)
    throw std::runtime_error(
        "checkpoint has no replay buffer; cannot resume training");
  trainer->buffer_ = rl::ReplayBuffer::load(is);
  return trainer;
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  CheckpointHeader h = read_header(is);
  LoadedCheckpoint out;
  out.config = h.config;
  out.seed = h.seed;
  out.episode = static_cast<int>(h.episode);
  out.global_step = h.step;
  out.stack = std::make_unique<AgentStack>(out.config, out.seed);
  out.stack->load(is);
  return out;
}

}  // namespace amelnav::harness
