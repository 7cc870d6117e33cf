#include "amelnav/harness/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace amelnav::harness {

using nlohmann::json;

std::string ExperimentConfig::method_name() const {
  switch (srl_variant) {
    case srl::SrlVariant::None: return algorithm;
    case srl::SrlVariant::Det: return algorithm + "-det";
    case srl::SrlVariant::Sto: return algorithm + "-sto";
    case srl::SrlVariant::L2OnlineTarget: return algorithm + "-l2";
  }
  return algorithm;
}

std::vector<int> ExperimentConfig::reachable_checkpoints() const {
  std::vector<int> out;
  for (int e : checkpoint_episodes)
    if (e >= 1 && e <= num_episodes()) out.push_back(e);
  return out;
}

void ExperimentConfig::validate() const {
  if (algorithm != "dqn" && algorithm != "td3" && algorithm != "sac")
    throw std::invalid_argument("config: unknown algorithm " + algorithm);
  if (total_steps < 1 || steps_per_episode < 1)
    throw std::invalid_argument("config: bad step counts");
  if (warmup_steps >= buffer_capacity)
    throw std::invalid_argument("config: warmup must be below buffer capacity");
  if (seeds.empty()) throw std::invalid_argument("config: need at least one seed");
  env.validate();
  agent.validate();
  srl.validate();
}

ExperimentConfig make_config(const std::string& preset,
                             const std::string& algorithm,
                             const std::string& srl_variant) {
  ExperimentConfig cfg;
  cfg.algorithm = algorithm;
  cfg.srl_variant = srl::srl_variant_from_string(srl_variant);
  cfg.srl.variant = cfg.srl_variant;
  cfg.agent =
      rl::AgentConfig::defaults(algorithm, cfg.srl_variant != srl::SrlVariant::None);

  if (preset == "paper") {
    // Defaults above already describe the full protocol.
  } else if (preset == "desk") {
    cfg.total_steps = 90000;
    cfg.seeds = {1, 2, 3};
    cfg.env.observation_mode = sim::ObservationMode::TS;
  } else {
    throw std::invalid_argument("unknown preset: " + preset);
  }
  cfg.agent.total_steps = cfg.total_steps;
  return cfg;
}

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_env(const json& j, sim::EnvConfig& env) {
  get_if(j, "area_half_x", env.area_half_x);
  get_if(j, "area_half_y", env.area_half_y);
  get_if(j, "z_min", env.z_min);
  get_if(j, "z_max", env.z_max);
  get_if(j, "d_risk", env.d_risk);
  get_if(j, "d_thr", env.d_thr);
  get_if(j, "warn_margin", env.warn_margin);
  get_if(j, "dt", env.dt);
  get_if(j, "repeat_min", env.repeat_min);
  get_if(j, "repeat_max", env.repeat_max);
  get_if(j, "stillness_timeout", env.stillness_timeout);
  get_if(j, "stillness_epsilon", env.stillness_epsilon);
  get_if(j, "time_limit", env.time_limit);
  get_if(j, "target_offset", env.target_offset);
  get_if(j, "target_heights", env.target_heights);
  get_if(j, "velocity_lag_tau", env.velocity_lag_tau);
  get_if(j, "attitude_gain", env.attitude_gain);
  get_if(j, "attitude_clamp", env.attitude_clamp);
  get_if(j, "random_yaw", env.random_yaw);
  if (j.contains("observation_mode"))
    env.observation_mode =
        sim::observation_mode_from_string(j.at("observation_mode").get<std::string>());
}

void apply_agent(const json& j, rl::AgentConfig& agent) {
  get_if(j, "gamma", agent.gamma);
  get_if(j, "tau", agent.tau);
  get_if(j, "batch_size", agent.batch_size);
  get_if(j, "hidden", agent.hidden);
  get_if(j, "train_freq", agent.train_freq);
  get_if(j, "lr", agent.lr);
  get_if(j, "eps_start", agent.eps_start);
  get_if(j, "eps_end", agent.eps_end);
  get_if(j, "eps_fraction", agent.eps_fraction);
  get_if(j, "target_update_interval", agent.target_update_interval);
  get_if(j, "lr_actor", agent.lr_actor);
  get_if(j, "lr_critic", agent.lr_critic);
  get_if(j, "expl_noise", agent.expl_noise);
  get_if(j, "target_noise", agent.target_noise);
  get_if(j, "noise_clip", agent.noise_clip);
  get_if(j, "policy_delay", agent.policy_delay);
  get_if(j, "lr_alpha", agent.lr_alpha);
  get_if(j, "target_entropy", agent.target_entropy);
}

void apply_srl(const json& j, srl::SrlConfig& srl_cfg) {
  get_if(j, "latent_dim", srl_cfg.latent_dim);
  get_if(j, "hidden", srl_cfg.hidden);
  get_if(j, "temperature", srl_cfg.temperature);
  get_if(j, "weight", srl_cfg.weight);
  get_if(j, "momentum", srl_cfg.momentum);
  get_if(j, "lr", srl_cfg.lr);
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text,
                                       const std::string& preset) {
  const json j = json::parse(text);
  const json exp = j.value("experiment", json::object());

  std::string algorithm = exp.value("algorithm", std::string("td3"));
  std::string variant = exp.value("srl_variant", std::string("none"));
  std::string preset_name = exp.value("preset", preset);

  ExperimentConfig cfg = make_config(preset_name, algorithm, variant);

  get_if(exp, "total_steps", cfg.total_steps);
  get_if(exp, "steps_per_episode", cfg.steps_per_episode);
  get_if(exp, "checkpoint_episodes", cfg.checkpoint_episodes);
  get_if(exp, "buffer_capacity", cfg.buffer_capacity);
  get_if(exp, "warmup_steps", cfg.warmup_steps);
  get_if(exp, "seeds", cfg.seeds);
  get_if(exp, "output_dir", cfg.output_dir);
  get_if(exp, "checkpoint_include_buffer", cfg.checkpoint_include_buffer);

  if (j.contains("env")) apply_env(j.at("env"), cfg.env);
  if (j.contains("agent")) apply_agent(j.at("agent"), cfg.agent);
  if (j.contains("srl")) apply_srl(j.at("srl"), cfg.srl);

  cfg.agent.total_steps = cfg.total_steps;
  cfg.srl.variant = cfg.srl_variant;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path, const std::string& preset) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str(), preset);
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
  json j;
  json& exp = j["experiment"];
  exp["algorithm"] = cfg.algorithm;
  exp["srl_variant"] = srl::to_string(cfg.srl_variant);
  exp["total_steps"] = cfg.total_steps;
  exp["steps_per_episode"] = cfg.steps_per_episode;
  exp["checkpoint_episodes"] = cfg.checkpoint_episodes;
  exp["buffer_capacity"] = cfg.buffer_capacity;
  exp["warmup_steps"] = cfg.warmup_steps;
  exp["seeds"] = cfg.seeds;
  exp["output_dir"] = cfg.output_dir;
  exp["checkpoint_include_buffer"] = cfg.checkpoint_include_buffer;

  json& env = j["env"];
  env["area_half_x"] = cfg.env.area_half_x;
  env["area_half_y"] = cfg.env.area_half_y;
  env["z_min"] = cfg.env.z_min;
  env["z_max"] = cfg.env.z_max;
  env["d_risk"] = cfg.env.d_risk;
  env["d_thr"] = cfg.env.d_thr;
  env["warn_margin"] = cfg.env.warn_margin;
  env["dt"] = cfg.env.dt;
  env["repeat_min"] = cfg.env.repeat_min;
  env["repeat_max"] = cfg.env.repeat_max;
  env["stillness_timeout"] = cfg.env.stillness_timeout;
  env["stillness_epsilon"] = cfg.env.stillness_epsilon;
  env["time_limit"] = cfg.env.time_limit;
  env["target_offset"] = cfg.env.target_offset;
  env["target_heights"] = cfg.env.target_heights;
  env["velocity_lag_tau"] = cfg.env.velocity_lag_tau;
  env["attitude_gain"] = cfg.env.attitude_gain;
  env["attitude_clamp"] = cfg.env.attitude_clamp;
  env["random_yaw"] = cfg.env.random_yaw;
  env["observation_mode"] = sim::to_string(cfg.env.observation_mode);

  json& agent = j["agent"];
  agent["gamma"] = cfg.agent.gamma;
  agent["tau"] = cfg.agent.tau;
  agent["batch_size"] = cfg.agent.batch_size;
  agent["hidden"] = cfg.agent.hidden;
  agent["train_freq"] = cfg.agent.train_freq;
  agent["lr"] = cfg.agent.lr;
  agent["eps_start"] = cfg.agent.eps_start;
  agent["eps_end"] = cfg.agent.eps_end;
  agent["eps_fraction"] = cfg.agent.eps_fraction;
  agent["target_update_interval"] = cfg.agent.target_update_interval;
  agent["lr_actor"] = cfg.agent.lr_actor;
  agent["lr_critic"] = cfg.agent.lr_critic;
  agent["expl_noise"] = cfg.agent.expl_noise;
  agent["target_noise"] = cfg.agent.target_noise;
  agent["noise_clip"] = cfg.agent.noise_clip;
  agent["policy_delay"] = cfg.agent.policy_delay;
  agent["lr_alpha"] = cfg.agent.lr_alpha;
  agent["target_entropy"] = cfg.agent.target_entropy;

  json& srl_j = j["srl"];
  srl_j["variant"] = srl::to_string(cfg.srl.variant);
  srl_j["latent_dim"] = cfg.srl.latent_dim;
  srl_j["hidden"] = cfg.srl.hidden;
  srl_j["temperature"] = cfg.srl.temperature;
  srl_j["weight"] = cfg.srl.weight;
  srl_j["momentum"] = cfg.srl.momentum;
  srl_j["lr"] = cfg.srl.lr;

  return j.dump(2);
}

void save_config_file(const std::string& path, const ExperimentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << config_to_json_text(cfg) << "\n";
}

std::uint64_t derive_seed(std::uint64_t base, int stream) {
  RandomEngine seeder(base);
  std::uint64_t v = 0;
  for (int i = 0; i <= stream; ++i) v = seeder.raw();
  return v;
}

}  // namespace amelnav::harness
