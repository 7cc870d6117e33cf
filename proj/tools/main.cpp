// Command-line front end: train / eval / report / cost.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amelnav/harness/evaluator.hpp"
#include "amelnav/harness/report.hpp"
#include "amelnav/harness/trainer.hpp"

namespace fs = std::filesystem;
using namespace amelnav;

namespace {

harness::ExperimentConfig resolve_config(const std::string& config_path,
                                         const std::string& preset,
                                         const std::string& algo,
                                         const std::string& srl_variant) {
  if (!config_path.empty()) return harness::load_config_file(config_path, preset);
  return harness::make_config(preset, algo, srl_variant);
}

int cmd_train(const std::string& config_path, const std::string& preset,
              const std::string& algo, const std::string& srl_variant,
              std::optional<std::uint64_t> seed_override, const std::string& out) {
  harness::ExperimentConfig cfg =
      resolve_config(config_path, preset, algo, srl_variant);
  if (!out.empty()) cfg.output_dir = out;
  std::vector<std::uint64_t> seeds =
      seed_override ? std::vector<std::uint64_t>{*seed_override} : cfg.seeds;

  for (std::uint64_t seed : seeds) {
    std::cout << "training " << cfg.method_name() << " seed " << seed << " ("
              << cfg.total_steps << " steps)\n";
    harness::Trainer trainer(cfg, seed);
    const auto result = trainer.run();
    std::cout << "  wrote " << result.checkpoints.size() << " checkpoints, log "
              << result.log_path << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& config_path,
             const std::string& policy_name, int trials_per_target,
             std::uint64_t seed, const std::string& out) {
  harness::ExperimentConfig cfg;
  std::unique_ptr<harness::AgentStack> stack;
  std::string method = policy_name;
  int episode = 0;

  if (policy_name == "checkpoint") {
    if (checkpoint.empty()) {
      std::cerr << "eval: --checkpoint required\n";
      return 2;
    }
    auto loaded = harness::load_checkpoint(checkpoint);
    cfg = loaded.config;
    if (!config_path.empty()) {
      const auto requested = harness::load_config_file(config_path);
      if (harness::config_to_json_text(requested) !=
          harness::config_to_json_text(cfg)) {
        std::cerr << "eval: --config disagrees with the checkpoint's config\n";
        return 2;
      }
    }
    stack = std::move(loaded.stack);
    method = cfg.method_name();
    episode = loaded.episode;
    seed = loaded.seed;
  } else {
    cfg = resolve_config(config_path, "paper", "td3", "none");
  }

  fs::create_directories(out.empty() ? "." : out);
  const std::string base = (out.empty() ? "." : out) + "/" + method + "_seed" +
                           std::to_string(seed) + "_ep" + std::to_string(episode);

  harness::EvalOptions opts;
  opts.trials_per_target = trials_per_target;
  opts.method = method;
  opts.seed = seed;
  opts.checkpoint_episode = episode;
  opts.trial_path = base + "_trials.jsonl";
  opts.trajectory_path = base + "_trajectories.jsonl";

  std::vector<metrics::TrialRecord> records;
  if (policy_name == "checkpoint") {
    harness::StackPolicy policy(*stack);
    records = harness::evaluate_policy(policy, cfg, opts);
  } else if (policy_name == "oracle") {
    harness::OraclePolicy policy;
    records = harness::evaluate_policy(policy, cfg, opts);
  } else {
    harness::RandomPolicy policy(cfg.algorithm == "dqn");
    records = harness::evaluate_policy(policy, cfg, opts);
  }

  const double sr = metrics::success_rate(records);
  std::cout << "wrote " << records.size() << " trials to " << opts.trial_path
            << " (success rate " << sr << ")\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& trial_files, const std::string& out,
               const std::string& reference, double goal_distance) {
  std::vector<metrics::TrialRecord> trials;
  for (const auto& f : trial_files) {
    const auto part = metrics::load_trial_file(f);
    trials.insert(trials.end(), part.begin(), part.end());
  }
  harness::ReportOptions opts;
  opts.reference_method = reference;
  opts.goal_distance = goal_distance;
  const auto report = harness::build_report(trials, opts);
  harness::write_report_files(out, report);

  std::cout << "reference max (" << report.reference_method
            << "): " << report.reference_max << "\n";
  for (const auto& [method, curve] : report.curves) {
    const auto& last = curve.back();
    std::cout << method << " ep" << last.episode << ": IQM " << last.iqm_score
              << " [" << last.iqm_ci.low << ", " << last.iqm_ci.high << "]"
              << " SR " << last.success_rate << " DTS " << last.dts_mean
              << " SPL " << last.spl_mean << "\n";
  }
  std::cout << "report written to " << out << "\n";
  return 0;
}

int cmd_cost(const std::string& config_path, const std::string& preset,
             const std::string& algo, const std::string& srl_variant) {
  const harness::ExperimentConfig cfg =
      resolve_config(config_path, preset, algo, srl_variant);
  harness::AgentStack stack(cfg, 0);
  const auto learning = stack.cost(rl::CostPhase::Learning);
  const auto evaluation = stack.cost(rl::CostPhase::Evaluation);
  std::cout << "method " << cfg.method_name() << "\n";
  std::cout << "learning flops " << learning.flops << " params "
            << learning.params << "\n";
  std::cout << "evaluation flops " << evaluation.flops << " params "
            << evaluation.params << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadcopter object-goal navigation: training and evaluation"};
  app.require_subcommand(1);

  std::string config_path, preset = "paper", algo = "td3", srl_variant = "none";
  std::string out, checkpoint, policy = "checkpoint", reference = "td3";
  std::vector<std::string> trial_files;
  int trials_per_target = 10;
  double goal_distance = 0.35;
  std::uint64_t seed = 0;

  auto add_config_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--preset", preset, "paper or desk")
        ->check(CLI::IsMember({"paper", "desk"}));
    cmd->add_option("--algo", algo, "dqn, td3 or sac")
        ->check(CLI::IsMember({"dqn", "td3", "sac"}));
    cmd->add_option("--srl", srl_variant, "none, det, sto or l2-online")
        ->check(CLI::IsMember({"none", "det", "sto", "l2-online"}));
  };

  CLI::App* train = app.add_subcommand("train", "run the seeded training loop");
  add_config_flags(train);
  CLI::Option* seed_opt =
      train->add_option("--seed", seed, "override: train this seed only");
  train->add_option("--out", out, "override the output directory");

  CLI::App* eval =
      app.add_subcommand("eval", "evaluate a checkpoint or scripted policy");
  eval->add_option("--checkpoint", checkpoint, "checkpoint file");
  eval->add_option("--config", config_path,
                   "config (oracle/random, or mismatch check)");
  eval->add_option("--policy", policy, "checkpoint, oracle or random")
      ->check(CLI::IsMember({"checkpoint", "oracle", "random"}));
  eval->add_option("--trials-per-target", trials_per_target,
                   "trials per target (default 10)");
  eval->add_option("--seed", seed, "record seed label for scripted policies");
  eval->add_option("--out", out, "output directory");

  CLI::App* report =
      app.add_subcommand("report", "aggregate trial files into metrics");
  report->add_option("files", trial_files, "trial JSONL files")->required();
  report->add_option("--out", out, "output directory")->required();
  report->add_option("--reference-method", reference,
                     "normalization reference (default td3)");
  report->add_option("--goal-distance", goal_distance, "goal ring radius for DTS");

  CLI::App* cost = app.add_subcommand("cost", "print flop/parameter counts");
  add_config_flags(cost);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed())
      return cmd_train(config_path, preset, algo, srl_variant,
                       seed_opt->count() ? std::optional<std::uint64_t>(seed)
                                         : std::nullopt,
                       out);
    if (eval->parsed())
      return cmd_eval(checkpoint, config_path, policy, trials_per_target, seed, out);
    if (report->parsed())
      return cmd_report(trial_files, out, reference, goal_distance);
    if (cost->parsed())
      return cmd_cost(config_path, preset, algo, srl_variant);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
