#include "amelnav/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace amelnav::metrics {

using nlohmann::json;

std::string to_json_line(const TrialRecord& r) {
  json j;
  j["method"] = r.method;
  j["seed"] = r.seed;
  j["checkpoint_episode"] = r.checkpoint_episode;
  j["trial"] = r.trial;
  j["target_index"] = r.target_index;
  j["trial_seed"] = r.trial_seed;
  j["cumulative_reward"] = r.cumulative_reward;
  j["steps"] = r.steps;
  j["sim_time"] = r.sim_time;
  j["success"] = r.success;
  j["terminal_cause"] = r.terminal_cause;
  j["path_length"] = r.path_length;
  j["shortest_path"] = r.shortest_path;
  j["final_distance"] = r.final_distance;
  j["final_r_dist"] = r.final_r_dist;
  j["final_r_ori"] = r.final_r_ori;
  j["final_r_elev"] = r.final_r_elev;
  return j.dump();
}

TrialRecord trial_from_json_line(const std::string& line) {
  const json j = json::parse(line);
  TrialRecord r;
  r.method = j.at("method").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.checkpoint_episode = j.at("checkpoint_episode").get<int>();
  r.trial = j.at("trial").get<int>();
  r.target_index = j.at("target_index").get<int>();
  r.trial_seed = j.at("trial_seed").get<std::uint64_t>();
  r.cumulative_reward = j.at("cumulative_reward").get<double>();
  r.steps = j.at("steps").get<int>();
  r.sim_time = j.at("sim_time").get<double>();
  r.success = j.at("success").get<bool>();
  r.terminal_cause = j.at("terminal_cause").get<std::string>();
  r.path_length = j.at("path_length").get<double>();
  r.shortest_path = j.at("shortest_path").get<double>();
  r.final_distance = j.at("final_distance").get<double>();
  r.final_r_dist = j.at("final_r_dist").get<double>();
  r.final_r_ori = j.at("final_r_ori").get<double>();
  r.final_r_elev = j.at("final_r_elev").get<double>();
  return r;
}

std::vector<TrialRecord> load_trial_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trial file: " + path);
  std::vector<TrialRecord> trials;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    trials.push_back(trial_from_json_line(line));
  }
  return trials;
}

void save_trial_file(const std::string& path, const std::vector<TrialRecord>& trials) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trial file: " + path);
  for (const auto& t : trials) out << to_json_line(t) << "\n";
}

double normalize_score(double raw, double reference_max) {
  if (!(reference_max > 0.0))
    throw std::invalid_argument("normalize_score: reference must be positive");
  return raw / reference_max;
}

std::vector<double> normalize_scores(const std::vector<double>& raw,
                                     double reference_max) {
  std::vector<double> out;
  out.reserve(raw.size());
  for (double r : raw) out.push_back(normalize_score(r, reference_max));
  return out;
}

double percentile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty data");
  if (sorted.size() == 1) return sorted[0];
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double iqm(std::vector<double> scores) {
  if (scores.size() < 4) throw std::invalid_argument("iqm: need at least 4 scores");
  std::sort(scores.begin(), scores.end());
  const double q1 = percentile_sorted(scores, 25.0);
  const double q3 = percentile_sorted(scores, 75.0);
  double sum = 0.0;
  int count = 0;
  for (double s : scores) {
    if (s >= q1 && s <= q3) {
      sum += s;
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

std::vector<double> performance_profile(const std::vector<double>& scores,
                                        const std::vector<double>& taus) {
  if (scores.empty()) throw std::invalid_argument("performance_profile: no scores");
  std::vector<double> fractions;
  fractions.reserve(taus.size());
  for (double tau : taus) {
    std::size_t above = 0;
    for (double s : scores)
      if (s > tau) ++above;
    fractions.push_back(static_cast<double>(above) /
                        static_cast<double>(scores.size()));
  }
  return fractions;
}

double probability_of_improvement(const std::vector<double>& x,
                                  const std::vector<double>& y) {
  if (x.empty() || y.empty())
    throw std::invalid_argument("probability_of_improvement: empty input");
  double score = 0.0;
  for (double xi : x)
    for (double yj : y) {
      if (xi > yj)
        score += 1.0;
      else if (xi == yj)
        score += 0.5;
    }
  return score / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

ConfidenceInterval stratified_bootstrap_ci(
    const std::vector<std::vector<double>>& strata, const Statistic& statistic,
    int resamples, double level, std::uint64_t seed) {
  if (strata.size() < 2)
    throw std::invalid_argument("stratified_bootstrap_ci: need >= 2 strata");
  for (const auto& s : strata)
    if (s.empty()) throw std::invalid_argument("stratified_bootstrap_ci: empty stratum");
  if (resamples < 1) throw std::invalid_argument("stratified_bootstrap_ci: resamples >= 1");

  RandomEngine rng(seed);
  std::size_t total = 0;
  for (const auto& s : strata) total += s.size();

  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(resamples));
  std::vector<double> pooled;
  pooled.reserve(total);
  for (int b = 0; b < resamples; ++b) {
    pooled.clear();
    for (const auto& s : strata) {
      const int n = static_cast<int>(s.size());
      for (int i = 0; i < n; ++i)
        pooled.push_back(s[static_cast<std::size_t>(rng.uniform_int(n))]);
    }
    stats.push_back(statistic(pooled));
  }
  std::sort(stats.begin(), stats.end());
  const double alpha = (1.0 - level) / 2.0;
  return {percentile_sorted(stats, 100.0 * alpha),
          percentile_sorted(stats, 100.0 * (1.0 - alpha))};
}

double dts(const TrialRecord& trial, double goal_distance, double tolerance) {
  if (trial.success) return 0.0;
  return std::max(0.0, std::abs(trial.final_distance - goal_distance) - tolerance);
}

double spl(const std::vector<SplTrial>& trials) {
  if (trials.empty()) throw std::invalid_argument("spl: no trials");
  double sum = 0.0;
  for (const auto& t : trials) {
    if (t.shortest_path <= 0.0)
      throw std::invalid_argument("spl: shortest path must be positive");
    if (t.success)
      sum += t.shortest_path / std::max(t.path_length, t.shortest_path);
  }
  return sum / static_cast<double>(trials.size());
}

double success_rate(const std::vector<TrialRecord>& trials) {
  if (trials.empty()) return 0.0;
  double s = 0.0;
  for (const auto& t : trials) s += t.success ? 1.0 : 0.0;
  return s / static_cast<double>(trials.size());
}

}  // namespace amelnav::metrics
