#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "amelnav/rng.hpp"

namespace amelnav::metrics {

/// One evaluation run of a policy against one target.
struct TrialRecord {
  std::string method;
  std::uint64_t seed = 0;          // training seed the policy came from
  int checkpoint_episode = 0;
  int trial = 0;                   // trial index for this target
  int target_index = 0;
  std::uint64_t trial_seed = 0;
  double cumulative_reward = 0.0;
  int steps = 0;
  double sim_time = 0.0;
  bool success = false;
  std::string terminal_cause;
  double path_length = 0.0;        // m, integrated arc length
  double shortest_path = 0.0;      // m, straight line to the goal ring
  double final_distance = 0.0;     // m, UAV to target at the end
  double final_r_dist = 0.0;
  double final_r_ori = 0.0;
  double final_r_elev = 0.0;
};

std::string to_json_line(const TrialRecord& r);
TrialRecord trial_from_json_line(const std::string& line);
std::vector<TrialRecord> load_trial_file(const std::string& path);
void save_trial_file(const std::string& path, const std::vector<TrialRecord>& trials);

/// raw / reference_max; the reference must be positive.
double normalize_score(double raw, double reference_max);
std::vector<double> normalize_scores(const std::vector<double>& raw,
                                     double reference_max);

/// Linear-interpolation percentile of a sorted vector, p in [0, 100].
double percentile_sorted(const std::vector<double>& sorted, double p);

/// Mean of the scores inside [Q1, Q3] (inclusive), quartiles by linear
/// interpolation. Requires at least 4 scores.
double iqm(std::vector<double> scores);

/// Empirical tail fractions: F(tau) = fraction of scores strictly above tau.
std::vector<double> performance_profile(const std::vector<double>& scores,
                                        const std::vector<double>& taus);

/// Mann-Whitney style P(x > y) with half credit for ties.
double probability_of_improvement(const std::vector<double>& x,
                                  const std::vector<double>& y);

struct ConfidenceInterval {
  double low = 0.0;
  double high = 0.0;
};

using Statistic = std::function<double(const std::vector<double>&)>;

/// Percentile bootstrap interval: resample with replacement inside each
/// stratum, pool, and evaluate `statistic`. `level` is e.g. 0.95.
ConfidenceInterval stratified_bootstrap_ci(
    const std::vector<std::vector<double>>& strata, const Statistic& statistic,
    int resamples = 2000, double level = 0.95, std::uint64_t seed = 0);

/// Distance from the final position to the goal sphere of radius
/// `goal_distance`, minus the tolerance; zero for successful trials.
double dts(const TrialRecord& trial, double goal_distance, double tolerance = 0.0);

struct SplTrial {
  bool success = false;
  double path_length = 0.0;
  double shortest_path = 0.0;
};

/// Success weighted by path length, averaged over trials.
double spl(const std::vector<SplTrial>& trials);

double success_rate(const std::vector<TrialRecord>& trials);

/// Aggregates emitted by the report stage.
struct CheckpointStats {
  int episode = 0;
  double iqm_score = 0.0;
  ConfidenceInterval iqm_ci;
  double dts_mean = 0.0, dts_std = 0.0;
  double spl_mean = 0.0, spl_std = 0.0;
  double success_rate = 0.0;
  int trials = 0;
};

struct ProfilePoint {
  double tau = 0.0;
  double fraction = 0.0;
  ConfidenceInterval ci;
};

struct MetricReport {
  double reference_max = 0.0;
  std::string reference_method;
  std::vector<std::string> methods;
  std::map<std::string, std::vector<CheckpointStats>> curves;
  std::map<std::string, std::vector<ProfilePoint>> profiles;  // final checkpoint
  Eigen::MatrixXd improvement;  // improvement(i, j) = P(method_i > method_j)
};

}  // namespace amelnav::metrics
