#include "amelnav/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace amelnav::harness {

using metrics::TrialRecord;
using nlohmann::json;

namespace {

struct Group {  // one (method, episode)
  std::map<std::uint64_t, std::vector<double>> scores_by_seed;  // normalized
  std::map<std::uint64_t, std::vector<const TrialRecord*>> trials_by_seed;

  std::vector<double> pooled_scores() const {
    std::vector<double> out;
    for (const auto& [seed, v] : scores_by_seed)
      out.insert(out.end(), v.begin(), v.end());
    return out;
  }
  std::vector<std::vector<double>> strata() const {
    std::vector<std::vector<double>> out;
    for (const auto& [seed, v] : scores_by_seed) out.push_back(v);
    return out;
  }
  int total_trials() const {
    int n = 0;
    for (const auto& [seed, v] : trials_by_seed) n += static_cast<int>(v.size());
    return n;
  }
};

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / (static_cast<double>(v.size()) - 1.0));
}

}  // namespace

metrics::MetricReport build_report(const std::vector<TrialRecord>& trials,
                                   const ReportOptions& opts) {
  if (trials.empty()) throw std::invalid_argument("build_report: no trials");

  // Normalization reference: the maximum cumulative trial reward of the
  // reference method across the whole set.
  double reference = -std::numeric_limits<double>::infinity();
  double global_max = -std::numeric_limits<double>::infinity();
  bool have_reference = false;
  for (const auto& t : trials) {
    global_max = std::max(global_max, t.cumulative_reward);
    if (t.method == opts.reference_method) {
      reference = std::max(reference, t.cumulative_reward);
      have_reference = true;
    }
  }
  metrics::MetricReport report;
  report.reference_method = opts.reference_method;
  if (!have_reference) {
    std::cerr << "report: reference method '" << opts.reference_method
              << "' absent; normalizing by the global maximum\n";
    reference = global_max;
    report.reference_method = "(global max)";
  }
  if (!(reference > 0.0))
    throw std::runtime_error("report: normalization reference must be positive");
  report.reference_max = reference;

  // Group records.
  std::map<std::string, std::map<int, Group>> groups;
  for (const auto& t : trials) {
    Group& g = groups[t.method][t.checkpoint_episode];
    g.scores_by_seed[t.seed].push_back(t.cumulative_reward / reference);
    g.trials_by_seed[t.seed].push_back(&t);
  }

  for (const auto& [method, _] : groups) report.methods.push_back(method);

  const metrics::Statistic iqm_stat = [](const std::vector<double>& v) {
    return metrics::iqm(v);
  };

  for (const auto& [method, by_episode] : groups) {
    for (const auto& [episode, group] : by_episode) {
      metrics::CheckpointStats stats;
      stats.episode = episode;
      stats.trials = group.total_trials();

      const std::vector<double> pooled = group.pooled_scores();
      stats.iqm_score = metrics::iqm(pooled);
      if (group.scores_by_seed.size() >= 2) {
        stats.iqm_ci = metrics::stratified_bootstrap_ci(
            group.strata(), iqm_stat, opts.bootstrap_resamples, opts.level,
            opts.bootstrap_seed);
      } else {
        stats.iqm_ci = {stats.iqm_score, stats.iqm_score};
      }

      // Per-seed DTS mean and SPL, then mean/std across seeds.
      std::vector<double> seed_dts, seed_spl;
      double successes = 0.0;
      for (const auto& [seed, recs] : group.trials_by_seed) {
        double dts_acc = 0.0;
        std::vector<metrics::SplTrial> spl_trials;
        for (const TrialRecord* r : recs) {
          dts_acc += metrics::dts(*r, opts.goal_distance, opts.dts_tolerance);
          spl_trials.push_back({r->success, r->path_length, r->shortest_path});
          successes += r->success ? 1.0 : 0.0;
        }
        seed_dts.push_back(dts_acc / static_cast<double>(recs.size()));
        seed_spl.push_back(metrics::spl(spl_trials));
      }
      stats.dts_mean =
          std::accumulate(seed_dts.begin(), seed_dts.end(), 0.0) / seed_dts.size();
      stats.dts_std = sample_std(seed_dts, stats.dts_mean);
      stats.spl_mean =
          std::accumulate(seed_spl.begin(), seed_spl.end(), 0.0) / seed_spl.size();
      stats.spl_std = sample_std(seed_spl, stats.spl_mean);
      stats.success_rate = successes / static_cast<double>(stats.trials);

      report.curves[method].push_back(stats);
    }
    std::sort(report.curves[method].begin(), report.curves[method].end(),
              [](const auto& a, const auto& b) { return a.episode < b.episode; });
  }

  // Final-checkpoint profiles and pairwise probability of improvement.
  std::vector<double> taus = opts.tau_grid;
  if (taus.empty())
    for (double t = 0.0; t <= 2.0 + 1e-12; t += 0.025) taus.push_back(t);

  std::map<std::string, std::vector<double>> final_scores;
  std::map<std::string, const Group*> final_groups;
  for (const auto& [method, by_episode] : groups) {
    const Group& g = by_episode.rbegin()->second;
    final_groups[method] = &g;
    final_scores[method] = g.pooled_scores();
  }

  for (const auto& [method, group] : final_groups) {
    const std::vector<double> pooled = group->pooled_scores();
    const std::vector<double> fractions = metrics::performance_profile(pooled, taus);

    // Bootstrap bands: one stratified resample yields the whole curve.
    std::vector<std::vector<double>> curve_samples(
        taus.size(), std::vector<double>());
    const auto strata = group->strata();
    RandomEngine rng(opts.bootstrap_seed);
    std::vector<double> resampled;
    for (int b = 0; b < opts.bootstrap_resamples; ++b) {
      resampled.clear();
      for (const auto& s : strata) {
        const int n = static_cast<int>(s.size());
        for (int i = 0; i < n; ++i)
          resampled.push_back(s[static_cast<std::size_t>(rng.uniform_int(n))]);
      }
      const auto f = metrics::performance_profile(resampled, taus);
      for (std::size_t k = 0; k < taus.size(); ++k) curve_samples[k].push_back(f[k]);
    }

    std::vector<metrics::ProfilePoint> profile;
    const double alpha = (1.0 - opts.level) / 2.0;
    for (std::size_t k = 0; k < taus.size(); ++k) {
      metrics::ProfilePoint p;
      p.tau = taus[k];
      p.fraction = fractions[k];
      std::sort(curve_samples[k].begin(), curve_samples[k].end());
      p.ci.low = metrics::percentile_sorted(curve_samples[k], 100.0 * alpha);
      p.ci.high = metrics::percentile_sorted(curve_samples[k], 100.0 * (1.0 - alpha));
      profile.push_back(p);
    }
    report.profiles[method] = std::move(profile);
  }

  const int m = static_cast<int>(report.methods.size());
  report.improvement.resize(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      report.improvement(i, j) = metrics::probability_of_improvement(
          final_scores[report.methods[static_cast<std::size_t>(i)]],
          final_scores[report.methods[static_cast<std::size_t>(j)]]);

  return report;
}

void write_report_files(const std::string& out_dir,
                        const metrics::MetricReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  json j;
  j["reference_max"] = report.reference_max;
  j["reference_method"] = report.reference_method;
  j["methods"] = report.methods;
  for (const auto& [method, curve] : report.curves) {
    json arr = json::array();
    for (const auto& s : curve) {
      json e;
      e["episode"] = s.episode;
      e["iqm"] = s.iqm_score;
      e["iqm_ci"] = {s.iqm_ci.low, s.iqm_ci.high};
      e["dts_mean"] = s.dts_mean;
      e["dts_std"] = s.dts_std;
      e["spl_mean"] = s.spl_mean;
      e["spl_std"] = s.spl_std;
      e["success_rate"] = s.success_rate;
      e["trials"] = s.trials;
      arr.push_back(e);
    }
    j["curves"][method] = arr;
  }
  for (const auto& [method, profile] : report.profiles) {
    json arr = json::array();
    for (const auto& p : profile)
      arr.push_back({{"tau", p.tau},
                     {"fraction", p.fraction},
                     {"ci", {p.ci.low, p.ci.high}}});
    j["profiles"][method] = arr;
  }
  {
    json poi = json::array();
    for (Eigen::Index i = 0; i < report.improvement.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < report.improvement.cols(); ++k)
        row.push_back(report.improvement(i, k));
      poi.push_back(row);
    }
    j["probability_of_improvement"] = poi;
  }
  std::ofstream(out_dir + "/report.json") << j.dump(2) << "\n";

  {
    std::ofstream csv(out_dir + "/iqm_curve.csv");
    csv << "method,episode,iqm,ci_low,ci_high\n";
    for (const auto& [method, curve] : report.curves)
      for (const auto& s : curve)
        csv << method << "," << s.episode << "," << s.iqm_score << ","
            << s.iqm_ci.low << "," << s.iqm_ci.high << "\n";
  }
  {
    std::ofstream csv(out_dir + "/profile.csv");
    csv << "method,tau,fraction,ci_low,ci_high\n";
    for (const auto& [method, profile] : report.profiles)
      for (const auto& p : profile)
        csv << method << "," << p.tau << "," << p.fraction << "," << p.ci.low
            << "," << p.ci.high << "\n";
  }
  {
    std::ofstream csv(out_dir + "/poi.csv");
    csv << "method_x,method_y,probability\n";
    for (std::size_t i = 0; i < report.methods.size(); ++i)
      for (std::size_t k = 0; k < report.methods.size(); ++k)
        csv << report.methods[i] << "," << report.methods[k] << ","
            << report.improvement(static_cast<Eigen::Index>(i),
                                  static_cast<Eigen::Index>(k))
            << "\n";
  }
  {
    std::ofstream csv(out_dir + "/dts_spl.csv");
    csv << "method,episode,dts_mean,dts_std,spl_mean,spl_std,success_rate\n";
    for (const auto& [method, curve] : report.curves)
      for (const auto& s : curve)
        csv << method << "," << s.episode << "," << s.dts_mean << ","
            << s.dts_std << "," << s.spl_mean << "," << s.spl_std << ","
            << s.success_rate << "\n";
  }
}

}  // namespace amelnav::harness
