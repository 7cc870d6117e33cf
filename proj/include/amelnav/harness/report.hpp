#pragma once

#include <string>
#include <vector>

#include "amelnav/metrics/metrics.hpp"

namespace amelnav::harness {

struct ReportOptions {
  std::string reference_method = "td3";
  double goal_distance = 0.35;  // for DTS
  double dts_tolerance = 0.0;
  std::vector<double> tau_grid;  // defaults to 0..2 step 0.025
  int bootstrap_resamples = 2000;
  double level = 0.95;
  std::uint64_t bootstrap_seed = 1234;
};

/// Aggregate trial records into the full metric report. Scores are
/// normalized by the maximum cumulative reward observed for the reference
/// method (falling back to the global maximum when it is absent).
metrics::MetricReport build_report(const std::vector<metrics::TrialRecord>& trials,
                                   const ReportOptions& opts);

/// report.json plus flat CSV tables (iqm_curve, profile, poi, dts_spl).
void write_report_files(const std::string& out_dir,
                        const metrics::MetricReport& report);

}  // namespace amelnav::harness
