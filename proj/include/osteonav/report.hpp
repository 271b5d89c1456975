#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "osteonav/metrics.hpp"

namespace osteonav::report {

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for a single trial

  friend bool operator==(const Stat&, const Stat&) = default;
};

/// One row of the results table: every trial sharing a set name (e.g. "R4").
struct SetSummary {
  std::string set;
  std::size_t trials = 0;
  Stat target_depth;    // mm
  Stat cutting_speed;   // mm/s
  Stat rmse;            // mm
  Stat length;          // mm
  Stat procedure_time;  // s
  Stat depth;           // mm

  friend bool operator==(const SetSummary&, const SetSummary&) = default;
};

/// Groups by set name in order of first appearance.
std::vector<SetSummary> summarize(std::span<const metrics::MetricsReport> reports);

enum class Format { Text, Csv, Json };

Format parse_format(std::string_view name);

/// Per-set mean ± std table, columns in the order target depth, cutting
/// speed, RMSE, length, procedure time, depth. Throws EmptyInput for no reports.
std::string emit_report_table(std::span<const metrics::MetricsReport> reports, Format format);

/// Reads back the CSV or JSON table.
std::vector<SetSummary> parse_report_table(std::string_view text, Format format);

nlohmann::json trial_to_json(const metrics::MetricsReport& r);
metrics::MetricsReport trial_from_json(const nlohmann::json& j);

/// Single-trial report document as written by `analyze --format json`.
std::string write_trial_report(const metrics::MetricsReport& r);
metrics::MetricsReport parse_trial_report(std::string_view text);

/// bin,s_start_mm,s_end_mm,depth_mm with an empty depth for missing bins.
std::string write_profile_csv(const metrics::CutProfile& profile, double length);

}  // namespace osteonav::report
