#pragma once

// Evaluation of an executed osteotomy against its straight-line plan:
// lateral RMSE, executed length, active tool time and the binned depth
// profile with its mean.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "osteonav/geometry.hpp"

namespace osteonav::metrics {

/// Straight cut {entry_point + s * direction, s in [0, length]}; depths are
/// measured positive along depth_axis (into bone).
struct PlannedCut {
  Vec3 entry_point = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  Vec3 depth_axis = Vec3::UnitZ();
  double length = 100.0;        // mm
  double target_depth = 4.0;    // mm
  double cutting_speed = 3.0;   // mm/s

  /// Throws InvalidArgument unless both axes are unit (1e-6), mutually
  /// perpendicular (1e-6) and all scalars are positive and finite.
  void validate() const;
  Vec3 lateral_axis() const { return direction.cross(depth_axis); }
  Vec3 point_at(double s, double depth) const { return entry_point + s * direction + depth * depth_axis; }
  double along(const Vec3& p) const { return (p - entry_point).dot(direction); }
  double depth_of(const Vec3& p) const { return (p - entry_point).dot(depth_axis); }
};

struct TrajectorySample {
  double timestamp = 0.0;  // s
  Vec3 point = Vec3::Zero();  // mm, robot base frame
  bool tool_active = false;

  friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

/// At least two samples with finite values and strictly increasing timestamps.
class TrajectoryRecording {
 public:
  /// Throws InvalidArgument when the invariants do not hold.
  explicit TrajectoryRecording(std::vector<TrajectorySample> samples);

  std::span<const TrajectorySample> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }

  friend bool operator==(const TrajectoryRecording&, const TrajectoryRecording&) = default;

 private:
  std::vector<TrajectorySample> samples_;
};

enum class Gating {
  /// tool_active and s within [-margin, length + margin].
  ActiveWindow,
  ActiveOnly,
  All,
};

enum class LateralMode {
  /// Distance to the plane spanned by direction and depth_axis.
  PureLateral,
  /// Full 3D distance to the infinite planned line.
  PointToLine,
};

struct AnalysisOptions {
  std::size_t bins = 100;
  Gating gating = Gating::ActiveWindow;
  double gate_margin = 2.0;  // mm
  LateralMode lateral_mode = LateralMode::PureLateral;
};

/// Per-sample deviation from the planned line for samples passing the gate,
/// in recording order. Throws EmptyAfterGating.
std::vector<double> perpendicular_errors(const TrajectoryRecording& rec, const PlannedCut& plan,
                                         const AnalysisOptions& options = {});

/// sqrt(mean(e^2)); throws EmptyInput.
double trajectory_rmse(std::span<const double> errors);

/// Span of the gated samples' projections onto the cut direction.
double executed_length(const TrajectoryRecording& rec, const PlannedCut& plan,
                       const AnalysisOptions& options = {});

/// Sum over maximal runs of consecutive active samples of (last - first) timestamp.
double procedure_time(const TrajectoryRecording& rec);

struct CutProfile {
  std::size_t bin_count = 0;
  double bin_width = 0.0;                    // mm
  std::vector<std::optional<double>> depths; // deepest sample per bin, nullopt if empty
  double coverage = 0.0;                     // fraction of non-empty bins
};

/// Lower edge of bin j; edge(bin_count) == length exactly. Bin j holds
/// s in [edge(j), edge(j+1)), the last bin also holds s == length.
double bin_edge(double length, std::size_t bin_count, std::size_t j);

/// Deepest sample per bin over all samples whose projection lies in [0, length].
CutProfile depth_profile(const TrajectoryRecording& rec, const PlannedCut& plan, std::size_t bins);

struct DepthSummary {
  double mean = 0.0;    // over non-empty bins
  double strict = 0.0;  // sum / K with empty bins counted as 0
};

/// Throws EmptyProfile when no bin holds a sample.
DepthSummary mean_depth(const CutProfile& profile);

/// Trial identifier such as M1^4 (technique M, set 1, trial 4). Serialized as "M1.4".
struct TrialLabel {
  char technique = 'R';
  int set = 1;
  int trial = 1;

  /// Accepts "M1.4" and "M1^4"; throws InvalidArgument otherwise.
  static TrialLabel parse(const std::string& text);
  std::string to_string() const;
  std::string set_name() const;

  friend bool operator==(const TrialLabel&, const TrialLabel&) = default;
};

struct MetricsReport {
  TrialLabel label;
  double target_depth = 0.0;      // mm
  /// Plan speed, or executed length / procedure time for manual ('M') trials.
  double cutting_speed = 0.0;     // mm/s
  double rmse = 0.0;              // mm
  double executed_length = 0.0;   // mm
  double procedure_time = 0.0;    // s
  double mean_depth = 0.0;        // mm
  double mean_depth_strict = 0.0; // mm
  CutProfile profile;
};

MetricsReport build_report(const TrajectoryRecording& rec, const PlannedCut& plan,
                           const AnalysisOptions& options, const TrialLabel& label);

}  // namespace osteonav::metrics
