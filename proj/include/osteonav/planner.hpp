#pragma once

// Automated robotic cutting sequence: for each depth increment the tool is
// inserted at the start of the line, driven along the full cut, and
// retracted above the surface.

#include <optional>
#include <span>
#include <vector>

#include "osteonav/geometry.hpp"
#include "osteonav/metrics.hpp"

namespace osteonav::planner {

enum class SegmentKind { Insert, Cut, Retract, Transit };

struct Segment {
  SegmentKind kind = SegmentKind::Cut;
  Vec3 start = Vec3::Zero();  // mm
  Vec3 end = Vec3::Zero();    // mm
  double speed = 1.0;         // mm/s
  bool tool_active = false;

  double length() const { return (end - start).norm(); }
  double duration() const { return length() / speed; }
};

struct Pass {
  double depth = 0.0;  // mm
  Segment insert;
  Segment cut;
  Segment retract;
};

struct CutSequence {
  std::vector<Pass> passes;

  /// Passes flattened in execution order with an inactive transit segment
  /// wherever a pass does not start where the previous one ended.
  std::vector<Segment> segments() const;
};

struct PassPolicy {
  double depth_increment = 4.0;      // mm
  double insertion_speed = 2.0;      // mm/s
  double retraction_speed = 10.0;    // mm/s
  /// Overrides the plan's cutting speed when set.
  std::optional<double> cutting_speed;
  double retract_clearance = 5.0;    // mm above the surface
  /// Alternate the cut direction on every pass instead of restarting at the entry.
  bool bidirectional = false;
};

/// One pass at an explicit depth and cutting speed.
struct PassSpec {
  double depth = 0.0;
  double cutting_speed = 0.0;
};

/// ceil(target_depth / depth_increment) pass depths, the last clamped to the target.
std::vector<double> pass_depths(double target_depth, double depth_increment);

/// Throws InvalidPolicy for non-positive increment, speeds or clearance, or an
/// increment larger than the target depth.
CutSequence plan_sequence(const metrics::PlannedCut& plan, const PassPolicy& policy);

/// Builds passes at the given depths and speeds; insertion, retraction and
/// direction come from `policy`.
CutSequence plan_passes(const metrics::PlannedCut& plan, std::span<const PassSpec> passes,
                        const PassPolicy& policy);

struct Timeline {
  double total_active_time = 0.0;  // s, insert + cut
  double cutting_time = 0.0;       // s, cut segments only
  double total_time = 0.0;         // s, every segment including transits
  std::vector<double> segment_durations;  // s, aligned with CutSequence::segments()
};

Timeline nominal_timeline(const CutSequence& seq);

/// Uniform-time samples along every segment: max(2, ceil(duration * rate))
/// per segment, endpoints included, shared boundaries emitted once.
/// A boundary sample is active when either neighbouring segment is.
metrics::TrajectoryRecording sample_sequence(const CutSequence& seq, double rate_hz);

}  // namespace osteonav::planner
