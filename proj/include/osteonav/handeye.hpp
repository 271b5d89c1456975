#pragma once

// Two-stage hand-eye calibration for a tracker observing a marker rigidly
// mounted on the robot flange.
//
// Loop closure per sample i:
//   tracker_from_tool_i = tracker_from_base * base_from_ee_i * ee_from_tool
//
// Stage 1 solves base_from_tracker (Y) from relative motions
//   A = base_from_ee_j * inv(base_from_ee_i),  B = tracker_from_tool_j * inv(tracker_from_tool_i)
// which satisfy A * Y = Y * B. Stage 2 solves ee_from_tool (X) from
//   base_from_ee_i * X = Y * tracker_from_tool_i.

#include <span>
#include <utility>
#include <vector>

#include "osteonav/geometry.hpp"

namespace osteonav::handeye {

struct Sample {
  RigidTransform base_from_ee;       // robot kinematics
  RigidTransform tracker_from_tool;  // optical measurement
};

using Dataset = std::vector<Sample>;

struct Motion {
  RigidTransform robot;    // A
  RigidTransform tracker;  // B
};

enum class Pairing { Consecutive, AllPairs };

struct Options {
  Pairing pairing = Pairing::Consecutive;
  /// Relative motions rotating less than this carry no usable axis and are dropped.
  double min_motion_angle = deg_to_rad(10.0);
  /// Largest angle between any two motion axes must reach this.
  double min_axis_separation = deg_to_rad(15.0);
  /// Accept two-pose datasets with a single rotation axis and return a
  /// particular member of the solution family instead of raising.
  bool allow_underdetermined = false;
  /// Gauss-Newton iterations of the joint refinement on the absolute closure
  /// equations after the two closed-form stages; 0 keeps the closed form.
  int refine_iterations = 20;
};

struct Solution {
  RigidTransform base_from_tracker;  // Y
  RigidTransform ee_from_tool;       // X
  double residual_rotation = 0.0;     // rad, RMS over samples
  double residual_translation = 0.0;  // mm, RMS over samples

  RigidTransform tracker_from_base() const { return invert(base_from_tracker); }
  RigidTransform tool_from_ee() const { return invert(ee_from_tool); }
};

struct ClosureResidual {
  double rotation = 0.0;     // rad RMS
  double translation = 0.0;  // mm RMS
};

/// Relative motions under the chosen pairing, keeping only those whose robot
/// rotation reaches `min_motion_angle`. Throws InsufficientMotion when none
/// survive and InvalidArgument for fewer than two samples.
std::vector<Motion> build_relative_motions(std::span<const Sample> samples,
                                           const Options& options = {});

/// Rotation by Kabsch over paired rotation vectors of A and B, then
/// translation by stacked least squares of (R_A - I) t_Y = R_Y t_B - t_A.
RigidTransform solve_base_to_tracker(std::span<const Motion> motions, const Options& options = {});

/// Chordal rotation mean of R_A'^T R_B', then the mean translation.
RigidTransform solve_ee_to_tool(std::span<const Sample> samples,
                                const RigidTransform& base_from_tracker);

/// RMS loop-closure error of the predicted tracker_from_tool against the measurement.
ClosureResidual closure_residual(std::span<const Sample> samples,
                                 const RigidTransform& base_from_tracker,
                                 const RigidTransform& ee_from_tool);

/// Refines Y and X on base_from_ee_i * X = Y * tracker_from_tool_i:
/// Gauss-Newton on the translational closure for (R_Y, t_Y, t_X), then the
/// chordal mean for R_X. Returns the input unchanged when the poses do not
/// constrain all nine parameters.
std::pair<RigidTransform, RigidTransform> refine_jointly(std::span<const Sample> samples,
                                                         const RigidTransform& base_from_tracker,
                                                         const RigidTransform& ee_from_tool, int iterations);

Solution calibrate_hand_eye(std::span<const Sample> samples, const Options& options = {});

}  // namespace osteonav::handeye
