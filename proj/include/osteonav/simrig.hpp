#pragma once

// Synthetic rig with known ground truth. Every generator takes an explicit
// seed and draws from a single std::mt19937_64, so equal arguments give
// bit-identical output.

#include <cstdint>
#include <vector>

#include "osteonav/geometry.hpp"
#include "osteonav/handeye.hpp"
#include "osteonav/metrics.hpp"
#include "osteonav/planner.hpp"
#include "osteonav/pointcal.hpp"

namespace osteonav::simrig {

struct RigGroundTruth {
  RigidTransform base_from_tracker;
  RigidTransform ee_from_tool;
  Vec3 tip_in_tool = Vec3(0.0, 0.0, 120.0);
  Vec3 divot_in_tracker = Vec3(50.0, -30.0, -1100.0);
  std::uint64_t seed = 0;

  handeye::Solution hand_eye() const;
  pointcal::PivotSolution pivot() const;
  /// Tip frame with the tool's orientation, expressed in the EE frame.
  RigidTransform ee_from_tip() const;
};

/// Random but plausible rig: tracker about 1.5 m from the robot base facing
/// the workspace, marker 60-120 mm off the flange.
RigGroundTruth make_ground_truth(std::uint64_t seed);

/// Standard deviations of the tangent-space perturbation applied to each
/// measured pose: R <- R * exp(w), t <- t + v with w, v ~ N(0, sigma^2 I).
struct NoiseModel {
  double tracker_rot_sigma = 0.0;    // rad
  double tracker_trans_sigma = 0.0;  // mm
  double robot_rot_sigma = 0.0;      // rad
  double robot_trans_sigma = 0.0;    // mm

  void validate() const;
};

struct Workspace {
  Vec3 center = Vec3(500.0, 0.0, 400.0);     // mm, base frame
  Vec3 half_extent = Vec3(150.0, 150.0, 100.0);
  double max_tilt = deg_to_rad(60.0);        // orientation spread about the nominal
  double min_step_rotation = deg_to_rad(30.0);  // between consecutive poses
};

handeye::Dataset generate_handeye_dataset(const RigGroundTruth& gt, std::size_t n, const NoiseModel& noise,
                                          std::uint64_t seed, const Workspace& ws = {});

struct PivotMotion {
  double cone_half_angle = deg_to_rad(30.0);
  /// Spin about the shaft, uniform in [-spin, spin].
  double spin = deg_to_rad(20.0);
};

/// Tool poses with R_i * tip + t_i == divot before noise.
std::vector<RigidTransform> generate_pivot_dataset(const RigGroundTruth& gt, std::size_t n,
                                                   const PivotMotion& motion, const NoiseModel& noise,
                                                   std::uint64_t seed);

/// Digitizer touches the true tip from random orientations; robot poses
/// drawn from the workspace. Carries the ground-truth hand-eye solution.
pointcal::TipCalDataset generate_tipcal_dataset(const RigGroundTruth& gt, std::size_t n, const NoiseModel& noise,
                                                std::uint64_t seed, const Workspace& ws = {});

/// Planner-driven trial observed through the tracker: every nominal tip
/// position is turned into a marker pose with the shaft along the depth
/// axis, perturbed by the tracker noise, and mapped back to the base frame.
metrics::TrajectoryRecording synthesize_ruso_trial(const RigGroundTruth& gt, const metrics::PlannedCut& plan,
                                                   const planner::PassPolicy& policy, const NoiseModel& noise,
                                                   double rate_hz, std::uint64_t seed);

/// Stand-in for a manual operator.
struct JitterModel {
  double lateral_sigma = 1.1;       // mm, stationary sigma of the lateral AR(1) walk
  double depth_bias = 3.0;          // mm, final depth overshoot
  double depth_sigma = 0.8;         // mm, trial-to-trial spread of the final depth
  double correlation_time = 0.5;    // s
  int min_passes = 2;
  int max_passes = 4;
  /// Effective speed: executed length over total active time, mm/s.
  double speed_mean = 1.68;
  double speed_sigma = 0.15;

  void validate() const;
};

/// Draws the pass count and final depth (target + bias + N(0, depth_sigma)),
/// spaces pass depths evenly up to it, and runs every pass at
/// pass_count * effective speed so the whole cut averages the effective
/// speed. Lateral deviation follows an AR(1) process started from its
/// stationary distribution.
metrics::TrajectoryRecording synthesize_muso_trial(const metrics::PlannedCut& plan, const JitterModel& jitter,
                                                   double rate_hz, std::uint64_t seed,
                                                   const planner::PassPolicy& motion = {});

}  // namespace osteonav::simrig
