#pragma once

#include <span>
#include <vector>

#include "osteonav/geometry.hpp"
#include "osteonav/handeye.hpp"

namespace osteonav::pointcal {

struct PivotOptions {
  /// Largest pairwise rotation between poses must reach this.
  double min_rotation_spread = deg_to_rad(20.0);
};

struct PivotSolution {
  Vec3 tip_in_tool = Vec3::Zero();       // mm, tool frame
  Vec3 divot_in_tracker = Vec3::Zero();  // mm, tracker frame
  double rms_residual = 0.0;             // mm
};

/// Solves [R_i | -I] [tip; divot] = -t_i for every tracker_from_tool_i in
/// least squares. Raises InvalidArgument below three poses and
/// DegenerateConfiguration when the rotations cannot separate the unknowns.
PivotSolution calibrate_pivot(std::span<const RigidTransform> tracker_from_tool,
                              const PivotOptions& options = {});

/// Per-pose distance between the transformed tip and the divot.
std::vector<double> pivot_errors(std::span<const RigidTransform> tracker_from_tool,
                                 const PivotSolution& solution);

struct TipSample {
  RigidTransform base_from_ee;
  /// Pose of the digitizer touching the osteotome tip; its translation is the tip point.
  RigidTransform tracker_from_digitizer;
};

struct TipCalDataset {
  std::vector<TipSample> samples;
  handeye::Solution hand_eye;
};

struct TipCalOptions {
  /// Largest allowed distance of a per-sample tip position from their mean, mm.
  double max_spread = 1.0;
};

struct TipCalSolution {
  /// Translation: mean over samples. Rotation: from the first sample.
  RigidTransform ee_from_tip;
  double spread = 0.0;  // mm, max distance of a sample's tip from the mean
};

/// ee_from_tip per sample = inv(base_from_ee) * base_from_tracker * tracker_from_digitizer.
RigidTransform tip_in_ee_single(const TipSample& sample, const RigidTransform& base_from_tracker);

/// Throws InconsistentSamples when the per-sample tips spread beyond `max_spread`.
TipCalSolution calibrate_tip_in_ee(const TipCalDataset& dataset, const TipCalOptions& options = {});

/// base_from_tracker * tracker_from_tool * tip_in_tool.
Vec3 tip_position_in_base(const handeye::Solution& hand_eye, const RigidTransform& tracker_from_tool,
                          const PivotSolution& pivot);

}  // namespace osteonav::pointcal
