#pragma once

// On-disk formats.
//
// Pose log (CSV, LF line endings, '.' decimal separator):
//   timestamp,source,target,qw,qx,qy,qz,tx,ty,tz
// A row is the pose of `target` expressed in `source`, i.e. the transform
// source_from_target; translation in mm, timestamp in s.
//
// Trajectory log (CSV): timestamp,x,y,z,active  with active in {0,1}.
//
// Plan (JSON):
//   { "entry_point": [x,y,z], "direction": [..], "depth_axis": [..],
//     "length_mm": L, "target_depth_mm": d, "cutting_speed_mm_s": v,
//     "pass_policy": { "depth_increment_mm", "insertion_speed_mm_s",
//                      "retraction_speed_mm_s", "cutting_speed_mm_s",
//                      "retract_clearance_mm", "bidirectional" },
//     "analysis": { "K", "gating", "gate_margin_mm", "lateral_mode" } }
// pass_policy and analysis and all their keys are optional; unknown keys
// anywhere are rejected.

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "osteonav/geometry.hpp"
#include "osteonav/handeye.hpp"
#include "osteonav/metrics.hpp"
#include "osteonav/planner.hpp"

namespace osteonav::io {

inline constexpr std::string_view kPoseLogHeader = "timestamp,source,target,qw,qx,qy,qz,tx,ty,tz";
inline constexpr std::string_view kTrajectoryLogHeader = "timestamp,x,y,z,active";

/// Accepted quaternion norms; anything inside is renormalized, anything outside is a ParseError.
inline constexpr double kQuatNormMin = 0.999;
inline constexpr double kQuatNormMax = 1.001;

struct PoseLogRow {
  double timestamp = 0.0;
  FrameId source = FrameId::S;
  FrameId target = FrameId::EE;
  std::array<double, 4> quaternion{1.0, 0.0, 0.0, 0.0};  // w, x, y, z
  Vec3 translation = Vec3::Zero();

  static PoseLogRow from_transform(double timestamp, FrameId source, FrameId target, const RigidTransform& t);
  RigidTransform transform() const;

  friend bool operator==(const PoseLogRow&, const PoseLogRow&) = default;
};

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

std::vector<PoseLogRow> parse_pose_log(std::string_view text);
std::string write_pose_log(std::span<const PoseLogRow> rows);

/// Throws ParseError, or NonMonotoneTime when a timestamp does not increase.
metrics::TrajectoryRecording parse_trajectory_log(std::string_view text);
std::string write_trajectory_log(const metrics::TrajectoryRecording& rec);

struct PlanFile {
  metrics::PlannedCut cut;
  planner::PassPolicy policy;
  metrics::AnalysisOptions analysis;
};

/// Schema and value validation; every failure is a ParseError.
PlanFile parse_plan(std::string_view json_text);
std::string write_plan(const PlanFile& plan);

nlohmann::json transform_to_json(const RigidTransform& t);
/// Expects {"rotation": 3x3 rows, "translation": [3]}; the rotation is projected onto SO(3).
RigidTransform transform_from_json(const nlohmann::json& j);

nlohmann::json hand_eye_to_json(const handeye::Solution& s);
handeye::Solution hand_eye_from_json(const nlohmann::json& j);

/// Pose-log rows grouped by timestamp into (source,target) pairs.
/// Each timestamp must carry exactly one row of each requested pair.
struct PairedPoses {
  std::vector<double> timestamps;
  std::vector<RigidTransform> first;
  std::vector<RigidTransform> second;
};
PairedPoses pair_by_timestamp(std::span<const PoseLogRow> rows, FrameId first_source, FrameId first_target,
                              FrameId second_source, FrameId second_target);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace osteonav::io
