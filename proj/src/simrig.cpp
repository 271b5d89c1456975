#include "osteonav/simrig.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "osteonav/errors.hpp"

namespace osteonav::simrig {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

Vec3 normal3(Rng& rng) {
  const double x = normal(rng);
  const double y = normal(rng);
  const double z = normal(rng);
  return {x, y, z};
}

Vec3 random_unit(Rng& rng) {
  for (;;) {
    const Vec3 v = normal3(rng);
    const double n = v.norm();
    if (n > 1e-6) return v / n;
  }
}

Rotation3 random_rotation(Rng& rng) {
  for (;;) {
    const double w = normal(rng);
    const double x = normal(rng);
    const double y = normal(rng);
    const double z = normal(rng);
    if (w * w + x * x + y * y + z * z > 1e-6) return Rotation3::from_quaternion(w, x, y, z);
  }
}

// Rotation taking unit vector `from` onto unit vector `to`.
Rotation3 align(const Vec3& from, const Vec3& to) {
  const Eigen::Quaterniond q = Eigen::Quaterniond::FromTwoVectors(from, to);
  return Rotation3::nearest(q.toRotationMatrix());
}

// Draws are taken even for zero sigma so streams stay aligned across noise levels.
RigidTransform perturb(const RigidTransform& pose, double rot_sigma, double trans_sigma, Rng& rng) {
  const Vec3 w = rot_sigma * normal3(rng);
  const Vec3 v = trans_sigma * normal3(rng);
  return {pose.rotation() * Rotation3::from_rotation_vector(w), pose.translation() + v};
}

RigidTransform random_robot_pose(const Workspace& ws, Rng& rng) {
  static const Rotation3 flange_down = Rotation3::about_axis(Vec3::UnitX(), kPi);
  Vec3 p;
  for (int k = 0; k < 3; ++k) p(k) = ws.center(k) + uniform(rng, -ws.half_extent(k), ws.half_extent(k));
  const Vec3 axis = random_unit(rng);
  const double tilt = uniform(rng, 0.0, ws.max_tilt);
  return {Rotation3::about_axis(axis, tilt) * flange_down, p};
}

}  // namespace

handeye::Solution RigGroundTruth::hand_eye() const {
  handeye::Solution s;
  s.base_from_tracker = base_from_tracker;
  s.ee_from_tool = ee_from_tool;
  return s;
}

pointcal::PivotSolution RigGroundTruth::pivot() const { return {tip_in_tool, divot_in_tracker, 0.0}; }

RigidTransform RigGroundTruth::ee_from_tip() const {
  return compose(ee_from_tool, RigidTransform::from_translation(tip_in_tool));
}

RigGroundTruth make_ground_truth(std::uint64_t seed) {
  Rng rng(seed);
  RigGroundTruth gt;
  gt.seed = seed;

  const Vec3 workspace_center(500.0, 0.0, 400.0);
  Vec3 tracker_pos;
  tracker_pos.x() = 1800.0 + uniform(rng, -200.0, 200.0);
  tracker_pos.y() = uniform(rng, -400.0, 400.0);
  tracker_pos.z() = 900.0 + uniform(rng, -200.0, 200.0);
  // Tracker z axis looks at the workspace, random roll about it.
  const Vec3 z = (workspace_center - tracker_pos).normalized();
  Vec3 x = z.unitOrthogonal();
  x = Rotation3::about_axis(z, uniform(rng, -kPi, kPi)).apply(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = z.cross(x);
  r.col(2) = z;
  gt.base_from_tracker = {Rotation3::nearest(r), tracker_pos};

  const Rotation3 tool_rotation = random_rotation(rng);
  const Vec3 tool_dir = random_unit(rng);
  gt.ee_from_tool = {tool_rotation, tool_dir * uniform(rng, 60.0, 120.0)};
  gt.tip_in_tool.x() = uniform(rng, -10.0, 10.0);
  gt.tip_in_tool.y() = uniform(rng, -10.0, 10.0);
  gt.tip_in_tool.z() = uniform(rng, 100.0, 140.0);
  Vec3 divot_in_base = workspace_center;
  divot_in_base.x() += uniform(rng, -50.0, 50.0);
  divot_in_base.y() += uniform(rng, -50.0, 50.0);
  divot_in_base.z() -= 300.0;
  gt.divot_in_tracker = transform_point(invert(gt.base_from_tracker), divot_in_base);
  return gt;
}

void NoiseModel::validate() const {
  for (double s : {tracker_rot_sigma, tracker_trans_sigma, robot_rot_sigma, robot_trans_sigma})
    if (!std::isfinite(s) || s < 0.0) throw InvalidArgument("noise sigmas must be finite and non-negative");
}

handeye::Dataset generate_handeye_dataset(const RigGroundTruth& gt, std::size_t n, const NoiseModel& noise,
                                          std::uint64_t seed, const Workspace& ws) {
  noise.validate();
  if (n < 1) throw InvalidArgument("hand-eye dataset needs at least one pose");
  Rng rng(seed);
  const RigidTransform tracker_from_base = invert(gt.base_from_tracker);

  std::vector<RigidTransform> robot;
  robot.reserve(n);
  while (robot.size() < n) {
    RigidTransform pose = random_robot_pose(ws, rng);
    // Rejection keeps every consecutive motion informative.
    for (int attempt = 0; attempt < 1000 && !robot.empty(); ++attempt) {
      if (rotation_angle_between(robot.back().rotation(), pose.rotation()) >= ws.min_step_rotation) break;
      pose = random_robot_pose(ws, rng);
    }
    robot.push_back(pose);
  }

  handeye::Dataset out;
  out.reserve(n);
  for (const auto& base_from_ee : robot) {
    const RigidTransform tracker_from_tool = tracker_from_base * base_from_ee * gt.ee_from_tool;
    handeye::Sample s;
    s.base_from_ee = perturb(base_from_ee, noise.robot_rot_sigma, noise.robot_trans_sigma, rng);
    s.tracker_from_tool = perturb(tracker_from_tool, noise.tracker_rot_sigma, noise.tracker_trans_sigma, rng);
    out.push_back(s);
  }
  return out;
}

std::vector<RigidTransform> generate_pivot_dataset(const RigGroundTruth& gt, std::size_t n, const PivotMotion& motion,
                                                   const NoiseModel& noise, std::uint64_t seed) {
  noise.validate();
  if (n < 3) throw InvalidArgument("pivot dataset needs at least three poses");
  if (!(motion.cone_half_angle >= 0.0) || !(motion.spin >= 0.0))
    throw InvalidArgument("pivot cone and spin must be non-negative");
  Rng rng(seed);

  const Vec3 shaft_in_tool = gt.tip_in_tool.normalized();
  // Nominal shaft points from the marker towards the divot, i.e. away from the tracker.
  const Vec3 nominal = gt.divot_in_tracker.normalized();
  const Rotation3 r_nominal = align(shaft_in_tool, nominal);
  const Vec3 perp = nominal.unitOrthogonal();

  std::vector<RigidTransform> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tilt = motion.cone_half_angle * std::sqrt(uniform(rng, 0.0, 1.0));
    const double azimuth = uniform(rng, -kPi, kPi);
    const double spin = uniform(rng, -motion.spin, motion.spin);
    const Vec3 tilt_axis = Rotation3::about_axis(nominal, azimuth).apply(perp);
    Rotation3 r = r_nominal * Rotation3::about_axis(shaft_in_tool, spin);
    if (tilt > 0.0) r = Rotation3::about_axis(tilt_axis, tilt) * r;
    const RigidTransform exact{r, gt.divot_in_tracker - r.apply(gt.tip_in_tool)};
    out.push_back(perturb(exact, noise.tracker_rot_sigma, noise.tracker_trans_sigma, rng));
  }
  return out;
}

pointcal::TipCalDataset generate_tipcal_dataset(const RigGroundTruth& gt, std::size_t n, const NoiseModel& noise,
                                                std::uint64_t seed, const Workspace& ws) {
  noise.validate();
  if (n < 1) throw InvalidArgument("tip calibration dataset needs at least one sample");
  Rng rng(seed);
  const RigidTransform tracker_from_base = invert(gt.base_from_tracker);
  const RigidTransform ee_from_tip = gt.ee_from_tip();

  pointcal::TipCalDataset out;
  out.hand_eye = gt.hand_eye();
  for (std::size_t i = 0; i < n; ++i) {
    const RigidTransform base_from_ee = random_robot_pose(ws, rng);
    const Vec3 tip_in_tracker = transform_point(tracker_from_base * base_from_ee, ee_from_tip.translation());
    const RigidTransform digitizer{random_rotation(rng), tip_in_tracker};
    pointcal::TipSample s;
    s.base_from_ee = perturb(base_from_ee, noise.robot_rot_sigma, noise.robot_trans_sigma, rng);
    s.tracker_from_digitizer = perturb(digitizer, noise.tracker_rot_sigma, noise.tracker_trans_sigma, rng);
    out.samples.push_back(s);
  }
  return out;
}

metrics::TrajectoryRecording synthesize_ruso_trial(const RigGroundTruth& gt, const metrics::PlannedCut& plan,
                                                   const planner::PassPolicy& policy, const NoiseModel& noise,
                                                   double rate_hz, std::uint64_t seed) {
  noise.validate();
  const auto nominal = planner::sample_sequence(planner::plan_sequence(plan, policy), rate_hz);
  Rng rng(seed);

  const handeye::Solution chain = gt.hand_eye();
  const pointcal::PivotSolution pivot = gt.pivot();
  const RigidTransform tracker_from_base = invert(gt.base_from_tracker);
  const Rotation3 tool_in_base = align(gt.tip_in_tool.normalized(), plan.depth_axis.normalized());

  std::vector<metrics::TrajectorySample> out;
  out.reserve(nominal.size());
  for (const auto& s : nominal.samples()) {
    const RigidTransform base_from_tool{tool_in_base, s.point - tool_in_base.apply(gt.tip_in_tool)};
    const RigidTransform measured =
        perturb(tracker_from_base * base_from_tool, noise.tracker_rot_sigma, noise.tracker_trans_sigma, rng);
    out.push_back({s.timestamp, pointcal::tip_position_in_base(chain, measured, pivot), s.tool_active});
  }
  return metrics::TrajectoryRecording(std::move(out));
}

void JitterModel::validate() const {
  for (double s : {lateral_sigma, depth_sigma, speed_sigma})
    if (!std::isfinite(s) || s < 0.0) throw InvalidArgument("jitter sigmas must be finite and non-negative");
  if (!std::isfinite(depth_bias)) throw InvalidArgument("jitter depth bias must be finite");
  if (!(correlation_time > 0.0)) throw InvalidArgument("jitter correlation time must be positive");
  if (min_passes < 1 || max_passes < min_passes) throw InvalidArgument("jitter pass count range is invalid");
  if (!(speed_mean > 0.0)) throw InvalidArgument("jitter mean speed must be positive");
}

metrics::TrajectoryRecording synthesize_muso_trial(const metrics::PlannedCut& plan, const JitterModel& jitter,
                                                   double rate_hz, std::uint64_t seed,
                                                   const planner::PassPolicy& motion) {
  jitter.validate();
  plan.validate();
  Rng rng(seed);

  const int passes = std::uniform_int_distribution<int>(jitter.min_passes, jitter.max_passes)(rng);
  const double final_depth =
      std::max(0.1, plan.target_depth + jitter.depth_bias + jitter.depth_sigma * normal(rng));
  const double effective_speed =
      std::max(0.1 * jitter.speed_mean, jitter.speed_mean + jitter.speed_sigma * normal(rng));

  std::vector<planner::PassSpec> specs;
  for (int p = 1; p <= passes; ++p)
    specs.push_back({final_depth * static_cast<double>(p) / static_cast<double>(passes),
                     effective_speed * static_cast<double>(passes)});
  const auto nominal = planner::sample_sequence(planner::plan_passes(plan, specs, motion), rate_hz);

  const Vec3 lateral = plan.lateral_axis();
  std::vector<metrics::TrajectorySample> out(nominal.samples().begin(), nominal.samples().end());
  double x = jitter.lateral_sigma * normal(rng);
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k > 0) {
      const double phi = std::exp(-(out[k].timestamp - out[k - 1].timestamp) / jitter.correlation_time);
      x = phi * x + jitter.lateral_sigma * std::sqrt(1.0 - phi * phi) * normal(rng);
    }
    out[k].point += x * lateral;
  }
  return metrics::TrajectoryRecording(std::move(out));
}

}  // namespace osteonav::simrig
