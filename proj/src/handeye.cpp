#include "osteonav/handeye.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "osteonav/errors.hpp"

namespace osteonav::handeye {

namespace {

Motion relative_motion(const Sample& first, const Sample& second) {
  return {compose(second.base_from_ee, invert(first.base_from_ee)),
          compose(second.tracker_from_tool, invert(first.tracker_from_tool))};
}

double max_axis_separation(std::span<const Motion> motions) {
  double best = 0.0;
  for (std::size_t i = 0; i < motions.size(); ++i) {
    const Vec3 ai = motions[i].robot.rotation().rotation_vector().normalized();
    for (std::size_t j = i + 1; j < motions.size(); ++j) {
      const Vec3 aj = motions[j].robot.rotation().rotation_vector().normalized();
      // Axes are lines: antiparallel counts as parallel.
      const double c = std::min(1.0, std::abs(ai.dot(aj)));
      const double s = ai.cross(aj).norm();
      best = std::max(best, std::atan2(s, c));
    }
  }
  return best;
}

}  // namespace

std::vector<Motion> build_relative_motions(std::span<const Sample> samples, const Options& options) {
  if (samples.size() < 2) throw InvalidArgument("hand-eye: at least two poses are required");

  std::vector<Motion> motions;
  auto keep = [&](const Sample& a, const Sample& b) {
    Motion m = relative_motion(a, b);
    if (m.robot.rotation().angle() >= options.min_motion_angle) motions.push_back(m);
  };
  if (options.pairing == Pairing::Consecutive) {
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) keep(samples[i], samples[i + 1]);
  } else {
    for (std::size_t i = 0; i < samples.size(); ++i)
      for (std::size_t j = i + 1; j < samples.size(); ++j) keep(samples[i], samples[j]);
  }
  if (motions.empty())
    throw InsufficientMotion("hand-eye: no relative motion rotates by at least " +
                             std::to_string(rad_to_deg(options.min_motion_angle)) + " deg");
  return motions;
}

RigidTransform solve_base_to_tracker(std::span<const Motion> motions, const Options& options) {
  if (motions.empty()) throw InsufficientMotion("hand-eye: no relative motions");
  const bool strict = !options.allow_underdetermined;
  if (strict) {
    if (motions.size() < 2)
      throw DegenerateConfiguration("hand-eye: one rotation axis leaves the base-to-tracker rotation unobservable");
    const double sep = max_axis_separation(motions);
    if (sep < options.min_axis_separation)
      throw DegenerateConfiguration("hand-eye: motion rotation axes are within " +
                                    std::to_string(rad_to_deg(sep)) + " deg of parallel");
  }

  // R_A = R_Y R_B R_Yᵀ, so the rotation vectors satisfy a = R_Y b.
  std::vector<VectorPair> pairs;
  pairs.reserve(motions.size());
  for (const auto& m : motions)
    pairs.push_back({m.tracker.rotation().rotation_vector(), m.robot.rotation().rotation_vector()});
  const Rotation3 r_y =
      best_fit_rotation(pairs, strict ? RankPolicy::RequireFull : RankPolicy::AllowDeficient);

  const auto rows = static_cast<Eigen::Index>(3 * motions.size());
  Eigen::MatrixXd lhs(rows, 3);
  Eigen::VectorXd rhs(rows);
  for (std::size_t k = 0; k < motions.size(); ++k) {
    const auto& m = motions[k];
    const auto r = static_cast<Eigen::Index>(3 * k);
    lhs.block<3, 3>(r, 0) = m.robot.rotation().matrix() - Mat3::Identity();
    rhs.segment<3>(r) = r_y.apply(m.tracker.translation()) - m.robot.translation();
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(lhs);
  cod.setThreshold(1e-10);
  if (strict && cod.rank() < 3)
    throw DegenerateConfiguration("hand-eye: translation of base-to-tracker is unobservable");
  const Vec3 t_y = cod.solve(rhs);
  return {r_y, t_y};
}

RigidTransform solve_ee_to_tool(std::span<const Sample> samples, const RigidTransform& base_from_tracker) {
  if (samples.empty()) throw DegenerateConfiguration("hand-eye: no samples for the ee-to-tool stage");

  std::vector<VectorPair> pairs;
  pairs.reserve(3 * samples.size());
  for (const auto& s : samples) {
    const RigidTransform base_from_tool = compose(base_from_tracker, s.tracker_from_tool);
    const Mat3 m = s.base_from_ee.rotation().matrix().transpose() * base_from_tool.rotation().matrix();
    for (int c = 0; c < 3; ++c) pairs.push_back({Vec3::Unit(c), m.col(c)});
  }
  const Rotation3 r_x = best_fit_rotation(pairs);

  Vec3 t_x = Vec3::Zero();
  for (const auto& s : samples) {
    const RigidTransform base_from_tool = compose(base_from_tracker, s.tracker_from_tool);
    t_x += s.base_from_ee.rotation().inverse().apply(base_from_tool.translation() -
                                                     s.base_from_ee.translation());
  }
  t_x /= static_cast<double>(samples.size());
  return {r_x, t_x};
}

ClosureResidual closure_residual(std::span<const Sample> samples, const RigidTransform& base_from_tracker,
                                 const RigidTransform& ee_from_tool) {
  if (samples.empty()) return {};
  const RigidTransform tracker_from_base = invert(base_from_tracker);
  double sum_rot = 0.0;
  double sum_trans = 0.0;
  for (const auto& s : samples) {
    const RigidTransform predicted = tracker_from_base * s.base_from_ee * ee_from_tool;
    const double dr = rotation_angle_between(predicted.rotation(), s.tracker_from_tool.rotation());
    const double dt = (predicted.translation() - s.tracker_from_tool.translation()).norm();
    sum_rot += dr * dr;
    sum_trans += dt * dt;
  }
  const auto n = static_cast<double>(samples.size());
  return {std::sqrt(sum_rot / n), std::sqrt(sum_trans / n)};
}

std::pair<RigidTransform, RigidTransform> refine_jointly(std::span<const Sample> samples,
                                                         const RigidTransform& base_from_tracker,
                                                         const RigidTransform& ee_from_tool, int iterations) {
  if (samples.size() < 3 || iterations <= 0) return {base_from_tracker, ee_from_tool};

  // Gauss-Newton on the translation part of the closure,
  //   r_i = R_EE_i t_X + t_EE_i - R_Y t_Tool_i - t_Y,
  // over (R_Y, t_Y, t_X). The tool origins spread across the workspace pin
  // R_Y far better than differenced rotations do at tracker distances.
  Rotation3 r_y = base_from_tracker.rotation();
  Vec3 t_y = base_from_tracker.translation();
  Vec3 t_x = ee_from_tool.translation();
  const auto rows = static_cast<Eigen::Index>(3 * samples.size());
  Eigen::MatrixXd jac(rows, 9);
  Eigen::VectorXd res(rows);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(3 * i);
      const Mat3& r_ee = samples[i].base_from_ee.rotation().matrix();
      const Vec3 q = r_y.apply(samples[i].tracker_from_tool.translation());
      res.segment<3>(r) = r_ee * t_x + samples[i].base_from_ee.translation() - q - t_y;
      Mat3 q_hat;
      q_hat << 0, -q.z(), q.y(), q.z(), 0, -q.x(), -q.y(), q.x(), 0;
      // d(exp(w) R_Y t) / dw = -[R_Y t]x
      jac.block<3, 3>(r, 0) = q_hat;
      jac.block<3, 3>(r, 3) = -Mat3::Identity();
      jac.block<3, 3>(r, 6) = r_ee;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jac);
    cod.setThreshold(1e-10);
    if (cod.rank() < 9) return {base_from_tracker, ee_from_tool};
    const Eigen::VectorXd step = cod.solve(-res);
    r_y = Rotation3::nearest(Rotation3::from_rotation_vector(step.segment<3>(0)).matrix() * r_y.matrix());
    t_y += step.segment<3>(3);
    t_x += step.segment<3>(6);
    if (step.norm() < 1e-13) break;
  }

  std::vector<VectorPair> pairs;
  pairs.reserve(3 * samples.size());
  for (const auto& s : samples) {
    const Mat3 m = s.base_from_ee.rotation().matrix().transpose() * r_y.matrix() * s.tracker_from_tool.rotation().matrix();
    for (int c = 0; c < 3; ++c) pairs.push_back({Vec3::Unit(c), m.col(c)});
  }
  return {RigidTransform(r_y, t_y), RigidTransform(best_fit_rotation(pairs), t_x)};
}

Solution calibrate_hand_eye(std::span<const Sample> samples, const Options& options) {
  const auto motions = build_relative_motions(samples, options);
  if (!options.allow_underdetermined && samples.size() < 3)
    throw InsufficientMotion("hand-eye: at least three poses are required");

  Solution sol;
  sol.base_from_tracker = solve_base_to_tracker(motions, options);
  sol.ee_from_tool = solve_ee_to_tool(samples, sol.base_from_tracker);
  if (!options.allow_underdetermined) {
    const auto before = closure_residual(samples, sol.base_from_tracker, sol.ee_from_tool);
    const auto [y, x] = refine_jointly(samples, sol.base_from_tracker, sol.ee_from_tool, options.refine_iterations);
    const auto after = closure_residual(samples, y, x);
    // Only accept a refinement that tightens the translational loop closure.
    if (after.translation <= before.translation) {
      sol.base_from_tracker = y;
      sol.ee_from_tool = x;
    }
  }
  const auto res = closure_residual(samples, sol.base_from_tracker, sol.ee_from_tool);
  sol.residual_rotation = res.rotation;
  sol.residual_translation = res.translation;
  return sol;
}

}  // namespace osteonav::handeye
