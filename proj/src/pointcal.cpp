#include "osteonav/pointcal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "osteonav/errors.hpp"

namespace osteonav::pointcal {

PivotSolution calibrate_pivot(std::span<const RigidTransform> tracker_from_tool, const PivotOptions& options) {
  const std::size_t n = tracker_from_tool.size();
  if (n < 3) throw InvalidArgument("pivot: at least three poses are required");

  double spread = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      spread = std::max(spread, rotation_angle_between(tracker_from_tool[i].rotation(),
                                                       tracker_from_tool[j].rotation()));
  if (spread < options.min_rotation_spread) {
    std::ostringstream msg;
    msg << "pivot: rotation spread " << rad_to_deg(spread) << " deg is below "
        << rad_to_deg(options.min_rotation_spread) << " deg";
    throw DegenerateConfiguration(msg.str());
  }

  const auto rows = static_cast<Eigen::Index>(3 * n);
  Eigen::MatrixXd a(rows, 6);
  Eigen::VectorXd b(rows);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(3 * i);
    a.block<3, 3>(r, 0) = tracker_from_tool[i].rotation().matrix();
    a.block<3, 3>(r, 3) = -Mat3::Identity();
    b.segment<3>(r) = -tracker_from_tool[i].translation();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s(5) <= 1e-9 * s(0))
    throw DegenerateConfiguration("pivot: poses rotate about a single axis through the divot");
  const Eigen::VectorXd x = svd.solve(b);

  PivotSolution sol;
  sol.tip_in_tool = x.head<3>();
  sol.divot_in_tracker = x.tail<3>();
  double sum = 0.0;
  for (double e : pivot_errors(tracker_from_tool, sol)) sum += e * e;
  sol.rms_residual = std::sqrt(sum / static_cast<double>(n));
  return sol;
}

std::vector<double> pivot_errors(std::span<const RigidTransform> tracker_from_tool, const PivotSolution& solution) {
  std::vector<double> out;
  out.reserve(tracker_from_tool.size());
  for (const auto& t : tracker_from_tool)
    out.push_back((transform_point(t, solution.tip_in_tool) - solution.divot_in_tracker).norm());
  return out;
}

RigidTransform tip_in_ee_single(const TipSample& sample, const RigidTransform& base_from_tracker) {
  return invert(sample.base_from_ee) * base_from_tracker * sample.tracker_from_digitizer;
}

TipCalSolution calibrate_tip_in_ee(const TipCalDataset& dataset, const TipCalOptions& options) {
  if (dataset.samples.empty()) throw InvalidArgument("tip calibration: no samples");
  if (!std::isfinite(dataset.hand_eye.residual_rotation) ||
      !std::isfinite(dataset.hand_eye.residual_translation))
    throw InvalidArgument("tip calibration: hand-eye residuals are not finite");

  std::vector<RigidTransform> per_sample;
  per_sample.reserve(dataset.samples.size());
  Vec3 mean = Vec3::Zero();
  for (const auto& s : dataset.samples) {
    per_sample.push_back(tip_in_ee_single(s, dataset.hand_eye.base_from_tracker));
    mean += per_sample.back().translation();
  }
  mean /= static_cast<double>(per_sample.size());

  double spread = 0.0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < per_sample.size(); ++i) {
    const double d = (per_sample[i].translation() - mean).norm();
    if (d > spread) {
      spread = d;
      worst = i;
    }
  }
  if (spread > options.max_spread) {
    std::ostringstream msg;
    msg << "tip calibration: sample " << worst << " lies " << spread << " mm from the mean tip (limit "
        << options.max_spread << " mm)";
    throw InconsistentSamples(msg.str());
  }
  return {RigidTransform(per_sample.front().rotation(), mean), spread};
}

Vec3 tip_position_in_base(const handeye::Solution& hand_eye, const RigidTransform& tracker_from_tool,
                          const PivotSolution& pivot) {
  return transform_point(compose(hand_eye.base_from_tracker, tracker_from_tool), pivot.tip_in_tool);
}

}  // namespace osteonav::pointcal
