#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "osteonav/errors.hpp"
#include "osteonav/geometry.hpp"
#include "osteonav/handeye.hpp"
#include "osteonav/io.hpp"
#include "osteonav/metrics.hpp"
#include "osteonav/planner.hpp"
#include "osteonav/pointcal.hpp"
#include "osteonav/report.hpp"
#include "osteonav/simrig.hpp"

namespace py = pybind11;
using namespace osteonav;

namespace {

// Python side works with 4x4 numpy arrays; conversion validates the rotation.
RigidTransform to_rt(const Mat4& m) { return RigidTransform::from_matrix(m); }

std::vector<RigidTransform> to_rts(const std::vector<Mat4>& ms) {
  std::vector<RigidTransform> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.push_back(to_rt(m));
  return out;
}

std::vector<handeye::Sample> to_samples(const std::vector<Mat4>& base_from_ee, const std::vector<Mat4>& tracker_from_tool) {
  if (base_from_ee.size() != tracker_from_tool.size())
    throw InvalidArgument("base_from_ee and tracker_from_tool differ in length");
  std::vector<handeye::Sample> samples;
  for (std::size_t i = 0; i < base_from_ee.size(); ++i)
    samples.push_back({to_rt(base_from_ee[i]), to_rt(tracker_from_tool[i])});
  return samples;
}

py::dict solution_dict(const handeye::Solution& s) {
  py::dict d;
  d["base_from_tracker"] = s.base_from_tracker.matrix();
  d["ee_from_tool"] = s.ee_from_tool.matrix();
  d["residual_rotation"] = s.residual_rotation;
  d["residual_translation"] = s.residual_translation;
  return d;
}

py::tuple dataset_lists(const handeye::Dataset& data) {
  std::vector<Mat4> ee, tool;
  for (const auto& s : data) {
    ee.push_back(s.base_from_ee.matrix());
    tool.push_back(s.tracker_from_tool.matrix());
  }
  return py::make_tuple(ee, tool);
}

metrics::TrajectoryRecording recording_from(const std::vector<double>& t, const std::vector<Vec3>& points,
                                            const std::vector<bool>& active) {
  if (t.size() != points.size() || t.size() != active.size())
    throw InvalidArgument("timestamps, points and active differ in length");
  std::vector<metrics::TrajectorySample> samples;
  for (std::size_t i = 0; i < t.size(); ++i) samples.push_back({t[i], points[i], active[i]});
  return metrics::TrajectoryRecording(std::move(samples));
}

py::dict recording_dict(const metrics::TrajectoryRecording& rec) {
  std::vector<double> t;
  std::vector<Vec3> p;
  std::vector<bool> a;
  for (const auto& s : rec.samples()) {
    t.push_back(s.timestamp);
    p.push_back(s.point);
    a.push_back(s.tool_active);
  }
  py::dict d;
  d["timestamps"] = t;
  d["points"] = p;
  d["active"] = a;
  return d;
}

metrics::PlannedCut plan_from(double length, double target_depth, double cutting_speed) {
  metrics::PlannedCut plan;
  plan.length = length;
  plan.target_depth = target_depth;
  plan.cutting_speed = cutting_speed;
  return plan;
}

}  // namespace

PYBIND11_MODULE(_osteonav, m) {
  m.doc() = "Hand-eye and tip calibration, cut planning and trajectory metrics.";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
  py::register_exception<DegenerateConfiguration>(m, "DegenerateConfiguration", error.ptr());
  py::register_exception<InsufficientMotion>(m, "InsufficientMotion", error.ptr());
  py::register_exception<InconsistentSamples>(m, "InconsistentSamples", error.ptr());
  py::register_exception<EmptyAfterGating>(m, "EmptyAfterGating", error.ptr());
  py::register_exception<EmptyInput>(m, "EmptyInput", error.ptr());
  py::register_exception<EmptyProfile>(m, "EmptyProfile", error.ptr());
  py::register_exception<InvalidPolicy>(m, "InvalidPolicy", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());
  auto parse_error = py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<FrameError>(m, "FrameError", parse_error.ptr());
  py::register_exception<NonMonotoneTime>(m, "NonMonotoneTime", parse_error.ptr());

  // Geometry on 4x4 homogeneous matrices.
  m.def("compose", [](const Mat4& a, const Mat4& b) { return compose(to_rt(a), to_rt(b)).matrix(); });
  m.def("invert", [](const Mat4& a) { return invert(to_rt(a)).matrix(); });
  m.def("transform_point", [](const Mat4& a, const Vec3& p) { return transform_point(to_rt(a), p); });
  m.def("rotation_angle_between", [](const Mat3& a, const Mat3& b) {
    return rotation_angle_between(Rotation3::from_matrix(a), Rotation3::from_matrix(b));
  });
  m.def("from_quaternion", [](double w, double x, double y, double z, const Vec3& t) {
    return RigidTransform(Rotation3::from_quaternion(w, x, y, z), t).matrix();
  }, py::arg("w"), py::arg("x"), py::arg("y"), py::arg("z"), py::arg("translation") = Vec3::Zero());

  // Calibration.
  m.def("calibrate_hand_eye",
        [](const std::vector<Mat4>& base_from_ee, const std::vector<Mat4>& tracker_from_tool, bool all_pairs,
           bool allow_underdetermined, int refine_iterations) {
          handeye::Options o;
          o.pairing = all_pairs ? handeye::Pairing::AllPairs : handeye::Pairing::Consecutive;
          o.allow_underdetermined = allow_underdetermined;
          o.refine_iterations = refine_iterations;
          return solution_dict(handeye::calibrate_hand_eye(to_samples(base_from_ee, tracker_from_tool), o));
        },
        py::arg("base_from_ee"), py::arg("tracker_from_tool"), py::arg("all_pairs") = false,
        py::arg("allow_underdetermined") = false, py::arg("refine_iterations") = 20);

  m.def("calibrate_pivot", [](const std::vector<Mat4>& tracker_from_tool) {
    const auto s = pointcal::calibrate_pivot(to_rts(tracker_from_tool));
    py::dict d;
    d["tip_in_tool"] = s.tip_in_tool;
    d["divot_in_tracker"] = s.divot_in_tracker;
    d["rms_residual"] = s.rms_residual;
    return d;
  }, py::arg("tracker_from_tool"));

  m.def("calibrate_tip",
        [](const std::vector<Mat4>& base_from_ee, const std::vector<Mat4>& tracker_from_digitizer,
           const Mat4& base_from_tracker, double max_spread) {
          if (base_from_ee.size() != tracker_from_digitizer.size())
            throw InvalidArgument("base_from_ee and tracker_from_digitizer differ in length");
          pointcal::TipCalDataset data;
          data.hand_eye.base_from_tracker = to_rt(base_from_tracker);
          for (std::size_t i = 0; i < base_from_ee.size(); ++i)
            data.samples.push_back({to_rt(base_from_ee[i]), to_rt(tracker_from_digitizer[i])});
          pointcal::TipCalOptions o;
          o.max_spread = max_spread;
          const auto s = pointcal::calibrate_tip_in_ee(data, o);
          py::dict d;
          d["ee_from_tip"] = s.ee_from_tip.matrix();
          d["spread"] = s.spread;
          return d;
        },
        py::arg("base_from_ee"), py::arg("tracker_from_digitizer"), py::arg("base_from_tracker"),
        py::arg("max_spread") = 1.0);

  // Simulated rig.
  m.def("simulate_handeye",
        [](std::uint64_t seed, std::size_t n, double rot_sigma, double trans_sigma) {
          const auto gt = simrig::make_ground_truth(seed);
          simrig::NoiseModel noise;
          noise.tracker_rot_sigma = noise.robot_rot_sigma = rot_sigma;
          noise.tracker_trans_sigma = noise.robot_trans_sigma = trans_sigma;
          const auto lists = dataset_lists(simrig::generate_handeye_dataset(gt, n, noise, seed * 7 + 1));
          py::dict d;
          d["base_from_ee"] = lists[0];
          d["tracker_from_tool"] = lists[1];
          d["truth"] = solution_dict(gt.hand_eye());
          return d;
        },
        py::arg("seed"), py::arg("n") = 20, py::arg("rot_sigma") = 0.0, py::arg("trans_sigma") = 0.0);

  m.def("simulate_pivot",
        [](std::uint64_t seed, std::size_t n, double trans_sigma) {
          const auto gt = simrig::make_ground_truth(seed);
          simrig::NoiseModel noise;
          noise.tracker_trans_sigma = trans_sigma;
          std::vector<Mat4> poses;
          for (const auto& p : simrig::generate_pivot_dataset(gt, n, {}, noise, seed * 7 + 2)) poses.push_back(p.matrix());
          py::dict d;
          d["tracker_from_tool"] = poses;
          d["tip_in_tool"] = gt.tip_in_tool;
          d["divot_in_tracker"] = gt.divot_in_tracker;
          return d;
        },
        py::arg("seed"), py::arg("n") = 30, py::arg("trans_sigma") = 0.0);

  m.def("simulate_ruso",
        [](std::uint64_t seed, double length, double target_depth, double cutting_speed, double depth_increment,
           double rot_sigma, double rate_hz) {
          const auto gt = simrig::make_ground_truth(seed);
          planner::PassPolicy policy;
          policy.depth_increment = depth_increment;
          simrig::NoiseModel noise;
          noise.tracker_rot_sigma = rot_sigma;
          return recording_dict(simrig::synthesize_ruso_trial(gt, plan_from(length, target_depth, cutting_speed),
                                                              policy, noise, rate_hz, seed));
        },
        py::arg("seed"), py::arg("length") = 100.0, py::arg("target_depth") = 4.0, py::arg("cutting_speed") = 3.0,
        py::arg("depth_increment") = 4.0, py::arg("rot_sigma") = 0.0, py::arg("rate_hz") = 60.0);

  m.def("simulate_muso",
        [](std::uint64_t seed, double length, double target_depth, double rate_hz) {
          return recording_dict(
              simrig::synthesize_muso_trial(plan_from(length, target_depth, 3.0), {}, rate_hz, seed));
        },
        py::arg("seed"), py::arg("length") = 100.0, py::arg("target_depth") = 4.0, py::arg("rate_hz") = 60.0);

  // Planning.
  m.def("pass_depths", &planner::pass_depths, py::arg("target_depth"), py::arg("depth_increment"));

  m.def("plan_timeline",
        [](double length, double target_depth, double cutting_speed, double depth_increment) {
          planner::PassPolicy policy;
          policy.depth_increment = depth_increment;
          const auto t = planner::nominal_timeline(
              planner::plan_sequence(plan_from(length, target_depth, cutting_speed), policy));
          py::dict d;
          d["total_active_time"] = t.total_active_time;
          d["cutting_time"] = t.cutting_time;
          d["total_time"] = t.total_time;
          return d;
        },
        py::arg("length") = 100.0, py::arg("target_depth") = 4.0, py::arg("cutting_speed") = 3.0,
        py::arg("depth_increment") = 4.0);

  m.def("sample_plan",
        [](double length, double target_depth, double cutting_speed, double depth_increment, double rate_hz) {
          planner::PassPolicy policy;
          policy.depth_increment = depth_increment;
          return recording_dict(planner::sample_sequence(
              planner::plan_sequence(plan_from(length, target_depth, cutting_speed), policy), rate_hz));
        },
        py::arg("length") = 100.0, py::arg("target_depth") = 4.0, py::arg("cutting_speed") = 3.0,
        py::arg("depth_increment") = 4.0, py::arg("rate_hz") = 60.0);

  // Metrics on a recording along the default cut (entry at the origin, +x, depth +z).
  m.def("analyze",
        [](const std::vector<double>& timestamps, const std::vector<Vec3>& points, const std::vector<bool>& active,
           double length, double target_depth, double cutting_speed, const std::string& label, std::size_t bins) {
          metrics::AnalysisOptions o;
          o.bins = bins;
          const auto r = metrics::build_report(recording_from(timestamps, points, active),
                                               plan_from(length, target_depth, cutting_speed), o,
                                               metrics::TrialLabel::parse(label));
          return py::str(report::write_trial_report(r));
        },
        py::arg("timestamps"), py::arg("points"), py::arg("active"), py::arg("length") = 100.0,
        py::arg("target_depth") = 4.0, py::arg("cutting_speed") = 3.0, py::arg("label") = "R1.1",
        py::arg("bins") = 100);

  m.def("report_table",
        [](const std::vector<std::string>& trial_reports, const std::string& format) {
          std::vector<metrics::MetricsReport> reports;
          for (const auto& t : trial_reports) reports.push_back(report::parse_trial_report(t));
          return report::emit_report_table(reports, report::parse_format(format));
        },
        py::arg("trial_reports"), py::arg("format") = "text");

  // File formats, text in and text out.
  m.def("parse_trajectory_log", [](const std::string& text) { return recording_dict(io::parse_trajectory_log(text)); });
  m.def("write_trajectory_log",
        [](const std::vector<double>& t, const std::vector<Vec3>& p, const std::vector<bool>& a) {
          return io::write_trajectory_log(recording_from(t, p, a));
        },
        py::arg("timestamps"), py::arg("points"), py::arg("active"));
  m.def("parse_plan", [](const std::string& text) { return io::write_plan(io::parse_plan(text)); },
        "Validates a plan document and returns it in canonical form.");
}
