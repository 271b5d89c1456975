#include "osteonav/cli.hpp"

#include <algorithm>
#include <functional>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "osteonav/errors.hpp"
#include "osteonav/handeye.hpp"
#include "osteonav/io.hpp"
#include "osteonav/metrics.hpp"
#include "osteonav/planner.hpp"
#include "osteonav/pointcal.hpp"
#include "osteonav/report.hpp"
#include "osteonav/simrig.hpp"

namespace osteonav::cli {

namespace {

using nlohmann::json;

void emit(std::ostream& out, const std::string& path, const std::string& content) {
  if (path.empty()) {
    out << content;
  } else {
    io::write_file(path, content);
  }
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message,
                 std::optional<std::size_t> line = std::nullopt) {
  json j{{"error", kind}, {"message", message}};
  if (line) j["line"] = *line;
  err << j.dump() << '\n';
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

const std::vector<std::string> kFormats = {"text", "csv", "json"};

struct NoiseFlags {
  double tracker_rot_deg = 0.0;
  double tracker_trans_mm = 0.0;
  double robot_rot_deg = 0.0;
  double robot_trans_mm = 0.0;

  void add_to(CLI::App* app, bool with_robot) {
    app->add_option("--tracker-rot-sigma-deg", tracker_rot_deg, "Tracker rotation noise sigma (deg)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--tracker-trans-sigma-mm", tracker_trans_mm, "Tracker translation noise sigma (mm)")
        ->check(CLI::NonNegativeNumber);
    if (with_robot) {
      app->add_option("--robot-rot-sigma-deg", robot_rot_deg, "Robot rotation noise sigma (deg)")
          ->check(CLI::NonNegativeNumber);
      app->add_option("--robot-trans-sigma-mm", robot_trans_mm, "Robot translation noise sigma (mm)")
          ->check(CLI::NonNegativeNumber);
    }
  }
  simrig::NoiseModel model() const {
    return {deg_to_rad(tracker_rot_deg), tracker_trans_mm, deg_to_rad(robot_rot_deg), robot_trans_mm};
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Osteotomy calibration and trajectory analysis"};
  app.name("osteonav");
  app.require_subcommand(1);

  std::string input, output, plan_path, traj_path, handeye_path, format = "json", label = "R1.1";
  std::string profile_output, truth_output, handeye_output, pairing = "consecutive";
  std::vector<std::string> inputs;
  std::uint64_t seed = 0;
  std::uint64_t rig_seed = 1;
  double rate = 60.0;
  std::size_t handeye_count = 20, pivot_count = 50, tip_count = 5;
  double min_motion_deg = 10.0, min_axis_sep_deg = 15.0, min_spread_deg = 20.0, max_spread_mm = 1.0;
  double cone_deg = 30.0, spin_deg = 20.0;
  NoiseFlags noise;
  simrig::JitterModel jitter;

  std::function<int()> action;

  auto* he = app.add_subcommand("calibrate-handeye", "Solve base-to-tracker and ee-to-tool from a pose log");
  he->add_option("--input", input, "Pose log with S->EE and OT->Tool rows")->required();
  he->add_option("--output", output, "Write the solution JSON here instead of stdout");
  he->add_option("--pairing", pairing, "Relative motion pairing")->check(CLI::IsMember({"consecutive", "all"}));
  he->add_option("--min-motion-deg", min_motion_deg, "Drop relative motions rotating less than this")
      ->check(CLI::NonNegativeNumber);
  he->add_option("--min-axis-separation-deg", min_axis_sep_deg, "Required spread of motion axes")
      ->check(CLI::NonNegativeNumber);
  he->callback([&] {
    action = [&] {
      const auto rows = io::parse_pose_log(io::read_file(input));
      const auto paired = io::pair_by_timestamp(rows, FrameId::S, FrameId::EE, FrameId::OT, FrameId::Tool);
      handeye::Dataset data;
      for (std::size_t i = 0; i < paired.first.size(); ++i) data.push_back({paired.first[i], paired.second[i]});
      handeye::Options opt;
      opt.pairing = pairing == "all" ? handeye::Pairing::AllPairs : handeye::Pairing::Consecutive;
      opt.min_motion_angle = deg_to_rad(min_motion_deg);
      opt.min_axis_separation = deg_to_rad(min_axis_sep_deg);
      const auto sol = handeye::calibrate_hand_eye(data, opt);
      json j = io::hand_eye_to_json(sol);
      emit(out, output, j.dump(2) + "\n");
      return kExitOk;
    };
  });

  auto* piv = app.add_subcommand("calibrate-pivot", "Solve the tool tip offset from pivoting poses");
  piv->add_option("--input", input, "Pose log with OT->Tool rows")->required();
  piv->add_option("--output", output, "Write the solution JSON here instead of stdout");
  piv->add_option("--min-spread-deg", min_spread_deg, "Required rotation spread")->check(CLI::NonNegativeNumber);
  piv->callback([&] {
    action = [&] {
      std::vector<RigidTransform> poses;
      const auto rows = io::parse_pose_log(io::read_file(input));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].source != FrameId::OT || rows[i].target != FrameId::Tool)
          throw FrameError(i + 2, "pivot log rows must be OT->Tool");
        poses.push_back(rows[i].transform());
      }
      const auto sol = pointcal::calibrate_pivot(poses, {deg_to_rad(min_spread_deg)});
      json j{{"tip_in_tool_mm", vec_json(sol.tip_in_tool)},
             {"divot_in_tracker_mm", vec_json(sol.divot_in_tracker)},
             {"rms_residual_mm", sol.rms_residual},
             {"poses", poses.size()}};
      emit(out, output, j.dump(2) + "\n");
      return kExitOk;
    };
  });

  auto* tip = app.add_subcommand("calibrate-tip", "Tip pose in the end-effector frame from digitizer touches");
  tip->add_option("--input", input, "Pose log with S->EE and OT->Digitizer rows")->required();
  tip->add_option("--handeye", handeye_path, "Hand-eye solution JSON")->required();
  tip->add_option("--output", output, "Write the solution JSON here instead of stdout");
  tip->add_option("--max-spread-mm", max_spread_mm, "Reject samples farther than this from the mean tip")
      ->check(CLI::NonNegativeNumber);
  tip->callback([&] {
    action = [&] {
      pointcal::TipCalDataset data;
      try {
        data.hand_eye = io::hand_eye_from_json(json::parse(io::read_file(handeye_path)));
      } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("hand-eye file is not valid JSON: ") + e.what());
      }
      const auto rows = io::parse_pose_log(io::read_file(input));
      const auto paired = io::pair_by_timestamp(rows, FrameId::S, FrameId::EE, FrameId::OT, FrameId::Digitizer);
      for (std::size_t i = 0; i < paired.first.size(); ++i) data.samples.push_back({paired.first[i], paired.second[i]});
      const auto sol = pointcal::calibrate_tip_in_ee(data, {max_spread_mm});
      json j{{"ee_from_tip", io::transform_to_json(sol.ee_from_tip)},
             {"spread_mm", sol.spread},
             {"samples", data.samples.size()}};
      emit(out, output, j.dump(2) + "\n");
      return kExitOk;
    };
  });

  auto* an = app.add_subcommand("analyze", "Metrics of one recorded trial against its plan");
  an->add_option("--traj,--input", traj_path, "Trajectory log CSV")->required();
  an->add_option("--plan", plan_path, "Plan JSON")->required();
  an->add_option("--label", label, "Trial label such as R4.3 or M1^4");
  an->add_option("--format", format, "Output format")->check(CLI::IsMember(kFormats));
  an->add_option("--output", output, "Write the report here instead of stdout");
  an->add_option("--profile-output", profile_output, "Also write the depth profile as CSV");
  an->callback([&] {
    action = [&] {
      const auto plan = io::parse_plan(io::read_file(plan_path));
      const auto rec = io::parse_trajectory_log(io::read_file(traj_path));
      const auto rep = metrics::build_report(rec, plan.cut, plan.analysis, metrics::TrialLabel::parse(label));
      const auto fmt = report::parse_format(format);
      if (fmt == report::Format::Json) {
        emit(out, output, report::write_trial_report(rep));
      } else {
        emit(out, output, report::emit_report_table(std::span(&rep, 1), fmt));
      }
      if (!profile_output.empty())
        io::write_file(profile_output, report::write_profile_csv(rep.profile, plan.cut.length));
      return kExitOk;
    };
  });

  auto* rp = app.add_subcommand("report", "Aggregate trial reports into a per-set table");
  rp->add_option("--input", inputs, "Trial report JSON files written by analyze")->required();
  rp->add_option("--format", format, "Output format")->check(CLI::IsMember(kFormats));
  rp->add_option("--output", output, "Write the table here instead of stdout");
  rp->callback([&] {
    action = [&] {
      std::vector<metrics::MetricsReport> reports;
      for (const auto& path : inputs) reports.push_back(report::parse_trial_report(io::read_file(path)));
      emit(out, output, report::emit_report_table(reports, report::parse_format(format)));
      return kExitOk;
    };
  });

  auto* sim = app.add_subcommand("simulate", "Generate synthetic data from a rig with known ground truth");
  sim->require_subcommand(1);

  auto add_common = [&](CLI::App* c) {
    c->add_option("--seed", seed, "Seed for the measurement noise and motion");
    c->add_option("--rig-seed", rig_seed, "Seed for the ground-truth rig");
    c->add_option("--output", output, "Write the log here instead of stdout");
  };

  auto* ruso = sim->add_subcommand("ruso", "Planner-driven robotic trial observed through the tracker");
  add_common(ruso);
  ruso->add_option("--plan", plan_path, "Plan JSON")->required();
  ruso->add_option("--rate", rate, "Tracker sample rate (Hz)")->check(CLI::PositiveNumber);
  noise.add_to(ruso, false);
  ruso->callback([&] {
    action = [&] {
      const auto plan = io::parse_plan(io::read_file(plan_path));
      const auto gt = simrig::make_ground_truth(rig_seed);
      const auto rec = simrig::synthesize_ruso_trial(gt, plan.cut, plan.policy, noise.model(), rate, seed);
      emit(out, output, io::write_trajectory_log(rec));
      return kExitOk;
    };
  });

  auto* muso = sim->add_subcommand("muso", "Manual trial with correlated lateral jitter and depth overshoot");
  add_common(muso);
  muso->add_option("--plan", plan_path, "Plan JSON")->required();
  muso->add_option("--rate", rate, "Tracker sample rate (Hz)")->check(CLI::PositiveNumber);
  muso->add_option("--lateral-sigma-mm", jitter.lateral_sigma)->check(CLI::NonNegativeNumber);
  muso->add_option("--depth-bias-mm", jitter.depth_bias);
  muso->add_option("--depth-sigma-mm", jitter.depth_sigma)->check(CLI::NonNegativeNumber);
  muso->add_option("--correlation-time-s", jitter.correlation_time)->check(CLI::PositiveNumber);
  muso->add_option("--min-passes", jitter.min_passes)->check(CLI::PositiveNumber);
  muso->add_option("--max-passes", jitter.max_passes)->check(CLI::PositiveNumber);
  muso->add_option("--speed-mean-mm-s", jitter.speed_mean)->check(CLI::PositiveNumber);
  muso->add_option("--speed-sigma-mm-s", jitter.speed_sigma)->check(CLI::NonNegativeNumber);
  muso->callback([&] {
    action = [&] {
      const auto plan = io::parse_plan(io::read_file(plan_path));
      const auto rec = simrig::synthesize_muso_trial(plan.cut, jitter, rate, seed, plan.policy);
      emit(out, output, io::write_trajectory_log(rec));
      return kExitOk;
    };
  });

  auto* she = sim->add_subcommand("handeye", "Robot and tracker pose pairs");
  add_common(she);
  she->add_option("--count", handeye_count, "Number of poses")->check(CLI::Range(3, 100000));
  she->add_option("--truth-output", truth_output, "Write the ground-truth hand-eye JSON here");
  noise.add_to(she, true);
  she->callback([&] {
    action = [&] {
      const auto gt = simrig::make_ground_truth(rig_seed);
      const auto data = simrig::generate_handeye_dataset(gt, handeye_count, noise.model(), seed);
      std::vector<io::PoseLogRow> rows;
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto t = static_cast<double>(i);
        rows.push_back(io::PoseLogRow::from_transform(t, FrameId::S, FrameId::EE, data[i].base_from_ee));
        rows.push_back(io::PoseLogRow::from_transform(t, FrameId::OT, FrameId::Tool, data[i].tracker_from_tool));
      }
      emit(out, output, io::write_pose_log(rows));
      if (!truth_output.empty()) io::write_file(truth_output, io::hand_eye_to_json(gt.hand_eye()).dump(2) + "\n");
      return kExitOk;
    };
  });

  auto* spiv = sim->add_subcommand("pivot", "Tool poses pivoting about a fixed divot");
  add_common(spiv);
  spiv->add_option("--count", pivot_count, "Number of poses")->check(CLI::Range(3, 100000));
  spiv->add_option("--cone-deg", cone_deg, "Half angle of the shaft cone")->check(CLI::NonNegativeNumber);
  spiv->add_option("--spin-deg", spin_deg, "Spin range about the shaft")->check(CLI::NonNegativeNumber);
  spiv->add_option("--truth-output", truth_output, "Write the ground-truth tip and divot JSON here");
  noise.add_to(spiv, false);
  spiv->callback([&] {
    action = [&] {
      const auto gt = simrig::make_ground_truth(rig_seed);
      const auto poses = simrig::generate_pivot_dataset(
          gt, pivot_count, {deg_to_rad(cone_deg), deg_to_rad(spin_deg)}, noise.model(), seed);
      std::vector<io::PoseLogRow> rows;
      for (std::size_t i = 0; i < poses.size(); ++i)
        rows.push_back(io::PoseLogRow::from_transform(static_cast<double>(i), FrameId::OT, FrameId::Tool, poses[i]));
      emit(out, output, io::write_pose_log(rows));
      if (!truth_output.empty()) {
        json j{{"tip_in_tool_mm", vec_json(gt.tip_in_tool)}, {"divot_in_tracker_mm", vec_json(gt.divot_in_tracker)}};
        io::write_file(truth_output, j.dump(2) + "\n");
      }
      return kExitOk;
    };
  });

  auto* stip = sim->add_subcommand("tip", "Digitizer touches of the tip at several robot poses");
  add_common(stip);
  stip->add_option("--count", tip_count, "Number of samples")->check(CLI::Range(1, 100000));
  stip->add_option("--truth-output", truth_output, "Write the ground-truth tip pose JSON here");
  stip->add_option("--handeye-output", handeye_output, "Write the ground-truth hand-eye JSON here");
  noise.add_to(stip, true);
  stip->callback([&] {
    action = [&] {
      const auto gt = simrig::make_ground_truth(rig_seed);
      const auto data = simrig::generate_tipcal_dataset(gt, tip_count, noise.model(), seed);
      std::vector<io::PoseLogRow> rows;
      for (std::size_t i = 0; i < data.samples.size(); ++i) {
        const auto t = static_cast<double>(i);
        rows.push_back(io::PoseLogRow::from_transform(t, FrameId::S, FrameId::EE, data.samples[i].base_from_ee));
        rows.push_back(
            io::PoseLogRow::from_transform(t, FrameId::OT, FrameId::Digitizer, data.samples[i].tracker_from_digitizer));
      }
      emit(out, output, io::write_pose_log(rows));
      if (!truth_output.empty()) {
        json j{{"ee_from_tip", io::transform_to_json(gt.ee_from_tip())}};
        io::write_file(truth_output, j.dump(2) + "\n");
      }
      if (!handeye_output.empty())
        io::write_file(handeye_output, io::hand_eye_to_json(gt.hand_eye()).dump(2) + "\n");
      return kExitOk;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    print_error(err, "UsageError", e.what());
    return kExitUsageError;
  }

  if (!action) {
    print_error(err, "UsageError", "no command given");
    return kExitUsageError;
  }
  try {
    return action();
  } catch (const ParseError& e) {
    print_error(err, e.kind(), e.what(), e.line());
  } catch (const Error& e) {
    print_error(err, e.kind(), e.what());
  } catch (const std::exception& e) {
    print_error(err, "InternalError", e.what());
  }
  return kExitDataError;
}

}  // namespace osteonav::cli
