#include <doctest.h>

#include <chrono>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "osteonav/errors.hpp"
#include "osteonav/io.hpp"

using namespace osteonav;
using namespace osteonav::io;

namespace {

constexpr FrameId kFrames[] = {FrameId::S, FrameId::EE, FrameId::Tool, FrameId::Tip,
                               FrameId::OT, FrameId::Digitizer, FrameId::Phantom};

PoseLogRow random_row(std::mt19937_64& rng, double t) {
  std::uniform_int_distribution<int> f(0, 6);
  std::uniform_real_distribution<double> u(-2000.0, 2000.0);
  const auto r = Rotation3::from_matrix(oracle::random_rotation_matrix(rng));
  const FrameId src = kFrames[f(rng)];
  const FrameId tgt = kFrames[f(rng)];
  const double x = u(rng);
  const double y = u(rng);
  const double z = u(rng);
  return PoseLogRow::from_transform(t, src, tgt, RigidTransform(r, Vec3(x, y, z)));
}

metrics::TrajectoryRecording random_recording(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> dt(1e-4, 0.5);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::bernoulli_distribution active(0.5);
  std::vector<metrics::TrajectorySample> s;
  double t = u(rng);
  for (std::size_t i = 0; i < n; ++i) {
    t += dt(rng);
    const double x = u(rng);
    const double y = u(rng);
    const double z = u(rng);
    s.push_back({t, Vec3(x, y, z), active(rng)});
  }
  return metrics::TrajectoryRecording(std::move(s));
}

PlanFile random_plan(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  std::uniform_real_distribution<double> pos(0.1, 200.0);
  std::uniform_int_distribution<int> pick(0, 2);
  const Mat3 r = oracle::random_rotation_matrix(rng);
  PlanFile p;
  p.cut.entry_point = Vec3(u(rng), u(rng), u(rng));
  p.cut.direction = r.col(0);
  p.cut.depth_axis = r.col(1);
  p.cut.length = pos(rng);
  p.cut.target_depth = pos(rng);
  p.cut.cutting_speed = pos(rng);
  p.policy.depth_increment = pos(rng);
  p.policy.insertion_speed = pos(rng);
  p.policy.retraction_speed = pos(rng);
  if (pick(rng) == 0) p.policy.cutting_speed = pos(rng);
  p.policy.retract_clearance = pos(rng);
  p.policy.bidirectional = pick(rng) == 1;
  p.analysis.bins = static_cast<std::size_t>(1 + pick(rng) * 50);
  p.analysis.gating = static_cast<metrics::Gating>(pick(rng));
  p.analysis.gate_margin = pos(rng);
  p.analysis.lateral_mode = pick(rng) == 0 ? metrics::LateralMode::PointToLine : metrics::LateralMode::PureLateral;
  return p;
}

bool same_plan(const PlanFile& a, const PlanFile& b) {
  return a.cut.entry_point == b.cut.entry_point && a.cut.direction == b.cut.direction &&
         a.cut.depth_axis == b.cut.depth_axis && a.cut.length == b.cut.length &&
         a.cut.target_depth == b.cut.target_depth && a.cut.cutting_speed == b.cut.cutting_speed &&
         a.policy.depth_increment == b.policy.depth_increment &&
         a.policy.insertion_speed == b.policy.insertion_speed &&
         a.policy.retraction_speed == b.policy.retraction_speed && a.policy.cutting_speed == b.policy.cutting_speed &&
         a.policy.retract_clearance == b.policy.retract_clearance &&
         a.policy.bidirectional == b.policy.bidirectional && a.analysis.bins == b.analysis.bins &&
         a.analysis.gating == b.analysis.gating && a.analysis.gate_margin == b.analysis.gate_margin &&
         a.analysis.lateral_mode == b.analysis.lateral_mode;
}

std::size_t parse_error_line(const std::string& text, bool trajectory) {
  try {
    if (trajectory)
      parse_trajectory_log(text);
    else
      parse_pose_log(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return static_cast<std::size_t>(-1);
}

const std::string kPoseHeader = std::string(kPoseLogHeader) + "\n";
const std::string kTrajHeader = std::string(kTrajectoryLogHeader) + "\n";

}  // namespace

TEST_CASE("pose log basics") {
  CHECK(parse_pose_log(kPoseHeader).empty());
  const auto rows = parse_pose_log(kPoseHeader + "0.5,S,EE,1,0,0,0,0,0,0\n");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].source == FrameId::S);
  CHECK(rows[0].target == FrameId::EE);
  CHECK(rows[0].transform().matrix() == Mat4::Identity());
}

TEST_CASE("quaternion norm policy") {
  CHECK_THROWS_AS(parse_pose_log(kPoseHeader + "0,S,EE,0.5,0,0,0,0,0,0\n"), ParseError);
  const auto rows = parse_pose_log(kPoseHeader + "0,S,EE,1.0005,0,0,0,0,0,0\n");
  CHECK(rows[0].quaternion[0] == 1.0);
  CHECK_THROWS_AS(parse_pose_log(kPoseHeader + "0,S,EE,1.002,0,0,0,0,0,0\n"), ParseError);
}

TEST_CASE("trajectory log basics") {
  const auto rec = parse_trajectory_log(kTrajHeader + "0,1,2,3,1\n0.1,1,2,3,0\n");
  CHECK(rec.size() == 2);
  CHECK(rec.samples()[0].tool_active);
  CHECK_FALSE(rec.samples()[1].tool_active);
  CHECK_THROWS_AS(parse_trajectory_log(kTrajHeader + "1,0,0,0,1\n0.5,0,0,0,1\n"), NonMonotoneTime);
  CHECK_THROWS_AS(parse_trajectory_log(kTrajHeader + "1,0,0,0,1\n1,0,0,0,1\n"), NonMonotoneTime);
  CHECK_THROWS_AS(parse_trajectory_log(kTrajHeader + "1,0,0,0,1\n"), ParseError);
  // CRLF input is accepted.
  CHECK(parse_trajectory_log(std::string(kTrajectoryLogHeader) + "\r\n0,0,0,0,1\r\n1,0,0,0,1\r\n").size() == 2);
}

TEST_CASE("malformed corpus reports the offending line") {
  struct Case {
    std::string text;
    bool trajectory;
    std::size_t line;
  };
  const std::string ok_pose = "0,S,EE,1,0,0,0,0,0,0\n";
  const std::string ok_traj = "0,0,0,0,1\n";
  const std::vector<Case> corpus = {
      {"", false, 1},
      {"timestamp,source\n", false, 1},
      {kPoseHeader + ok_pose + "1,S,EE,1,0,0,0,0,0\n", false, 3},
      {kPoseHeader + ok_pose + ok_pose + "x,S,EE,1,0,0,0,0,0,0\n", false, 4},
      {kPoseHeader + "1,S,Nope,1,0,0,0,0,0,0\n", false, 2},
      {kPoseHeader + "1,s,EE,1,0,0,0,0,0,0\n", false, 2},
      {kPoseHeader + ok_pose + "\n" + ok_pose, false, 3},
      {kPoseHeader + "1,S,EE,1,0,0,0,nan,0,0\n", false, 2},
      {kPoseHeader + "1,S,EE,1,0,0,0,inf,0,0\n", false, 2},
      {kPoseHeader + "1,S,EE,1,0,0,0,+1,0,0\n", false, 2},
      {kPoseHeader + "1,S,EE,1,0,0,0,1e999,0,0\n", false, 2},
      {kPoseHeader + "1,S,EE,1,0,0,0, 1,0,0\n", false, 2},
      {kPoseHeader + "1,S,EE,0,0,0,0,0,0,0\n", false, 2},
      {kTrajHeader + ok_traj + "1,0,0,0,2\n", true, 3},
      {kTrajHeader + ok_traj + "1,0,0,0,true\n", true, 3},
      {kTrajHeader + ok_traj + "1,0,0,0\n", true, 3},
      {kTrajHeader + ok_traj + "1,0,0,0,1\n0.5,0,0,0,1\n", true, 4},
      {kTrajHeader + ok_traj + "1,0,,0,1\n", true, 3},
      {"timestamp,x,y,z\n" + ok_traj, true, 1},
      {kTrajHeader + ok_traj, true, 0},
  };
  for (const auto& c : corpus) {
    CAPTURE(c.text);
    CHECK(parse_error_line(c.text, c.trajectory) == c.line);
  }
}

TEST_CASE("frame errors are parse errors") {
  CHECK_THROWS_AS(parse_pose_log(kPoseHeader + "1,S,Nope,1,0,0,0,0,0,0\n"), FrameError);
}

TEST_CASE("random mutations never escape as anything but ParseError") {
  std::mt19937_64 rng(606);
  std::vector<PoseLogRow> rows;
  for (int i = 0; i < 5; ++i) rows.push_back(random_row(rng, i));
  const std::string pose = write_pose_log(rows);
  const std::string traj = write_trajectory_log(random_recording(rng, 5));
  const std::string alphabet = "0123456789.,-+eE\n\rSxnai ";
  std::uniform_int_distribution<int> op(0, 2);
  std::uniform_int_distribution<std::size_t> ch(0, alphabet.size() - 1);
  for (int i = 0; i < 2000; ++i) {
    std::string text = i % 2 ? pose : traj;
    std::uniform_int_distribution<std::size_t> at(0, text.size() - 1);
    for (int m = 0; m < 3; ++m) {
      const std::size_t k = at(rng);
      switch (op(rng)) {
        case 0: text.erase(k, 1); break;
        case 1: text.insert(k, 1, alphabet[ch(rng)]); break;
        default: text[k] = alphabet[ch(rng)]; break;
      }
      at = std::uniform_int_distribution<std::size_t>(0, text.size() - 1);
    }
    try {
      if (i % 2)
        parse_pose_log(text);
      else
        parse_trajectory_log(text);
    } catch (const ParseError& e) {
      const auto lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
      CHECK(e.line() <= lines);
    }
  }
}

TEST_CASE("serialize then parse is the identity") {
  std::mt19937_64 rng(1000);
  for (int i = 0; i < 1000; ++i) {
    std::vector<PoseLogRow> rows;
    std::uniform_int_distribution<int> count(0, 6);
    const int n = count(rng);
    for (int k = 0; k < n; ++k) rows.push_back(random_row(rng, k * 0.25));
    CHECK(parse_pose_log(write_pose_log(rows)) == rows);

    const auto rec = random_recording(rng, 2 + static_cast<std::size_t>(count(rng)));
    CHECK(parse_trajectory_log(write_trajectory_log(rec)) == rec);

    const auto plan = random_plan(rng);
    CHECK(same_plan(parse_plan(write_plan(plan)), plan));
  }
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(100.0) == "100");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("plan schema") {
  const std::string base =
      R"({"entry_point":[0,0,0],"direction":[1,0,0],"depth_axis":[0,0,1],"length_mm":100,)"
      R"("target_depth_mm":4,"cutting_speed_mm_s":3)";
  const auto p = parse_plan(base + "}");
  CHECK(p.cut.length == 100.0);
  CHECK(p.policy.depth_increment == 4.0);
  CHECK_FALSE(p.policy.cutting_speed.has_value());
  CHECK_THROWS_AS(parse_plan(base + R"(,"colour":1})"), ParseError);
  CHECK_THROWS_AS(parse_plan(base + R"(,"pass_policy":{"depth":1}})"), ParseError);
  CHECK_THROWS_AS(parse_plan(base + R"(,"analysis":{"gating":"sometimes"}})"), ParseError);
  CHECK_THROWS_AS(parse_plan("{"), ParseError);
  CHECK_THROWS_AS(parse_plan(R"({"entry_point":[0,0,0],"direction":[1,0,0],"depth_axis":[1,0,0],)"
                             R"("length_mm":100,"target_depth_mm":4,"cutting_speed_mm_s":3})"),
                  ParseError);
  const auto q = parse_plan(base + R"(,"pass_policy":{"depth_increment_mm":2,"bidirectional":true},)"
                                   R"("analysis":{"K":50,"gating":"all","lateral_mode":"point_to_line"}})");
  CHECK(q.policy.depth_increment == 2.0);
  CHECK(q.policy.bidirectional);
  CHECK(q.analysis.bins == 50);
  CHECK(q.analysis.gating == metrics::Gating::All);
}

TEST_CASE("hand-eye json round trip") {
  std::mt19937_64 rng(8);
  handeye::Solution s;
  s.base_from_tracker = RigidTransform(Rotation3::from_matrix(oracle::random_rotation_matrix(rng)), Vec3(1, 2, 3));
  s.ee_from_tool = RigidTransform(Rotation3::from_matrix(oracle::random_rotation_matrix(rng)), Vec3(-4, 5, 60));
  s.residual_rotation = 0.001;
  s.residual_translation = 0.2;
  const auto back = hand_eye_from_json(nlohmann::json::parse(hand_eye_to_json(s).dump()));
  CHECK((back.base_from_tracker.matrix() - s.base_from_tracker.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((back.ee_from_tool.matrix() - s.ee_from_tool.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(back.residual_translation == doctest::Approx(0.2));
  CHECK(back.residual_rotation == doctest::Approx(0.001));
}

TEST_CASE("pairing rows by timestamp") {
  std::vector<PoseLogRow> rows;
  for (int i = 0; i < 3; ++i) {
    rows.push_back(PoseLogRow::from_transform(i, FrameId::S, FrameId::EE, RigidTransform::identity()));
    rows.push_back(PoseLogRow::from_transform(i, FrameId::OT, FrameId::Tool,
                                              RigidTransform::from_translation(Vec3(i, 0, 0))));
  }
  const auto paired = pair_by_timestamp(rows, FrameId::S, FrameId::EE, FrameId::OT, FrameId::Tool);
  REQUIRE(paired.timestamps.size() == 3);
  CHECK(paired.second[2].translation().x() == 2.0);
  rows.pop_back();
  CHECK_THROWS_AS(pair_by_timestamp(rows, FrameId::S, FrameId::EE, FrameId::OT, FrameId::Tool), ParseError);
}

TEST_CASE("a million trajectory rows parse quickly") {
  std::mt19937_64 rng(1);
  const auto rec = random_recording(rng, 1000000);
  const auto text = write_trajectory_log(rec);
  const auto t0 = std::chrono::steady_clock::now();
  const auto back = parse_trajectory_log(text);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(back.size() == 1000000);
  CHECK(secs < 2.0);
}

TEST_CASE("missing files raise IoError") {
  CHECK_THROWS_AS(read_file("/nonexistent/osteonav/file.csv"), IoError);
}
