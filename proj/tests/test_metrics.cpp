#include <doctest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "osteonav/errors.hpp"
#include "osteonav/metrics.hpp"

using namespace osteonav;
using namespace osteonav::metrics;

namespace {

TrajectoryRecording line_recording(const PlannedCut& plan, std::vector<std::pair<double, double>> s_depth,
                                   double dt = 0.1, bool active = true) {
  std::vector<TrajectorySample> out;
  double t = 0.0;
  for (auto [s, d] : s_depth) {
    out.push_back({t, plan.point_at(s, d), active});
    t += dt;
  }
  return TrajectoryRecording(std::move(out));
}

PlannedCut random_plan(std::mt19937_64& rng) {
  const Mat3 r = oracle::random_rotation_matrix(rng);
  std::uniform_real_distribution<double> u(-200.0, 200.0);
  std::uniform_real_distribution<double> len(20.0, 150.0);
  PlannedCut p;
  p.entry_point = Vec3(u(rng), u(rng), u(rng));
  p.direction = r.col(0);
  p.depth_axis = r.col(2);
  p.length = len(rng);
  p.target_depth = 4.0;
  return p;
}

}  // namespace

TEST_CASE("perpendicular errors") {
  PlannedCut plan;
  const auto on_line = line_recording(plan, {{0, 0}, {50, 2}, {100, 4}});
  for (double e : perpendicular_errors(on_line, plan)) CHECK(e == 0.0);

  std::vector<TrajectorySample> s = {{0.0, Vec3(10, 1, 0), true}, {1.0, Vec3(20, -2, 3), true},
                                     {2.0, Vec3(30, 2, 1), true}};
  const auto errs = perpendicular_errors(TrajectoryRecording(s), plan);
  REQUIRE(errs.size() == 3);
  // Distance to the plane spanned by direction and depth axis, written out by hand.
  const double expected[] = {1.0, 2.0, 2.0};
  for (int i = 0; i < 3; ++i) CHECK(errs[i] == doctest::Approx(expected[i]).epsilon(1e-15));

  AnalysisOptions ptl;
  ptl.lateral_mode = LateralMode::PointToLine;
  const auto e2 = perpendicular_errors(TrajectoryRecording(s), plan, ptl);
  CHECK(e2[1] == doctest::Approx(std::sqrt(4.0 + 9.0)));
}

TEST_CASE("gating") {
  PlannedCut plan;
  const auto idle = line_recording(plan, {{0, 0}, {50, 0}}, 0.1, false);
  AnalysisOptions active_only;
  active_only.gating = Gating::ActiveOnly;
  CHECK_THROWS_AS(perpendicular_errors(idle, plan, active_only), EmptyAfterGating);
  CHECK_THROWS_AS(perpendicular_errors(idle, plan), EmptyAfterGating);
  AnalysisOptions all;
  all.gating = Gating::All;
  CHECK(perpendicular_errors(idle, plan, all).size() == 2);

  const auto outside = line_recording(plan, {{-5, 0}, {-1.9, 0}, {50, 0}, {102, 0}, {102.5, 0}});
  CHECK(perpendicular_errors(outside, plan).size() == 3);
}

TEST_CASE("rmse") {
  const std::vector<double> zeros = {0, 0, 0};
  CHECK(trajectory_rmse(zeros) == 0.0);
  const std::vector<double> e = {1, 2, 2};
  CHECK(std::abs(trajectory_rmse(e) - std::sqrt(3.0)) < 1e-12);
  CHECK_THROWS_AS(trajectory_rmse(std::vector<double>{}), EmptyInput);
}

TEST_CASE("rmse of iid lateral noise") {
  PlannedCut plan;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 0.11);
  std::vector<TrajectorySample> s;
  for (int i = 0; i < 10000; ++i) {
    const double along = 100.0 * i / 9999.0;
    s.push_back({i * 0.01, plan.point_at(along, 4.0) + n(rng) * plan.lateral_axis(), true});
  }
  const double rmse = trajectory_rmse(perpendicular_errors(TrajectoryRecording(s), plan));
  CHECK(rmse == doctest::Approx(0.11).epsilon(0.01 / 0.11));
}

TEST_CASE("rmse is invariant under a rigid move of plan and recording") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto plan = random_plan(rng);
    std::vector<TrajectorySample> s;
    for (int i = 0; i < 50; ++i)
      s.push_back({i * 0.1, plan.point_at(plan.length * i / 49.0, 3.0) + Vec3(n(rng), n(rng), n(rng)), true});
    const RigidTransform g(Rotation3::from_matrix(oracle::random_rotation_matrix(rng)), Vec3(n(rng), 100, -40));
    PlannedCut moved = plan;
    moved.entry_point = transform_point(g, plan.entry_point);
    moved.direction = g.rotation().apply(plan.direction);
    moved.depth_axis = g.rotation().apply(plan.depth_axis);
    auto s2 = s;
    for (auto& x : s2) x.point = transform_point(g, x.point);
    AnalysisOptions all;
    all.gating = Gating::All;
    const double a = trajectory_rmse(perpendicular_errors(TrajectoryRecording(s), plan, all));
    const double b = trajectory_rmse(perpendicular_errors(TrajectoryRecording(s2), moved, all));
    CHECK(std::abs(a - b) < 1e-9);
  }
}

TEST_CASE("executed length") {
  PlannedCut plan;
  CHECK(executed_length(line_recording(plan, {{0, 0}, {40, 0}, {100, 0}}), plan) == doctest::Approx(100.0));
  CHECK(executed_length(line_recording(plan, {{-0.5, 0}, {40, 0}, {101.3, 0}}), plan) ==
        doctest::Approx(101.8).epsilon(1e-12));
  std::vector<TrajectorySample> one = {{0.0, plan.point_at(30, 0), true}, {1.0, plan.point_at(40, 0), false}};
  CHECK(executed_length(TrajectoryRecording(one), plan) == 0.0);
}

TEST_CASE("procedure time sums active runs") {
  PlannedCut plan;
  std::vector<TrajectorySample> one;
  for (int i = 0; i <= 450; ++i) one.push_back({i * 0.1, plan.point_at(i * 0.2, 0), true});
  CHECK(procedure_time(TrajectoryRecording(one)) == doctest::Approx(45.0));

  // Two 33.3 s runs separated by 10 s idle.
  std::vector<TrajectorySample> two;
  const double starts[] = {0.0, 43.3};
  for (int i = 0; i <= 333; ++i) two.push_back({i * 0.1, Vec3::Zero(), true});
  for (int i = 1; i < 100; ++i) two.push_back({33.3 + i * 0.1, Vec3::Zero(), false});
  for (int i = 0; i <= 333; ++i) two.push_back({43.3 + i * 0.1, Vec3::Zero(), true});
  double oracle_sum = 0.0;
  for (double t0 : starts) oracle_sum += (t0 + 33.3) - t0;
  CHECK(procedure_time(TrajectoryRecording(two)) == doctest::Approx(oracle_sum).epsilon(1e-9));
  CHECK(oracle_sum == doctest::Approx(66.6));

  std::vector<TrajectorySample> never = {{0, Vec3::Zero(), false}, {5, Vec3::Zero(), false}};
  CHECK(procedure_time(TrajectoryRecording(never)) == 0.0);
}

TEST_CASE("depth profile basics") {
  PlannedCut plan;
  std::vector<std::pair<double, double>> pass;
  for (int i = 0; i <= 1000; ++i) pass.push_back({i * 0.1, 4.0});
  const auto prof = depth_profile(line_recording(plan, pass), plan, 100);
  CHECK(prof.bin_width == 1.0);
  CHECK(prof.coverage == 1.0);
  for (const auto& d : prof.depths) CHECK(*d == doctest::Approx(4.0));
  CHECK(mean_depth(prof).mean == doctest::Approx(4.0));

  std::vector<std::pair<double, double>> two;
  for (int i = 0; i <= 200; ++i) two.push_back({i * 0.5, 2.0});
  for (int i = 0; i <= 200; ++i) two.push_back({100.0 - i * 0.5, 4.0});
  for (const auto& d : depth_profile(line_recording(plan, two), plan, 100).depths) CHECK(*d == doctest::Approx(4.0));
}

TEST_CASE("depth profile edges and missing bins") {
  PlannedCut plan;
  plan.length = 10.0;
  // Sample on an interior edge goes to the upper bin; s = L goes to the last bin.
  const auto rec = line_recording(plan, {{5.0, 1.0}, {10.0, 2.0}, {-0.1, 9.0}, {10.1, 9.0}});
  const auto prof = depth_profile(rec, plan, 2);
  CHECK(prof.depths[0] == std::nullopt);
  CHECK(*prof.depths[1] == 2.0);
  CHECK(prof.coverage == 0.5);
  const auto m = mean_depth(prof);
  CHECK(m.mean == 2.0);
  CHECK(m.strict == 1.0);
  CHECK_THROWS_AS(depth_profile(rec, plan, 0), InvalidArgument);
}

TEST_CASE("mean depth") {
  CutProfile p;
  p.depths = {4.2, 4.2, 4.2};
  CHECK(mean_depth(p).mean == doctest::Approx(4.2));
  p.depths = {4.0, 4.0, 8.0, 8.0};
  CHECK(mean_depth(p).mean == 6.0);
  p.depths = {std::nullopt, std::nullopt};
  CHECK_THROWS_AS(mean_depth(p), EmptyProfile);
}

TEST_CASE("depth profile equals a brute-force scan") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto plan = random_plan(rng);
    std::uniform_int_distribution<int> kdist(1, 120);
    const std::size_t k = static_cast<std::size_t>(kdist(rng));
    std::uniform_real_distribution<double> along(-5.0, plan.length + 5.0);
    std::uniform_real_distribution<double> depth(-1.0, 10.0);
    std::uniform_int_distribution<int> pick(0, 9);
    std::vector<TrajectorySample> s;
    double t = 0.0;
    for (int pass = 0; pass < 3; ++pass)
      for (int i = 0; i < 200; ++i) {
        double a = along(rng);
        // Some samples land exactly on bin edges or the plan ends.
        if (pick(rng) == 0) a = plan.length * static_cast<double>(pick(rng) % (k + 1)) / static_cast<double>(k);
        if (pick(rng) == 0) a = plan.length;
        s.push_back({t += 0.01, plan.point_at(a, depth(rng)), pass % 2 == 0});
      }
    const TrajectoryRecording rec(s);
    std::vector<oracle::ScanSample> scan;
    for (const auto& x : s) scan.push_back({plan.along(x.point), plan.depth_of(x.point)});
    const auto expected = oracle::brute_force_profile(scan, plan.length, k);
    const auto got = depth_profile(rec, plan, k);
    REQUIRE(got.depths.size() == k);
    for (std::size_t j = 0; j < k; ++j) CHECK(got.depths[j] == expected[j]);
  }
}

TEST_CASE("deeper samples never lower the profile") {
  std::mt19937_64 rng(8);
  PlannedCut plan;
  std::uniform_real_distribution<double> a(0.0, 100.0);
  std::uniform_real_distribution<double> d(0.0, 8.0);
  std::vector<TrajectorySample> s;
  for (int i = 0; i < 300; ++i) s.push_back({i * 0.1, plan.point_at(a(rng), d(rng)), true});
  const auto base = depth_profile(TrajectoryRecording(s), plan, 50);
  auto deeper = s;
  for (auto& x : deeper) x.point += 0.5 * plan.depth_axis;
  const auto prof = depth_profile(TrajectoryRecording(deeper), plan, 50);
  for (std::size_t j = 0; j < 50; ++j)
    if (base.depths[j]) CHECK(*prof.depths[j] >= *base.depths[j]);
  CHECK(mean_depth(prof).mean == doctest::Approx(mean_depth(base).mean + 0.5));
}

TEST_CASE("trial labels") {
  const auto l = TrialLabel::parse("M1.4");
  CHECK(l.technique == 'M');
  CHECK(l.set == 1);
  CHECK(l.trial == 4);
  CHECK(l.set_name() == "M1");
  CHECK(TrialLabel::parse("M1^4") == l);
  CHECK(TrialLabel::parse(l.to_string()) == l);
  CHECK(TrialLabel::parse("R12.3").set == 12);
  for (const char* bad : {"", "M1", "m1.2", "M.2", "M1.", "M1.x", "M1.2.3", "Mx.1"})
    CHECK_THROWS_AS(TrialLabel::parse(bad), InvalidArgument);
}

TEST_CASE("build report") {
  PlannedCut plan;
  std::vector<std::pair<double, double>> pass;
  for (int i = 0; i <= 600; ++i) pass.push_back({i / 6.0, 4.0});
  const auto r = build_report(line_recording(plan, pass, 1.0 / 18.0), plan, {}, TrialLabel::parse("R3.1"));
  CHECK(r.rmse == 0.0);
  CHECK(r.executed_length == doctest::Approx(100.0));
  CHECK(r.mean_depth == doctest::Approx(4.0));
  CHECK(r.cutting_speed == 3.0);
  CHECK(r.procedure_time == doctest::Approx(600.0 / 18.0));

  const auto m = build_report(line_recording(plan, pass, 1.0 / 18.0), plan, {}, TrialLabel::parse("M1.1"));
  CHECK(m.cutting_speed == doctest::Approx(3.0));

  CHECK_THROWS_AS(TrajectoryRecording({}), InvalidArgument);
  PlannedCut bad = plan;
  bad.direction = Vec3(1, 0, 1);
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}
