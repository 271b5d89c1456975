#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "osteonav/cli.hpp"
#include "osteonav/io.hpp"
#include "osteonav/report.hpp"

using namespace osteonav;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path tmpdir() {
  const char* env = std::getenv("OSTEONAV_TEST_TMP");
  fs::path p = env ? fs::path(env) : fs::temp_directory_path() / "osteonav_cli_test";
  fs::create_directories(p);
  return p;
}

std::string write_plan(const fs::path& dir, double target) {
  io::PlanFile p;
  p.cut.target_depth = target;
  p.policy.depth_increment = 4.0;
  const auto path = (dir / ("plan_" + std::to_string(static_cast<int>(target)) + ".json")).string();
  io::write_file(path, io::write_plan(p));
  return path;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == cli::kExitUsageError);
  CHECK(run({"bogus"}).code == cli::kExitUsageError);
  CHECK(run({"analyze"}).code == cli::kExitUsageError);
  CHECK(run({"analyze", "--traj", "a", "--plan", "b", "--format", "xml"}).code == cli::kExitUsageError);
  const auto help = run({"--help"});
  CHECK(help.code == cli::kExitOk);
  CHECK(help.out.find("analyze") != std::string::npos);
}

TEST_CASE("data errors exit 1 with a json diagnostic") {
  const auto dir = tmpdir();
  const auto plan = write_plan(dir, 4);
  const auto bad = (dir / "bad_traj.csv").string();
  io::write_file(bad, "timestamp,x,y,z,active\n0,0,0,0,1\n1,0,0,0,1\n0.5,0,0,0,1\n");
  const auto r = run({"analyze", "--traj", bad, "--plan", plan});
  CHECK(r.code == cli::kExitDataError);
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j.at("error") == "NonMonotoneTime");
  CHECK(j.at("line") == 4);

  const auto missing = run({"analyze", "--traj", (dir / "none.csv").string(), "--plan", plan});
  CHECK(missing.code == cli::kExitDataError);
  CHECK(nlohmann::json::parse(missing.err).at("error") == "IoError");
}

TEST_CASE("simulate is deterministic and analyze closes the loop") {
  const auto dir = tmpdir();
  const auto plan = write_plan(dir, 4);
  const auto a = (dir / "ruso_a.csv").string();
  const auto b = (dir / "ruso_b.csv").string();
  REQUIRE(run({"simulate", "ruso", "--plan", plan, "--seed", "7", "--output", a}).code == 0);
  REQUIRE(run({"simulate", "ruso", "--plan", plan, "--seed", "7", "--output", b}).code == 0);
  CHECK(io::read_file(a) == io::read_file(b));

  const auto rep = run({"analyze", "--traj", a, "--plan", plan, "--label", "R3.1"});
  REQUIRE(rep.code == 0);
  const auto r = report::parse_trial_report(rep.out);
  CHECK(r.rmse < 1e-9);
  CHECK(r.mean_depth == doctest::Approx(4.0));
  CHECK(r.executed_length == doctest::Approx(100.0));
}

TEST_CASE("calibration commands on simulated logs") {
  const auto dir = tmpdir();
  const auto he_log = (dir / "he.csv").string();
  const auto he_truth = (dir / "he_truth.json").string();
  REQUIRE(run({"simulate", "handeye", "--seed", "3", "--output", he_log, "--truth-output", he_truth}).code == 0);
  const auto he = run({"calibrate-handeye", "--input", he_log});
  REQUIRE(he.code == 0);
  const auto sol = io::hand_eye_from_json(nlohmann::json::parse(he.out));
  const auto truth = io::hand_eye_from_json(nlohmann::json::parse(io::read_file(he_truth)));
  CHECK((sol.base_from_tracker.translation() - truth.base_from_tracker.translation()).norm() < 1e-6);

  const auto piv_log = (dir / "pivot.csv").string();
  REQUIRE(run({"simulate", "pivot", "--seed", "3", "--output", piv_log}).code == 0);
  const auto piv = run({"calibrate-pivot", "--input", piv_log});
  REQUIRE(piv.code == 0);
  CHECK(nlohmann::json::parse(piv.out).at("rms_residual_mm").get<double>() < 1e-6);

  const auto tip_log = (dir / "tip.csv").string();
  const auto tip_he = (dir / "tip_he.json").string();
  REQUIRE(run({"simulate", "tip", "--seed", "3", "--output", tip_log, "--handeye-output", tip_he}).code == 0);
  const auto tip = run({"calibrate-tip", "--input", tip_log, "--handeye", tip_he});
  REQUIRE(tip.code == 0);
  CHECK(nlohmann::json::parse(tip.out).at("spread_mm").get<double>() < 1e-6);

  // A pivot log fed to the hand-eye solver is a frame mismatch, not a crash.
  CHECK(run({"calibrate-handeye", "--input", piv_log}).code == cli::kExitDataError);
}

TEST_CASE("report aggregates analyze outputs") {
  const auto dir = tmpdir();
  const auto plan = write_plan(dir, 4);
  std::vector<std::string> args = {"report", "--format", "csv", "--input"};
  for (int seed = 1; seed <= 3; ++seed) {
    const auto traj = (dir / ("muso_" + std::to_string(seed) + ".csv")).string();
    const auto rep = (dir / ("muso_" + std::to_string(seed) + ".json")).string();
    REQUIRE(run({"simulate", "muso", "--plan", plan, "--seed", std::to_string(seed), "--output", traj}).code == 0);
    REQUIRE(run({"analyze", "--traj", traj, "--plan", plan, "--label", "M1." + std::to_string(seed), "--output",
                 rep})
                .code == 0);
    args.push_back(rep);
  }
  const auto table = run(args);
  REQUIRE(table.code == 0);
  const auto sets = report::parse_report_table(table.out, report::Format::Csv);
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].set == "M1");
  CHECK(sets[0].trials == 3);
}
