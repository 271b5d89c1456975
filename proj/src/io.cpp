#include "osteonav/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "osteonav/errors.hpp"

namespace osteonav::io {

namespace {

using nlohmann::json;

// Splits text into lines (LF, optional trailing CR). A final newline does not start a new line.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

double parse_number(std::string_view field, std::size_t line, std::string_view name) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc{} || ptr != last)
    throw ParseError(line, "field '" + std::string(name) + "' is not a number: '" + std::string(field) + "'");
  if (!std::isfinite(v)) throw ParseError(line, "field '" + std::string(name) + "' is not finite");
  return v;
}

void expect_header(const std::vector<std::string_view>& lines, std::string_view header) {
  if (lines.empty()) throw ParseError(1, "missing header '" + std::string(header) + "'");
  if (lines.front() != header)
    throw ParseError(1, "expected header '" + std::string(header) + "', got '" + std::string(lines.front()) + "'");
}

std::vector<std::string_view> row_fields(std::string_view line, std::size_t lineno, std::size_t expected) {
  if (line.empty()) throw ParseError(lineno, "empty row");
  auto fields = split_fields(line);
  if (fields.size() != expected)
    throw ParseError(lineno, "expected " + std::to_string(expected) + " fields, got " + std::to_string(fields.size()));
  return fields;
}

// JSON helpers: every failure surfaces as ParseError(0, ...).

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ParseError(0, where + " must be a JSON object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ParseError(0, "unknown key '" + key + "' in " + where);
}

double json_number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(0, "missing key '" + key + "' in " + where);
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ParseError(0, "'" + key + "' in " + where + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(0, "'" + key + "' in " + where + " must be finite");
  return d;
}

Vec3 json_vec3(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(0, "missing key '" + key + "' in " + where);
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 3) throw ParseError(0, "'" + key + "' in " + where + " must be an array of 3 numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number()) throw ParseError(0, "'" + key + "' must hold numbers");
    out(i) = v[static_cast<std::size_t>(i)].get<double>();
  }
  if (!out.allFinite()) throw ParseError(0, "'" + key + "' must be finite");
  return out;
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::string gating_name(metrics::Gating g) {
  switch (g) {
    case metrics::Gating::ActiveWindow: return "active_window";
    case metrics::Gating::ActiveOnly: return "active_only";
    case metrics::Gating::All: return "all";
  }
  return "?";
}

std::string lateral_name(metrics::LateralMode m) {
  return m == metrics::LateralMode::PureLateral ? "pure_lateral" : "point_to_line";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw InvalidArgument("cannot format number");
  return std::string(buf, ptr);
}

PoseLogRow PoseLogRow::from_transform(double timestamp, FrameId source, FrameId target, const RigidTransform& t) {
  return {timestamp, source, target, t.rotation().quaternion(), t.translation()};
}

RigidTransform PoseLogRow::transform() const {
  return {Rotation3::from_quaternion(quaternion[0], quaternion[1], quaternion[2], quaternion[3]), translation};
}

std::vector<PoseLogRow> parse_pose_log(std::string_view text) {
  const auto lines = split_lines(text);
  expect_header(lines, kPoseLogHeader);
  std::vector<PoseLogRow> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const auto f = row_fields(lines[i], lineno, 10);
    PoseLogRow row;
    row.timestamp = parse_number(f[0], lineno, "timestamp");
    const auto src = parse_frame_id(f[1]);
    if (!src) throw FrameError(lineno, "unknown source frame '" + std::string(f[1]) + "'");
    const auto tgt = parse_frame_id(f[2]);
    if (!tgt) throw FrameError(lineno, "unknown target frame '" + std::string(f[2]) + "'");
    row.source = *src;
    row.target = *tgt;
    static constexpr std::string_view qnames[4] = {"qw", "qx", "qy", "qz"};
    double norm2 = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      row.quaternion[k] = parse_number(f[3 + k], lineno, qnames[k]);
      norm2 += row.quaternion[k] * row.quaternion[k];
    }
    const double norm = std::sqrt(norm2);
    if (norm < kQuatNormMin || norm > kQuatNormMax)
      throw ParseError(lineno, "quaternion norm " + format_double(norm) + " outside [0.999, 1.001]");
    // Serialized unit quaternions are left bit-exact.
    if (std::abs(norm2 - 1.0) > 1e-12)
      for (auto& q : row.quaternion) q /= norm;
    row.translation.x() = parse_number(f[7], lineno, "tx");
    row.translation.y() = parse_number(f[8], lineno, "ty");
    row.translation.z() = parse_number(f[9], lineno, "tz");
    rows.push_back(row);
  }
  return rows;
}

std::string write_pose_log(std::span<const PoseLogRow> rows) {
  std::string out(kPoseLogHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += format_double(r.timestamp);
    out += ',';
    out += to_string(r.source);
    out += ',';
    out += to_string(r.target);
    for (double q : r.quaternion) {
      out += ',';
      out += format_double(q);
    }
    for (int k = 0; k < 3; ++k) {
      out += ',';
      out += format_double(r.translation(k));
    }
    out += '\n';
  }
  return out;
}

metrics::TrajectoryRecording parse_trajectory_log(std::string_view text) {
  const auto lines = split_lines(text);
  expect_header(lines, kTrajectoryLogHeader);
  std::vector<metrics::TrajectorySample> samples;
  samples.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const auto f = row_fields(lines[i], lineno, 5);
    metrics::TrajectorySample s;
    s.timestamp = parse_number(f[0], lineno, "timestamp");
    s.point.x() = parse_number(f[1], lineno, "x");
    s.point.y() = parse_number(f[2], lineno, "y");
    s.point.z() = parse_number(f[3], lineno, "z");
    if (f[4] == "1") {
      s.tool_active = true;
    } else if (f[4] != "0") {
      throw ParseError(lineno, "field 'active' must be 0 or 1, got '" + std::string(f[4]) + "'");
    }
    if (!samples.empty() && !(s.timestamp > samples.back().timestamp))
      throw NonMonotoneTime(lineno, "timestamp " + format_double(s.timestamp) + " does not increase");
    samples.push_back(s);
  }
  if (samples.size() < 2) throw ParseError(0, "trajectory log needs at least two samples");
  return metrics::TrajectoryRecording(std::move(samples));
}

std::string write_trajectory_log(const metrics::TrajectoryRecording& rec) {
  std::string out(kTrajectoryLogHeader);
  out += '\n';
  out.reserve(out.size() + rec.size() * 64);
  for (const auto& s : rec.samples()) {
    out += format_double(s.timestamp);
    for (int k = 0; k < 3; ++k) {
      out += ',';
      out += format_double(s.point(k));
    }
    out += s.tool_active ? ",1\n" : ",0\n";
  }
  return out;
}

PlanFile parse_plan(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("plan is not valid JSON: ") + e.what());
  }
  reject_unknown(doc,
                 {"entry_point", "direction", "depth_axis", "length_mm", "target_depth_mm", "cutting_speed_mm_s",
                  "pass_policy", "analysis"},
                 "plan");
  PlanFile plan;
  plan.cut.entry_point = json_vec3(doc, "entry_point", "plan");
  plan.cut.direction = json_vec3(doc, "direction", "plan");
  plan.cut.depth_axis = json_vec3(doc, "depth_axis", "plan");
  plan.cut.length = json_number(doc, "length_mm", "plan");
  plan.cut.target_depth = json_number(doc, "target_depth_mm", "plan");
  plan.cut.cutting_speed = json_number(doc, "cutting_speed_mm_s", "plan");
  try {
    plan.cut.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(0, e.what());
  }

  if (doc.contains("pass_policy")) {
    const auto& p = doc.at("pass_policy");
    const std::string where = "pass_policy";
    reject_unknown(p,
                   {"depth_increment_mm", "insertion_speed_mm_s", "retraction_speed_mm_s", "cutting_speed_mm_s",
                    "retract_clearance_mm", "bidirectional"},
                   where);
    auto& pol = plan.policy;
    if (p.contains("depth_increment_mm")) pol.depth_increment = json_number(p, "depth_increment_mm", where);
    if (p.contains("insertion_speed_mm_s")) pol.insertion_speed = json_number(p, "insertion_speed_mm_s", where);
    if (p.contains("retraction_speed_mm_s")) pol.retraction_speed = json_number(p, "retraction_speed_mm_s", where);
    if (p.contains("cutting_speed_mm_s")) pol.cutting_speed = json_number(p, "cutting_speed_mm_s", where);
    if (p.contains("retract_clearance_mm")) pol.retract_clearance = json_number(p, "retract_clearance_mm", where);
    if (p.contains("bidirectional")) {
      if (!p.at("bidirectional").is_boolean()) throw ParseError(0, "'bidirectional' must be a boolean");
      pol.bidirectional = p.at("bidirectional").get<bool>();
    }
    for (double v : {pol.depth_increment, pol.insertion_speed, pol.retraction_speed, pol.retract_clearance})
      if (!(v > 0.0)) throw ParseError(0, "pass_policy values must be positive");
    if (pol.cutting_speed && !(*pol.cutting_speed > 0.0))
      throw ParseError(0, "pass_policy cutting speed must be positive");
  }

  if (doc.contains("analysis")) {
    const auto& a = doc.at("analysis");
    reject_unknown(a, {"K", "gating", "gate_margin_mm", "lateral_mode"}, "analysis");
    auto& an = plan.analysis;
    if (a.contains("K")) {
      if (!a.at("K").is_number_unsigned() || a.at("K").get<std::size_t>() == 0)
        throw ParseError(0, "analysis.K must be a positive integer");
      an.bins = a.at("K").get<std::size_t>();
    }
    if (a.contains("gating")) {
      const auto& g = a.at("gating");
      if (!g.is_string()) throw ParseError(0, "analysis.gating must be a string");
      const auto name = g.get<std::string>();
      if (name == "active_window") an.gating = metrics::Gating::ActiveWindow;
      else if (name == "active_only") an.gating = metrics::Gating::ActiveOnly;
      else if (name == "all") an.gating = metrics::Gating::All;
      else throw ParseError(0, "unknown gating '" + name + "'");
    }
    if (a.contains("gate_margin_mm")) {
      an.gate_margin = json_number(a, "gate_margin_mm", "analysis");
      if (an.gate_margin < 0.0) throw ParseError(0, "analysis.gate_margin_mm must be non-negative");
    }
    if (a.contains("lateral_mode")) {
      const auto& m = a.at("lateral_mode");
      if (!m.is_string()) throw ParseError(0, "analysis.lateral_mode must be a string");
      const auto name = m.get<std::string>();
      if (name == "pure_lateral") an.lateral_mode = metrics::LateralMode::PureLateral;
      else if (name == "point_to_line") an.lateral_mode = metrics::LateralMode::PointToLine;
      else throw ParseError(0, "unknown lateral_mode '" + name + "'");
    }
  }
  return plan;
}

std::string write_plan(const PlanFile& plan) {
  json doc;
  doc["entry_point"] = vec3_json(plan.cut.entry_point);
  doc["direction"] = vec3_json(plan.cut.direction);
  doc["depth_axis"] = vec3_json(plan.cut.depth_axis);
  doc["length_mm"] = plan.cut.length;
  doc["target_depth_mm"] = plan.cut.target_depth;
  doc["cutting_speed_mm_s"] = plan.cut.cutting_speed;
  json pol;
  pol["depth_increment_mm"] = plan.policy.depth_increment;
  pol["insertion_speed_mm_s"] = plan.policy.insertion_speed;
  pol["retraction_speed_mm_s"] = plan.policy.retraction_speed;
  if (plan.policy.cutting_speed) pol["cutting_speed_mm_s"] = *plan.policy.cutting_speed;
  pol["retract_clearance_mm"] = plan.policy.retract_clearance;
  pol["bidirectional"] = plan.policy.bidirectional;
  doc["pass_policy"] = pol;
  json an;
  an["K"] = plan.analysis.bins;
  an["gating"] = gating_name(plan.analysis.gating);
  an["gate_margin_mm"] = plan.analysis.gate_margin;
  an["lateral_mode"] = lateral_name(plan.analysis.lateral_mode);
  doc["analysis"] = an;
  return doc.dump(2) + "\n";
}

json transform_to_json(const RigidTransform& t) {
  const Mat3& r = t.rotation().matrix();
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back(json::array({r(i, 0), r(i, 1), r(i, 2)}));
  return {{"rotation", rows}, {"translation", vec3_json(t.translation())}};
}

RigidTransform transform_from_json(const json& j) {
  reject_unknown(j, {"rotation", "translation"}, "transform");
  if (!j.contains("rotation") || !j.at("rotation").is_array() || j.at("rotation").size() != 3)
    throw ParseError(0, "transform.rotation must be a 3x3 array");
  Mat3 r;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& row = j.at("rotation")[i];
    if (!row.is_array() || row.size() != 3) throw ParseError(0, "transform.rotation must be a 3x3 array");
    for (std::size_t k = 0; k < 3; ++k) {
      if (!row[k].is_number()) throw ParseError(0, "transform.rotation must hold numbers");
      r(static_cast<int>(i), static_cast<int>(k)) = row[k].get<double>();
    }
  }
  if (!Rotation3::is_valid(r, 1e-6)) throw ParseError(0, "transform.rotation is not a rotation matrix");
  return {Rotation3::nearest(r), json_vec3(j, "translation", "transform")};
}

json hand_eye_to_json(const handeye::Solution& s) {
  return {{"base_from_tracker", transform_to_json(s.base_from_tracker)},
          {"ee_from_tool", transform_to_json(s.ee_from_tool)},
          {"residual_rotation_deg", rad_to_deg(s.residual_rotation)},
          {"residual_translation_mm", s.residual_translation}};
}

handeye::Solution hand_eye_from_json(const json& j) {
  reject_unknown(j, {"base_from_tracker", "ee_from_tool", "residual_rotation_deg", "residual_translation_mm"},
                 "hand-eye solution");
  for (const char* key : {"base_from_tracker", "ee_from_tool"})
    if (!j.contains(key)) throw ParseError(0, std::string("hand-eye solution is missing '") + key + "'");
  handeye::Solution s;
  s.base_from_tracker = transform_from_json(j.at("base_from_tracker"));
  s.ee_from_tool = transform_from_json(j.at("ee_from_tool"));
  if (j.contains("residual_rotation_deg"))
    s.residual_rotation = deg_to_rad(json_number(j, "residual_rotation_deg", "hand-eye solution"));
  if (j.contains("residual_translation_mm"))
    s.residual_translation = json_number(j, "residual_translation_mm", "hand-eye solution");
  return s;
}

PairedPoses pair_by_timestamp(std::span<const PoseLogRow> rows, FrameId first_source, FrameId first_target,
                              FrameId second_source, FrameId second_target) {
  struct Slot {
    const PoseLogRow* first = nullptr;
    const PoseLogRow* second = nullptr;
  };
  std::map<double, Slot> by_time;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::size_t lineno = i + 2;
    auto& slot = by_time[r.timestamp];
    if (r.source == first_source && r.target == first_target) {
      if (slot.first) throw ParseError(lineno, "duplicate " + std::string(to_string(r.source)) + "->" +
                                                   std::string(to_string(r.target)) + " row at this timestamp");
      slot.first = &r;
    } else if (r.source == second_source && r.target == second_target) {
      if (slot.second) throw ParseError(lineno, "duplicate " + std::string(to_string(r.source)) + "->" +
                                                    std::string(to_string(r.target)) + " row at this timestamp");
      slot.second = &r;
    } else {
      throw FrameError(lineno, "unexpected frame pair " + std::string(to_string(r.source)) + "->" +
                                   std::string(to_string(r.target)));
    }
  }
  PairedPoses out;
  for (const auto& [t, slot] : by_time) {
    if (!slot.first || !slot.second)
      throw ParseError(0, "timestamp " + format_double(t) + " lacks one of the paired rows");
    out.timestamps.push_back(t);
    out.first.push_back(slot.first->transform());
    out.second.push_back(slot.second->transform());
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace osteonav::io
