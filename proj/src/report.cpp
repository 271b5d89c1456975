#include "osteonav/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

#include "osteonav/errors.hpp"
#include "osteonav/io.hpp"

namespace osteonav::report {

namespace {

using nlohmann::json;

constexpr const char* kCsvHeader =
    "set,trials,target_depth_mean,target_depth_std,cutting_speed_mean,cutting_speed_std,rmse_mean,rmse_std,"
    "length_mean,length_std,procedure_time_mean,procedure_time_std,depth_mean,depth_std";

// Welford accumulator.
class Running {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  Stat stat() const {
    return {mean_, n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0};
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Accumulator {
  std::size_t trials = 0;
  Running target_depth, cutting_speed, rmse, length, procedure_time, depth;
};

std::vector<Stat SetSummary::*> stat_columns() {
  return {&SetSummary::target_depth, &SetSummary::cutting_speed, &SetSummary::rmse,
          &SetSummary::length, &SetSummary::procedure_time, &SetSummary::depth};
}

const std::vector<std::string>& column_keys() {
  static const std::vector<std::string> keys = {"target_depth", "cutting_speed", "rmse",
                                                "length", "procedure_time", "depth"};
  return keys;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Columns occupied by UTF-8 text ("±" is two bytes, one column).
std::size_t display_width(const std::string& s) {
  std::size_t cols = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++cols;
  return cols;
}

std::string pad(std::string s, std::size_t width) {
  const std::size_t cols = display_width(s);
  if (cols < width) s.append(width - cols, ' ');
  return s;
}

json stat_json(const Stat& s) { return {{"mean", s.mean}, {"std", s.std}}; }

Stat stat_from_json(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_object()) throw ParseError(0, "missing column '" + key + "'");
  const auto& o = j.at(key);
  if (!o.contains("mean") || !o.contains("std") || !o.at("mean").is_number() || !o.at("std").is_number())
    throw ParseError(0, "column '" + key + "' needs numeric mean and std");
  return {o.at("mean").get<double>(), o.at("std").get<double>()};
}

double csv_number(std::string_view f, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size())
    throw ParseError(line, "not a number: '" + std::string(f) + "'");
  return v;
}

double number_at(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw ParseError(0, std::string("trial report needs numeric '") + key + "'");
  return j.at(key).get<double>();
}

}  // namespace

std::vector<SetSummary> summarize(std::span<const metrics::MetricsReport> reports) {
  std::vector<std::string> order;
  std::map<std::string, Accumulator> acc;
  for (const auto& r : reports) {
    const std::string name = r.label.set_name();
    auto [it, inserted] = acc.try_emplace(name);
    if (inserted) order.push_back(name);
    auto& a = it->second;
    ++a.trials;
    a.target_depth.add(r.target_depth);
    a.cutting_speed.add(r.cutting_speed);
    a.rmse.add(r.rmse);
    a.length.add(r.executed_length);
    a.procedure_time.add(r.procedure_time);
    a.depth.add(r.mean_depth);
  }
  std::vector<SetSummary> out;
  for (const auto& name : order) {
    const auto& a = acc.at(name);
    out.push_back({name, a.trials, a.target_depth.stat(), a.cutting_speed.stat(), a.rmse.stat(), a.length.stat(),
                   a.procedure_time.stat(), a.depth.stat()});
  }
  return out;
}

Format parse_format(std::string_view name) {
  if (name == "text") return Format::Text;
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw InvalidArgument("unknown format '" + std::string(name) + "'");
}

std::string emit_report_table(std::span<const metrics::MetricsReport> reports, Format format) {
  if (reports.empty()) throw EmptyInput("report table needs at least one trial");
  const auto sets = summarize(reports);
  const auto cols = stat_columns();

  if (format == Format::Csv) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& s : sets) {
      out += s.set + "," + std::to_string(s.trials);
      for (auto col : cols) out += "," + io::format_double((s.*col).mean) + "," + io::format_double((s.*col).std);
      out += '\n';
    }
    return out;
  }

  if (format == Format::Json) {
    json doc;
    doc["sets"] = json::array();
    for (const auto& s : sets) {
      json row;
      row["set"] = s.set;
      row["trials"] = s.trials;
      for (std::size_t c = 0; c < cols.size(); ++c) row[column_keys()[c]] = stat_json(s.*cols[c]);
      doc["sets"].push_back(row);
    }
    doc["trials"] = json::array();
    for (const auto& r : reports) {
      json t = trial_to_json(r);
      t.erase("profile");
      doc["trials"].push_back(t);
    }
    return doc.dump(2) + "\n";
  }

  const std::vector<std::string> heads = {"Set", "Target Depth (mm)", "Cutting Speed (mm/s)", "RMSE (mm)",
                                          "Length (mm)", "Procedure Time (s)", "Depth (mm)"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : sets) {
    std::vector<std::string> row{s.set};
    for (auto col : cols) row.push_back(fixed2((s.*col).mean) + " ± " + fixed2((s.*col).std));
    rows.push_back(row);
  }
  std::vector<std::size_t> width(heads.size());
  for (std::size_t c = 0; c < heads.size(); ++c) {
    width[c] = heads[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], display_width(row[c]));
  }
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += c + 1 < row.size() ? pad(row[c], width[c] + 2) : row[c];
    }
    out += '\n';
  };
  emit(heads);
  for (const auto& row : rows) emit(row);
  return out;
}

std::vector<SetSummary> parse_report_table(std::string_view text, Format format) {
  const auto cols = stat_columns();
  std::vector<SetSummary> out;
  if (format == Format::Json) {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(0, std::string("report is not valid JSON: ") + e.what());
    }
    if (!doc.contains("sets") || !doc.at("sets").is_array()) throw ParseError(0, "report has no 'sets' array");
    for (const auto& row : doc.at("sets")) {
      SetSummary s;
      if (!row.contains("set") || !row.at("set").is_string()) throw ParseError(0, "set row lacks a name");
      if (!row.contains("trials") || !row.at("trials").is_number_unsigned()) throw ParseError(0, "set row lacks a trial count");
      s.set = row.at("set").get<std::string>();
      s.trials = row.at("trials").get<std::size_t>();
      for (std::size_t c = 0; c < cols.size(); ++c) s.*cols[c] = stat_from_json(row, column_keys()[c]);
      out.push_back(s);
    }
    return out;
  }
  if (format != Format::Csv) throw InvalidArgument("only csv and json tables can be parsed");

  std::size_t line = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view l = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line;
    if (!header_seen) {
      if (l != kCsvHeader) throw ParseError(line, "unexpected report header");
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> f;
    std::size_t p = 0;
    for (;;) {
      const std::size_t comma = l.find(',', p);
      f.push_back(l.substr(p, comma == std::string_view::npos ? std::string_view::npos : comma - p));
      if (comma == std::string_view::npos) break;
      p = comma + 1;
    }
    if (f.size() != 2 + 2 * cols.size()) throw ParseError(line, "wrong number of columns");
    SetSummary s;
    s.set = std::string(f[0]);
    const double trials = csv_number(f[1], line);
    if (trials < 0 || trials != std::floor(trials)) throw ParseError(line, "trial count must be a whole number");
    s.trials = static_cast<std::size_t>(trials);
    for (std::size_t c = 0; c < cols.size(); ++c)
      s.*cols[c] = {csv_number(f[2 + 2 * c], line), csv_number(f[3 + 2 * c], line)};
    out.push_back(s);
  }
  if (!header_seen) throw ParseError(1, "missing report header");
  return out;
}

json trial_to_json(const metrics::MetricsReport& r) {
  json depths = json::array();
  for (const auto& d : r.profile.depths) depths.push_back(d ? json(*d) : json(nullptr));
  return {{"label", r.label.to_string()},
          {"target_depth_mm", r.target_depth},
          {"cutting_speed_mm_s", r.cutting_speed},
          {"rmse_mm", r.rmse},
          {"length_mm", r.executed_length},
          {"procedure_time_s", r.procedure_time},
          {"mean_depth_mm", r.mean_depth},
          {"mean_depth_strict_mm", r.mean_depth_strict},
          {"profile",
           {{"K", r.profile.bin_count},
            {"bin_width_mm", r.profile.bin_width},
            {"coverage", r.profile.coverage},
            {"depths_mm", depths}}}};
}

metrics::MetricsReport trial_from_json(const json& j) {
  if (!j.is_object()) throw ParseError(0, "trial report must be a JSON object");
  metrics::MetricsReport r;
  if (!j.contains("label") || !j.at("label").is_string()) throw ParseError(0, "trial report needs a label");
  try {
    r.label = metrics::TrialLabel::parse(j.at("label").get<std::string>());
  } catch (const InvalidArgument& e) {
    throw ParseError(0, e.what());
  }
  r.target_depth = number_at(j, "target_depth_mm");
  r.cutting_speed = number_at(j, "cutting_speed_mm_s");
  r.rmse = number_at(j, "rmse_mm");
  r.executed_length = number_at(j, "length_mm");
  r.procedure_time = number_at(j, "procedure_time_s");
  r.mean_depth = number_at(j, "mean_depth_mm");
  r.mean_depth_strict = number_at(j, "mean_depth_strict_mm");
  if (j.contains("profile")) {
    const auto& p = j.at("profile");
    r.profile.bin_count = p.value("K", std::size_t{0});
    r.profile.bin_width = p.value("bin_width_mm", 0.0);
    r.profile.coverage = p.value("coverage", 0.0);
    if (p.contains("depths_mm"))
      for (const auto& d : p.at("depths_mm"))
        r.profile.depths.push_back(d.is_null() ? std::nullopt : std::optional<double>(d.get<double>()));
  }
  return r;
}

std::string write_trial_report(const metrics::MetricsReport& r) { return trial_to_json(r).dump(2) + "\n"; }

metrics::MetricsReport parse_trial_report(std::string_view text) {
  try {
    return trial_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("trial report: ") + e.what());
  }
}

std::string write_profile_csv(const metrics::CutProfile& profile, double length) {
  std::string out = "bin,s_start_mm,s_end_mm,depth_mm\n";
  for (std::size_t j = 0; j < profile.depths.size(); ++j) {
    out += std::to_string(j) + "," + io::format_double(metrics::bin_edge(length, profile.bin_count, j)) + "," +
           io::format_double(metrics::bin_edge(length, profile.bin_count, j + 1)) + ",";
    if (profile.depths[j]) out += io::format_double(*profile.depths[j]);
    out += '\n';
  }
  return out;
}

}  // namespace osteonav::report
