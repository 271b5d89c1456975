#include "osteonav/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "osteonav/errors.hpp"

namespace osteonav::metrics {

namespace {

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

bool passes_gate(const TrajectorySample& s, const PlannedCut& plan, const AnalysisOptions& o) {
  switch (o.gating) {
    case Gating::All:
      return true;
    case Gating::ActiveOnly:
      return s.tool_active;
    case Gating::ActiveWindow: {
      if (!s.tool_active) return false;
      const double along = plan.along(s.point);
      return along >= -o.gate_margin && along <= plan.length + o.gate_margin;
    }
  }
  return false;
}

}  // namespace

void PlannedCut::validate() const {
  constexpr double tol = 1e-6;
  if (!entry_point.allFinite() || !direction.allFinite() || !depth_axis.allFinite())
    throw InvalidArgument("planned cut: non-finite vector");
  if (std::abs(direction.norm() - 1.0) > tol) throw InvalidArgument("planned cut: direction is not a unit vector");
  if (std::abs(depth_axis.norm() - 1.0) > tol) throw InvalidArgument("planned cut: depth_axis is not a unit vector");
  if (std::abs(direction.dot(depth_axis)) > tol)
    throw InvalidArgument("planned cut: direction and depth_axis are not perpendicular");
  if (!finite_positive(length)) throw InvalidArgument("planned cut: length must be positive");
  if (!finite_positive(target_depth)) throw InvalidArgument("planned cut: target depth must be positive");
  if (!finite_positive(cutting_speed)) throw InvalidArgument("planned cut: cutting speed must be positive");
}

TrajectoryRecording::TrajectoryRecording(std::vector<TrajectorySample> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) throw InvalidArgument("trajectory recording needs at least two samples");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!std::isfinite(s.timestamp) || !s.point.allFinite())
      throw InvalidArgument("trajectory sample " + std::to_string(i) + " is not finite");
    if (i > 0 && !(s.timestamp > samples_[i - 1].timestamp))
      throw InvalidArgument("trajectory timestamps must be strictly increasing (sample " + std::to_string(i) + ")");
  }
}

std::vector<double> perpendicular_errors(const TrajectoryRecording& rec, const PlannedCut& plan,
                                         const AnalysisOptions& options) {
  plan.validate();
  const Vec3 lateral = plan.lateral_axis();
  std::vector<double> errors;
  errors.reserve(rec.size());
  for (const auto& s : rec.samples()) {
    if (!passes_gate(s, plan, options)) continue;
    const Vec3 rel = s.point - plan.entry_point;
    if (options.lateral_mode == LateralMode::PureLateral) {
      errors.push_back(std::abs(rel.dot(lateral)));
    } else {
      errors.push_back((rel - rel.dot(plan.direction) * plan.direction).norm());
    }
  }
  if (errors.empty()) throw EmptyAfterGating("no trajectory samples pass the gate");
  return errors;
}

double trajectory_rmse(std::span<const double> errors) {
  if (errors.empty()) throw EmptyInput("trajectory_rmse: empty error list");
  double sum = 0.0;
  for (double e : errors) sum += e * e;
  return std::sqrt(sum / static_cast<double>(errors.size()));
}

double executed_length(const TrajectoryRecording& rec, const PlannedCut& plan, const AnalysisOptions& options) {
  plan.validate();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : rec.samples()) {
    if (!passes_gate(s, plan, options)) continue;
    const double along = plan.along(s.point);
    lo = std::min(lo, along);
    hi = std::max(hi, along);
  }
  if (lo > hi) throw EmptyAfterGating("no trajectory samples pass the gate");
  return hi - lo;
}

double procedure_time(const TrajectoryRecording& rec) {
  double total = 0.0;
  std::optional<double> run_start;
  double run_last = 0.0;
  for (const auto& s : rec.samples()) {
    if (s.tool_active) {
      if (!run_start) run_start = s.timestamp;
      run_last = s.timestamp;
    } else if (run_start) {
      total += run_last - *run_start;
      run_start.reset();
    }
  }
  if (run_start) total += run_last - *run_start;
  return total;
}

double bin_edge(double length, std::size_t bin_count, std::size_t j) {
  if (j >= bin_count) return length;
  return length * static_cast<double>(j) / static_cast<double>(bin_count);
}

CutProfile depth_profile(const TrajectoryRecording& rec, const PlannedCut& plan, std::size_t bins) {
  plan.validate();
  if (bins == 0) throw InvalidArgument("depth profile needs at least one bin");

  CutProfile profile;
  profile.bin_count = bins;
  profile.bin_width = plan.length / static_cast<double>(bins);
  profile.depths.assign(bins, std::nullopt);

  for (const auto& s : rec.samples()) {
    const double along = plan.along(s.point);
    if (!(along >= 0.0 && along <= plan.length)) continue;
    // Initial guess from division, settled against the exact edges.
    auto j = static_cast<std::size_t>(std::min(along / profile.bin_width, static_cast<double>(bins - 1)));
    while (j > 0 && along < bin_edge(plan.length, bins, j)) --j;
    while (j + 1 < bins && along >= bin_edge(plan.length, bins, j + 1)) ++j;

    const double depth = plan.depth_of(s.point);
    auto& slot = profile.depths[j];
    if (!slot || depth > *slot) slot = depth;
  }
  const auto filled = std::count_if(profile.depths.begin(), profile.depths.end(),
                                    [](const auto& d) { return d.has_value(); });
  profile.coverage = static_cast<double>(filled) / static_cast<double>(bins);
  return profile;
}

DepthSummary mean_depth(const CutProfile& profile) {
  double sum = 0.0;
  std::size_t filled = 0;
  for (const auto& d : profile.depths) {
    if (!d) continue;
    sum += *d;
    ++filled;
  }
  if (filled == 0) throw EmptyProfile("depth profile has no samples in any bin");
  return {sum / static_cast<double>(filled), sum / static_cast<double>(profile.depths.size())};
}

TrialLabel TrialLabel::parse(const std::string& text) {
  auto fail = [&]() -> TrialLabel {
    throw InvalidArgument("trial label '" + text + "' is not of the form M1.4 or M1^4");
  };
  if (text.size() < 4 || !std::isupper(static_cast<unsigned char>(text[0]))) return fail();
  const auto sep = text.find_first_of(".^");
  if (sep == std::string::npos || sep < 2 || sep + 1 >= text.size()) return fail();

  auto parse_int = [&](std::size_t from, std::size_t to) {
    int v = 0;
    const char* first = text.data() + from;
    const char* last = text.data() + to;
    if (first == last || !std::isdigit(static_cast<unsigned char>(*first))) fail();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || v < 0) fail();
    return v;
  };
  TrialLabel label;
  label.technique = text[0];
  label.set = parse_int(1, sep);
  label.trial = parse_int(sep + 1, text.size());
  return label;
}

std::string TrialLabel::to_string() const { return set_name() + "." + std::to_string(trial); }

std::string TrialLabel::set_name() const { return std::string(1, technique) + std::to_string(set); }

MetricsReport build_report(const TrajectoryRecording& rec, const PlannedCut& plan, const AnalysisOptions& options,
                           const TrialLabel& label) {
  plan.validate();
  MetricsReport report;
  report.label = label;
  report.target_depth = plan.target_depth;
  const auto errors = perpendicular_errors(rec, plan, options);
  report.rmse = trajectory_rmse(errors);
  report.executed_length = executed_length(rec, plan, options);
  report.procedure_time = procedure_time(rec);
  report.profile = depth_profile(rec, plan, options.bins);
  const auto depth = mean_depth(report.profile);
  report.mean_depth = depth.mean;
  report.mean_depth_strict = depth.strict;
  if (label.technique == 'M') {
    report.cutting_speed = report.procedure_time > 0.0 ? report.executed_length / report.procedure_time : 0.0;
  } else {
    report.cutting_speed = plan.cutting_speed;
  }
  return report;
}

}  // namespace osteonav::metrics
