#include "osteonav/planner.hpp"

#include <cmath>

#include "osteonav/errors.hpp"

namespace osteonav::planner {

namespace {

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

void validate_policy(const PassPolicy& policy) {
  if (!finite_positive(policy.depth_increment)) throw InvalidPolicy("depth increment must be positive");
  if (!finite_positive(policy.insertion_speed)) throw InvalidPolicy("insertion speed must be positive");
  if (!finite_positive(policy.retraction_speed)) throw InvalidPolicy("retraction speed must be positive");
  if (policy.cutting_speed && !finite_positive(*policy.cutting_speed))
    throw InvalidPolicy("cutting speed must be positive");
  if (!finite_positive(policy.retract_clearance)) throw InvalidPolicy("retract clearance must be positive");
}

}  // namespace

std::vector<Segment> CutSequence::segments() const {
  std::vector<Segment> out;
  out.reserve(passes.size() * 4);
  for (const auto& pass : passes) {
    if (!out.empty() && (out.back().end - pass.insert.start).norm() > 1e-12) {
      const double speed = passes.front().retract.speed;
      out.push_back({SegmentKind::Transit, out.back().end, pass.insert.start, speed, false});
    }
    out.push_back(pass.insert);
    out.push_back(pass.cut);
    out.push_back(pass.retract);
  }
  return out;
}

std::vector<double> pass_depths(double target_depth, double depth_increment) {
  if (!finite_positive(depth_increment)) throw InvalidPolicy("depth increment must be positive");
  if (!finite_positive(target_depth)) throw InvalidArgument("target depth must be positive");
  // Relative slack keeps 0.3 / 0.1 from yielding four passes.
  const double ratio = target_depth / depth_increment;
  const auto count = static_cast<std::size_t>(std::max(1.0, std::ceil(ratio * (1.0 - 1e-12))));
  std::vector<double> depths;
  depths.reserve(count);
  for (std::size_t p = 1; p < count; ++p) depths.push_back(static_cast<double>(p) * depth_increment);
  depths.push_back(target_depth);
  return depths;
}

CutSequence plan_passes(const metrics::PlannedCut& plan, std::span<const PassSpec> passes, const PassPolicy& policy) {
  plan.validate();
  validate_policy(policy);
  CutSequence seq;
  seq.passes.reserve(passes.size());
  for (std::size_t p = 0; p < passes.size(); ++p) {
    const auto& spec = passes[p];
    if (!finite_positive(spec.depth)) throw InvalidPolicy("pass depth must be positive");
    if (!finite_positive(spec.cutting_speed)) throw InvalidPolicy("pass cutting speed must be positive");
    const bool reversed = policy.bidirectional && (p % 2 == 1);
    const double s0 = reversed ? plan.length : 0.0;
    const double s1 = reversed ? 0.0 : plan.length;

    Pass pass;
    pass.depth = spec.depth;
    pass.insert = {SegmentKind::Insert, plan.point_at(s0, 0.0), plan.point_at(s0, spec.depth),
                   policy.insertion_speed, true};
    pass.cut = {SegmentKind::Cut, pass.insert.end, plan.point_at(s1, spec.depth), spec.cutting_speed, true};
    pass.retract = {SegmentKind::Retract, pass.cut.end, plan.point_at(s1, -policy.retract_clearance),
                    policy.retraction_speed, false};
    seq.passes.push_back(pass);
  }
  return seq;
}

CutSequence plan_sequence(const metrics::PlannedCut& plan, const PassPolicy& policy) {
  validate_policy(policy);
  plan.validate();
  if (policy.depth_increment > plan.target_depth)
    throw InvalidPolicy("depth increment exceeds the target depth");
  const double speed = policy.cutting_speed.value_or(plan.cutting_speed);
  std::vector<PassSpec> specs;
  for (double d : pass_depths(plan.target_depth, policy.depth_increment)) specs.push_back({d, speed});
  return plan_passes(plan, specs, policy);
}

Timeline nominal_timeline(const CutSequence& seq) {
  Timeline tl;
  for (const auto& seg : seq.segments()) {
    const double d = seg.duration();
    tl.segment_durations.push_back(d);
    tl.total_time += d;
    if (seg.kind == SegmentKind::Insert || seg.kind == SegmentKind::Cut) tl.total_active_time += d;
    if (seg.kind == SegmentKind::Cut) tl.cutting_time += d;
  }
  return tl;
}

metrics::TrajectoryRecording sample_sequence(const CutSequence& seq, double rate_hz) {
  if (!finite_positive(rate_hz)) throw InvalidArgument("sample rate must be positive");
  std::vector<metrics::TrajectorySample> out;
  double t0 = 0.0;
  for (const auto& seg : seq.segments()) {
    const double duration = seg.duration();
    if (!(duration > 0.0)) continue;
    const auto count =
        static_cast<std::size_t>(std::max(2.0, std::ceil(duration * rate_hz * (1.0 - 1e-12))));
    std::size_t first = 0;
    if (!out.empty()) {
      out.back().tool_active = out.back().tool_active || seg.tool_active;
      first = 1;
    }
    for (std::size_t i = first; i < count; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(count - 1);
      out.push_back({t0 + duration * u, seg.start + u * (seg.end - seg.start), seg.tool_active});
    }
    t0 += duration;
  }
  return metrics::TrajectoryRecording(std::move(out));
}

}  // namespace osteonav::planner
