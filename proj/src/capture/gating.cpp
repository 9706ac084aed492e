#include "xcap/capture/gating.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "xcap/error.hpp"

namespace xcap::capture {

void validate(const DepthGate& gate) {
  if (!(gate.min_m > 0.0 && gate.min_m < gate.max_m))
    throw ArgumentError("depth gate: require 0 < min < max");
}

std::string_view to_string(DepthStatus s) {
  switch (s) {
    case DepthStatus::TooClose: return "TooClose";
    case DepthStatus::InRange: return "InRange";
    case DepthStatus::TooFar: return "TooFar";
    case DepthStatus::Invalid: return "Invalid";
  }
  return "Invalid";
}

DepthStatus depth_gate_check(const model::RgbdFrame& frame, const DepthGate& gate) {
  if (!frame.center_depth_m) return DepthStatus::Invalid;
  const double d = *frame.center_depth_m;
  if (d < gate.min_m) return DepthStatus::TooClose;
  if (d > gate.max_m) return DepthStatus::TooFar;
  return DepthStatus::InRange;
}

AngleMatch angle_match(const model::AccelPose& current, const model::AccelPose& reference,
                       double tol_deg) {
  const double c = std::clamp(current.gravity_dir.dot(reference.gravity_dir), -1.0, 1.0);
  const double angle = std::acos(c) * 180.0 / std::numbers::pi;
  return {angle <= tol_deg, angle};
}

}  // namespace xcap::capture
