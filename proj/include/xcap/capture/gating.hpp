#pragma once

#include <string_view>

#include "xcap/model/types.hpp"

namespace xcap::capture {

struct DepthGate {
  double min_m = 0.08;
  double max_m = 0.13;
};

void validate(const DepthGate& gate);

enum class DepthStatus { TooClose, InRange, TooFar, Invalid };

std::string_view to_string(DepthStatus s);

/// Classifies the frame's center depth against [min_m, max_m] (inclusive).
DepthStatus depth_gate_check(const model::RgbdFrame& frame, const DepthGate& gate);

struct AngleMatch {
  bool matched = false;
  double angle_deg = 0.0;
};

/// Angle between the two gravity directions.
AngleMatch angle_match(const model::AccelPose& current, const model::AccelPose& reference,
                       double tol_deg);

}  // namespace xcap::capture
