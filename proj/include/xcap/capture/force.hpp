#pragma once

#include <Eigen/Core>

#include "xcap/model/types.hpp"

namespace xcap::capture {

inline constexpr double kStandardGravity = 9.80665;

struct ForceCalibration {
  double scale_n_per_count = 0.01;
  double tare_counts = 0.0;
  double m_eff_kg = 0.0;  // effective axial mass of the tactile assembly
  Eigen::Vector3d sensor_axis = Eigen::Vector3d::UnitZ();  // pressing axis, device frame
};

/// Throws CalibrationError unless scale > 0 and m_eff >= 0.
void validate(const ForceCalibration& calib);

/// scale * (counts - tare)
double counts_to_newtons(double counts, const ForceCalibration& calib);

/// Weight of the tactile assembly projected on the pressing axis.
double gravity_bias(const model::AccelPose& pose, const ForceCalibration& calib);

/// Load-cell force with the assembly's own weight removed for the current
/// device orientation.
double contact_force(double counts, const model::AccelPose& pose, const ForceCalibration& calib);

/// Tare from a no-contact reading with the pressing axis horizontal, m_eff
/// from a second no-contact reading with the axis pointing straight down.
ForceCalibration calibrate_two_pose(double counts_horizontal, double counts_vertical,
                                    double scale_n_per_count);

}  // namespace xcap::capture
