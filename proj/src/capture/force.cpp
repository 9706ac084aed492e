#include "xcap/capture/force.hpp"

#include "xcap/error.hpp"

namespace xcap::capture {

void validate(const ForceCalibration& calib) {
  if (!(calib.scale_n_per_count > 0.0)) throw CalibrationError("force calibration: scale must be positive");
  if (!(calib.m_eff_kg >= 0.0)) throw CalibrationError("force calibration: m_eff must be >= 0");
}

double counts_to_newtons(double counts, const ForceCalibration& calib) {
  return calib.scale_n_per_count * (counts - calib.tare_counts);
}

double gravity_bias(const model::AccelPose& pose, const ForceCalibration& calib) {
  return calib.m_eff_kg * kStandardGravity * pose.gravity_dir.dot(calib.sensor_axis);
}

double contact_force(double counts, const model::AccelPose& pose, const ForceCalibration& calib) {
  return counts_to_newtons(counts, calib) - gravity_bias(pose, calib);
}

ForceCalibration calibrate_two_pose(double counts_horizontal, double counts_vertical,
                                    double scale_n_per_count) {
  if (!(scale_n_per_count > 0.0)) throw CalibrationError("calibration: scale must be positive");
  if (counts_vertical < counts_horizontal)
    throw CalibrationError("calibration: vertical reading below horizontal reading (non-physical)");
  ForceCalibration c;
  c.scale_n_per_count = scale_n_per_count;
  c.tare_counts = counts_horizontal;
  c.m_eff_kg = scale_n_per_count * (counts_vertical - counts_horizontal) / kStandardGravity;
  return c;
}

}  // namespace xcap::capture
