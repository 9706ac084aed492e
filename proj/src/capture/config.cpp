#include "xcap/capture/config.hpp"

#include "xcap/error.hpp"
#include "xcap/model/codec.hpp"

namespace xcap::capture {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

SessionConfig session_config_from_json(const json& j) {
  SessionConfig c;
  if (!j.is_object()) throw ParseError("session config: expected an object");
  try {
    if (j.contains("trigger")) {
      const auto& t = j.at("trigger");
      read(t, "targets_n", c.trigger.targets_n);
      read(t, "window_n", c.trigger.window_n);
      read(t, "debounce_samples", c.trigger.debounce_samples);
    }
    if (j.contains("depth_gate")) {
      read(j.at("depth_gate"), "min_m", c.depth_gate.min_m);
      read(j.at("depth_gate"), "max_m", c.depth_gate.max_m);
    }
    if (j.contains("hammer")) {
      const auto& h = j.at("hammer");
      read(h, "release_delay_s", c.hammer.release_delay_s);
      read(h, "record_pre_s", c.hammer.record_pre_s);
      read(h, "record_post_s", c.hammer.record_post_s);
      read(h, "pull_timeout_s", c.hammer.pull_timeout_s);
      read(h, "impact_timeout_s", c.hammer.impact_timeout_s);
      read(h, "impact_threshold", c.hammer.impact_threshold);
      read(h, "noise_window_samples", c.hammer.noise_window_samples);
      read(h, "min_noise_floor", c.hammer.min_noise_floor);
    }
    if (j.contains("calibration")) {
      const auto& k = j.at("calibration");
      read(k, "scale_n_per_count", c.calibration.scale_n_per_count);
      read(k, "tare_counts", c.calibration.tare_counts);
      read(k, "m_eff_kg", c.calibration.m_eff_kg);
    }
    read(j, "angle_tolerance_deg", c.angle_tolerance_deg);
    read(j, "contact_threshold_n", c.contact_threshold_n);
    read(j, "accel_rate_hz", c.accel_rate_hz);
    read(j, "tick_rate_hz", c.tick_rate_hz);
  } catch (const json::exception& e) {
    throw ParseError(std::string("session config: ") + e.what());
  }
  validate(c);
  return c;
}

json to_json(const SessionConfig& c) {
  return {
      {"trigger",
       {{"targets_n", c.trigger.targets_n},
        {"window_n", c.trigger.window_n},
        {"debounce_samples", c.trigger.debounce_samples}}},
      {"depth_gate", {{"min_m", c.depth_gate.min_m}, {"max_m", c.depth_gate.max_m}}},
      {"hammer",
       {{"release_delay_s", c.hammer.release_delay_s},
        {"record_pre_s", c.hammer.record_pre_s},
        {"record_post_s", c.hammer.record_post_s},
        {"pull_timeout_s", c.hammer.pull_timeout_s},
        {"impact_timeout_s", c.hammer.impact_timeout_s},
        {"impact_threshold", c.hammer.impact_threshold},
        {"noise_window_samples", c.hammer.noise_window_samples},
        {"min_noise_floor", c.hammer.min_noise_floor}}},
      {"calibration",
       {{"scale_n_per_count", c.calibration.scale_n_per_count},
        {"tare_counts", c.calibration.tare_counts},
        {"m_eff_kg", c.calibration.m_eff_kg}}},
      {"angle_tolerance_deg", c.angle_tolerance_deg},
      {"contact_threshold_n", c.contact_threshold_n},
      {"accel_rate_hz", c.accel_rate_hz},
      {"tick_rate_hz", c.tick_rate_hz},
  };
}

SessionConfig load_session_config(const std::filesystem::path& path) {
  try {
    return session_config_from_json(json::parse(model::read_text(path)));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace xcap::capture
