#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xcap/image.hpp"

namespace xcap::bridge {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

enum class MessageType {
  // daemon -> UI
  Hello,
  StateUpdate,
  RgbFrame,
  DepthFrame,
  TactileFrame,
  ForceReading,
  AccelReading,
  SpectrogramFrame,
  HammerImpulse,
  AudioStatus,
  Error,
  // UI -> daemon
  SnapshotRgbd,
  BeginTactile,
  ArmHammer,
  Retake,
  NextPoint,
  SetLabel,
  SetEnvironment,
  SetConfig,
};

std::string_view to_string(MessageType t);
std::optional<MessageType> message_type_from_string(std::string_view name);
bool is_command(MessageType t);
/// High-rate streams that a slow viewer may lose.
bool is_telemetry(MessageType t);

struct WireMessage {
  MessageType type = MessageType::Hello;
  std::uint64_t seq = 0;
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const WireMessage&) const = default;
};

nlohmann::json to_json(const WireMessage& m);
/// Throws ParseError on unknown type, missing fields or a non-object payload.
WireMessage from_json(const nlohmann::json& j);

/// 4-byte big-endian length, then the UTF-8 JSON text.
std::vector<std::uint8_t> encode_frame(const WireMessage& m);

/// Incremental decoder for a byte stream of frames.
class FrameDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  /// Next complete message, if any. Throws ParseError on a bad frame.
  std::optional<WireMessage> next();
  [[nodiscard]] std::size_t buffered() const { return buf_.size(); }

 private:
  std::vector<std::uint8_t> buf_;
};

// Payload helpers.
nlohmann::json image_payload(const RgbImage& img, std::int64_t timestamp_ns);
nlohmann::json image_payload(const DepthImage& img, std::int64_t timestamp_ns);
RgbImage rgb_from_payload(const nlohmann::json& p);
DepthImage depth_from_payload(const nlohmann::json& p);
/// Little-endian float32 samples, base64.
std::string encode_floats(std::span<const float> v);
std::vector<float> decode_floats(std::string_view b64);

}  // namespace xcap::bridge
