#include "xcap/bridge/wire.hpp"

#include <array>
#include <bit>

#include "xcap/error.hpp"
#include "xcap/model/codec.hpp"

namespace xcap::bridge {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<MessageType, std::string_view>, 19> kTypeNames{{
    {MessageType::Hello, "Hello"},
    {MessageType::StateUpdate, "StateUpdate"},
    {MessageType::RgbFrame, "RgbFrame"},
    {MessageType::DepthFrame, "DepthFrame"},
    {MessageType::TactileFrame, "TactileFrame"},
    {MessageType::ForceReading, "ForceReading"},
    {MessageType::AccelReading, "AccelReading"},
    {MessageType::SpectrogramFrame, "SpectrogramFrame"},
    {MessageType::HammerImpulse, "HammerImpulse"},
    {MessageType::AudioStatus, "AudioStatus"},
    {MessageType::Error, "Error"},
    {MessageType::SnapshotRgbd, "SnapshotRgbd"},
    {MessageType::BeginTactile, "BeginTactile"},
    {MessageType::ArmHammer, "ArmHammer"},
    {MessageType::Retake, "Retake"},
    {MessageType::NextPoint, "NextPoint"},
    {MessageType::SetLabel, "SetLabel"},
    {MessageType::SetEnvironment, "SetEnvironment"},
    {MessageType::SetConfig, "SetConfig"},
}};

}  // namespace

std::string_view to_string(MessageType t) {
  for (const auto& [k, n] : kTypeNames)
    if (k == t) return n;
  return "Error";
}

std::optional<MessageType> message_type_from_string(std::string_view name) {
  for (const auto& [k, n] : kTypeNames)
    if (n == name) return k;
  return std::nullopt;
}

bool is_command(MessageType t) { return static_cast<int>(t) >= static_cast<int>(MessageType::SnapshotRgbd); }

bool is_telemetry(MessageType t) {
  switch (t) {
    case MessageType::RgbFrame:
    case MessageType::DepthFrame:
    case MessageType::TactileFrame:
    case MessageType::ForceReading:
    case MessageType::AccelReading:
      return true;
    default:
      return false;
  }
}

json to_json(const WireMessage& m) {
  return {{"type", std::string(to_string(m.type))}, {"seq", m.seq}, {"payload", m.payload}};
}

WireMessage from_json(const json& j) {
  if (!j.is_object()) throw ParseError("message: not a JSON object");
  WireMessage m;
  try {
    const auto type = message_type_from_string(j.at("type").get<std::string>());
    if (!type) throw ParseError("message: unknown type " + j.at("type").dump());
    m.type = *type;
    if (!j.at("seq").is_number_unsigned()) throw ParseError("message: seq must be a non-negative integer");
    m.seq = j.at("seq").get<std::uint64_t>();
    m.payload = j.value("payload", json::object());
  } catch (const json::exception& e) {
    throw ParseError(std::string("message: ") + e.what());
  }
  if (!m.payload.is_object()) throw ParseError("message: payload must be an object");
  return m;
}

std::vector<std::uint8_t> encode_frame(const WireMessage& m) {
  const std::string text = to_json(m).dump();
  if (text.size() > kMaxFrameBytes) throw ArgumentError("message exceeds the maximum frame size");
  const auto n = static_cast<std::uint32_t>(text.size());
  std::vector<std::uint8_t> out{static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
                                static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)};
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

std::optional<WireMessage> FrameDecoder::next() {
  if (buf_.size() < 4) return std::nullopt;
  const std::uint32_t n = (std::uint32_t{buf_[0]} << 24) | (std::uint32_t{buf_[1]} << 16) |
                          (std::uint32_t{buf_[2]} << 8) | std::uint32_t{buf_[3]};
  if (n > kMaxFrameBytes) throw ParseError("frame length exceeds limit");
  if (buf_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  const std::string text(buf_.begin() + 4, buf_.begin() + 4 + n);
  buf_.erase(buf_.begin(), buf_.begin() + 4 + n);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("frame: invalid JSON: ") + e.what());
  }
  return from_json(j);
}

json image_payload(const RgbImage& img, std::int64_t timestamp_ns) {
  return {{"width", img.width},
          {"height", img.height},
          {"timestamp_ns", timestamp_ns},
          {"png", model::base64_encode(model::encode_png(img))}};
}

json image_payload(const DepthImage& img, std::int64_t timestamp_ns) {
  return {{"width", img.width},
          {"height", img.height},
          {"timestamp_ns", timestamp_ns},
          {"unit", "mm"},
          {"png", model::base64_encode(model::encode_png(img))}};
}

RgbImage rgb_from_payload(const json& p) {
  try {
    return model::decode_png_rgb(model::base64_decode(p.at("png").get<std::string>()));
  } catch (const json::exception& e) {
    throw ParseError(std::string("image payload: ") + e.what());
  }
}

DepthImage depth_from_payload(const json& p) {
  try {
    return model::decode_png_depth(model::base64_decode(p.at("png").get<std::string>()));
  } catch (const json::exception& e) {
    throw ParseError(std::string("image payload: ") + e.what());
  }
}

std::string encode_floats(std::span<const float> v) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(v.size() * 4);
  for (float x : v) {
    const auto u = std::bit_cast<std::uint32_t>(x);
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(u >> (8 * b)));
  }
  return model::base64_encode(bytes);
}

std::vector<float> decode_floats(std::string_view b64) {
  const auto bytes = model::base64_decode(b64);
  if (bytes.size() % 4 != 0) throw ParseError("float payload: length not a multiple of 4");
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= std::uint32_t{bytes[i * 4 + static_cast<std::size_t>(b)]} << (8 * b);
    out[i] = std::bit_cast<float>(u);
  }
  return out;
}

}  // namespace xcap::bridge
