#pragma once

#include <filesystem>

#include "json.hpp"
#include "xcap/capture/session.hpp"

namespace xcap::capture {

/// Missing keys keep their defaults; the result is validated.
SessionConfig session_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionConfig& cfg);
SessionConfig load_session_config(const std::filesystem::path& path);

}  // namespace xcap::capture
