#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "dyscreen/forest.hpp"

namespace dyscreen {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const ForestModel& model);
/// Throws ModelFormatError (version mismatch, missing fields, bad tree shape).
ForestModel model_from_json(const nlohmann::json& doc);

/// Canonical bytes: same model, same bytes.
std::string serialize_model(const ForestModel& model);
/// Throws ModelFormatError on truncated/corrupt payloads and version mismatches.
ForestModel deserialize_model(std::string_view bytes);

ForestModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const ForestModel& model);

}  // namespace dyscreen
