#pragma once

#include "vigil/models.hpp"

#include <filesystem>
#include <string>

namespace vigil {

// Single JSON document; parameter arrays are base64 little-endian float64.
std::string bundle_to_json(const TrainedModel& model, const std::string& config_hash = {});
TrainedModel bundle_from_json(const std::string& text);

void save_bundle(const std::filesystem::path& path, const TrainedModel& model, const std::string& config_hash = {});
TrainedModel load_bundle(const std::filesystem::path& path);

}  // namespace vigil
