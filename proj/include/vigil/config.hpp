#pragma once

#include "vigil/eeg.hpp"
#include "vigil/models.hpp"
#include "vigil/separation.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vigil {

// Modalities: eog, eeg-forehead, eeg-temporal, eeg-posterior, and
// fusion-<site> = eog followed by eeg-<site> columns.
bool is_valid_modality(const std::string& name);

struct ExperimentConfig {
  // Inputs. Without a forehead recording a synthetic session is generated.
  std::filesystem::path forehead;  // recording with channels ch4..ch7
  std::filesystem::path gaze;      // JSON-lines gaze stream
  std::filesystem::path labels;    // or a PERCLOS table, one row per window
  std::filesystem::path temporal;
  std::filesystem::path posterior;
  double synthetic_duration_s = 1800.0;

  SeparationMethod separation = SeparationMethod::IcaMinus;
  Banding banding = Banding::TwoHz;
  double detection_rate_hz = 125.0;
  double eeg_rate_hz = 200.0;
  double window_s = 8.0;

  std::vector<std::string> modalities{"eog", "eeg-forehead", "fusion-forehead"};
  std::vector<ModelKind> models{ModelKind::Svr, ModelKind::Ccnf};
  ModelOptions model;

  std::uint64_t seed = 7;
  int jobs = 0;  // 0 = OpenMP default
  std::filesystem::path out_dir = "vigil-out";

  // Flat `section.key` view of every setting, in a fixed order.
  std::map<std::string, std::string> entries;
};

// Reads `key = value` lines grouped under `[section]` headers, then applies
// `section.key=value` overrides. Unknown keys and malformed values are
// InvalidConfig errors.
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
ExperimentConfig config_from_entries(const std::map<std::string, std::string>& entries);
ExperimentConfig default_config();

// Canonical `section.key = value` text of all settings and its SHA-256.
std::string canonical_text(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

}  // namespace vigil
