#pragma once

#include "vigil/config.hpp"
#include "vigil/eval.hpp"
#include "vigil/events.hpp"
#include "vigil/features.hpp"
#include "vigil/labels.hpp"
#include "vigil/separation.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vigil {

struct SessionInputs {
  ForeheadQuad quad;
  std::optional<MultichannelRecording> temporal;
  std::optional<MultichannelRecording> posterior;
  std::vector<GazeEvent> gaze;
  std::vector<VigilanceLabel> labels;  // given labels replace the gaze stream
  double duration_s = 0.0;
  bool synthetic = false;
};

// Reads the configured recordings, or generates a synthetic session from the
// run seed when no forehead recording is given.
SessionInputs load_inputs(const ExperimentConfig& config);

struct PreparedData {
  std::size_t windows = 0;
  std::vector<VigilanceLabel> labels;
  std::vector<TimedEyeEvent> events;
  SeparationReport separation;
  std::map<std::string, FeatureTable> tables;  // by modality
};

// separate -> detect -> EOG features; forehead EEG reconstruction and site
// EEG -> DE features; gaze -> PERCLOS; fusion tables. Only the inputs the
// configured modalities need are computed.
PreparedData prepare(const ExperimentConfig& config, const SessionInputs& inputs);

struct ExperimentResult {
  PreparedData data;
  std::vector<Eigen::Index> session_lengths;
  std::vector<FoldReport> reports;
  std::string report_json;
};

// Runs five_fold for every (modality, model) pair. With `write_outputs`,
// writes report.json, labels, feature tables and prediction CSVs into the
// output directory. Stage failures are rethrown with the stage name.
ExperimentResult run_experiment(const ExperimentConfig& config, bool write_outputs = true);

// Header lines embedded in every CSV output.
std::vector<std::string> provenance_comments(const std::string& config_hash);

}  // namespace vigil
