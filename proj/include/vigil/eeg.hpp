#pragma once

#include "vigil/recording.hpp"
#include "vigil/separation.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vigil {

struct IcaDenoiseReport {
  Matrix unmixing;
  Matrix mixing_inverse;
  std::set<int> eog_component_indices;
  std::set<int> retained_indices;
  int iterations = 0;
  double final_delta = 0.0;
};

enum class Banding { FiveBand, TwoHz };

std::string_view to_string(Banding banding);
Banding parse_banding(std::string_view text);

// delta 1-4, theta 4-8, alpha 8-14, beta 14-31, gamma 31-50 Hz.
const std::vector<Band>& five_bands();
// [1,2), [2,4), ..., [48,50): 25 bins spanning 1-50 Hz.
const std::vector<Band>& two_hz_bins();
const std::vector<Band>& bands_for(Banding banding);
std::vector<std::string> band_labels(Banding banding);

struct DeFeatureVector {
  std::vector<double> values;  // channel-major: values[c * bands + b]
  Banding banding = Banding::FiveBand;
  double window_start_s = 0.0;
};

struct FlagOptions {
  double min_abs_corr = 0.5;
  std::size_t max_components = 2;
};

// Components whose |corr| with the VEO or HEO template reaches the
// threshold; at most `max_components`, strongest first.
std::set<int> flag_eog_components(const Matrix& components, const EogPair& templates, const FlagOptions& options = {});

// X = [ch4; ch5; -ch6; ch7] -> FastICA -> zero flagged rows -> W^-1 * U~.
// Rows of the result follow X (the third row is the negated channel 6).
struct ForeheadEeg {
  MultichannelRecording eeg;
  IcaDenoiseReport report;
};
ForeheadEeg reconstruct_forehead_eeg(const ForeheadQuad& quad, std::uint64_t seed, const FlagOptions& flag = {},
                                     const FastIcaOptions& ica = {});
// Reconstruction with an explicit set of components to remove.
Matrix reconstruct_without(const UnmixingResult& ica, const std::set<int>& removed);

// 0.5 * ln(2 pi e variance), in nats.
double differential_entropy(double variance);

struct PreprocessOptions {
  Band band{1.0, 75.0};
  double target_rate_hz = 200.0;
};
// Band-pass then downsample.
MultichannelRecording preprocess_eeg(const MultichannelRecording& rec, const PreprocessOptions& options = {});

// One vector per 8 s (by default) non-overlapping window.
std::vector<DeFeatureVector> extract_de_features(const MultichannelRecording& rec, Banding banding,
                                                 const WindowSpec& windows = {});

// Column names `<chan>_<band>` matching DeFeatureVector::values order.
std::vector<std::string> de_feature_names(const std::vector<std::string>& channels, Banding banding);

// Channel presets for the recording sites.
const std::vector<std::string>& site_channels(std::string_view site);

}  // namespace vigil
