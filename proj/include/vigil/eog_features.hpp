#pragma once

#include "vigil/events.hpp"

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vigil {

inline constexpr std::size_t kEogFeatureCount = 36;
inline constexpr std::string_view kEogManifestVersion = "eog36-v1";

// Frozen column order: 13 blink, 13 saccade, 10 duration ("fixation") features.
const std::array<std::string_view, kEogFeatureCount>& eog_feature_manifest();

struct EogFeatureVector {
  std::array<double, kEogFeatureCount> values{};
  double window_start_s = 0.0;
};

struct EogFeatureOptions {
  double sub_bin_s = 1.0;   // rate sub-bin width
  int variance_span = 3;    // sub-bins per local-variance span
};

// Events are assigned to the window by peak time, t0 <= peak < t1. Rates are
// events/second per sub-bin; every "variance" feature is a local population
// variance over sliding spans of consecutive sub-bins, summarised by its mean
// and maximum across spans. Power = sum of squared amplitudes, mean power =
// power / count. Empty groups yield zeros.
EogFeatureVector extract_eog_features(std::span<const TimedEyeEvent> events, double t0_s, double t1_s,
                                      const EogFeatureOptions& options = {});

// One vector per window of the grid [k*length, (k+1)*length), k < windows.
std::vector<EogFeatureVector> extract_eog_feature_series(std::span<const TimedEyeEvent> events, double window_s,
                                                         std::size_t windows, double t0_s = 0.0,
                                                         const EogFeatureOptions& options = {});

}  // namespace vigil
