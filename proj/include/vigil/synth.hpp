#pragma once

#include "vigil/events.hpp"
#include "vigil/labels.hpp"
#include "vigil/recording.hpp"
#include "vigil/separation.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace vigil::synth {

// Mixing weights of the vertical (V) and horizontal (H) eye sources into
// forehead channels 4..7.
struct EogMixing {
  double v4 = 1.0, h4 = 0.1;
  double v5 = 0.6, h5 = 0.5;
  double v6 = 0.55, h6 = -0.5;
  double v7 = 0.1, h7 = 0.45;
};

struct SynthConfig {
  double duration_s = 1800.0;
  double sample_rate_hz = 200.0;
  std::uint64_t seed = 7;
  double window_s = 8.0;

  // Latent vigilance: reflected Gaussian random walk on knots, cosine
  // interpolated between them. 0 = alert, 1 = drowsy.
  double knot_spacing_s = 150.0;
  double walk_step = 0.3;
  // Per-window jitter of the vigilance seen by the eyes, and the amplitude of
  // a slow drift seen only by the EEG.
  double eye_jitter = 0.04;
  double eeg_drift = 0.1;

  // Eye behaviour as functions of vigilance v in [0, 1].
  double blink_rate_alert = 0.2, blink_rate_drowsy = 0.5;        // per second
  double blink_dur_alert = 0.18, blink_dur_drowsy = 0.35;        // seconds
  double saccade_rate_alert = 0.75, saccade_rate_drowsy = 0.15;  // per second
  double saccade_dur_s = 0.05;
  double max_perclos = 0.9;
  double min_event_gap_s = 0.45;

  double blink_amp_uv = 120.0;
  double saccade_amp_min_uv = 40.0, saccade_amp_max_uv = 100.0;
  double gaze_range_uv = 120.0;

  // EEG: log band variances at v = 0.5 and their slopes per unit v, scaled by
  // the site gain. The posterior site still carries the most information
  // because it has 12 channels against the forehead's 4.
  std::vector<double> band_log_var{2.5, 2.0, 2.2, 1.5, 1.0};
  std::vector<double> band_slope{0.2, 1.0, 1.2, -0.2, -1.0};
  double posterior_gain = 1.0, temporal_gain = 0.7, forehead_gain = 1.0;
  // Amplitude factor on forehead EEG relative to the scalp sites.
  double forehead_eeg_scale = 0.3;
  double eeg_noise_uv = 1.0;
  double channel_noise_uv = 1.0;
  EogMixing mixing;
  // Skip the posterior and temporal recordings (left empty) when only the
  // forehead is needed. Each site draws from its own stream, so the forehead
  // output does not depend on this flag.
  bool scalp_sites = true;
};

void validate(const SynthConfig& config);

struct SynthSession {
  ForeheadQuad quad;
  MultichannelRecording posterior;
  MultichannelRecording temporal;
  std::vector<GazeEvent> gaze;
  std::vector<double> truth_perclos;  // one per window
  std::vector<double> vigilance;      // latent value at each window centre
  std::vector<TimedEyeEvent> truth_events;
  Signal veo_source;  // clean V and H sources at the session rate
  Signal heo_source;

  std::size_t windows() const { return truth_perclos.size(); }
};

SynthSession generate(const SynthConfig& config);

// Eye-movement test suite: a clean EOG pair with a fixed number of events
// plus white noise at the acquisition rate. SNR is per channel: variance of
// the clean channel over the whole record divided by the noise variance.
struct EyeSuiteConfig {
  double duration_s = 600.0;
  double sample_rate_hz = 1000.0;
  int blinks = 50;
  int saccades = 30;
  double snr_db = 10.0;
  std::uint64_t seed = 1;
  double blink_dur_min_s = 0.2, blink_dur_max_s = 0.32;
  double blink_amp_min_uv = 80.0, blink_amp_max_uv = 160.0;
  double saccade_amp_min_uv = 40.0, saccade_amp_max_uv = 100.0;
  double saccade_dur_s = 0.05;
  double gaze_range_uv = 100.0;
};

struct EyeSuite {
  EogPair eog;
  Signal clean_veo;
  Signal clean_heo;
  std::vector<TimedEyeEvent> truth;
  double veo_noise_sigma = 0.0;
  double heo_noise_sigma = 0.0;
};

EyeSuite generate_eye_suite(const EyeSuiteConfig& config);

struct MatchCounts {
  int true_positives = 0;
  int detected = 0;
  int truth = 0;
  double precision() const { return detected == 0 ? 0.0 : static_cast<double>(true_positives) / detected; }
  double recall() const { return truth == 0 ? 0.0 : static_cast<double>(true_positives) / truth; }
};

// One-to-one matching of detected to true events of `kind`: a detection
// matches when its peak falls inside the true event extended by
// `tolerance_s` on both sides.
MatchCounts match_events(std::span<const TimedEyeEvent> detected, std::span<const TimedEyeEvent> truth,
                         EyeEventKind kind, double tolerance_s = 0.1);

// Shapes shared by the generators.
double blink_pulse(double u);  // u in [0, 1]; asymmetric raised cosine, peak at u = 0.4
double step_ramp(double u);    // u in [0, 1]; half-cosine from 0 to 1

}  // namespace vigil::synth
