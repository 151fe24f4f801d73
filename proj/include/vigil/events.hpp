#pragma once

#include "vigil/recording.hpp"
#include "vigil/separation.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <span>
#include <string_view>
#include <vector>

namespace vigil {

struct WaveletConfig {
  double scale = 8.0;  // in samples
  double sigma = 1.0;
  // Used only when auto_thresholds is false; requires theta_h > theta_l >= 0.
  double theta_h = 0.0;
  double theta_l = 0.0;
  bool auto_thresholds = true;
};

enum class PeakSymbol { Neg = 0, Pos = 1 };

struct PeakCode {
  PeakSymbol symbol = PeakSymbol::Pos;
  Eigen::Index time_idx = 0;
  double magnitude = 0.0;
  // Samples where |coefficient| stays above theta_l around the peak.
  Eigen::Index extent_start = 0;
  Eigen::Index extent_end = 0;
};

enum class EyeEventKind { Blink, Saccade };

std::string_view to_string(EyeEventKind kind);
EyeEventKind parse_eye_event_kind(std::string_view text);

struct EyeEvent {
  EyeEventKind kind = EyeEventKind::Blink;
  Eigen::Index start_idx = 0;
  Eigen::Index peak_idx = 0;
  Eigen::Index end_idx = 0;
  double amplitude = 0.0;  // microvolts
  double duration_s = 0.0;
};

// Same event expressed on an absolute time axis.
struct TimedEyeEvent {
  EyeEventKind kind = EyeEventKind::Blink;
  double start_s = 0.0;
  double peak_s = 0.0;
  double end_s = 0.0;
  double amplitude_uv = 0.0;
  double duration_s = 0.0;
};

struct Thresholds {
  double high = 0.0;
  double low = 0.0;
};

struct EventConstraints {
  double max_blink_s = 0.5;       // outer NEG to outer NEG
  double min_outer_ratio = 1.0 / 3.0;
  double max_outer_ratio = 3.0;
  double max_segment_s = 1.0;     // extent of the whole pattern
  double max_saccade_s = 0.3;     // between the two peaks
  // Mean |slope| of the coefficients between consecutive peaks must reach
  // slope_min * theta_l / scale per sample.
  double slope_min = 0.5;
  double min_template_corr = 0.6;
};

// Mother wavelet: 2/(sqrt(3 sigma) pi^(1/4)) (1 - t^2/sigma^2) exp(-t^2 / (2 sigma^2)).
double mexican_hat(double t, double sigma);
// Sampled, dilated kernel (zero mean, unit L2 norm), support +-8 sigma scale.
Signal mexican_hat_kernel(double scale, double sigma);

Signal cwt_mexican_hat(const Signal& signal, const WaveletConfig& cfg);

// theta_l = 3 * MAD / 0.6745, theta_h = 2 * theta_l.
Thresholds auto_thresholds(const Signal& coeffs);
Thresholds resolve_thresholds(const Signal& coeffs, const WaveletConfig& cfg);

std::vector<PeakCode> encode_peaks(const Signal& coeffs, const Thresholds& thresholds);

// Shared context for the pattern rules.
struct DetectionInput {
  std::span<const PeakCode> codes;
  const Signal* signal = nullptr;
  double sample_rate_hz = 0.0;
  double theta_l = 0.0;
  double scale = 8.0;
};

std::vector<EyeEvent> detect_blinks(const DetectionInput& input, const EventConstraints& constraints = {});
std::vector<EyeEvent> detect_saccades(const DetectionInput& input, const EventConstraints& constraints = {});

inline constexpr double kDefaultDetectionRateHz = 125.0;

// Anti-aliased downsampling of both channels to the rate the wavelet scale is
// tuned for. A pair already at that rate is returned unchanged.
EogPair to_detection_rate(const EogPair& eog, double rate_hz = kDefaultDetectionRateHz);

// Full chain on a separated pair: blinks from VEO, saccades from HEO. The
// merged list is ordered by start; saccades overlapping a blink are dropped.
std::vector<EyeEvent> detect_eye_events(const EogPair& eog, const WaveletConfig& cfg = {},
                                        const EventConstraints& constraints = {});

std::vector<TimedEyeEvent> to_timed(std::span<const EyeEvent> events, double sample_rate_hz, double t0_s = 0.0);

// JSON lines: {"kind","start_s","peak_s","end_s","amplitude_uv","duration_s"}.
// An optional first line {"meta": {...}} carries provenance; readers skip it.
void write_events_jsonl(const std::filesystem::path& path, std::span<const TimedEyeEvent> events,
                        const std::map<std::string, std::string>& meta = {});
std::vector<TimedEyeEvent> read_events_jsonl(const std::filesystem::path& path);

}  // namespace vigil
