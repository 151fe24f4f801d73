#pragma once

#include "vigil/recording.hpp"

#include <span>
#include <vector>

namespace vigil::dsp {

// Squared-magnitude response of an order-8 Butterworth band-pass, applied in
// the frequency domain after odd-reflection padding. Equivalent to a
// forward-backward (zero-phase) IIR pass without its start-up transients.
inline constexpr int kButterworthOrder = 8;

double bandpass_gain(double freq_hz, const Band& band);

MultichannelRecording bandpass(const MultichannelRecording& rec, const Band& band);
Signal bandpass(const Signal& x, double sample_rate_hz, const Band& band);

// Windowed-sinc interpolation with an anti-alias cutoff at 0.9 x the target
// Nyquist. target == source returns an exact copy.
MultichannelRecording resample(const MultichannelRecording& rec, double target_hz);
Signal resample(const Signal& x, double source_hz, double target_hz);

// Consecutive windows; trailing partial windows are dropped. Each window
// carries its absolute start time.
std::vector<MultichannelRecording> partition_windows(const MultichannelRecording& rec,
                                                     const WindowSpec& spec = {});
// Start sample of every window partition_windows would produce.
std::vector<Eigen::Index> window_starts(Eigen::Index length, double sample_rate_hz,
                                        const WindowSpec& spec = {});

// Per-channel variance attributable to `band` (Hann periodogram, one-sided
// PSD integrated over the band).
Signal band_variance(const MultichannelRecording& window, const Band& band);
// [channels x bands] for a single window.
Matrix band_variances(const MultichannelRecording& window, std::span<const Band> bands);

}  // namespace vigil::dsp
