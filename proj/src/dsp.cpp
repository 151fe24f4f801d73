#include "vigil/dsp.hpp"

#include "vigil/error.hpp"
#include "vigil/fft.hpp"
#include "vigil/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vigil::dsp {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double blackman(double u) {
  // u in [-1, 1]
  if (std::abs(u) >= 1.0) return 0.0;
  const double t = std::numbers::pi * (u + 1.0);
  return 0.42 - 0.5 * std::cos(t) + 0.08 * std::cos(2.0 * t);
}

}  // namespace

double bandpass_gain(double freq_hz, const Band& band) {
  const double f = std::abs(freq_hz);
  const double n2 = 2.0 * kButterworthOrder;
  double gain = 1.0;
  if (band.low_hz > 0.0) {
    if (f == 0.0) return 0.0;
    gain *= 1.0 / (1.0 + std::pow(band.low_hz / f, n2));
  }
  gain *= 1.0 / (1.0 + std::pow(f / band.high_hz, n2));
  return gain;
}

Signal bandpass(const Signal& x, double sample_rate_hz, const Band& band) {
  validate(band, sample_rate_hz);
  const Eigen::Index n = x.size();
  if (n < 2) throw Error(ErrorCode::SignalTooShort, "cannot filter fewer than two samples");

  const double edge = band.low_hz > 0.0 ? band.low_hz : band.high_hz;
  const auto want = static_cast<Eigen::Index>(std::ceil(3.0 * sample_rate_hz / edge));
  const Eigen::Index pad = std::clamp<Eigen::Index>(want, 1, n - 1);

  // Odd reflection about the end samples keeps the padded signal continuous.
  std::vector<double> padded(static_cast<std::size_t>(n + 2 * pad));
  for (Eigen::Index i = 0; i < pad; ++i) padded[static_cast<std::size_t>(i)] = 2.0 * x[0] - x[pad - i];
  for (Eigen::Index i = 0; i < n; ++i) padded[static_cast<std::size_t>(pad + i)] = x[i];
  for (Eigen::Index i = 0; i < pad; ++i) padded[static_cast<std::size_t>(pad + n + i)] = 2.0 * x[n - 1] - x[n - 2 - i];

  const std::size_t nfft = fft::next_fast_size(padded.size());
  auto spectrum = fft::rfft(padded, nfft);
  const double df = sample_rate_hz / static_cast<double>(nfft);
  for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= bandpass_gain(static_cast<double>(k) * df, band);
  const auto filtered = fft::irfft(spectrum, nfft);

  Signal y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = filtered[static_cast<std::size_t>(pad + i)];
  return y;
}

MultichannelRecording bandpass(const MultichannelRecording& rec, const Band& band) {
  validate(rec);
  validate(band, rec.sample_rate_hz);
  MultichannelRecording out = rec;
  const Eigen::Index channels = rec.channels();
#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index c = 0; c < channels; ++c) {
    out.samples.row(c) = bandpass(Signal(rec.samples.row(c).transpose()), rec.sample_rate_hz, band).transpose();
  }
  return out;
}

Signal resample(const Signal& x, double source_hz, double target_hz) {
  if (!(target_hz > 0.0) || !(source_hz > 0.0)) throw Error(ErrorCode::InvalidConfig, "sample rates must be positive");
  if (target_hz > source_hz) {
    throw Error(ErrorCode::UpsampleUnsupported,
                "cannot resample " + std::to_string(source_hz) + " Hz up to " + std::to_string(target_hz) + " Hz");
  }
  if (target_hz == source_hz) return x;

  const double ratio = target_hz / source_hz;
  const double cutoff = 0.9 * ratio;  // relative to the source Nyquist
  const double half_width = std::ceil(16.0 / cutoff);
  const auto out_len = static_cast<Eigen::Index>(std::floor(static_cast<double>(x.size()) * ratio + 1e-9));
  const Eigen::Index n = x.size();

  Signal y(out_len);
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < out_len; ++k) {
    const double pos = static_cast<double>(k) / ratio;
    const auto first = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::ceil(pos - half_width)));
    const auto last = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(std::floor(pos + half_width)));
    double acc = 0.0;
    double norm = 0.0;
    for (Eigen::Index i = first; i <= last; ++i) {
      const double d = pos - static_cast<double>(i);
      const double w = cutoff * sinc(cutoff * d) * blackman(d / half_width);
      acc += w * x[i];
      norm += w;
    }
    y[k] = acc / norm;
  }
  return y;
}

MultichannelRecording resample(const MultichannelRecording& rec, double target_hz) {
  validate(rec);
  if (target_hz == rec.sample_rate_hz) return rec;
  MultichannelRecording out;
  out.channel_names = rec.channel_names;
  out.start_time_s = rec.start_time_s;
  out.sample_rate_hz = target_hz;
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    Signal r = resample(Signal(rec.samples.row(c).transpose()), rec.sample_rate_hz, target_hz);
    if (c == 0) out.samples.resize(rec.channels(), r.size());
    out.samples.row(c) = r.transpose();
  }
  if (rec.channels() == 0) out.samples.resize(0, 0);
  return out;
}

std::vector<Eigen::Index> window_starts(Eigen::Index length, double sample_rate_hz, const WindowSpec& spec) {
  if (!(spec.length_s > 0.0) || spec.overlap_s < 0.0 || !(spec.overlap_s < spec.length_s)) {
    throw Error(ErrorCode::InvalidConfig, "window length must be positive and overlap in [0, length)");
  }
  const auto win = static_cast<Eigen::Index>(std::llround(spec.length_s * sample_rate_hz));
  const auto hop = static_cast<Eigen::Index>(std::llround((spec.length_s - spec.overlap_s) * sample_rate_hz));
  if (win < 1 || hop < 1) throw Error(ErrorCode::InvalidConfig, "window shorter than one sample");
  if (length < win) {
    throw Error(ErrorCode::RecordingTooShort, "recording of " + std::to_string(length) +
                                                  " samples is shorter than one window of " + std::to_string(win));
  }
  std::vector<Eigen::Index> starts;
  for (Eigen::Index s = 0; s + win <= length; s += hop) starts.push_back(s);
  return starts;
}

std::vector<MultichannelRecording> partition_windows(const MultichannelRecording& rec, const WindowSpec& spec) {
  validate(rec);
  const auto starts = window_starts(rec.length(), rec.sample_rate_hz, spec);
  const auto win = static_cast<Eigen::Index>(std::llround(spec.length_s * rec.sample_rate_hz));
  std::vector<MultichannelRecording> windows;
  windows.reserve(starts.size());
  for (Eigen::Index s : starts) {
    windows.push_back(MultichannelRecording{rec.samples.middleCols(s, win), rec.channel_names, rec.sample_rate_hz,
                                            rec.start_time_s + static_cast<double>(s) / rec.sample_rate_hz});
  }
  return windows;
}

Matrix band_variances(const MultichannelRecording& window, std::span<const Band> bands) {
  validate(window);
  for (const Band& b : bands) validate(b, window.sample_rate_hz);
  if (static_cast<double>(window.length()) < window.sample_rate_hz) {
    throw Error(ErrorCode::SignalTooShort, "band variance needs at least one second of samples");
  }
  const Eigen::Index start = 0;
  kernels::BandPowerRequest req{&window.samples, std::span<const Eigen::Index>(&start, 1), window.length(),
                                window.sample_rate_hz, bands};
  return kernels::omp::band_powers(req);
}

Signal band_variance(const MultichannelRecording& window, const Band& band) {
  return band_variances(window, std::span<const Band>(&band, 1)).col(0);
}

}  // namespace vigil::dsp
