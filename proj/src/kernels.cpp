#include "vigil/kernels.hpp"

#include "vigil/error.hpp"
#include "vigil/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vigil::kernels {

namespace {

// Mirror ("symmetric") index: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} x_{n-2} ...
Eigen::Index mirror(Eigen::Index i, Eigen::Index n) {
  const Eigen::Index period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

double squared_distance(const Matrix& at, Eigen::Index i, const Matrix& bt, Eigen::Index j) {
  const double* pa = at.col(i).data();
  const double* pb = bt.col(j).data();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < at.rows(); ++k) {
    const double d = pa[k] - pb[k];
    acc += d * d;
  }
  return acc;
}

double correlate_at(const Signal& x, const Signal& kernel, Eigen::Index n) {
  const Eigen::Index half = kernel.size() / 2;
  const Eigen::Index len = x.size();
  double acc = 0.0;
  if (n - half >= 0 && n + half < len) {
    const double* px = x.data() + (n - half);
    for (Eigen::Index j = 0; j < kernel.size(); ++j) acc += kernel[j] * px[j];
  } else {
    for (Eigen::Index j = 0; j < kernel.size(); ++j) acc += kernel[j] * x[mirror(n - half + j, len)];
  }
  return acc;
}

void check_kernel(const Signal& kernel) {
  if (kernel.size() % 2 != 1) throw Error(ErrorCode::InvalidConfig, "correlation kernel must have odd length");
}

std::vector<double> window_segment(const BandPowerRequest& req, Eigen::Index window, Eigen::Index channel) {
  const Eigen::Index start = req.window_starts[static_cast<std::size_t>(window)];
  std::vector<double> seg(static_cast<std::size_t>(req.window_length));
  for (Eigen::Index t = 0; t < req.window_length; ++t) seg[static_cast<std::size_t>(t)] = (*req.samples)(channel, start + t);
  return seg;
}

void check_request(const BandPowerRequest& req) {
  if (req.samples == nullptr) throw Error(ErrorCode::EmptyInput, "band power request without samples");
  for (Eigen::Index s : req.window_starts) {
    if (s < 0 || s + req.window_length > req.samples->cols()) {
      throw Error(ErrorCode::RecordingTooShort, "window extends past the end of the recording");
    }
  }
}

}  // namespace

std::vector<double> segment_band_powers(std::span<const double> segment, double sample_rate_hz,
                                        std::span<const Band> bands) {
  const std::size_t n = segment.size();
  std::vector<double> out(bands.size(), 0.0);
  if (n < 2) return out;

  double mean = 0.0;
  for (double v : segment) mean += v;
  mean /= static_cast<double>(n);

  // Periodic Hann taper.
  std::vector<double> tapered(n);
  double taper_energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    tapered[i] = w * (segment[i] - mean);
    taper_energy += w * w;
  }

  // Zero padding to at least twice the length makes the trapezoid rule over
  // the periodogram a faithful integral of the tapered spectrum.
  const std::size_t nfft = fft::next_fast_size(2 * n);
  const auto spectrum = fft::rfft(tapered, nfft);
  const std::size_t last = nfft / 2;
  std::vector<double> psd(last + 1);
  const double scale = 1.0 / (sample_rate_hz * taper_energy);
  for (std::size_t k = 0; k <= last; ++k) {
    double p = std::norm(spectrum[k]) * scale;
    if (k != 0 && !(nfft % 2 == 0 && k == last)) p *= 2.0;
    psd[k] = p;
  }

  const double df = sample_rate_hz / static_cast<double>(nfft);
  // Linear interpolation inside grid segment [k, k+1].
  auto value_at = [&](std::size_t k, double f) {
    const double frac = f / df - static_cast<double>(k);
    return psd[k] + frac * (psd[k + 1] - psd[k]);
  };

  for (std::size_t b = 0; b < bands.size(); ++b) {
    const double lo = std::max(0.0, bands[b].low_hz);
    const double hi = std::min(sample_rate_hz / 2.0, bands[b].high_hz);
    if (!(hi > lo)) continue;
    double acc = 0.0;
    for (auto k = static_cast<std::size_t>(std::floor(lo / df)); k < last && static_cast<double>(k) * df < hi; ++k) {
      const double a = std::max(lo, static_cast<double>(k) * df);
      const double e = std::min(hi, static_cast<double>(k + 1) * df);
      if (e > a) acc += 0.5 * (e - a) * (value_at(k, a) + value_at(k, e));
    }
    out[b] = acc;
  }
  return out;
}

namespace serial {

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw Error(ErrorCode::DimensionMismatch, "distance operands differ in dimension");
  const Matrix at = a.transpose();
  const Matrix bt = b.transpose();
  Matrix d(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = squared_distance(at, i, bt, j);
  return d;
}

Matrix rbf_from_squared(const Matrix& sqdist, double gamma) {
  Matrix k(sqdist.rows(), sqdist.cols());
  for (Eigen::Index j = 0; j < sqdist.cols(); ++j)
    for (Eigen::Index i = 0; i < sqdist.rows(); ++i) k(i, j) = std::exp(-gamma * sqdist(i, j));
  return k;
}

Signal correlate_same(const Signal& x, const Signal& kernel) {
  check_kernel(kernel);
  Signal y(x.size());
  for (Eigen::Index n = 0; n < x.size(); ++n) y[n] = correlate_at(x, kernel, n);
  return y;
}

Matrix band_powers(const BandPowerRequest& req) {
  check_request(req);
  const auto windows = static_cast<Eigen::Index>(req.window_starts.size());
  const Eigen::Index channels = req.samples->rows();
  Matrix out(windows * channels, static_cast<Eigen::Index>(req.bands.size()));
  for (Eigen::Index w = 0; w < windows; ++w) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      const auto seg = window_segment(req, w, c);
      const auto powers = segment_band_powers(seg, req.sample_rate_hz, req.bands);
      for (std::size_t b = 0; b < powers.size(); ++b) out(w * channels + c, static_cast<Eigen::Index>(b)) = powers[b];
    }
  }
  return out;
}

}  // namespace serial

namespace omp {

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw Error(ErrorCode::DimensionMismatch, "distance operands differ in dimension");
  const Matrix at = a.transpose();
  const Matrix bt = b.transpose();
  Matrix d(a.rows(), b.rows());
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = b.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) d(i, j) = squared_distance(at, i, bt, j);
  return d;
}

Matrix rbf_from_squared(const Matrix& sqdist, double gamma) {
  Matrix k(sqdist.rows(), sqdist.cols());
  const Eigen::Index rows = sqdist.rows();
  const Eigen::Index cols = sqdist.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) k(i, j) = std::exp(-gamma * sqdist(i, j));
  return k;
}

Signal correlate_same(const Signal& x, const Signal& kernel) {
  check_kernel(kernel);
  Signal y(x.size());
  const Eigen::Index len = x.size();
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < len; ++n) y[n] = correlate_at(x, kernel, n);
  return y;
}

Matrix band_powers(const BandPowerRequest& req) {
  check_request(req);
  const auto windows = static_cast<Eigen::Index>(req.window_starts.size());
  const Eigen::Index channels = req.samples->rows();
  const Eigen::Index total = windows * channels;
  Matrix out(total, static_cast<Eigen::Index>(req.bands.size()));
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index row = 0; row < total; ++row) {
    const auto seg = window_segment(req, row / channels, row % channels);
    const auto powers = segment_band_powers(seg, req.sample_rate_hz, req.bands);
    for (std::size_t b = 0; b < powers.size(); ++b) out(row, static_cast<Eigen::Index>(b)) = powers[b];
  }
  return out;
}

}  // namespace omp

}  // namespace vigil::kernels
