// Independent reference implementations and signal builders for tests.
#pragma once

#include "vigil/recording.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using vigil::Matrix;
using vigil::Signal;

inline Signal white_noise(std::mt19937_64& rng, Eigen::Index n, double sigma = 1.0) {
  std::normal_distribution<double> normal(0.0, sigma);
  Signal x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = normal(rng);
  return x;
}

inline Signal sine(Eigen::Index n, double rate, double freq, double amp = 1.0, double phase = 0.0) {
  Signal x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate + phase);
  }
  return x;
}

inline vigil::MultichannelRecording single(const Signal& x, double rate, const std::string& name = "c0") {
  Matrix m(1, x.size());
  m.row(0) = x.transpose();
  return vigil::make_recording(std::move(m), {name}, rate);
}

// Blackman-windowed sinc band-pass, `taps` odd.
inline std::vector<double> fir_bandpass(int taps, double rate, double lo, double hi) {
  std::vector<double> h(static_cast<std::size_t>(taps));
  const int m = taps / 2;
  const double f1 = lo / rate, f2 = hi / rate;
  for (int i = 0; i < taps; ++i) {
    const int k = i - m;
    double ideal;
    if (k == 0) {
      ideal = 2.0 * (f2 - f1);
    } else {
      const double pk = std::numbers::pi * k;
      ideal = (std::sin(2.0 * pk * f2) - std::sin(2.0 * pk * f1)) / pk;
    }
    const double w = 0.42 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (taps - 1)) +
                     0.08 * std::cos(4.0 * std::numbers::pi * i / (taps - 1));
    h[static_cast<std::size_t>(i)] = ideal * w;
  }
  return h;
}

// Direct convolution, output aligned with the input; only samples with full
// support are returned (n - taps + 1 of them).
inline std::vector<double> fir_valid(const Signal& x, const std::vector<double>& h) {
  const std::size_t taps = h.size();
  const std::size_t n = static_cast<std::size_t>(x.size());
  std::vector<double> out;
  if (n < taps) return out;
  out.reserve(n - taps + 1);
  for (std::size_t i = 0; i + taps <= n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < taps; ++k) acc += h[k] * x[static_cast<Eigen::Index>(i + taps - 1 - k)];
    out.push_back(acc);
  }
  return out;
}

inline double sample_variance(const std::vector<double>& x) {
  long double s = 0.0L, ss = 0.0L;
  for (double v : x) s += v;
  const long double mean = s / static_cast<long double>(x.size());
  for (double v : x) ss += (v - mean) * (v - mean);
  return static_cast<double>(ss / static_cast<long double>(x.size()));
}

// Straight-line metrics in extended precision.
inline double rmse(const std::vector<double>& y, const std::vector<double>& p) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < y.size(); ++i) acc += (static_cast<long double>(y[i]) - p[i]) * (static_cast<long double>(y[i]) - p[i]);
  return static_cast<double>(std::sqrt(acc / static_cast<long double>(y.size())));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  long double sa = 0, sb = 0;
  for (std::size_t i = 0; i < n; ++i) sa += a[i], sb += b[i];
  const long double ma = sa / n, mb = sb / n;
  long double cab = 0, caa = 0, cbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cab += (a[i] - ma) * (b[i] - mb);
    caa += (a[i] - ma) * (a[i] - ma);
    cbb += (b[i] - mb) * (b[i] - mb);
  }
  return static_cast<double>(cab / std::sqrt(caa * cbb));
}

inline std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace oracle
